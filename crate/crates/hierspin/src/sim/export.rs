//! CSV views of simulated paths and snapshots.

use crate::model::SystemState;
use crate::sim::ObservablePath;
use crate::table::{num, Table};

/// One row per block per output time: `t,level,block_index,m,x`.
pub fn path_table(path: &ObservablePath) -> Table {
    let mut t = Table::new("path", &["t", "level", "block_index", "m", "x"]);
    for (time, obs) in path.times.iter().zip(&path.observables) {
        for (d, lvl) in obs.levels.iter().enumerate() {
            for (b, (m, x)) in lvl.m.iter().zip(&lvl.x).enumerate() {
                t.push([num(*time), (d + 1).to_string(), b.to_string(), num(*m), num(*x)]);
            }
        }
    }
    t
}

/// `site,spin,x`.
pub fn snapshot_table(state: &SystemState) -> Table {
    let mut t = Table::new("snapshot", &["site", "spin", "x"]);
    for (s, (spin, x)) in state.spins.iter().zip(&state.fields).enumerate() {
        t.push([s.to_string(), spin.to_string(), num(*x)]);
    }
    t
}
