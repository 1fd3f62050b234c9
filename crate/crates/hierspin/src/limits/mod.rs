//! Limit objects of the spin/field system: invariant curves and their folds,
//! deterministic ODE limits, one-dimensional limit diffusions with jumps,
//! self-consistent magnetization levels and the renormalization recursion.

pub mod curve;
pub mod fixed;
pub mod hitting;
pub mod measure;
pub mod ode;
pub mod renorm;
pub mod sde;

pub use curve::{
    critical_points, g, g_shifted, invariant_curve, jump_target, BranchLabel, CriticalData,
};
pub use fixed::{
    averaging_fixed_point, averaging_fixed_point_limit, equilibrium_level, equilibrium_profile,
    order_n2_law, LawMode,
};
pub use hitting::{hitting_time_cdf, hitting_time_density};
pub use measure::{normal_cdf, GaussianMeasure};
pub use ode::{meanfield_ode, order1_profile_ode, GridProfile, OdePath, ProfilePath};
pub use renorm::{renormalization_map, RenormResult};
pub use sde::{
    limit_sde_hier_order_n, limit_sde_meanfield, ArrivalRule, LimitPath, Regime,
};

use crate::table::{num, Table};

/// `x,m,branch` tabulation of the stable (and middle) branches over `xs`.
pub fn curve_table(beta: f64, offset: f64, xs: &[f64]) -> Table {
    let mut t = Table::new("curve", &["x", "m", "branch"]);
    for &x in xs {
        for b in [BranchLabel::Lower, BranchLabel::Middle, BranchLabel::Upper] {
            if beta <= 1.0 && b != BranchLabel::Upper {
                continue;
            }
            if let Ok(m) = invariant_curve(beta, x, offset, b) {
                let label = if beta <= 1.0 { curve::branch_of(beta, m) } else { b };
                t.push(vec![num(x), num(m), label.to_string()]);
            }
        }
    }
    t
}

/// `t,m,x,branch,jump_flag`.
pub fn path_table(p: &LimitPath) -> Table {
    let mut t = Table::new("limit_path", &["t", "m", "x", "branch", "jump_flag"]);
    for i in 0..p.t.len() {
        t.push(vec![
            num(p.t[i]),
            num(p.m[i]),
            num(p.x[i]),
            p.branch[i].to_string(),
            (p.jump[i] as u8).to_string(),
        ]);
    }
    t
}
