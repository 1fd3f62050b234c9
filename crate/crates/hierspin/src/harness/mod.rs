//! Monte Carlo experiments tying the finite system to its limits.
//!
//! Replica `r` of size `N` always uses the stream
//! `SeedSpec::new(master, r).derive(N)`, and results are reduced in replica
//! order, so every table is a deterministic function of the master seed.

mod chaos;
mod conditional;
pub mod fields;
mod jumps;
pub mod stats;

pub use chaos::{chaos_error, contraction_stat};
pub use conditional::{conditional_law_test, CondLawReport, CondLawSpec};
pub use fields::{
    covariance_a, covariance_a_n, covariance_b, covariance_b_n, covariance_check,
    generator_consistency, hitting_time_test, CovRow, CovarianceReport, GeneratorReport,
    GeneratorTest, HittingReport,
};
pub use jumps::{supercritical_jump_test, DetectedJump, JumpReport, JumpSpec};
pub use stats::{StatRow, StatTable};

use crate::error::{Error, Result};
use crate::model::{HierarchyShape, ModelParams};
use crate::rng::SeedSpec;
use crate::sim::TimescaleSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub ns: Vec<usize>,
    pub replicas: usize,
    pub timescale: TimescaleSpec,
    pub master_seed: u64,
    pub statistic: String,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.ns.is_empty() || self.ns.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("sizes must be non-empty and strictly increasing".into()));
        }
        if self.replicas == 0 {
            return Err(Error::Config("need at least one replica".into()));
        }
        self.timescale.validate()
    }
}

/// Same parameters with block size `n`.
pub fn with_block_size(params: &ModelParams, n: usize) -> Result<ModelParams> {
    let mut p = params.clone();
    p.shape = HierarchyShape::new(params.shape.levels, n)?;
    p.validate()?;
    Ok(p)
}

pub(crate) fn replica_seed(master: u64, n: usize, r: usize) -> SeedSpec {
    SeedSpec::new(master, r as u64).derive(n as u64)
}

/// Output grid refined `factor` times, in macroscopic units.
pub(crate) fn refined_grid(ts: &TimescaleSpec, factor: usize) -> Vec<f64> {
    let g = &ts.output_grid;
    if g.len() < 2 {
        return g.clone();
    }
    let mut out = Vec::with_capacity((g.len() - 1) * factor + 1);
    for w in g.windows(2) {
        for i in 0..factor {
            out.push(w[0] + (w[1] - w[0]) * i as f64 / factor as f64);
        }
    }
    out.push(*g.last().unwrap());
    out
}
