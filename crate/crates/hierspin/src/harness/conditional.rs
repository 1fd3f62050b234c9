//! Conditional law of the slow-scale magnetization given the top field.

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::harness::replica_seed;
use crate::harness::stats::{correlation, mean_stderr, partial_correlation};
use crate::limits::fixed::{order_n2_law, LawMode};
use crate::model::ModelParams;
use crate::rng::SeedSpec;
use crate::sim::{FieldSystem, Simulation};

#[derive(Debug, Clone, PartialEq)]
pub struct CondLawSpec {
    pub n: usize,
    /// Slow (`N^2`) time.
    pub t: f64,
    pub x_top: f64,
    /// Window `window_const * N^-window_fraction`.
    pub window_fraction: f64,
    pub window_const: f64,
    /// Replicas simulated (not all are selected).
    pub replicas: usize,
    /// Microscopic time the spins are run before `t`.
    pub burn_in: f64,
    pub master_seed: u64,
}

impl CondLawSpec {
    pub fn new(n: usize, t: f64, x_top: f64, replicas: usize, master_seed: u64) -> Self {
        Self {
            n,
            t,
            x_top,
            window_fraction: 0.25,
            window_const: 1.0,
            replicas,
            burn_in: 15.0,
            master_seed,
        }
    }

    pub fn window(&self) -> f64 {
        self.window_const * (self.n as f64).powf(-self.window_fraction)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CondLawReport {
    pub n: usize,
    pub selected: usize,
    pub mean_m: f64,
    pub stderr_m: f64,
    pub oracle: f64,
    /// Mean absolute deviation of the selected `M^N` from the oracle.
    pub mad: f64,
    /// Correlation of neighbouring block magnetizations, pooled.
    pub corr_raw: f64,
    /// Same, after removing the linear dependence on the realised top field.
    pub corr_partial: f64,
    /// Fisher z-score of `corr_partial`.
    pub corr_z: f64,
    pub pairs: usize,
}

/// Samples `M^N(t)` conditioned on `|X^N(t) - X| <= window` for a two-level
/// system.
///
/// The top field `burn_in` before `t` is drawn from its exact law restricted
/// to the points that can still reach the window (six standard deviations
/// of margin), the deviations from their exact law, and spins i.i.d.; the
/// full dynamics then runs for `burn_in`. Selected replicas report `M^N` and
/// the pairs `(m_{2i}, m_{2i+1})` of level-1 block magnetizations.
pub fn conditional_law_test(params: &ModelParams, spec: &CondLawSpec) -> Result<CondLawReport> {
    let shape = params.shape;
    if shape.levels != 2 || params.is_zero_temperature() {
        return Err(Error::Config("conditional law needs a finite-temperature two-level system".into()));
    }
    if !(spec.t > 0.0) || !(spec.burn_in >= 0.0) || !(spec.window() > 0.0) {
        return Err(Error::Config("need t > 0, burn_in >= 0 and a positive window".into()));
    }
    let p = crate::harness::with_block_size(params, spec.n)?;
    let n = spec.n as f64;
    let scale = n * n;
    let (b1, b2) = (p.level_weights()[0], p.level_weights()[1]);
    let oracle = order_n2_law(b1, b2, p.sigma, p.alpha[1], spec.x_top, spec.t, LawMode::Conditional)?;

    let tau = spec.t * scale;
    let start = (tau - spec.burn_in).max(0.0);
    let init = p.field_init;
    let top_var0 = init.std * init.std / n.powi((2 - init.level.min(2)) as i32);
    let prior_var = top_var0 + p.sigma * p.sigma * start / scale;
    let prior = Normal::new(init.mean, prior_var.sqrt().max(1e-300))
        .map_err(|e| Error::Config(e.to_string()))?;
    let eps = spec.window();
    let delta = 6.0 * p.sigma * ((tau - start) / scale).sqrt();
    let (lo, hi) = (
        prior.cdf(spec.x_top - eps - delta),
        prior.cdf(spec.x_top + eps + delta),
    );
    if !(hi > lo) {
        return Err(Error::Domain("window is unreachable under the prior".into()));
    }

    let blocks = spec.n;
    let mut ms = Vec::new();
    let (mut a, mut b, mut z) = (Vec::new(), Vec::new(), Vec::new());
    for r in 0..spec.replicas {
        let mut rng = replica_seed(spec.master_seed, spec.n, r).rng();
        let u = lo + (hi - lo) * rng.random::<f64>();
        let x0 = prior.inverse_cdf(u);
        let fields = FieldSystem::sampled(&p, init, x0, start, &mut rng)?;
        let spins: Vec<i8> = (0..spec.n * spec.n)
            .map(|_| if rng.random::<f64>() < p.spin_up_prob { 1 } else { -1 })
            .collect();
        let seed = SeedSpec::new(rng.random(), r as u64);
        let mut sim = Simulation::from_parts(&p, spins, fields, start, seed)?;
        sim.run_to(tau);
        let x = sim.field(2, 0);
        if (x - spec.x_top).abs() > eps {
            continue;
        }
        ms.push(sim.magnetization(2, 0));
        for i in 0..blocks / 2 {
            a.push(sim.magnetization(1, 2 * i));
            b.push(sim.magnetization(1, 2 * i + 1));
            z.push(x);
        }
    }
    if ms.len() < 2 {
        return Err(Error::Config(format!(
            "only {} of {} replicas fell in the window",
            ms.len(),
            spec.replicas
        )));
    }
    let (mean_m, stderr_m) = mean_stderr(&ms);
    let mad = ms.iter().map(|m| (m - oracle).abs()).sum::<f64>() / ms.len() as f64;
    let corr_raw = correlation(&a, &b);
    let corr_partial = partial_correlation(&a, &b, &z);
    let pairs = a.len();
    let corr_z = corr_partial.atanh() * (pairs as f64 - 4.0).max(1.0).sqrt();
    Ok(CondLawReport {
        n: spec.n,
        selected: ms.len(),
        mean_m,
        stderr_m,
        oracle,
        mad,
        corr_raw,
        corr_partial,
        corr_z,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::HierarchyShape;

    fn params() -> ModelParams {
        ModelParams::new(HierarchyShape::new(2, 20).unwrap(), vec![0.3, 0.3], vec![1.0, 1.0], 1.0).unwrap()
    }

    #[test]
    fn symmetric_window_centres_on_zero() {
        let mut spec = CondLawSpec::new(20, 1.0, 0.0, 60, 3);
        spec.burn_in = 5.0;
        let rep = conditional_law_test(&params(), &spec).unwrap();
        assert!(rep.oracle.abs() < 1e-12);
        assert!(rep.mean_m.abs() < 3.0 * rep.stderr_m + 0.02, "{rep:?}");
    }

    #[test]
    fn rejects_wrong_depth() {
        let p = ModelParams::mean_field(20, 0.3, 1.0, 1.0).unwrap();
        assert!(conditional_law_test(&p, &CondLawSpec::new(20, 1.0, 0.0, 5, 1)).is_err());
    }
}
