//! Checks on the field subsystem and the generator.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::harness::stats::{ks_critical_1pct, mean_stderr, require};
use crate::harness::{replica_seed, StatTable};
use crate::limits::hitting::hitting_time_cdf;
use crate::model::{local_flip_argument, flip_rate, HierarchyShape, ModelParams, SystemState};
use crate::rng::SeedSpec;
use crate::sim::{FieldSystem, Simulation};

/// `A(t) = sigma^2 (1 + 2 alpha2 t) / (2 alpha2)`.
pub fn covariance_a(sigma: f64, alpha2: f64, t: f64) -> f64 {
    sigma * sigma * (1.0 + 2.0 * alpha2 * t) / (2.0 * alpha2)
}

/// `B(t) = sigma^2 t`.
pub fn covariance_b(sigma: f64, t: f64) -> f64 {
    sigma * sigma * t
}

/// `A_N(s, t)`, `s <= t`.
pub fn covariance_a_n(sigma: f64, alpha2: f64, n: usize, s: f64, t: f64) -> f64 {
    let s2 = sigma * sigma;
    let e = (-alpha2 * n as f64 * (t - s)).exp();
    s2 / (2.0 * alpha2 * n as f64) * (1.0 - e) + s2 / (2.0 * alpha2) * e + s2 * s
}

/// `B_N(s, t) = A_N(s, t) - sigma^2 / (2 alpha2) e^{-alpha2 N (t - s)}`.
pub fn covariance_b_n(sigma: f64, alpha2: f64, n: usize, s: f64, t: f64) -> f64 {
    covariance_a_n(sigma, alpha2, n, s, t)
        - sigma * sigma / (2.0 * alpha2) * (-alpha2 * n as f64 * (t - s)).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovRow {
    pub name: String,
    pub s: f64,
    pub t: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub theory: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceReport {
    pub n: usize,
    pub replicas: usize,
    pub rows: Vec<CovRow>,
}

impl CovarianceReport {
    pub fn row(&self, name: &str, s: f64, t: f64) -> Option<&CovRow> {
        self.rows.iter().find(|r| r.name == name && r.s == s && r.t == t)
    }

    pub fn to_stat_table(&self) -> StatTable {
        let mut t = StatTable::default();
        for r in &self.rows {
            t.rows.push(crate::harness::StatRow {
                n: self.n,
                statistic: format!("{}({},{})", r.name, r.s, r.t),
                estimate: r.estimate,
                stderr: r.stderr,
                replicas: self.replicas,
            });
        }
        t
    }
}

/// Second moments of two level-1 block fields on the slow (`N^2`) scale,
/// starting from blocks i.i.d. `N(0, sigma^2 / (2 alpha2))`, compared with
/// `A`, `B` (diagonal, `s = t`) and `A_N`, `B_N` (`s < t`).
pub fn covariance_check(
    sigma: f64,
    alpha2: f64,
    n: usize,
    s_grid: &[f64],
    t_grid: &[f64],
    replicas: usize,
    master_seed: u64,
) -> Result<CovarianceReport> {
    if !(alpha2 > 0.0) || n < 2 {
        return Err(Error::Config("need alpha2 > 0 and N >= 2".into()));
    }
    require(replicas, 2, "covariance check")?;
    let shape = HierarchyShape::new(2, n)?;
    let params = ModelParams::new(shape, vec![0.0, 0.0], vec![1.0, alpha2], sigma)?;
    let mut times: Vec<f64> = s_grid.iter().chain(t_grid).copied().collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    if times.iter().any(|&t| t < 0.0) {
        return Err(Error::Config("negative time".into()));
    }
    let scale = (n * n) as f64;
    let block_sd = sigma / (2.0 * alpha2).sqrt();
    // x0[r][i], x1[r][i] at times[i]
    let mut x0 = vec![vec![0.0; times.len()]; replicas];
    let mut x1 = vec![vec![0.0; times.len()]; replicas];
    for r in 0..replicas {
        let mut rng = replica_seed(master_seed, n, r).rng();
        let mut f0 = Vec::with_capacity(n * n);
        for _ in 0..n {
            let v = block_sd * rng.sample::<f64, _>(StandardNormal);
            f0.extend(std::iter::repeat_n(v, n));
        }
        let mut fs = FieldSystem::new(&params, &f0, 0.0)?;
        for (i, &t) in times.iter().enumerate() {
            x0[r][i] = fs.block_field(1, 0, t * scale, &mut rng);
            x1[r][i] = fs.block_field(1, 1, t * scale, &mut rng);
        }
    }
    let idx = |t: f64| times.iter().position(|&v| v == t).unwrap();
    let mut rows = Vec::new();
    let mut add = |name: &str, s: f64, t: f64, prods: Vec<f64>, theory: f64| {
        let (estimate, stderr) = mean_stderr(&prods);
        rows.push(CovRow {
            name: name.to_string(),
            s,
            t,
            estimate,
            stderr,
            theory,
            z: (estimate - theory) / stderr,
        });
    };
    for &t in t_grid {
        let j = idx(t);
        add("A", t, t, (0..replicas).map(|r| x0[r][j] * x0[r][j]).collect(), covariance_a(sigma, alpha2, t));
        add("B", t, t, (0..replicas).map(|r| x0[r][j] * x1[r][j]).collect(), covariance_b(sigma, t));
        for &s in s_grid {
            if s >= t {
                continue;
            }
            let i = idx(s);
            add(
                "A_N",
                s,
                t,
                (0..replicas).map(|r| x0[r][i] * x0[r][j]).collect(),
                covariance_a_n(sigma, alpha2, n, s, t),
            );
            add(
                "B_N",
                s,
                t,
                (0..replicas).map(|r| x0[r][i] * x1[r][j]).collect(),
                covariance_b_n(sigma, alpha2, n, s, t),
            );
        }
    }
    Ok(CovarianceReport { n, replicas, rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HittingReport {
    pub ks: f64,
    pub ks_critical: f64,
    /// Hit times (censored ones excluded).
    pub times: Vec<f64>,
    pub replicas: usize,
    pub horizon: f64,
    /// Empirical `P(T <= horizon)` with its standard error.
    pub p_hat: f64,
    pub p_hat_stderr: f64,
}

/// First passage of the mean-field top field through `level`, on the
/// accelerated scale where it is Brownian with coefficient `sigma`.
///
/// The field is sampled exactly every `dt` (macroscopic); crossings between
/// samples are detected with the Brownian-bridge probability and placed at
/// the step midpoint.
#[allow(clippy::too_many_arguments)]
pub fn hitting_time_test(
    sigma: f64,
    n: usize,
    level: f64,
    x0: f64,
    replicas: usize,
    horizon: f64,
    dt: f64,
    master_seed: u64,
) -> Result<HittingReport> {
    if !(sigma > 0.0) || !(horizon > 0.0) || !(dt > 0.0) {
        return Err(Error::Config("need sigma, horizon and dt positive".into()));
    }
    require(replicas, 1, "hitting test")?;
    let params = ModelParams::mean_field(n, 0.0, 1.0, sigma)?;
    let scale = n as f64;
    let mut fs = FieldSystem::new(&params, &vec![x0; n], 0.0)?;
    let steps = (horizon / dt).ceil() as usize;
    let h = horizon / steps as f64;
    let var_step = sigma * sigma * h;
    let mut times = Vec::new();
    for r in 0..replicas {
        let mut rng = replica_seed(master_seed, n, r).rng();
        if x0 == level {
            times.push(0.0);
            continue;
        }
        fs.set_top(x0, 0.0);
        let side = (x0 - level).signum();
        let mut prev = x0;
        for i in 1..=steps {
            let t = i as f64 * h;
            let x = fs.top(t * scale, &mut rng);
            let crossed = if (x - level) * side <= 0.0 {
                true
            } else {
                let p = (-2.0 * (prev - level) * (x - level) / var_step).exp();
                rng.random::<f64>() < p
            };
            if crossed {
                times.push(t - 0.5 * h);
                break;
            }
            prev = x;
        }
    }
    // KS on [0, horizon] with censored replicas counted as beyond the horizon
    let mut sorted = times.clone();
    sorted.sort_by(f64::total_cmp);
    let nr = replicas as f64;
    let cdf = |t: f64| hitting_time_cdf(x0, level, sigma, t).unwrap_or(1.0);
    let mut ks: f64 = 0.0;
    for (i, &t) in sorted.iter().enumerate() {
        let f = cdf(t);
        ks = ks.max((f - i as f64 / nr).abs()).max(((i + 1) as f64 / nr - f).abs());
    }
    ks = ks.max((cdf(horizon) - sorted.len() as f64 / nr).abs());
    let p_hat = sorted.len() as f64 / nr;
    Ok(HittingReport {
        ks,
        ks_critical: ks_critical_1pct(replicas),
        times,
        replicas,
        horizon,
        p_hat,
        p_hat_stderr: (p_hat * (1.0 - p_hat) / nr).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorTest {
    Constant,
    /// Magnetization of block `block` at level `level >= 1`.
    Magnetization { level: usize, block: usize },
    /// Square of the field average of block `block` at level `level`
    /// (`level = 0` is a single site).
    FieldSquare { level: usize, block: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorReport {
    pub analytic: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub z: f64,
}

fn block_mean(v: &[f64], len: usize, b: usize) -> f64 {
    v[b * len..(b + 1) * len].iter().sum::<f64>() / len as f64
}

fn test_value(test: GeneratorTest, shape: &HierarchyShape, spins: &[i8], fields: &[f64]) -> f64 {
    match test {
        GeneratorTest::Constant => 1.0,
        GeneratorTest::Magnetization { level, block } => {
            let len = shape.block_len(level);
            spins[block * len..(block + 1) * len].iter().map(|&s| s as f64).sum::<f64>() / len as f64
        }
        GeneratorTest::FieldSquare { level, block } => {
            let x = block_mean(fields, shape.block_len(level), block);
            x * x
        }
    }
}

/// Analytic generator applied to `test` at `state`.
pub fn generator_value(params: &ModelParams, state: &SystemState, test: GeneratorTest) -> Result<f64> {
    let shape = params.shape;
    state.check(&shape)?;
    match test {
        GeneratorTest::Constant => Ok(0.0),
        GeneratorTest::Magnetization { level, block } => {
            let len = shape.block_len(level);
            let zt = params.is_zero_temperature();
            let mut acc = 0.0;
            for i in block * len..(block + 1) * len {
                let arg = local_flip_argument(state, params, i)?;
                let s = state.spins[i];
                acc += flip_rate(s, arg, zt) * (-2.0 * s as f64) / len as f64;
            }
            Ok(acc)
        }
        GeneratorTest::FieldSquare { level, block } => {
            let n = shape.block_size as f64;
            let len = shape.block_len(level);
            let x = block_mean(&state.fields, len, block);
            let mut drift = 0.0;
            for l in level + 1..=shape.levels {
                let c = params.alpha[l - 1] / n.powi(l as i32 - 1);
                let plen = shape.block_len(l);
                let parent = block * len / plen;
                drift -= c * (x - block_mean(&state.fields, plen, parent));
            }
            let s2 = params.sigma * params.sigma / n.powi(level as i32);
            Ok(2.0 * x * drift + s2)
        }
    }
}

/// Compares `(E f(state_dt) - f(state)) / dt` over `replicas` runs from
/// `state` with the analytic generator.
pub fn generator_consistency(
    params: &ModelParams,
    state: &SystemState,
    test: GeneratorTest,
    dt: f64,
    replicas: usize,
    master_seed: u64,
) -> Result<GeneratorReport> {
    if !(dt > 0.0) {
        return Err(Error::Config("dt must be positive".into()));
    }
    require(replicas, 2, "generator test")?;
    let analytic = generator_value(params, state, test)?;
    let shape = params.shape;
    let f0 = test_value(test, &shape, &state.spins, &state.fields);
    let t_end = state.time + dt;
    let mut incs = Vec::with_capacity(replicas);
    for r in 0..replicas {
        let seed = SeedSpec::new(master_seed, r as u64);
        let mut sim = Simulation::new(params, state, seed)?;
        sim.run_to(t_end);
        let f1 = match test {
            GeneratorTest::FieldSquare { level, block } => {
                let x = if level == 0 {
                    sim.state().fields[block]
                } else {
                    sim.field(level, block)
                };
                x * x
            }
            _ => test_value(test, &shape, sim.spins(), &[]),
        };
        incs.push((f1 - f0) / dt);
    }
    let (empirical, stderr) = mean_stderr(&incs);
    let z = if stderr > 0.0 {
        (empirical - analytic) / stderr
    } else if (empirical - analytic).abs() < 1e-12 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(GeneratorReport {
        analytic,
        empirical,
        stderr,
        z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert!((covariance_a(1.0, 1.0, 1.0) - 1.5).abs() < 1e-15);
        assert!((covariance_b(1.0, 1.0) - 1.0).abs() < 1e-15);
        for &t in &[0.0, 0.5, 2.0] {
            assert!((covariance_a_n(1.3, 0.7, 50, t, t) - covariance_a(1.3, 0.7, t)).abs() < 1e-12);
            assert!((covariance_b_n(1.3, 0.7, 50, t, t) - covariance_b(1.3, t)).abs() < 1e-12);
        }
        let (a2, n) = (2.0, 100);
        let s = 0.3;
        let t = s + 30.0 / (a2 * n as f64);
        let gap = covariance_a_n(1.0, a2, n, s, t) - covariance_b_n(1.0, a2, n, s, t);
        assert!(gap < 1e-12 && gap > 0.0);
    }
}
