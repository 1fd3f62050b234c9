//! Branch switches of the supercritical mean-field system.

use crate::error::{Error, Result};
use crate::harness::replica_seed;
use crate::harness::stats::{ks_critical_1pct, ks_one_sample};
use crate::limits::curve::{invariant_curve, BranchLabel, CriticalData};
use crate::limits::hitting::hitting_time_cdf;
use crate::model::{FieldInit, ModelParams};
use crate::sim::{sample_initial_state, Simulation};

#[derive(Debug, Clone, PartialEq)]
pub struct JumpSpec {
    pub n: usize,
    pub beta: f64,
    pub sigma: f64,
    /// Macroscopic (`N`) horizon per replica.
    pub horizon: f64,
    pub replicas: usize,
    /// Microscopic recording step.
    pub record_dt: f64,
    /// Detection window as a fraction of the median inter-jump time.
    pub window_factor: f64,
    pub master_seed: u64,
}

impl JumpSpec {
    pub fn new(n: usize, beta: f64, sigma: f64, horizon: f64, replicas: usize, master_seed: u64) -> Self {
        Self {
            n,
            beta,
            sigma,
            horizon,
            replicas,
            record_dt: 0.25,
            window_factor: 0.01,
            master_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectedJump {
    pub replica: usize,
    /// Macroscopic time at which the field reached the fold.
    pub time: f64,
    pub from: BranchLabel,
    pub departure: f64,
    pub arrival: f64,
    /// `departure - (+-m_a)`.
    pub departure_error: f64,
    /// `arrival - (+-m_b)`.
    pub arrival_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpReport {
    pub critical: CriticalData,
    pub jumps: Vec<DetectedJump>,
    pub max_departure_error: f64,
    pub max_arrival_error: f64,
    pub mean_departure_error: f64,
    /// Completed inter-jump intervals used for the KS test.
    pub intervals: usize,
    pub ks: f64,
    pub ks_critical: f64,
}

/// Finds jumps in a recorded `(t, m, x)` path, times in macroscopic units.
///
/// A jump off the upper branch is declared at the first index `i` with
/// `m[i + w] - m[i] < -m_a` after which `m` stays negative for another `w`
/// samples. The jump time is the first time since the previous jump at which
/// `x` was at or below the fold, the departure is `m` at that time and the
/// arrival `m[i + 2w]`. Mirrored for the lower branch.
pub(crate) fn detect_jumps(
    crit: &CriticalData,
    t: &[f64],
    m: &[f64],
    x: &[f64],
    w: usize,
) -> Vec<(f64, BranchLabel, f64, f64)> {
    let fold = crit.fold_x();
    let mut out = Vec::new();
    if m.is_empty() || w == 0 {
        return out;
    }
    let mut side = if m[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut since = 0;
    let mut i = 0;
    while i + 2 * w < m.len() {
        let drop = side * (m[i + w] - m[i]);
        if drop < -crit.m_a && (i + w..=i + 2 * w).all(|j| side * m[j] < 0.0) {
            let hit = (since..=i + w)
                .find(|&j| side * x[j] <= fold)
                .unwrap_or(i);
            let from = if side > 0.0 { BranchLabel::Upper } else { BranchLabel::Lower };
            out.push((t[hit], from, m[hit], m[i + 2 * w]));
            side = -side;
            i += 2 * w;
            since = i;
            continue;
        }
        i += 1;
    }
    out
}

/// Runs `replicas` mean-field systems from the upper branch and checks the
/// geometry and timing of their branch switches.
///
/// Inter-jump intervals are compared with the first-passage law of the top
/// Brownian field between the two folds. The interval from time 0 and the
/// censored last one are excluded; each completed interval starting at `t_j`
/// is transformed by `F(u) / F(horizon - t_j)` before the KS test.
pub fn supercritical_jump_test(spec: &JumpSpec) -> Result<JumpReport> {
    if !(spec.beta > 1.0) {
        return Err(Error::Domain(format!("jumps need beta > 1, got {}", spec.beta)));
    }
    if !(spec.sigma > 0.0) || !(spec.horizon > 0.0) || !(spec.record_dt > 0.0) {
        return Err(Error::Config("need sigma, horizon and record_dt positive".into()));
    }
    let crit = CriticalData::new(spec.beta)?;
    let fold = crit.fold_x();
    let scale = spec.n as f64;
    let gap = -2.0 * fold;
    let t_med = (gap / (0.6745 * spec.sigma)).powi(2);
    let w = ((spec.window_factor * t_med * scale / spec.record_dt).round() as usize).max(1);

    let m0 = invariant_curve(spec.beta, 0.0, 0.0, BranchLabel::Upper)?;
    let params = ModelParams::mean_field(spec.n, spec.beta, 1.0, spec.sigma)?
        .with_spin_up_prob((1.0 + m0) / 2.0)
        .with_field_init(FieldInit {
            mean: 0.0,
            std: spec.sigma,
            level: 0,
        });
    let steps = (spec.horizon * scale / spec.record_dt).ceil() as usize;
    let cdf = |u: f64| hitting_time_cdf(fold, -fold, spec.sigma, u).unwrap_or(1.0);

    let mut jumps = Vec::new();
    let mut pits = Vec::new();
    for r in 0..spec.replicas {
        let seed = replica_seed(spec.master_seed, spec.n, r);
        let state = sample_initial_state(&params, seed);
        let mut sim = Simulation::new(&params, &state, seed.derive(1))?;
        let (mut ts, mut ms, mut xs) = (
            Vec::with_capacity(steps + 1),
            Vec::with_capacity(steps + 1),
            Vec::with_capacity(steps + 1),
        );
        for s in 0..=steps {
            let tm = s as f64 * spec.record_dt;
            sim.run_to(tm);
            ts.push(tm / scale);
            ms.push(sim.magnetization(1, 0));
            xs.push(sim.field(1, 0));
        }
        let found = detect_jumps(&crit, &ts, &ms, &xs, w);
        for pair in found.windows(2) {
            let (t0, t1) = (pair[0].0, pair[1].0);
            let rest = cdf(spec.horizon - t0);
            if rest > 0.0 {
                pits.push(cdf(t1 - t0) / rest);
            }
        }
        for (time, from, departure, arrival) in found {
            let sign = if from == BranchLabel::Upper { 1.0 } else { -1.0 };
            jumps.push(DetectedJump {
                replica: r,
                time,
                from,
                departure,
                arrival,
                departure_error: departure - sign * crit.m_a,
                arrival_error: arrival - sign * crit.m_b,
            });
        }
    }
    let max_departure_error = jumps.iter().map(|j| j.departure_error.abs()).fold(0.0, f64::max);
    let max_arrival_error = jumps.iter().map(|j| j.arrival_error.abs()).fold(0.0, f64::max);
    let mean_departure_error = if jumps.is_empty() {
        f64::NAN
    } else {
        jumps.iter().map(|j| j.departure_error.abs()).sum::<f64>() / jumps.len() as f64
    };
    let intervals = pits.len();
    let ks = if intervals > 0 {
        ks_one_sample(&pits, |u| u.clamp(0.0, 1.0))
    } else {
        f64::NAN
    };
    Ok(JumpReport {
        critical: crit,
        jumps,
        max_departure_error,
        max_arrival_error,
        mean_departure_error,
        intervals,
        ks,
        ks_critical: ks_critical_1pct(intervals.max(1)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_a_synthetic_switch() {
        let crit = CriticalData::new(2.0).unwrap();
        let fold = crit.fold_x();
        let t: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let m: Vec<f64> = (0..100)
            .map(|i| if i < 50 { 0.72 } else if i < 53 { 0.72 - 0.5 * (i - 49) as f64 } else { -0.98 })
            .collect();
        let x: Vec<f64> = (0..100).map(|i| if i < 45 { 0.0 } else { fold - 0.01 }).collect();
        let j = detect_jumps(&crit, &t, &m, &x, 5);
        assert_eq!(j.len(), 1);
        assert_eq!(j[0].1, BranchLabel::Upper);
        assert_eq!(j[0].0, 45.0);
        assert!((j[0].2 - 0.72).abs() < 1e-12);
        assert!((j[0].3 + 0.98).abs() < 1e-12);
    }

    #[test]
    fn flat_path_has_no_jumps() {
        let crit = CriticalData::new(2.0).unwrap();
        let t: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let m = vec![0.9; 50];
        assert!(detect_jumps(&crit, &t, &m, &vec![0.0; 50], 3).is_empty());
    }

    #[test]
    fn rejects_subcritical() {
        assert!(supercritical_jump_test(&JumpSpec::new(100, 0.5, 1.0, 1.0, 1, 0)).is_err());
    }
}
