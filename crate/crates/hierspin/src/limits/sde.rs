//! One-dimensional limit diffusions, simulated in field space and mapped
//! through the invariant curve.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::limits::curve::{branch_of, curve_abscissa, invariant_curve, BranchLabel, CriticalData};
use crate::rng::SeedSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Subcritical,
    Supercritical,
}

/// Where a supercritical path lands after leaving a fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ArrivalRule {
    /// On the opposite branch at `m_b` (sign flipped for the lower fold).
    #[default]
    OppositeBranch,
    /// Literal increment `-(m_b + m_a)` at `m_a` (mirrored at `-m_a`): lands
    /// at `-m_b` on the same side, with the field moved to match.
    LiteralIncrement,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpRecord {
    /// Crossing time, linearly interpolated between grid points.
    pub time: f64,
    pub departure: f64,
    pub arrival: f64,
}

#[derive(Debug, Clone, Default)]
pub struct LimitPath {
    pub t: Vec<f64>,
    pub m: Vec<f64>,
    pub x: Vec<f64>,
    pub branch: Vec<BranchLabel>,
    pub jump: Vec<bool>,
    pub jumps: Vec<JumpRecord>,
}

impl LimitPath {
    fn push(&mut self, t: f64, m: f64, x: f64, b: BranchLabel, jump: bool) {
        self.t.push(t);
        self.m.push(m);
        self.x.push(x);
        self.branch.push(b);
        self.jump.push(jump);
    }
}

fn grid_steps(horizon: f64, dt: f64) -> Result<(usize, f64)> {
    if !(horizon > 0.0) || !(dt > 0.0) || !horizon.is_finite() {
        return Err(Error::Config(format!("bad horizon {horizon} or step {dt}")));
    }
    let n = (horizon / dt).ceil() as usize;
    Ok((n, horizon / n as f64))
}

/// Mean-field limit: `x` is a Brownian motion with coefficient `sigma`,
/// `m(t)` the branch value at `x(t)`.
#[allow(clippy::too_many_arguments)]
pub fn limit_sde_meanfield(
    beta: f64,
    sigma: f64,
    m0: f64,
    horizon: f64,
    dt: f64,
    seed: SeedSpec,
    regime: Regime,
    rule: ArrivalRule,
) -> Result<LimitPath> {
    let (n, h) = grid_steps(horizon, dt)?;
    let mut rng = seed.rng();
    let sd = sigma * h.sqrt();
    let incs: Vec<f64> = (0..n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect();
    meanfield_from_increments(beta, m0, &incs, h, regime, rule)
}

/// Same as [`limit_sde_meanfield`] but driven by given field increments.
pub fn meanfield_from_increments(
    beta: f64,
    m0: f64,
    incs: &[f64],
    h: f64,
    regime: Regime,
    rule: ArrivalRule,
) -> Result<LimitPath> {
    if !(m0 > -1.0 && m0 < 1.0) {
        return Err(Error::Domain(format!("m0 = {m0} must lie in (-1, 1)")));
    }
    match regime {
        Regime::Subcritical => {
            if !(beta >= 0.0 && beta < 1.0) {
                return Err(Error::Domain(format!("subcritical regime needs beta < 1, got {beta}")));
            }
            if beta == 0.0 && m0 != 0.0 {
                return Err(Error::Domain("beta = 0 forces m = 0".into()));
            }
            let mut x = if beta == 0.0 { 0.0 } else { curve_abscissa(beta, m0, 0.0) };
            let mut p = LimitPath::default();
            p.push(0.0, m0, x, branch_of(beta, m0), false);
            for (i, dx) in incs.iter().enumerate() {
                x += dx;
                let m = invariant_curve(beta, x, 0.0, BranchLabel::Upper)?;
                p.push((i + 1) as f64 * h, m, x, branch_of(beta, m), false);
            }
            Ok(p)
        }
        Regime::Supercritical => {
            let cd = CriticalData::new(beta).map_err(|_| {
                Error::Domain(format!("supercritical regime needs beta > 1, got {beta}"))
            })?;
            if m0.abs() <= cd.m_a {
                return Err(Error::Domain(format!(
                    "need |m0| > m_a = {:.6}, got {m0}",
                    cd.m_a
                )));
            }
            let fold = cd.fold_x();
            let mut branch = if m0 > 0.0 { BranchLabel::Upper } else { BranchLabel::Lower };
            let mut x = curve_abscissa(beta, m0, 0.0);
            let mut p = LimitPath::default();
            p.push(0.0, m0, x, branch, false);
            for (i, dx) in incs.iter().enumerate() {
                let x_prev = x;
                x += dx;
                let t = (i + 1) as f64 * h;
                let (crossed, edge, sgn) = match branch {
                    BranchLabel::Upper => (x < fold, fold, 1.0),
                    _ => (x > -fold, -fold, -1.0),
                };
                let mut jumped = false;
                if crossed {
                    jumped = true;
                    let tc = t - h + h * (edge - x_prev) / (x - x_prev);
                    let departure = sgn * cd.m_a;
                    let arrival = match rule {
                        ArrivalRule::OppositeBranch => {
                            branch = branch.opposite();
                            sgn * cd.m_b
                        }
                        ArrivalRule::LiteralIncrement => {
                            // field jumps by the curve distance between the two points
                            let target = -sgn * cd.m_b;
                            x += curve_abscissa(beta, target, 0.0) - edge;
                            target
                        }
                    };
                    p.jumps.push(JumpRecord {
                        time: tc,
                        departure,
                        arrival,
                    });
                }
                let m = invariant_curve(beta, x, 0.0, branch)?;
                p.push(t, m, x, branch, jumped);
            }
            Ok(p)
        }
    }
}

/// `(drift, diffusion)` of the mean-field limit SDE for `m`.
pub fn meanfield_coefficients(beta: f64, sigma: f64, m: f64) -> (f64, f64) {
    let u = 1.0 - m * m;
    let d = 1.0 - beta * u;
    (-beta * beta * sigma * sigma * m * u / d.powi(3), sigma * beta * u / d)
}

/// `(drift, diffusion)` of the order-N hierarchical limit SDE for `m`.
pub fn hier_coefficients(beta1: f64, sigma: f64, alpha2: f64, m: f64) -> (f64, f64) {
    let u = 1.0 - m * m;
    let d = 1.0 - beta1 * u;
    let x = if beta1 > 0.0 { m.atanh() / beta1 - m } else { 0.0 };
    let drift = -alpha2 * beta1 * u * x / d - beta1 * beta1 * sigma * sigma * m * u / d.powi(3);
    (drift, sigma * beta1 * u / d)
}

/// Euler-Maruyama for `dm = b(m) dt + s(m) dW` with given Brownian increments.
pub fn euler_maruyama<F: Fn(f64) -> (f64, f64)>(coef: F, m0: f64, dw: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(dw.len() + 1);
    let mut m = m0;
    out.push(m);
    for w in dw {
        let (b, s) = coef(m);
        m = (m + b * h + s * w).clamp(-1.0 + 1e-15, 1.0 - 1e-15);
        out.push(m);
    }
    out
}

/// Order-N hierarchical limit from `x(0) = x0`: exact OU field
/// `dx = -alpha2 x dt + sigma dW` mapped through the curve.
pub fn limit_sde_hier_order_n(
    beta1: f64,
    sigma: f64,
    alpha2: f64,
    x0: f64,
    horizon: f64,
    dt: f64,
    seed: SeedSpec,
) -> Result<LimitPath> {
    if !(beta1 >= 0.0 && beta1 < 1.0) {
        return Err(Error::Domain(format!("need beta1 < 1, got {beta1}")));
    }
    if !(alpha2 >= 0.0) {
        return Err(Error::Domain(format!("alpha2 must be nonnegative, got {alpha2}")));
    }
    let (n, h) = grid_steps(horizon, dt)?;
    let (decay, sd) = crate::sim::fields::ou_kernel(alpha2, sigma * sigma, h);
    let mut rng = seed.rng();
    let mut x = x0;
    let mut p = LimitPath::default();
    let m = invariant_curve(beta1, x, 0.0, BranchLabel::Upper)?;
    p.push(0.0, m, x, branch_of(beta1, m), false);
    for i in 0..n {
        x = decay * x + sd * rng.sample::<f64, _>(StandardNormal);
        let m = invariant_curve(beta1, x, 0.0, BranchLabel::Upper)?;
        p.push((i + 1) as f64 * h, m, x, branch_of(beta1, m), false);
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::curve::critical_points;
    use rand::SeedableRng;

    #[test]
    fn diffusion_at_zero() {
        let (b, s) = meanfield_coefficients(0.5, 1.3, 0.0);
        assert_eq!(b, 0.0);
        assert!((s - 1.3 * 0.5 / 0.5).abs() < 1e-15);
        let (b, _) = hier_coefficients(0.5, 1.0, 2.0, 0.0);
        assert_eq!(b, 0.0);
    }

    #[test]
    fn subcritical_symmetric() {
        let reps = 10_000;
        let mut xs = Vec::with_capacity(reps);
        for r in 0..reps {
            let p = limit_sde_meanfield(
                0.5,
                1.0,
                0.0,
                1.0,
                0.05,
                SeedSpec::new(3, r as u64),
                Regime::Subcritical,
                ArrivalRule::default(),
            )
            .unwrap();
            xs.push(*p.m.last().unwrap());
        }
        let mean = xs.iter().sum::<f64>() / reps as f64;
        let var = xs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        assert!(mean.abs() < 3.0 * (var / reps as f64).sqrt());
    }

    #[test]
    fn strong_error_shrinks_meanfield() {
        // reference on a fine grid; EM on coarser aggregations of the same noise
        let fine: f64 = 1e-5;
        let n = 100_000;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let dw: Vec<f64> = (0..n).map(|_| fine.sqrt() * rng.sample::<f64, _>(StandardNormal)).collect();
        let exact = meanfield_from_increments(0.5, 0.1, &dw, fine, Regime::Subcritical, ArrivalRule::default()).unwrap();
        let mut errs = vec![];
        for agg in [100usize, 10] {
            let h = fine * agg as f64;
            let coarse: Vec<f64> = dw.chunks(agg).map(|c| c.iter().sum()).collect();
            let em = euler_maruyama(|m| meanfield_coefficients(0.5, 1.0, m), 0.1, &coarse, h);
            let e = em
                .iter()
                .enumerate()
                .map(|(i, v)| (v - exact.m[i * agg]).abs())
                .fold(0.0, f64::max);
            errs.push(e);
        }
        assert!(errs[1] < errs[0], "{errs:?}");
        assert!(errs[0] < 0.05);
    }

    #[test]
    fn strong_error_shrinks_hier() {
        let (b1, s, a2) = (0.4, 1.0, 1.5);
        let fine: f64 = 1e-5;
        let n = 100_000;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let dw: Vec<f64> = (0..n).map(|_| fine.sqrt() * rng.sample::<f64, _>(StandardNormal)).collect();
        // fine-grid OU via the same increments, then mapped
        let mut x = 0.0;
        let mut mref = vec![0.0];
        for w in &dw {
            x += -a2 * x * fine + s * w;
            mref.push(invariant_curve(b1, x, 0.0, BranchLabel::Upper).unwrap());
        }
        let mut errs = vec![];
        for agg in [100usize, 10] {
            let h = fine * agg as f64;
            let coarse: Vec<f64> = dw.chunks(agg).map(|c| c.iter().sum()).collect();
            let em = euler_maruyama(|m| hier_coefficients(b1, s, a2, m), 0.0, &coarse, h);
            let e = em
                .iter()
                .enumerate()
                .map(|(i, v)| (v - mref[i * agg]).abs())
                .fold(0.0, f64::max);
            errs.push(e);
        }
        assert!(errs[1] < errs[0], "{errs:?}");
    }

    #[test]
    fn hier_stationary_symmetric() {
        let p = limit_sde_hier_order_n(0.5, 1.0, 1.0, 0.0, 20_000.0, 0.5, SeedSpec::new(4, 0)).unwrap();
        let n = p.m.len() as f64;
        let mean = p.m.iter().sum::<f64>() / n;
        let c2 = p.m.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let c3 = p.m.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
        let skew = c3 / c2.powf(1.5);
        // lag-0.5 samples of an OU with rate 1 are correlated; inflate the iid stderr
        let se = (6.0 / n).sqrt() * 2.0;
        assert!(skew.abs() < 3.0 * se, "skew {skew}");
        assert!(limit_sde_hier_order_n(1.0, 1.0, 1.0, 0.0, 1.0, 0.1, SeedSpec::new(0, 0)).is_err());
    }

    #[test]
    fn supercritical_jumps() {
        let beta = 2.0;
        let (_, ma) = critical_points(beta).unwrap();
        let cd = CriticalData::new(beta).unwrap();
        let p = limit_sde_meanfield(
            beta,
            2.0,
            0.95,
            40.0,
            1e-3,
            SeedSpec::new(9, 0),
            Regime::Supercritical,
            ArrivalRule::OppositeBranch,
        )
        .unwrap();
        assert!(p.jumps.len() >= 2);
        for (k, j) in p.jumps.iter().enumerate() {
            assert!((j.departure.abs() - ma).abs() < 1e-12);
            assert!((j.arrival.abs() - cd.m_b.abs()).abs() < 1e-12);
            assert!(j.arrival * j.departure < 0.0);
            if k > 0 {
                // branches alternate
                assert!(j.departure * p.jumps[k - 1].departure < 0.0);
            }
        }
        // values at jump steps sit near the arrival point
        for (i, &f) in p.jump.iter().enumerate() {
            if f {
                assert!((p.m[i].abs() - cd.m_b.abs()).abs() < 0.05);
            }
        }
        let lit = limit_sde_meanfield(
            beta,
            2.0,
            0.95,
            40.0,
            1e-3,
            SeedSpec::new(9, 0),
            Regime::Supercritical,
            ArrivalRule::LiteralIncrement,
        )
        .unwrap();
        for j in &lit.jumps {
            assert!(j.arrival * j.departure > 0.0);
            assert!((j.arrival.abs() - cd.m_b.abs()).abs() < 1e-12);
        }
        assert!(limit_sde_meanfield(beta, 1.0, 0.5, 1.0, 0.01, SeedSpec::new(0, 0), Regime::Supercritical, ArrivalRule::default()).is_err());
    }
}
