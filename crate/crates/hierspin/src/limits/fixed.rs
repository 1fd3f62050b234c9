//! Self-consistent levels: equilibrium profiles, the order-N^2 law and the
//! empirical averaging fixed point.

use crate::error::{Error, Result};
use crate::limits::curve::{invariant_curve, BranchLabel};
use crate::limits::measure::GaussianMeasure;
use crate::limits::ode::{GridProfile, DEFAULT_GRID_NODES};

const MAX_ITER: usize = 10_000;

/// Solves `M = G(M)` by plain iteration, `damping` in `(0, 1]`.
pub(crate) fn iterate_fixed_point<G: FnMut(f64) -> Result<f64>>(
    mut g: G,
    m0: f64,
    tol: f64,
    damping: f64,
) -> Result<f64> {
    let mut m = m0;
    for _ in 0..MAX_ITER {
        let next = g(m)?;
        let step = damping * (next - m);
        m += step;
        if step.abs() <= tol {
            return Ok(m);
        }
    }
    Err(Error::Numerical(format!(
        "fixed point did not converge in {MAX_ITER} iterations"
    )))
}

fn contraction_ok(beta1: f64, beta2: f64) -> Result<()> {
    if !(beta1 >= 0.0 && beta2 >= 0.0 && beta1 < 1.0 && beta2 < 1.0 - beta1) {
        return Err(Error::Domain(format!(
            "need beta2 / (1 - beta1) < 1, got beta1={beta1}, beta2={beta2}"
        )));
    }
    Ok(())
}

/// `G(M) = int curve(beta1, x, beta2 (xbar + M)) dmu(x)` with adaptive order.
fn level_map(beta1: f64, beta2: f64, measure: &GaussianMeasure, xbar: f64, m: f64, tol: f64) -> Result<f64> {
    let off = beta2 * (xbar + m);
    let mut err = None;
    let (v, _) = measure.expect_adaptive(tol, |x| {
        invariant_curve(beta1, x, off, BranchLabel::Upper).unwrap_or_else(|e| {
            err = Some(e);
            0.0
        })
    });
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Fixed level `M` of `m(x) = tanh(beta1 (x + m(x)) + beta2 (xbar + M))`,
/// `M = int m dmu`. `damping` is `None` for the certified contraction; a
/// value in `(0, 1]` skips the precondition check.
pub fn equilibrium_level(
    beta1: f64,
    beta2: f64,
    measure: &GaussianMeasure,
    xbar: f64,
    damping: Option<f64>,
) -> Result<f64> {
    let damp = match damping {
        None => {
            contraction_ok(beta1, beta2)?;
            1.0
        }
        Some(d) if d > 0.0 && d <= 1.0 => d,
        Some(d) => return Err(Error::Config(format!("damping {d} outside (0, 1]"))),
    };
    iterate_fixed_point(|m| level_map(beta1, beta2, measure, xbar, m, 1e-13), 0.0, 1e-13, damp)
}

/// Equilibrium profile on a default grid together with its level `M`.
pub fn equilibrium_profile(
    beta1: f64,
    beta2: f64,
    measure: &GaussianMeasure,
    xbar: f64,
) -> Result<(GridProfile, f64)> {
    let big_m = equilibrium_level(beta1, beta2, measure, xbar, None)?;
    let off = beta2 * (xbar + big_m);
    let mut err = None;
    let profile = GridProfile::from_fn(*measure, DEFAULT_GRID_NODES, |x| {
        invariant_curve(beta1, x, off, BranchLabel::Upper).unwrap_or_else(|e| {
            err = Some(e);
            0.0
        })
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok((profile, big_m)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawMode {
    /// Given the top field `X`: weights `N(X, sigma^2 / (2 alpha2))`.
    Conditional,
    /// Averaged over `X(t) ~ N(0, sigma^2 t)`: weights
    /// `N(0, sigma^2 (1 + 2 alpha2 t) / (2 alpha2))`, centred top field.
    Unconditional,
}

/// Stationary measure of a block field around the top value `x_top`.
pub fn block_measure(sigma: f64, alpha2: f64, x_top: f64) -> Result<GaussianMeasure> {
    if !(alpha2 > 0.0) {
        return Err(Error::Domain(format!("alpha2 must be positive, got {alpha2}")));
    }
    GaussianMeasure::new(x_top, sigma * sigma / (2.0 * alpha2))
}

/// Magnetization level on the slow scale, see [`LawMode`].
pub fn order_n2_law(
    beta1: f64,
    beta2: f64,
    sigma: f64,
    alpha2: f64,
    x_top: f64,
    t: f64,
    mode: LawMode,
) -> Result<f64> {
    if !(beta1 + beta2 < 1.0) {
        return Err(Error::Domain(format!("need beta1 + beta2 < 1, got {}", beta1 + beta2)));
    }
    let (measure, xbar) = match mode {
        LawMode::Conditional => (block_measure(sigma, alpha2, x_top)?, x_top),
        LawMode::Unconditional => {
            if !(t >= 0.0) {
                return Err(Error::Config(format!("negative time {t}")));
            }
            let base = block_measure(sigma, alpha2, 0.0)?;
            (GaussianMeasure::new(0.0, base.variance * (1.0 + 2.0 * alpha2 * t))?, 0.0)
        }
    };
    contraction_ok(beta1, beta2)?;
    iterate_fixed_point(|m| level_map(beta1, beta2, &measure, xbar, m, 1e-12), 0.0, 1e-13, 1.0)
}

/// Fixed point of `M = mean_j f(xi_j, xi_bar, u, M)`.
pub fn averaging_fixed_point<F: Fn(f64, f64, f64, f64) -> f64>(
    f: F,
    samples: &[f64],
    xi_bar: f64,
    u: f64,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("no samples".into()));
    }
    let n = samples.len() as f64;
    let m = iterate_fixed_point(
        |m| Ok(samples.iter().map(|&xi| f(xi, xi_bar, u, m)).sum::<f64>() / n),
        0.0,
        1e-14,
        1.0,
    )?;
    let res = samples.iter().map(|&xi| f(xi, xi_bar, u, m)).sum::<f64>() / n - m;
    if res.abs() > 1e-12 {
        return Err(Error::Numerical(format!("averaging residual {res:e}")));
    }
    Ok(m)
}

/// Limit form: `M = int f(xi, 0, u, M) dmu(xi)`.
pub fn averaging_fixed_point_limit<F: Fn(f64, f64, f64, f64) -> f64>(
    f: F,
    measure: &GaussianMeasure,
    u: f64,
) -> Result<f64> {
    iterate_fixed_point(
        |m| Ok(measure.expect_adaptive(1e-13, |xi| f(xi, 0.0, u, m)).0),
        0.0,
        1e-14,
        1.0,
    )
}
