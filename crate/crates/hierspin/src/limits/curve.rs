//! Invariant curves `m = tanh(beta (x + m) + offset)` and their fold geometry.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BranchLabel {
    Upper,
    Lower,
    /// Unstable; exists only for `beta > 1` between the folds.
    Middle,
}

impl BranchLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            BranchLabel::Upper => "upper",
            BranchLabel::Lower => "lower",
            BranchLabel::Middle => "middle",
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            BranchLabel::Upper => BranchLabel::Lower,
            BranchLabel::Lower => BranchLabel::Upper,
            BranchLabel::Middle => BranchLabel::Middle,
        }
    }
}

impl fmt::Display for BranchLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

const RESIDUAL_TOL: f64 = 1e-14;

#[inline]
fn h(beta: f64, a: f64, m: f64) -> f64 {
    m - (beta * m + a).tanh()
}

/// Safeguarded Newton for a sign change of `h` on `[lo, hi]`.
fn solve_bracket(beta: f64, a: f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = h(beta, a, lo);
    let fhi = h(beta, a, hi);
    if flo.abs() <= RESIDUAL_TOL {
        return lo;
    }
    if fhi.abs() <= RESIDUAL_TOL {
        return hi;
    }
    let mut m = 0.5 * (lo + hi);
    for _ in 0..200 {
        let t = (beta * m + a).tanh();
        let f = m - t;
        if f.abs() <= RESIDUAL_TOL || hi - lo <= 1e-16 {
            return m;
        }
        if (f < 0.0) == (flo < 0.0) {
            lo = m;
            flo = f;
        } else {
            hi = m;
        }
        let d = 1.0 - beta * (1.0 - t * t);
        let newton = m - f / d;
        m = if d != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    m
}

/// Solves `m = tanh(beta1 (x + m) + offset)`.
///
/// For `beta1 <= 1` the root is unique and `branch` is ignored. For
/// `beta1 > 1` the branches are the pieces of the curve with `m > m_a`,
/// `|m| <= m_a` and `m < -m_a`; asking for one that does not exist at `x`
/// gives [`Error::NoSuchBranch`].
pub fn invariant_curve(beta1: f64, x: f64, offset: f64, branch: BranchLabel) -> Result<f64> {
    if !(beta1 >= 0.0) || !beta1.is_finite() || !x.is_finite() || !offset.is_finite() {
        return Err(Error::Domain(format!(
            "invariant curve needs finite beta >= 0, got beta={beta1}, x={x}, offset={offset}"
        )));
    }
    let a = beta1 * x + offset;
    if beta1 == 0.0 {
        return Ok(a.tanh());
    }
    if beta1 <= 1.0 {
        return Ok(solve_bracket(beta1, a, -1.0, 1.0));
    }
    let ma = (1.0 - 1.0 / beta1).sqrt();
    let (lo, hi) = match branch {
        BranchLabel::Upper => (ma, 1.0),
        BranchLabel::Lower => (-1.0, -ma),
        BranchLabel::Middle => (-ma, ma),
    };
    let (flo, fhi) = (h(beta1, a, lo), h(beta1, a, hi));
    let exists = match branch {
        // h increases on the outer pieces and decreases on the middle one
        BranchLabel::Upper | BranchLabel::Lower => flo <= RESIDUAL_TOL && fhi >= -RESIDUAL_TOL,
        BranchLabel::Middle => flo >= -RESIDUAL_TOL && fhi <= RESIDUAL_TOL,
    };
    if !exists {
        return Err(Error::NoSuchBranch(format!(
            "{branch} branch absent at x={x}, offset={offset}, beta={beta1}"
        )));
    }
    Ok(solve_bracket(beta1, a, lo, hi))
}

/// Stable branch nearest to the sign of `m0`: used when seeding paths.
pub fn branch_of(beta: f64, m: f64) -> BranchLabel {
    if beta <= 1.0 {
        return if m >= 0.0 { BranchLabel::Upper } else { BranchLabel::Lower };
    }
    let ma = (1.0 - 1.0 / beta).sqrt();
    if m > ma {
        BranchLabel::Upper
    } else if m < -ma {
        BranchLabel::Lower
    } else {
        BranchLabel::Middle
    }
}

/// Abscissa `x = atanh(m)/beta - m - offset/beta` of the curve point at height `m`.
pub fn curve_abscissa(beta: f64, m: f64, offset: f64) -> f64 {
    m.atanh() / beta - m - offset / beta
}

/// `(lambda_a, m_a)` for `beta > 1`.
pub fn critical_points(beta: f64) -> Result<(f64, f64)> {
    if !(beta > 1.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("critical points need beta > 1, got {beta}")));
    }
    let ma = (1.0 - 1.0 / beta).sqrt();
    Ok((ma.atanh() / beta, ma))
}

/// `g(y) = 2 beta y - 2 beta (m_a - lambda_a) - ln(1 + y) + ln(1 - y)`.
pub fn g(beta: f64, y: f64) -> Result<f64> {
    let (la, ma) = critical_points(beta)?;
    Ok(g_raw(beta, la, ma, 1.0 + y, 1.0 - y))
}

/// `g` at `y = u - 1`, given `u = 1 + y` directly. Keeps full precision when
/// `y` is within rounding of `-1`, which happens for large `beta`.
pub fn g_shifted(beta: f64, u: f64) -> Result<f64> {
    let (la, ma) = critical_points(beta)?;
    Ok(g_raw(beta, la, ma, u, 2.0 - u))
}

#[inline]
fn g_raw(beta: f64, la: f64, ma: f64, one_plus: f64, one_minus: f64) -> f64 {
    2.0 * beta * (one_plus - 1.0) - 2.0 * beta * (ma - la) - one_plus.ln() + one_minus.ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalData {
    pub beta: f64,
    pub lambda_a: f64,
    pub m_a: f64,
    pub m_b: f64,
    /// `1 + m_b`, stored separately since `m_b` rounds to `-1` for large `beta`.
    pub one_plus_m_b: f64,
}

impl CriticalData {
    pub fn new(beta: f64) -> Result<Self> {
        let (lambda_a, m_a) = critical_points(beta)?;
        let u = jump_target_shifted(beta)?;
        Ok(Self {
            beta,
            lambda_a,
            m_a,
            m_b: u - 1.0,
            one_plus_m_b: u,
        })
    }

    /// Fold abscissa of the upper branch, `lambda_a - m_a` (negative).
    pub fn fold_x(&self) -> f64 {
        self.lambda_a - self.m_a
    }
}

/// Root `m_b` of `g` on `(-1, -m_a)`.
pub fn jump_target(beta: f64) -> Result<f64> {
    Ok(jump_target_shifted(beta)? - 1.0)
}

/// `1 + m_b`, found by bisection in `ln(1 + y)` so the bracket can
/// approach `-1` closer than machine precision allows in `y` itself.
pub fn jump_target_shifted(beta: f64) -> Result<f64> {
    let (la, ma) = critical_points(beta)?;
    let f = |s: f64| {
        let u = s.exp();
        g_raw(beta, la, ma, u, 2.0 - u)
    };
    // g(-m_a) = 4 beta (lambda_a - m_a) < 0, and g -> +inf as y -> -1
    let mut hi = (1.0 - ma).ln();
    let eps_hat = 1e-12 * (1.0 - ma);
    if f(hi) >= 0.0 {
        hi = (1.0 - ma - eps_hat).ln();
    }
    if !(f(hi) < 0.0) {
        return Err(Error::Numerical(format!("jump target bracket failed at beta={beta}")));
    }
    // -ln(1 + y) > 2 beta (1 + m_a) forces g > 0
    let lo = -2.0 * beta * (1.0 + ma) - 1.0;
    if !(f(lo) > 0.0) || lo < -740.0 {
        return Err(Error::Numerical(format!("jump target bracket failed at beta={beta}")));
    }
    let mut lo = lo;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = if f(lo).abs() < f(hi).abs() { lo } else { hi };
    Ok(s.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn residual(beta: f64, x: f64, off: f64, m: f64) -> f64 {
        (m - (beta * (x + m) + off).tanh()).abs()
    }

    #[test]
    fn examples() {
        assert_eq!(invariant_curve(0.5, 0.0, 0.0, BranchLabel::Upper).unwrap(), 0.0);
        let m = invariant_curve(0.5, 1.0, 0.0, BranchLabel::Upper).unwrap();
        // plain fixed-point iteration as oracle
        let mut o = 0.0f64;
        for _ in 0..200 {
            o = (0.5 * (1.0 + o)).tanh();
        }
        assert!((m - o).abs() < 1e-12);
        assert!((m - 0.6875).abs() < 1e-3);
        let (la, ma) = critical_points(2.0).unwrap();
        let m = invariant_curve(2.0, la - ma, 0.0, BranchLabel::Upper).unwrap();
        assert!((m - ma).abs() < 1e-6);
    }

    #[test]
    fn critical_values() {
        let (la, ma) = critical_points(2.0).unwrap();
        assert!((la - 0.440687).abs() < 1e-6);
        assert!((ma - 0.707107).abs() < 1e-6);
        let (_, ma4) = critical_points(4.0).unwrap();
        assert!((ma4 - 3f64.sqrt() / 2.0).abs() < 1e-12);
        let (l1, m1) = critical_points(1.0 + 1e-12).unwrap();
        assert!(l1.abs() < 1e-5 && m1.abs() < 1e-5);
        assert!(critical_points(1.0).is_err());
        for &b in &[1.01, 1.1, 2.0, 5.0, 10.0] {
            let (la, ma) = critical_points(b).unwrap();
            assert!((ma - (b * la).tanh()).abs() < 1e-12);
            assert!((b * (1.0 - ma * ma) - 1.0).abs() < 1e-12);
            assert!(g(b, ma).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn jump_targets() {
        let mb = jump_target(2.0).unwrap();
        assert!((mb + 0.9868).abs() < 1e-4);
        for &b in &[1.01, 1.1, 2.0, 5.0, 10.0, 30.0, 100.0] {
            let d = CriticalData::new(b).unwrap();
            assert!(g_shifted(b, d.one_plus_m_b).unwrap().abs() < 1e-10, "beta {b}");
            assert!(d.m_b < -d.m_a);
        }
        assert!(jump_target(100.0).unwrap() + 1.0 < 1e-12);
        // m_b moves toward -1 as beta grows
        let seq: Vec<f64> = [1.5, 2.0, 4.0, 8.0].iter().map(|&b| jump_target(b).unwrap()).collect();
        assert!(seq.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn branches() {
        let b = 2.0;
        let (la, ma) = critical_points(b).unwrap();
        let fold = la - ma;
        let mid = invariant_curve(b, 0.1, 0.0, BranchLabel::Middle).unwrap();
        assert!(mid.abs() <= ma && residual(b, 0.1, 0.0, mid) < 1e-12);
        // past the fold only one branch remains
        assert!(matches!(
            invariant_curve(b, fold - 0.01, 0.0, BranchLabel::Upper),
            Err(Error::NoSuchBranch(_))
        ));
        assert!(invariant_curve(b, -fold + 0.01, 0.0, BranchLabel::Middle).is_err());
        let low = invariant_curve(b, fold, 0.0, BranchLabel::Lower).unwrap();
        let mb = jump_target(b).unwrap();
        assert!((low - mb).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn residual_small(beta in 0.0f64..5.0, x in -3.0f64..3.0, off in -1.0f64..1.0) {
            for br in [BranchLabel::Upper, BranchLabel::Lower, BranchLabel::Middle] {
                if let Ok(m) = invariant_curve(beta, x, off, br) {
                    prop_assert!(residual(beta, x, off, m) <= 1e-12);
                    prop_assert!((-1.0..=1.0).contains(&m));
                }
            }
        }

        #[test]
        fn some_stable_branch_exists(beta in 1.01f64..5.0, x in -3.0f64..3.0) {
            let up = invariant_curve(beta, x, 0.0, BranchLabel::Upper).is_ok();
            let lo = invariant_curve(beta, x, 0.0, BranchLabel::Lower).is_ok();
            prop_assert!(up || lo);
        }
    }
}
