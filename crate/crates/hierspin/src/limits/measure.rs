//! Gaussian measures and Gauss-Hermite expectations.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussHermite;

use crate::error::{Error, Result};

/// Standard normal CDF.
#[inline]
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

#[inline]
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Nodes and probabilities of an `n`-point rule for `E[f(Z)]`, `Z ~ N(0, 1)`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub z: Vec<f64>,
    pub p: Vec<f64>,
}

impl GaussRule {
    fn new(n: usize) -> Self {
        let gh = GaussHermite::new(NonZeroUsize::new(n).expect("order >= 1"));
        let norm = std::f64::consts::PI.sqrt();
        let (z, p) = gh
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (std::f64::consts::SQRT_2 * x, w / norm))
            .unzip();
        Self { z, p }
    }

    pub fn expect<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.z.iter().zip(&self.p).map(|(&z, &p)| p * f(z)).sum()
    }
}

/// Orders available from the cache: 16, 32, 64, 128, 256.
pub const RULE_ORDERS: [usize; 5] = [16, 32, 64, 128, 256];

/// Cached rule of order `n` (any order >= 1; powers of two are cached).
pub fn gauss_rule(n: usize) -> &'static GaussRule {
    static CACHE: [OnceLock<GaussRule>; 5] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    match RULE_ORDERS.iter().position(|&o| o == n) {
        Some(i) => CACHE[i].get_or_init(|| GaussRule::new(n)),
        None => Box::leak(Box::new(GaussRule::new(n))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMeasure {
    pub mean: f64,
    pub variance: f64,
}

impl GaussianMeasure {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() || !variance.is_finite() || variance < 0.0 {
            return Err(Error::Config(format!("invalid Gaussian N({mean}, {variance})")));
        }
        Ok(Self { mean, variance })
    }

    pub fn standard() -> Self {
        Self {
            mean: 0.0,
            variance: 1.0,
        }
    }

    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }

    /// `mu(-inf, x]`; a point mass when the variance is zero.
    pub fn cdf(&self, x: f64) -> f64 {
        if self.variance == 0.0 {
            return if x >= self.mean { 1.0 } else { 0.0 };
        }
        normal_cdf((x - self.mean) / self.sd())
    }

    /// `mu(x, +inf)`, computed without cancellation in the upper tail.
    pub fn upper(&self, x: f64) -> f64 {
        if self.variance == 0.0 {
            return if x < self.mean { 1.0 } else { 0.0 };
        }
        normal_cdf(-(x - self.mean) / self.sd())
    }

    pub fn mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            0.0
        } else {
            (self.cdf(b) - self.cdf(a)).max(0.0)
        }
    }

    /// `E[f(X)]` with an `n`-point rule.
    pub fn expect<F: FnMut(f64) -> f64>(&self, n: usize, mut f: F) -> f64 {
        let sd = self.sd();
        gauss_rule(n).expect(|z| f(self.mean + sd * z))
    }

    /// `E[f(X)]` with order doubling from 16 until two successive orders
    /// agree within `tol` (at most 256 points).
    pub fn expect_adaptive<F: FnMut(f64) -> f64>(&self, tol: f64, mut f: F) -> (f64, usize) {
        let mut prev = self.expect(RULE_ORDERS[0], &mut f);
        for &n in &RULE_ORDERS[1..] {
            let cur = self.expect(n, &mut f);
            if (cur - prev).abs() <= tol {
                return (cur, n);
            }
            prev = cur;
        }
        (prev, RULE_ORDERS[RULE_ORDERS.len() - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments() {
        for &n in &RULE_ORDERS {
            let r = gauss_rule(n);
            assert!((r.expect(|_| 1.0) - 1.0).abs() < 1e-12);
            assert!(r.expect(|z| z).abs() < 1e-12);
            assert!((r.expect(|z| z * z) - 1.0).abs() < 1e-11);
            assert!((r.expect(|z| z.powi(4)) - 3.0).abs() < 1e-10);
        }
        let m = GaussianMeasure::new(2.0, 0.25).unwrap();
        assert!((m.expect(32, |x| x) - 2.0).abs() < 1e-12);
        assert!((m.expect(32, |x| (x - 2.0).powi(2)) - 0.25).abs() < 1e-12);
        let (v, _) = m.expect_adaptive(1e-12, |x| x.cos());
        // E cos(X) = cos(mu) exp(-var / 2)
        assert!((v - 2f64.cos() * (-0.125f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((2.0 * normal_cdf(-1.0) - 0.3173105078629141).abs() < 1e-14);
        let d = GaussianMeasure::new(1.0, 0.0).unwrap();
        assert_eq!(d.cdf(0.5), 0.0);
        assert_eq!(d.cdf(1.0), 1.0);
        assert!(GaussianMeasure::new(0.0, -1.0).is_err());
    }
}
