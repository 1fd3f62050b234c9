//! First passage of a Brownian motion through a level.

use crate::error::{Error, Result};
use crate::limits::measure::normal_cdf;

/// `P(T <= t) = 2 Phi(-|x0 - a| / (sigma sqrt t))`.
pub fn hitting_time_cdf(x0: f64, a: f64, sigma: f64, t: f64) -> Result<f64> {
    if !(sigma > 0.0) || !(t >= 0.0) {
        return Err(Error::Domain(format!("need sigma > 0 and t >= 0, got {sigma}, {t}")));
    }
    let d = (x0 - a).abs();
    if d == 0.0 {
        return Ok(if t > 0.0 { 1.0 } else { 0.0 });
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if t.is_infinite() {
        return Ok(1.0);
    }
    Ok(2.0 * normal_cdf(-d / (sigma * t.sqrt())))
}

/// Density of the hitting time.
pub fn hitting_time_density(x0: f64, a: f64, sigma: f64, t: f64) -> Result<f64> {
    if !(sigma > 0.0) || !(t >= 0.0) {
        return Err(Error::Domain(format!("need sigma > 0 and t >= 0, got {sigma}, {t}")));
    }
    let d = (x0 - a).abs();
    if t == 0.0 || d == 0.0 {
        return Ok(0.0);
    }
    let s2t = sigma * sigma * t;
    Ok(d / (2.0 * std::f64::consts::PI * s2t * t * t).sqrt() * (-d * d / (2.0 * s2t)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert_eq!(hitting_time_cdf(0.3, 0.3, 1.0, 0.5).unwrap(), 1.0);
        assert!((hitting_time_cdf(1.0, 0.0, 1.0, 1.0).unwrap() - 0.31731).abs() < 1e-5);
        assert_eq!(hitting_time_cdf(1.0, 0.0, 1.0, 0.0).unwrap(), 0.0);
        assert!(hitting_time_cdf(1.0, 0.0, 1.0, 1e12).unwrap() > 0.999);
        assert!(hitting_time_cdf(1.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn density_integrates_to_cdf() {
        let (x0, a, s) = (0.0, 1.5, 2.0);
        let n = 200_000;
        let t1 = 3.0;
        let h = t1 / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            acc += hitting_time_density(x0, a, s, (i as f64 + 0.5) * h).unwrap() * h;
        }
        assert!((acc - hitting_time_cdf(x0, a, s, t1).unwrap()).abs() < 1e-6);
    }
}
