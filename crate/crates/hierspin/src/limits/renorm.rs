//! Level-by-level renormalization of the magnetization map.

use crate::error::{Error, Result};
use crate::limits::curve::{invariant_curve, BranchLabel};
use crate::limits::measure::{gauss_rule, GaussianMeasure};
use crate::model::{ModelParams, Temperature};

const ORDER: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct RenormResult {
    pub value: f64,
    /// `L_0, ..., L_d`.
    pub ledger: Vec<f64>,
}

/// `L_0 = 1`, `L_e = L_{e-1} / (1 - L_{e-1} beta_e)`; errors once
/// `L_{e-1} beta_e >= 1`.
pub fn lipschitz_ledger(beta: &[f64], d: usize) -> Result<Vec<f64>> {
    let mut ledger = vec![1.0];
    for e in 1..=d {
        let prev = ledger[e - 1];
        let q = prev * beta[e - 1];
        if !(q < 1.0) {
            return Err(Error::Domain(format!(
                "renormalization not contractive at level {e}: L_{} * beta_{e} = {q}",
                e - 1
            )));
        }
        ledger.push(prev / (1.0 - q));
    }
    Ok(ledger)
}

/// Averaging measure at level `e` and macroscopic time `t`: the spread of
/// the level-`e` driving process plus the stationary block spread.
pub fn level_measure(params: &ModelParams, e: usize, t: f64) -> Result<GaussianMeasure> {
    let k = params.shape.levels;
    let s2 = params.sigma * params.sigma;
    let a_e = params.alpha[e - 1];
    if !(a_e > 0.0) {
        return Err(Error::Domain(format!("alpha_{e} must be positive")));
    }
    let drive = if e < k {
        let a = params.alpha[e];
        if a > 0.0 {
            s2 * (-(-2.0 * a * t).exp_m1()) / (2.0 * a)
        } else {
            s2 * t
        }
    } else {
        s2 * t
    };
    GaussianMeasure::new(0.0, drive + s2 / (2.0 * a_e))
}

/// Root of the decreasing function `p -> g(p) - p` on `[-1, 1]`.
fn solve_level<G: FnMut(f64) -> Result<f64>>(mut g: G) -> Result<f64> {
    let f0 = g(0.0)?;
    if f0 == 0.0 {
        return Ok(0.0);
    }
    let (mut a, mut fa, mut b, mut fb) = if f0 > 0.0 {
        (0.0, f0, 1.0, g(1.0)? - 1.0)
    } else {
        (-1.0, g(-1.0)? + 1.0, 0.0, f0)
    };
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    // secant steps with bisection fallback, keeping fa > 0 > fb
    let (mut p0, mut f_0, mut p1, mut f_1) = (a, fa, b, fb);
    for _ in 0..200 {
        let mut p = if f_1 != f_0 { p1 - f_1 * (p1 - p0) / (f_1 - f_0) } else { 0.5 * (a + b) };
        if !(p > a && p < b) {
            p = 0.5 * (a + b);
        }
        let fp = g(p)? - p;
        if fp.abs() <= 1e-15 || b - a <= 1e-15 {
            return Ok(p);
        }
        if fp > 0.0 {
            a = p;
            fa = fp;
        } else {
            b = p;
            fb = fp;
        }
        p0 = p1;
        f_0 = f_1;
        p1 = p;
        f_1 = fp;
    }
    let _ = (fa, fb);
    Err(Error::Numerical("renormalization fixed point did not converge".into()))
}

fn phi(params: &ModelParams, beta: &[f64], measures: &[GaussianMeasure], e: usize, x: f64, y: f64) -> Result<f64> {
    if e == 1 {
        return invariant_curve(beta[0], x, y, BranchLabel::Upper);
    }
    let mu = &measures[e - 1];
    let sd = mu.sd();
    let rule = gauss_rule(ORDER);
    let be = beta[e - 1];
    solve_level(|p| {
        let mut acc = 0.0;
        for (&z, &w) in rule.z.iter().zip(&rule.p) {
            acc += w * phi(params, beta, measures, e - 1, mu.mean + sd * z, be * (p + x) + y)?;
        }
        Ok(acc)
    })
}

/// `phi_d(x, y)` at macroscopic time `t` together with the Lipschitz ledger.
pub fn renormalization_map(d: usize, params: &ModelParams, x: f64, y: f64, t: f64) -> Result<RenormResult> {
    let beta = match &params.temperature {
        Temperature::Finite(b) => b.clone(),
        Temperature::Zero => return Err(Error::Domain("renormalization needs finite temperature".into())),
    };
    let k = params.shape.levels;
    if d == 0 || d > k {
        return Err(Error::Domain(format!("level {d} outside 1..={k}")));
    }
    let total: f64 = beta.iter().sum();
    if !(total < 1.0) {
        return Err(Error::Domain(format!("need sum of betas < 1, got {total}")));
    }
    if !(t >= 0.0) {
        return Err(Error::Config(format!("negative time {t}")));
    }
    let ledger = lipschitz_ledger(&beta, d)?;
    let measures = (1..=d).map(|e| level_measure(params, e, t)).collect::<Result<Vec<_>>>()?;
    let value = phi(params, &beta, &measures, d, x, y)?;
    Ok(RenormResult { value, ledger })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::HierarchyShape;

    fn params(beta: Vec<f64>) -> ModelParams {
        let k = beta.len();
        ModelParams::new(HierarchyShape::new(k, 2).unwrap(), beta, vec![1.0; k], 1.0).unwrap()
    }

    #[test]
    fn base_level_is_curve() {
        let p = params(vec![0.3, 0.3, 0.3]);
        for &x in &[-2.0, -0.3, 0.0, 0.7, 3.0] {
            let r = renormalization_map(1, &p, x, 0.0, 0.5).unwrap();
            assert_eq!(r.value, invariant_curve(0.3, x, 0.0, BranchLabel::Upper).unwrap());
        }
    }

    #[test]
    fn odd_symmetry_and_ledger() {
        let p = params(vec![0.3, 0.3, 0.3]);
        for d in 1..=3 {
            let r = renormalization_map(d, &p, 0.0, 0.0, 1.0).unwrap();
            assert!(r.value.abs() < 1e-14, "d={d}: {}", r.value);
            let want = [1.0, 1.0 / 0.7, 2.5, 10.0];
            for (l, w) in r.ledger.iter().zip(want) {
                assert!((l - w).abs() < 1e-12);
            }
        }
        let a = renormalization_map(2, &p, 0.4, 0.1, 1.0).unwrap().value;
        let b = renormalization_map(2, &p, -0.4, -0.1, 1.0).unwrap().value;
        assert!((a + b).abs() < 1e-12);
        assert!(a > 0.0);
    }

    #[test]
    fn level_two_fixed_point() {
        // phi_2 solves p = E phi_1(Z, beta_2 (p + x) + y)
        let p = params(vec![0.3, 0.3]);
        let (x, y, t) = (0.5, 0.2, 0.3);
        let v = renormalization_map(2, &p, x, y, t).unwrap().value;
        let mu = level_measure(&p, 2, t).unwrap();
        assert!((mu.variance - (t + 0.5)).abs() < 1e-15);
        let back = mu.expect(64, |z| invariant_curve(0.3, z, 0.3 * (v + x) + y, BranchLabel::Upper).unwrap());
        assert!((back - v).abs() < 1e-10);
    }

    #[test]
    fn rejects_supercritical() {
        let p = params(vec![0.6, 0.5]);
        assert!(matches!(renormalization_map(2, &p, 0.0, 0.0, 1.0), Err(Error::Domain(_))));
        assert!(lipschitz_ledger(&[0.5, 0.6], 2).is_err());
    }
}
