//! Deterministic limits: the mean-field ODE and grid profile ODEs.

use crate::error::{Error, Result};
use crate::limits::measure::{gauss_rule, GaussianMeasure};

#[derive(Debug, Clone, Default)]
pub struct OdePath {
    pub t: Vec<f64>,
    pub lambda: Vec<f64>,
    pub m: Vec<f64>,
}

/// RK4 for `m' = 2 tanh(beta lambda) - 2 m` with `lambda - m` held fixed.
/// Records every `record_every`-th step (and the final point).
pub fn meanfield_ode(
    beta: f64,
    lambda0: f64,
    m0: f64,
    horizon: f64,
    h: f64,
    record_every: usize,
) -> Result<OdePath> {
    if !(-1.0..=1.0).contains(&m0) {
        return Err(Error::Domain(format!("m0 = {m0} outside [-1, 1]")));
    }
    if !(h > 0.0) || !(horizon >= 0.0) {
        return Err(Error::Config(format!("bad step {h} or horizon {horizon}")));
    }
    let c = lambda0 - m0;
    let f = |m: f64| 2.0 * (beta * (m + c)).tanh() - 2.0 * m;
    let steps = (horizon / h).ceil() as usize;
    let dt = if steps == 0 { 0.0 } else { horizon / steps as f64 };
    let every = record_every.max(1);
    let mut path = OdePath::default();
    let mut m = m0;
    let push = |p: &mut OdePath, t: f64, m: f64| {
        p.t.push(t);
        p.m.push(m);
        p.lambda.push(m + c);
    };
    push(&mut path, 0.0, m);
    for s in 1..=steps {
        let k1 = f(m);
        let k2 = f(m + 0.5 * dt * k1);
        let k3 = f(m + 0.5 * dt * k2);
        let k4 = f(m + dt * k3);
        m += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if s % every == 0 || s == steps {
            push(&mut path, s as f64 * dt, m);
        }
    }
    Ok(path)
}

/// Profile `x -> m(x)` tabulated on a grid, integrated against `measure`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridProfile {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
    pub measure: GaussianMeasure,
}

pub const DEFAULT_GRID_NODES: usize = 513;

impl GridProfile {
    pub fn new(x: Vec<f64>, values: Vec<f64>, measure: GaussianMeasure) -> Result<Self> {
        if x.len() < 2 || x.len() != values.len() {
            return Err(Error::Config("profile grid needs >= 2 nodes and matching values".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("profile grid must be strictly increasing".into()));
        }
        if values.iter().any(|v| !(-1.0..=1.0).contains(v)) {
            return Err(Error::Domain("profile values must lie in [-1, 1]".into()));
        }
        Ok(Self { x, values, measure })
    }

    /// Uniform grid over `mean +- 6 sd` with a constant value.
    pub fn constant(measure: GaussianMeasure, nodes: usize, value: f64) -> Result<Self> {
        let x = default_grid(&measure, nodes);
        Self::new(x.clone(), vec![value; x.len()], measure)
    }

    pub fn from_fn<F: FnMut(f64) -> f64>(measure: GaussianMeasure, nodes: usize, f: F) -> Result<Self> {
        let x = default_grid(&measure, nodes);
        let values = x.iter().copied().map(f).collect();
        Self::new(x, values, measure)
    }

    /// Linear interpolation, constant beyond the ends.
    pub fn eval(&self, x: f64) -> f64 {
        interp(&self.x, &self.values, x)
    }

    /// Gauss-Hermite integral of the interpolant against the measure.
    pub fn integral(&self) -> f64 {
        integrate(&self.x, &self.values, &self.measure, QUAD_ORDER)
    }

    /// Mass of the measure outside the grid.
    pub fn outside_mass(&self) -> f64 {
        self.measure.cdf(self.x[0]) + self.measure.upper(self.x[self.x.len() - 1])
    }

    /// `L2(measure)` distance to another profile on the same measure.
    pub fn l2_distance(&self, other: &GridProfile) -> f64 {
        let sd = self.measure.sd();
        gauss_rule(QUAD_ORDER)
            .expect(|z| {
                let x = self.measure.mean + sd * z;
                (self.eval(x) - other.eval(x)).powi(2)
            })
            .sqrt()
    }
}

pub(crate) const QUAD_ORDER: usize = 128;

pub fn default_grid(measure: &GaussianMeasure, nodes: usize) -> Vec<f64> {
    let sd = measure.sd().max(1e-12);
    let (a, b) = (measure.mean - 6.0 * sd, measure.mean + 6.0 * sd);
    let n = nodes.max(2);
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

pub(crate) fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let i = xs.partition_point(|&v| v <= x) - 1;
    let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + w * (ys[i + 1] - ys[i])
}

fn integrate(xs: &[f64], ys: &[f64], measure: &GaussianMeasure, order: usize) -> f64 {
    measure.expect(order, |x| interp(xs, ys, x))
}

#[derive(Debug, Clone, Default)]
pub struct ProfilePath {
    pub times: Vec<f64>,
    pub profiles: Vec<Vec<f64>>,
    pub big_m: Vec<f64>,
}

/// RK4 on `m_i' = 2 tanh(beta1 (x_i + m_i) + beta2 (xbar + M)) - 2 m_i`,
/// `M = int m dmu`, one equation per grid node.
pub fn order1_profile_ode(
    beta1: f64,
    beta2: f64,
    xbar: f64,
    profile0: &GridProfile,
    horizon: f64,
    h: f64,
    record_every: usize,
) -> Result<ProfilePath> {
    if profile0.outside_mass() > 1e-6 {
        return Err(Error::Config(format!(
            "grid [{}, {}] leaves mass {:.2e} of the measure uncovered",
            profile0.x[0],
            profile0.x[profile0.x.len() - 1],
            profile0.outside_mass()
        )));
    }
    if !(h > 0.0) || !(horizon >= 0.0) {
        return Err(Error::Config(format!("bad step {h} or horizon {horizon}")));
    }
    let xs = &profile0.x;
    let mu = &profile0.measure;
    let field = |m: &[f64], out: &mut [f64]| {
        let big_m = integrate(xs, m, mu, QUAD_ORDER);
        let off = beta2 * (xbar + big_m);
        for ((o, &x), &mi) in out.iter_mut().zip(xs).zip(m) {
            *o = 2.0 * (beta1 * (x + mi) + off).tanh() - 2.0 * mi;
        }
    };
    let steps = (horizon / h).ceil() as usize;
    let dt = if steps == 0 { 0.0 } else { horizon / steps as f64 };
    let every = record_every.max(1);
    let n = xs.len();
    let mut m = profile0.values.clone();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut path = ProfilePath::default();
    path.times.push(0.0);
    path.big_m.push(integrate(xs, &m, mu, QUAD_ORDER));
    path.profiles.push(m.clone());
    for s in 1..=steps {
        field(&m, &mut k1);
        for i in 0..n {
            tmp[i] = m[i] + 0.5 * dt * k1[i];
        }
        field(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = m[i] + 0.5 * dt * k2[i];
        }
        field(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = m[i] + dt * k3[i];
        }
        field(&tmp, &mut k4);
        for i in 0..n {
            m[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if s % every == 0 || s == steps {
            path.times.push(s as f64 * dt);
            path.big_m.push(integrate(xs, &m, mu, QUAD_ORDER));
            path.profiles.push(m.clone());
        }
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::curve::{invariant_curve, BranchLabel};

    #[test]
    fn meanfield_fixed_points() {
        let p = meanfield_ode(0.5, 0.0, 0.0, 2.0, 1e-3, 100).unwrap();
        assert!(p.m.iter().all(|&m| m == 0.0));
        let lam: f64 = 0.3;
        let m0 = (1.5 * lam).tanh();
        let p = meanfield_ode(1.5, lam, m0, 2.0, 1e-3, 100).unwrap();
        assert!(p.m.iter().all(|&m| (m - m0).abs() < 1e-12));
        for (l, m) in p.lambda.iter().zip(&p.m) {
            assert!((l - m - (lam - m0)).abs() < 1e-12);
        }
    }

    #[test]
    fn meanfield_converges_to_curve() {
        let p = meanfield_ode(0.5, 1.0, 0.0, 30.0, 1e-3, 1000).unwrap();
        let target = invariant_curve(0.5, 1.0, 0.0, BranchLabel::Upper).unwrap();
        assert!((p.m.last().unwrap() - target).abs() < 1e-9);
        assert!((target - 0.6875).abs() < 1e-3);
    }

    #[test]
    fn linear_decay_without_coupling() {
        let mu = GaussianMeasure::standard();
        let p0 = GridProfile::constant(mu, 65, 0.4).unwrap();
        let path = order1_profile_ode(0.0, 0.0, 0.0, &p0, 1.0, 1e-3, 250).unwrap();
        let want = 0.4 * (-2.0f64).exp();
        for v in path.profiles.last().unwrap() {
            assert!((v - want).abs() < 1e-10);
        }
        assert!((path.big_m.last().unwrap() - want).abs() < 1e-10);
    }

    #[test]
    fn long_time_profile_is_curve() {
        let mu = GaussianMeasure::standard();
        let p0 = GridProfile::constant(mu, 257, 0.5).unwrap();
        let path = order1_profile_ode(0.3, 0.3, 0.0, &p0, 25.0, 1e-2, 2500).unwrap();
        let last = path.profiles.last().unwrap();
        for (x, v) in p0.x.iter().zip(last) {
            let want = invariant_curve(0.3, *x, 0.0, BranchLabel::Upper).unwrap();
            assert!((v - want).abs() < 1e-6, "x={x}");
        }
        assert!(path.big_m.last().unwrap().abs() < 1e-6);
    }

    #[test]
    fn constant_profiles_follow_curie_weiss() {
        // point-mass-like measure: profile stays constant in x
        let mu = GaussianMeasure::new(0.0, 1e-10).unwrap();
        let p0 = GridProfile::constant(mu, 33, 0.8).unwrap();
        let path = order1_profile_ode(0.4, 0.5, 0.0, &p0, 3.0, 1e-3, 1000).unwrap();
        let cw = meanfield_ode(0.9, 0.8, 0.8, 3.0, 1e-3, 1000).unwrap();
        for (a, b) in path.big_m.iter().zip(&cw.m) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn l2_contraction() {
        let mu = GaussianMeasure::standard();
        let a0 = GridProfile::from_fn(mu, 129, |x| (x).tanh()).unwrap();
        let b0 = GridProfile::constant(mu, 129, -0.7).unwrap();
        let pa = order1_profile_ode(0.4, 0.5, 0.2, &a0, 3.0, 1e-2, 1).unwrap();
        let pb = order1_profile_ode(0.4, 0.5, 0.2, &b0, 3.0, 1e-2, 1).unwrap();
        let mut prev = f64::INFINITY;
        for (va, vb) in pa.profiles.iter().zip(&pb.profiles) {
            let ga = GridProfile { values: va.clone(), ..a0.clone() };
            let gb = GridProfile { values: vb.clone(), ..a0.clone() };
            let d = ga.l2_distance(&gb);
            assert!(d <= prev + 1e-12);
            prev = d;
        }
    }

    #[test]
    fn narrow_grid_rejected() {
        let mu = GaussianMeasure::standard();
        let p = GridProfile::new(vec![-1.0, 0.0, 1.0], vec![0.0; 3], mu).unwrap();
        assert!(matches!(
            order1_profile_ode(0.1, 0.1, 0.0, &p, 1.0, 1e-2, 1),
            Err(Error::Config(_))
        ));
    }
}
