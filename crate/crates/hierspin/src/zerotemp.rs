//! Zero-temperature geometry: staircase equilibria, the fixed-points
//! region, attractor thresholds, region borders and grid sign dynamics.

use crate::error::{Error, Result};
use crate::limits::measure::GaussianMeasure;
use crate::limits::ode::{GridProfile, ProfilePath};
use crate::model::sign0;
use crate::table::{num, Table};

/// Profile equal to -1 below `x0` and +1 above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaircaseProfile {
    pub x0: f64,
}

impl StaircaseProfile {
    pub fn value(&self, x: f64) -> f64 {
        if x < self.x0 {
            -1.0
        } else if x > self.x0 {
            1.0
        } else {
            0.0
        }
    }

    /// Tabulates on `xs`; the node nearest `x0` (within half a spacing) gets 0.
    pub fn on_grid(&self, xs: &[f64], measure: GaussianMeasure) -> Result<GridProfile> {
        let mut values: Vec<f64> = xs.iter().map(|&x| self.value(x)).collect();
        let i = xs.partition_point(|&x| x < self.x0);
        let near = [i.wrapping_sub(1), i]
            .into_iter()
            .filter(|&j| j < xs.len())
            .min_by(|&a, &b| (xs[a] - self.x0).abs().total_cmp(&(xs[b] - self.x0).abs()));
        if let Some(j) = near {
            let spacing = if j + 1 < xs.len() { xs[j + 1] - xs[j] } else { xs[j] - xs[j - 1] };
            if (xs[j] - self.x0).abs() <= 0.5 * spacing {
                values[j] = 0.0;
            }
        }
        GridProfile::new(xs.to_vec(), values, measure)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionCheck {
    pub x0: f64,
    pub x_top: f64,
    pub measure: GaussianMeasure,
    pub is_equilibrium: bool,
    /// `(x0 + X + 2 mu(x0 - X, inf), 2 mu(-inf, x0 - X) - x0 - X)`.
    pub slack: (f64, f64),
}

/// Whether the staircase at `x0` is an equilibrium for top field `x_top`;
/// `measure` is the centred block measure.
pub fn is_equilibrium(x0: f64, x_top: f64, measure: GaussianMeasure) -> RegionCheck {
    let v = x0 - x_top;
    let left = x0 + x_top + 2.0 * measure.upper(v);
    let right = 2.0 * measure.cdf(v) - x0 - x_top;
    RegionCheck {
        x0,
        x_top,
        measure,
        is_equilibrium: left >= 0.0 && right >= 0.0,
        slack: (left, right),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Edge of the fixed-points region reached from outside:
/// `x = 2 mu(-inf, x)` on `[0, 2]` (right) or `x = -2 mu(x, inf)` on `[-2, 0]` (left).
pub fn attractor_threshold(measure: GaussianMeasure, side: Side) -> Result<f64> {
    let h = |x: f64| match side {
        Side::Right => 2.0 * measure.cdf(x) - x,
        Side::Left => -2.0 * measure.upper(x) - x,
    };
    let (mut a, mut b) = match side {
        Side::Right => (0.0, 2.0),
        Side::Left => (-2.0, 0.0),
    };
    let (ha, hb) = (h(a), h(b));
    if ha == 0.0 {
        return Ok(a);
    }
    if hb == 0.0 {
        return Ok(b);
    }
    if ha.signum() == hb.signum() {
        return Err(Error::Numerical(format!(
            "no attractor threshold in [{a}, {b}] for measure {measure:?}"
        )));
    }
    let sa = ha.signum();
    while b - a > 0.0 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let hm = h(mid);
        if hm == 0.0 {
            return Ok(mid);
        }
        if hm.signum() == sa {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(if h(a).abs() <= h(b).abs() { a } else { b })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BorderRegime {
    /// Each border is the graph of a function of `X`.
    Graph,
    /// Some border has several `M` values at one `X`.
    Folded,
}

impl BorderRegime {
    pub fn as_str(self) -> &'static str {
        match self {
            BorderRegime::Graph => "graph",
            BorderRegime::Folded => "folded",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BorderRow {
    pub x_top: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionBorders {
    pub rows: Vec<BorderRow>,
    pub regime: BorderRegime,
}

const SCAN_POINTS: usize = 2001;

/// All roots in `[-1, 1]` of `f`, from a sign scan refined by bisection.
fn scan_roots<F: Fn(f64) -> f64>(f: F) -> Vec<f64> {
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| -1.0 + 2.0 * i as f64 / (SCAN_POINTS - 1) as f64)
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&m| f(m)).collect();
    let mut roots = Vec::new();
    for i in 0..SCAN_POINTS {
        if vals[i] == 0.0 {
            roots.push(grid[i]);
            continue;
        }
        if i + 1 < SCAN_POINTS && vals[i + 1] != 0.0 && vals[i].signum() != vals[i + 1].signum() {
            let (mut a, mut b, sa) = (grid[i], grid[i + 1], vals[i].signum());
            for _ in 0..100 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if f(mid).signum() == sa {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            roots.push(0.5 * (a + b));
        }
    }
    roots
}

/// Left and right borders `M = 1 - 2 mu_X(-inf, -+1 - X - M)` of the
/// fixed-points region over `xs`, with `mu_X = N(X, sigma^2 / (2 alpha2))`.
pub fn region_borders(sigma: f64, alpha2: f64, xs: &[f64]) -> Result<RegionBorders> {
    if !(alpha2 > 0.0) || !(sigma >= 0.0) {
        return Err(Error::Domain(format!("need alpha2 > 0 and sigma >= 0, got {alpha2}, {sigma}")));
    }
    let mut rows = Vec::with_capacity(xs.len());
    let mut graph = true;
    for &x in xs {
        let mu = GaussianMeasure::new(x, sigma * sigma / (2.0 * alpha2))?;
        let left = scan_roots(|m| m - 1.0 + 2.0 * mu.cdf(-1.0 - x - m));
        let right = scan_roots(|m| m - 1.0 + 2.0 * mu.cdf(1.0 - x - m));
        graph &= left.len() == 1 && right.len() == 1;
        rows.push(BorderRow {
            x_top: x,
            left,
            right,
        });
    }
    let regime = if graph { BorderRegime::Graph } else { BorderRegime::Folded };
    Ok(RegionBorders { rows, regime })
}

pub fn region_table(b: &RegionBorders) -> Table {
    let join = |v: &[f64]| v.iter().map(|&m| num(m)).collect::<Vec<_>>().join(";");
    let mut t = Table::new("region", &["X", "M_left", "M_right", "regime"]);
    for r in &b.rows {
        t.push(vec![num(r.x_top), join(&r.left), join(&r.right), b.regime.as_str().to_string()]);
    }
    t
}

/// `M` with weights equal to the measure of each node's cell (cells split at midpoints).
pub fn cell_weights(xs: &[f64], measure: &GaussianMeasure) -> Vec<f64> {
    let n = xs.len();
    (0..n)
        .map(|i| {
            let lo = if i == 0 { f64::NEG_INFINITY } else { 0.5 * (xs[i - 1] + xs[i]) };
            let hi = if i + 1 == n { f64::INFINITY } else { 0.5 * (xs[i] + xs[i + 1]) };
            let a = if lo.is_finite() { measure.cdf(lo) } else { 0.0 };
            let b = if hi.is_finite() { measure.cdf(hi) } else { 1.0 };
            (b - a).max(0.0)
        })
        .collect()
}

/// Explicit Euler for `m_i' = 2 sign(x_i + m_i + M + X) - 2 m_i`, `sign(0) = 0`.
pub fn sign_dynamics(
    profile0: &GridProfile,
    x_top: f64,
    horizon: f64,
    h: f64,
    record_every: usize,
) -> Result<ProfilePath> {
    let xs = &profile0.x;
    let mu = &profile0.measure;
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    let sd = mu.sd();
    let need_lo = (mu.mean - 6.0 * sd).min(-2.0 - x_top.abs());
    let need_hi = (mu.mean + 6.0 * sd).max(2.0 + x_top.abs());
    if lo > need_lo || hi < need_hi {
        return Err(Error::Config(format!(
            "grid [{lo}, {hi}] must cover [{need_lo}, {need_hi}]"
        )));
    }
    if !(h > 0.0 && h <= 0.5) || !(horizon >= 0.0) {
        return Err(Error::Config(format!("need 0 < h <= 0.5 and horizon >= 0, got {h}, {horizon}")));
    }
    let w = cell_weights(xs, mu);
    let mass = |m: &[f64]| m.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
    let steps = (horizon / h).ceil() as usize;
    let dt = if steps == 0 { 0.0 } else { horizon / steps as f64 };
    let every = record_every.max(1);
    let mut m = profile0.values.clone();
    let mut path = ProfilePath::default();
    path.times.push(0.0);
    path.big_m.push(mass(&m));
    path.profiles.push(m.clone());
    for s in 1..=steps {
        let big_m = mass(&m);
        for (mi, &x) in m.iter_mut().zip(xs) {
            *mi += dt * (2.0 * sign0(x + *mi + big_m + x_top) - 2.0 * *mi);
            debug_assert!((-1.0..=1.0).contains(mi));
        }
        if s % every == 0 || s == steps {
            path.times.push(s as f64 * dt);
            path.big_m.push(mass(&m));
            path.profiles.push(m.clone());
        }
    }
    Ok(path)
}

/// Threshold of a (near) staircase profile: the zero node if any, else the
/// midpoint between the last negative and first positive node.
pub fn staircase_threshold(xs: &[f64], values: &[f64]) -> Option<f64> {
    let i = values.iter().position(|&v| v >= 0.0)?;
    if values[i] == 0.0 || i == 0 {
        return Some(xs[i]);
    }
    Some(0.5 * (xs[i - 1] + xs[i]))
}

pub fn profile_table(path: &ProfilePath, xs: &[f64]) -> Table {
    let mut t = Table::new("profile_path", &["t", "x", "m"]);
    for (time, prof) in path.times.iter().zip(&path.profiles) {
        for (x, m) in xs.iter().zip(prof) {
            t.push(vec![num(*time), num(*x), num(*m)]);
        }
    }
    t
}

/// Uniform grid covering what [`sign_dynamics`] needs, with spacing about `dx`.
pub fn covering_grid(measure: &GaussianMeasure, x_top: f64, dx: f64) -> Vec<f64> {
    let sd = measure.sd();
    let lo = (measure.mean - 6.0 * sd).min(-2.0 - x_top.abs()) - dx;
    let hi = (measure.mean + 6.0 * sd).max(2.0 + x_top.abs()) + dx;
    let n = ((hi - lo) / dx).ceil() as usize + 1;
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::measure::normal_cdf;

    fn std_mu() -> GaussianMeasure {
        GaussianMeasure::standard()
    }

    #[test]
    fn equilibrium_examples() {
        assert!(is_equilibrium(0.0, 0.0, std_mu()).is_equilibrium);
        let thin = GaussianMeasure::new(0.0, 1e-12).unwrap();
        assert!(is_equilibrium(1.999, 0.0, thin).is_equilibrium);
        assert!(!is_equilibrium(2.001, 0.0, thin).is_equilibrium);
        assert!(is_equilibrium(-1.999, 0.0, thin).is_equilibrium);
        let wide = GaussianMeasure::new(0.0, 1e18).unwrap();
        assert!(is_equilibrium(0.999, 0.0, wide).is_equilibrium);
        assert!(!is_equilibrium(1.001, 0.0, wide).is_equilibrium);
    }

    #[test]
    fn region_is_interval() {
        for &x_top in &[0.0, 0.3, -0.8] {
            let flags: Vec<bool> = (0..801)
                .map(|i| is_equilibrium(-4.0 + 0.01 * i as f64, x_top, std_mu()).is_equilibrium)
                .collect();
            let changes = flags.windows(2).filter(|w| w[0] != w[1]).count();
            assert_eq!(changes, 2);
        }
    }

    #[test]
    fn attractor_values() {
        let r = attractor_threshold(std_mu(), Side::Right).unwrap();
        assert!((r - 1.9487).abs() < 1e-3);
        assert!((2.0 * normal_cdf(r) - r).abs() < 1e-12);
        let l = attractor_threshold(std_mu(), Side::Left).unwrap();
        assert!((l + r).abs() < 1e-12);
        let thin = GaussianMeasure::new(0.0, 1e-18).unwrap();
        assert!((attractor_threshold(thin, Side::Right).unwrap() - 2.0).abs() < 1e-6);
        let wide = GaussianMeasure::new(0.0, 1e18).unwrap();
        assert!((attractor_threshold(wide, Side::Right).unwrap() - 1.0).abs() < 1e-6);
        // the binding inequality is tight at the threshold
        for var in [0.1, 1.0, 4.0] {
            let mu = GaussianMeasure::new(0.0, var).unwrap();
            let x = attractor_threshold(mu, Side::Right).unwrap();
            assert!(is_equilibrium(x, 0.0, mu).slack.1.abs() < 1e-10);
        }
    }

    #[test]
    fn border_symmetry_and_regimes() {
        let xs: Vec<f64> = (0..=60).map(|i| -3.0 + 0.1 * i as f64).collect();
        let b = region_borders(3.0, 1.0, &xs).unwrap();
        assert_eq!(b.regime, BorderRegime::Graph);
        let row0 = b.rows.iter().find(|r| r.x_top.abs() < 1e-12).unwrap();
        assert!((row0.left[0] + row0.right[0]).abs() < 1e-10);
        let f = region_borders(1.0, 3.0, &xs).unwrap();
        assert_eq!(f.regime, BorderRegime::Folded);
        assert!(f.rows.iter().any(|r| r.left.len() > 1 || r.right.len() > 1));
        let t = region_table(&f);
        assert_eq!(t.header, vec!["X", "M_left", "M_right", "regime"]);
    }

    #[test]
    fn staircase_inside_region_is_stationary() {
        let mu = std_mu();
        let xs = covering_grid(&mu, 0.0, 0.01);
        let p0 = StaircaseProfile { x0: 0.5 }.on_grid(&xs, mu).unwrap();
        let path = sign_dynamics(&p0, 0.0, 1.0, 0.01, 1).unwrap();
        let last = path.profiles.last().unwrap();
        let moved: Vec<usize> = (0..xs.len()).filter(|&i| last[i] != p0.values[i]).collect();
        assert!(moved.len() <= 1, "{moved:?}");
        if let Some(&i) = moved.first() {
            assert_eq!(p0.values[i], 0.0);
        }
    }

    #[test]
    fn constant_profile_converges_to_staircase() {
        let mu = std_mu();
        let xs = covering_grid(&mu, 0.0, 0.01);
        let dx = xs[1] - xs[0];
        let mbar = 0.25;
        let p0 = GridProfile::new(xs.clone(), vec![mbar; xs.len()], mu).unwrap();
        let path = sign_dynamics(&p0, 0.0, 20.0, 0.01, 2000).unwrap();
        let last = path.profiles.last().unwrap();
        let thr = staircase_threshold(&xs, last).unwrap();
        assert!((thr + 2.0 * mbar).abs() <= dx, "{thr}");
        let want = mu.mass(-2.0 * mbar, 2.0 * mbar);
        let cell = w_max(&xs, &mu);
        assert!((path.big_m.last().unwrap() - want).abs() <= cell + 1e-9);
        assert!(path.profiles.iter().flatten().all(|v| (-1.0..=1.0).contains(v)));
    }

    fn w_max(xs: &[f64], mu: &GaussianMeasure) -> f64 {
        cell_weights(xs, mu).into_iter().fold(0.0, f64::max)
    }

    #[test]
    fn outside_staircase_moves_to_attractor() {
        let mu = std_mu();
        let xs = covering_grid(&mu, 0.0, 0.01);
        let dx = xs[1] - xs[0];
        let p0 = StaircaseProfile { x0: 2.6 }.on_grid(&xs, mu).unwrap();
        let path = sign_dynamics(&p0, 0.0, 20.0, 0.01, 2000).unwrap();
        let thr = staircase_threshold(&xs, path.profiles.last().unwrap()).unwrap();
        let want = attractor_threshold(mu, Side::Right).unwrap();
        assert!((thr - want).abs() <= dx, "{thr} vs {want}");
    }

    #[test]
    fn narrow_grid_rejected() {
        let mu = std_mu();
        let xs: Vec<f64> = (0..11).map(|i| -1.0 + 0.2 * i as f64).collect();
        let p0 = GridProfile::new(xs, vec![0.0; 11], mu).unwrap();
        assert!(matches!(sign_dynamics(&p0, 0.0, 1.0, 0.1, 1), Err(Error::Config(_))));
    }
}
