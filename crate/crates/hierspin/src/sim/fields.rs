//! Exact propagation of the field subsystem.
//!
//! The field drift on level `l` is `-(alpha_l / N^(l-1)) (x - x^(l))`, so the
//! averaging projections diagonalise it. Writing `D_d = x^(d) - x^(d+1)` for
//! the deviation of a level-`d` block from its parent, every `D_d` is an
//! Ornstein-Uhlenbeck vector with rate `r_d = sum_{l>d} alpha_l / N^(l-1)`,
//! noise `sigma^2 / N^d` per unit time, and a sum-zero constraint inside each
//! parent. The top average is Brownian with variance `sigma^2 / N^k`.
//!
//! Inside a parent the sum-zero vector is expanded in a Haar basis built on a
//! binary split of the `N` children. The coefficients are independent scalar
//! OU processes, and a single block value touches only the `~log2 N`
//! coefficients on its path. Each coefficient is advanced lazily with the
//! exact Gaussian kernel, so reading one block at an arbitrary time costs
//! `O(k log N)` and carries no discretisation error.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{FieldInit, HierarchyShape, ModelParams};

/// Orthonormal contrasts spanning the sum-zero vectors on `n` points.
#[derive(Debug, Clone)]
struct HaarTemplate {
    nodes: usize,
    /// For each leaf, `(node, coefficient)` along its root-to-leaf path.
    paths: Vec<Vec<(u32, f64)>>,
}

impl HaarTemplate {
    fn new(n: usize) -> Self {
        let mut paths = vec![Vec::new(); n];
        let mut nodes = 0usize;
        let mut stack = vec![(0usize, n)];
        while let Some((lo, hi)) = stack.pop() {
            if hi - lo < 2 {
                continue;
            }
            let mid = lo + (hi - lo) / 2;
            let a = (mid - lo) as f64;
            let b = (hi - mid) as f64;
            let id = nodes as u32;
            nodes += 1;
            let left = (b / (a * (a + b))).sqrt();
            let right = -(a / (b * (a + b))).sqrt();
            for p in &mut paths[lo..mid] {
                p.push((id, left));
            }
            for p in &mut paths[mid..hi] {
                p.push((id, right));
            }
            stack.push((lo, mid));
            stack.push((mid, hi));
        }
        Self { nodes, paths }
    }
}

/// Exact one-step OU kernel: `(decay, conditional std)` over `dt`.
///
/// For `rate * dt < 1e-3` the truncated series are exact to machine
/// precision and avoid the transcendental calls in the event loop.
#[inline]
pub fn ou_kernel(rate: f64, noise_var: f64, dt: f64) -> (f64, f64) {
    let x = rate * dt;
    if x < 1e-3 {
        let decay = 1.0 - x * (1.0 - x / 2.0 * (1.0 - x / 3.0 * (1.0 - x / 4.0 * (1.0 - x / 5.0))));
        // (1 - e^{-2x}) / (2x)
        let g = 1.0 - x * (1.0 - x * (2.0 / 3.0 - x * (1.0 / 3.0 - x * (2.0 / 15.0 - x * 2.0 / 45.0))));
        (decay, (noise_var * dt * g).sqrt())
    } else {
        let decay = (-x).exp();
        let var = -noise_var * (-2.0 * x).exp_m1() / (2.0 * rate);
        (decay, var.sqrt())
    }
}

#[derive(Debug, Clone)]
struct Component {
    rate: f64,
    noise_var: f64,
    values: Vec<f64>,
    times: Vec<f64>,
}

impl Component {
    #[inline]
    fn advance<R: Rng + ?Sized>(&mut self, i: usize, t: f64, rng: &mut R) -> f64 {
        let dt = t - self.times[i];
        if dt > 0.0 {
            let (decay, sd) = ou_kernel(self.rate, self.noise_var, dt);
            let z: f64 = rng.sample(StandardNormal);
            self.values[i] = decay * self.values[i] + sd * z;
            self.times[i] = t;
        }
        self.values[i]
    }
}

/// Lazily advanced exact representation of all site fields.
#[derive(Debug, Clone)]
pub struct FieldSystem {
    shape: HierarchyShape,
    /// `N^d` for `d = 0..=k`.
    block_len: Vec<usize>,
    template: HaarTemplate,
    /// `levels[d]` holds the Haar coefficients of `D_d`, `d = 0..k`.
    levels: Vec<Component>,
    top: Component,
}

impl FieldSystem {
    pub fn new(params: &ModelParams, site_fields: &[f64], t0: f64) -> Result<Self> {
        let shape = params.shape;
        if site_fields.len() != shape.total_sites() {
            return Err(Error::Config("field array does not match the hierarchy".into()));
        }
        let (n, k) = (shape.block_size, shape.levels);
        let template = HaarTemplate::new(n);
        let s2 = params.sigma * params.sigma;

        // Block averages at every level, level 0 being the sites.
        let mut avgs = vec![site_fields.to_vec()];
        for _ in 0..k {
            let prev = avgs.last().unwrap();
            let next: Vec<f64> = prev
                .chunks(n)
                .map(|c| c.iter().sum::<f64>() / n as f64)
                .collect();
            avgs.push(next);
        }

        let mut levels = Vec::with_capacity(k);
        for d in 0..k {
            let rate: f64 = (d + 1..=k)
                .map(|l| params.alpha[l - 1] / (n as f64).powi(l as i32 - 1))
                .sum();
            let parents = shape.blocks_at(d + 1);
            let mut values = vec![0.0; parents * template.nodes];
            for p in 0..parents {
                let parent_avg = avgs[d + 1][p];
                for c in 0..n {
                    let dev = avgs[d][p * n + c] - parent_avg;
                    for &(node, coef) in &template.paths[c] {
                        values[p * template.nodes + node as usize] += coef * dev;
                    }
                }
            }
            levels.push(Component {
                rate,
                noise_var: s2 / (n as f64).powi(d as i32),
                times: vec![t0; values.len()],
                values,
            });
        }
        let top = Component {
            rate: 0.0,
            noise_var: s2 / (n as f64).powi(k as i32),
            values: vec![avgs[k][0]],
            times: vec![t0],
        };
        Ok(Self {
            shape,
            block_len: (0..=k).map(|d| shape.block_len(d)).collect(),
            template,
            levels,
            top,
        })
    }

    /// Field system whose deviations are drawn from their exact law at
    /// microscopic time `t`, started from `init` at time 0, and whose top
    /// average is set to `top`. Deviations are independent of the top.
    pub fn sampled<R: Rng + ?Sized>(
        params: &ModelParams,
        init: FieldInit,
        top: f64,
        t: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let shape = params.shape;
        let (n, k) = (shape.block_size, shape.levels);
        let template = HaarTemplate::new(n);
        let s2 = params.sigma * params.sigma;
        let nf = n as f64;
        let mut levels = Vec::with_capacity(k);
        for d in 0..k {
            let rate: f64 = (d + 1..=k)
                .map(|l| params.alpha[l - 1] / nf.powi(l as i32 - 1))
                .sum();
            let noise_var = s2 / nf.powi(d as i32);
            // level-d block averages start i.i.d. with this variance
            let v0 = if d < init.level {
                0.0
            } else {
                init.std * init.std / nf.powi((d - init.level) as i32)
            };
            let var = if rate > 0.0 {
                let e = (-2.0 * rate * t).exp();
                v0 * e + noise_var / (2.0 * rate) * (1.0 - e)
            } else {
                v0 + noise_var * t
            };
            let sd = var.sqrt();
            let len = shape.blocks_at(d + 1) * template.nodes;
            let values = (0..len)
                .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
                .collect();
            levels.push(Component {
                rate,
                noise_var,
                values,
                times: vec![t; len],
            });
        }
        let top = Component {
            rate: 0.0,
            noise_var: s2 / nf.powi(k as i32),
            values: vec![top],
            times: vec![t],
        };
        Ok(Self {
            shape,
            block_len: (0..=k).map(|d| shape.block_len(d)).collect(),
            template,
            levels,
            top,
        })
    }

    pub fn shape(&self) -> HierarchyShape {
        self.shape
    }

    /// Relaxation rate of the level-`d` deviations.
    pub fn deviation_rate(&self, d: usize) -> f64 {
        self.levels[d].rate
    }

    /// Noise variance per unit time of the top average.
    pub fn top_noise_var(&self) -> f64 {
        self.top.noise_var
    }

    /// Overwrite the top average at time `t`.
    pub fn set_top(&mut self, value: f64, t: f64) {
        self.top.values[0] = value;
        self.top.times[0] = t;
    }

    pub fn top<R: Rng + ?Sized>(&mut self, t: f64, rng: &mut R) -> f64 {
        self.top.advance(0, t, rng)
    }

    /// Deviation `D_d` of the level-`d` block `b` from its parent at time `t`.
    #[inline]
    pub fn deviation<R: Rng + ?Sized>(&mut self, d: usize, b: usize, t: f64, rng: &mut R) -> f64 {
        let n = self.shape.block_size;
        let (p, c) = (b / n, b % n);
        let base = p * self.template.nodes;
        let comp = &mut self.levels[d];
        let mut acc = 0.0;
        for &(node, coef) in &self.template.paths[c] {
            acc += coef * comp.advance(base + node as usize, t, rng);
        }
        acc
    }

    /// Field averages `x^(d)` for `d = 1..=k` of the blocks containing `site`,
    /// written to `out[d - 1]`.
    #[inline]
    pub fn site_levels<R: Rng + ?Sized>(&mut self, site: usize, t: f64, rng: &mut R, out: &mut [f64]) {
        let k = self.shape.levels;
        let mut acc = self.top(t, rng);
        out[k - 1] = acc;
        for d in (1..k).rev() {
            let b = site / self.block_len[d];
            acc += self.deviation(d, b, t, rng);
            out[d - 1] = acc;
        }
    }

    /// Average of the level-`d` block `b` (`d >= 1`; `d = 0` gives a site).
    pub fn block_field<R: Rng + ?Sized>(&mut self, d: usize, b: usize, t: f64, rng: &mut R) -> f64 {
        let k = self.shape.levels;
        let n = self.shape.block_size;
        let mut acc = self.top(t, rng);
        let mut idx = b;
        let mut chain = Vec::with_capacity(k);
        for e in d..k {
            chain.push((e, idx));
            idx /= n;
        }
        for (e, bi) in chain.into_iter().rev() {
            acc += self.deviation(e, bi, t, rng);
        }
        acc
    }

    /// Bring every coefficient from level `min_level` up to time `t`.
    pub fn advance_all<R: Rng + ?Sized>(&mut self, t: f64, min_level: usize, rng: &mut R) {
        self.top(t, rng);
        for d in min_level..self.shape.levels {
            for i in 0..self.levels[d].values.len() {
                self.levels[d].advance(i, t, rng);
            }
        }
    }

    /// Block averages at level `d >= 1` at time `t`, all blocks at once.
    pub fn level_averages<R: Rng + ?Sized>(&mut self, d: usize, t: f64, rng: &mut R) -> Vec<f64> {
        self.advance_all(t, d, rng);
        self.reconstruct(d)
    }

    /// Site fields at time `t`.
    pub fn site_fields<R: Rng + ?Sized>(&mut self, t: f64, rng: &mut R) -> Vec<f64> {
        self.advance_all(t, 0, rng);
        self.reconstruct(0)
    }

    /// Values at level `d` from the current coefficients (assumed synchronous).
    fn reconstruct(&self, d: usize) -> Vec<f64> {
        let n = self.shape.block_size;
        let k = self.shape.levels;
        let mut vals = vec![self.top.values[0]];
        for e in (d..k).rev() {
            let comp = &self.levels[e];
            let mut next = vec![0.0; vals.len() * n];
            for (p, &pv) in vals.iter().enumerate() {
                let base = p * self.template.nodes;
                for c in 0..n {
                    let dev: f64 = self.template.paths[c]
                        .iter()
                        .map(|&(node, coef)| coef * comp.values[base + node as usize])
                        .sum();
                    next[p * n + c] = pv + dev;
                }
            }
            vals = next;
        }
        vals
    }
}

/// Euler-Maruyama integration of the site fields, used only as an explicit
/// fallback and as a cross-check of the exact kernels.
pub fn euler_maruyama_step<R: Rng + ?Sized>(
    params: &ModelParams,
    fields: &mut [f64],
    dt: f64,
    rng: &mut R,
) {
    let shape = params.shape;
    let n = shape.block_size;
    let k = shape.levels;
    let mut avgs = vec![fields.to_vec()];
    for _ in 0..k {
        let prev = avgs.last().unwrap();
        avgs.push(prev.chunks(n).map(|c| c.iter().sum::<f64>() / n as f64).collect());
    }
    let sd = params.sigma * dt.sqrt();
    for (s, x) in fields.iter_mut().enumerate() {
        let mut drift = 0.0;
        for l in 1..=k {
            let c = params.alpha[l - 1] / (n as f64).powi(l as i32 - 1);
            drift -= c * (avgs[0][s] - avgs[l][shape.block_of(s, l)]);
        }
        let z: f64 = rng.sample(StandardNormal);
        *x += drift * dt + sd * z;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedSpec;

    #[test]
    fn kernel_series_matches_closed_form() {
        for &x in &[1e-9, 1e-6, 3e-4, 9.99e-4] {
            let (d, sd) = ou_kernel(x, 2.0, 1.0);
            let var = -2.0 * (-2.0 * x).exp_m1() / (2.0 * x);
            assert!((d - (-x).exp()).abs() < 1e-16);
            assert!((sd * sd - var).abs() < 1e-15 * var);
        }
        let (d, sd) = ou_kernel(0.0, 2.0, 0.5);
        assert_eq!(d, 1.0);
        assert!((sd - 1.0).abs() < 1e-15);
    }

    #[test]
    fn haar_is_orthonormal_and_centered() {
        for n in [2usize, 3, 5, 8, 13] {
            let t = HaarTemplate::new(n);
            assert_eq!(t.nodes, n - 1);
            let mut m = vec![vec![0.0; n]; n - 1];
            for (leaf, path) in t.paths.iter().enumerate() {
                for &(node, c) in path {
                    m[node as usize][leaf] = c;
                }
            }
            for i in 0..n - 1 {
                assert!(m[i].iter().sum::<f64>().abs() < 1e-12);
                for j in 0..n - 1 {
                    let dot: f64 = (0..n).map(|l| m[i][l] * m[j][l]).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-12, "n={n} i={i} j={j} dot={dot}");
                }
            }
        }
    }

    #[test]
    fn reconstructs_initial_fields() {
        let shape = HierarchyShape::new(3, 3).unwrap();
        let p = ModelParams::new(shape, vec![0.1; 3], vec![1.0; 3], 1.0).unwrap();
        let f: Vec<f64> = (0..27).map(|i| ((i * 7) % 11) as f64 * 0.1 - 0.3).collect();
        let mut fs = FieldSystem::new(&p, &f, 0.0).unwrap();
        let mut rng = SeedSpec::new(1, 0).rng();
        let back = fs.site_fields(0.0, &mut rng);
        for (a, b) in f.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
        let x1 = fs.level_averages(1, 0.0, &mut rng);
        let direct: Vec<f64> = f.chunks(3).map(|c| c.iter().sum::<f64>() / 3.0).collect();
        for (a, b) in x1.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((fs.block_field(1, 4, 0.0, &mut rng) - direct[4]).abs() < 1e-12);
        let mut out = [0.0; 3];
        fs.site_levels(13, 0.0, &mut rng, &mut out);
        assert!((out[0] - direct[4]).abs() < 1e-12);
    }

    #[test]
    fn sampled_matches_propagated_law() {
        let shape = HierarchyShape::new(2, 4).unwrap();
        let p = ModelParams::new(shape, vec![0.1; 2], vec![0.8, 1.3], 1.2).unwrap();
        let init = FieldInit { mean: 0.0, std: 1.0, level: 0 };
        let t = 0.7;
        let reps = 20_000;
        let mut rng = SeedSpec::new(8, 0).rng();
        let (mut va, mut vb, mut sa, mut sb) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..reps {
            let f0: Vec<f64> = (0..16).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let mut a = FieldSystem::new(&p, &f0, 0.0).unwrap();
            let top = a.top(t, &mut rng);
            let mut b = FieldSystem::sampled(&p, init, top, t, &mut rng).unwrap();
            let da = a.block_field(1, 1, t, &mut rng) - top;
            let db = b.block_field(1, 1, t, &mut rng) - top;
            va += da * da;
            vb += db * db;
            let xa = a.site_fields(t, &mut rng)[5] - a.block_field(1, 1, t, &mut rng);
            let xb = b.site_fields(t, &mut rng)[5] - b.block_field(1, 1, t, &mut rng);
            sa += xa * xa;
            sb += xb * xb;
        }
        let r = reps as f64;
        // relative stderr of a variance estimate is about sqrt(2 / reps)
        assert!(((va - vb) / va).abs() < 6.0 * (4.0 / r).sqrt());
        assert!(((sa - sb) / sa).abs() < 6.0 * (4.0 / r).sqrt());
    }

    #[test]
    fn zero_noise_keeps_equal_fields() {
        let shape = HierarchyShape::new(2, 4).unwrap();
        let p = ModelParams::new(shape, vec![0.1; 2], vec![1.0; 2], 0.0).unwrap();
        let mut fs = FieldSystem::new(&p, &[0.7; 16], 0.0).unwrap();
        let mut rng = SeedSpec::new(1, 0).rng();
        for x in fs.site_fields(5.0, &mut rng) {
            assert!((x - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn deviations_decay_without_noise() {
        let shape = HierarchyShape::new(2, 2).unwrap();
        let p = ModelParams::new(shape, vec![0.1; 2], vec![1.0, 2.0], 0.0).unwrap();
        let f = [1.0, -1.0, 0.5, 0.5];
        let mut fs = FieldSystem::new(&p, &f, 0.0).unwrap();
        let mut rng = SeedSpec::new(1, 0).rng();
        let t = 0.3;
        let got = fs.site_fields(t, &mut rng);
        // Level-0 rate alpha1 + alpha2/N = 2, level-1 rate alpha2/N = 1.
        let d0 = (-2.0 * t).exp();
        let d1 = (-1.0 * t).exp();
        let want = [
            0.25 - 0.25 * d1 + d0,
            0.25 - 0.25 * d1 - d0,
            0.25 + 0.25 * d1,
            0.25 + 0.25 * d1,
        ];
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12, "{got:?}");
        }
    }
}
