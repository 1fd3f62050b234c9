//! Parameters, hierarchical indexing, state and flip rates.
//!
//! Sites are stored in a flat array. With block size `N` and `k` levels, the
//! site `s` belongs to the level-`d` block `s / N^d`; level 0 is the site
//! itself and level `k` is the whole system.

use crate::error::{Error, Result};

/// Uniform hierarchy: `levels` levels with branching `block_size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HierarchyShape {
    pub levels: usize,
    pub block_size: usize,
}

impl HierarchyShape {
    pub fn new(levels: usize, block_size: usize) -> Result<Self> {
        if levels == 0 || block_size == 0 {
            return Err(Error::Config("levels and block size must be >= 1".into()));
        }
        let total = (block_size as u128).checked_pow(levels as u32);
        match total {
            Some(t) if t <= (1u128 << 40) => Ok(Self { levels, block_size }),
            _ => Err(Error::Resource(format!(
                "{block_size}^{levels} sites exceed the supported size"
            ))),
        }
    }

    pub fn total_sites(&self) -> usize {
        self.block_size.pow(self.levels as u32)
    }

    /// Number of level-`d` blocks, `N^(k-d)`.
    pub fn blocks_at(&self, level: usize) -> usize {
        self.block_size.pow((self.levels - level) as u32)
    }

    /// Sites per level-`d` block, `N^d`.
    pub fn block_len(&self, level: usize) -> usize {
        self.block_size.pow(level as u32)
    }

    pub fn block_of(&self, site: usize, level: usize) -> usize {
        site / self.block_len(level)
    }

    /// Site index as a k-tuple `(i_1, ..., i_k)`, 0-based, `i_1` fastest.
    pub fn site_tuple(&self, site: usize) -> Vec<usize> {
        let mut s = site;
        (0..self.levels)
            .map(|_| {
                let i = s % self.block_size;
                s /= self.block_size;
                i
            })
            .collect()
    }

    /// Number of levels one must ascend before two sites share a block.
    pub fn distance(&self, a: usize, b: usize) -> usize {
        (0..=self.levels)
            .find(|&d| self.block_of(a, d) == self.block_of(b, d))
            .unwrap_or(self.levels)
    }
}

/// Inverse temperatures per level, or the zero-temperature sign rule.
#[derive(Debug, Clone, PartialEq)]
pub enum Temperature {
    Finite(Vec<f64>),
    Zero,
}

/// Initial law of the fields.
///
/// Fields are i.i.d. `N(mean, std^2)` across level-`level` blocks and shared by
/// all sites of a block; `level = 0` gives i.i.d. site fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldInit {
    pub mean: f64,
    pub std: f64,
    pub level: usize,
}

impl Default for FieldInit {
    fn default() -> Self {
        Self {
            mean: 0.0,
            std: 1.0,
            level: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub shape: HierarchyShape,
    pub temperature: Temperature,
    pub alpha: Vec<f64>,
    pub sigma: f64,
    pub spin_up_prob: f64,
    pub field_init: FieldInit,
}

impl ModelParams {
    /// Finite-temperature parameters with the default field initialisation.
    pub fn new(shape: HierarchyShape, beta: Vec<f64>, alpha: Vec<f64>, sigma: f64) -> Result<Self> {
        let p = Self {
            shape,
            temperature: Temperature::Finite(beta),
            alpha,
            sigma,
            spin_up_prob: 0.5,
            field_init: FieldInit::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn mean_field(n: usize, beta: f64, alpha: f64, sigma: f64) -> Result<Self> {
        Self::new(HierarchyShape::new(1, n)?, vec![beta], vec![alpha], sigma)
    }

    pub fn with_spin_up_prob(mut self, p: f64) -> Self {
        self.spin_up_prob = p;
        self
    }

    pub fn with_field_init(mut self, init: FieldInit) -> Self {
        self.field_init = init;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.shape.levels;
        if let Temperature::Finite(beta) = &self.temperature {
            if beta.len() != k {
                return Err(Error::Config(format!("beta needs {k} entries, got {}", beta.len())));
            }
            if beta.iter().any(|b| !b.is_finite() || *b < 0.0) {
                return Err(Error::Config("beta entries must be finite and >= 0".into()));
            }
        }
        if self.alpha.len() != k {
            return Err(Error::Config(format!(
                "alpha needs {k} entries, got {}",
                self.alpha.len()
            )));
        }
        if self.alpha.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::Config("alpha entries must be finite and >= 0".into()));
        }
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return Err(Error::Config("sigma must be finite and >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.spin_up_prob) {
            return Err(Error::Config("spin up probability must lie in [0, 1]".into()));
        }
        let fi = &self.field_init;
        if !fi.mean.is_finite() || !fi.std.is_finite() || fi.std < 0.0 || fi.level > k {
            return Err(Error::Config("invalid field initialisation".into()));
        }
        Ok(())
    }

    pub fn is_zero_temperature(&self) -> bool {
        matches!(self.temperature, Temperature::Zero)
    }

    /// Per-level weights entering the flip argument (all ones at zero temperature).
    pub fn level_weights(&self) -> Vec<f64> {
        match &self.temperature {
            Temperature::Finite(b) => b.clone(),
            Temperature::Zero => vec![1.0; self.shape.levels],
        }
    }

    /// `sum beta_d < 1`; never true at zero temperature.
    pub fn is_subcritical(&self) -> bool {
        match &self.temperature {
            Temperature::Finite(b) => b.iter().sum::<f64>() < 1.0,
            Temperature::Zero => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    /// Microscopic time.
    pub time: f64,
    pub spins: Vec<i8>,
    pub fields: Vec<f64>,
}

impl SystemState {
    pub fn check(&self, shape: &HierarchyShape) -> Result<()> {
        let n = shape.total_sites();
        if self.spins.len() != n || self.fields.len() != n {
            return Err(Error::Config(format!(
                "state arrays must have {n} entries (spins {}, fields {})",
                self.spins.len(),
                self.fields.len()
            )));
        }
        if self.spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Config("spins must be +1 or -1".into()));
        }
        Ok(())
    }
}

/// Block magnetisations and field averages at one level.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LevelAverages {
    pub m: Vec<f64>,
    pub x: Vec<f64>,
}

/// Averages at levels `1..=k`; `levels[d - 1]` holds level `d`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BlockObservables {
    pub levels: Vec<LevelAverages>,
}

impl BlockObservables {
    pub fn level(&self, d: usize) -> &LevelAverages {
        &self.levels[d - 1]
    }

    /// Top-level pair `(M, X)`.
    pub fn top(&self) -> (f64, f64) {
        let l = self.levels.last().expect("at least one level");
        (l.m[0], l.x[0])
    }
}

pub fn block_observables(state: &SystemState, shape: &HierarchyShape) -> BlockObservables {
    let n = shape.block_size;
    let mut sums: Vec<i64> = state.spins.iter().map(|&s| s as i64).collect();
    let mut fsums: Vec<f64> = state.fields.clone();
    let mut levels = Vec::with_capacity(shape.levels);
    for d in 1..=shape.levels {
        sums = sums.chunks(n).map(|c| c.iter().sum()).collect();
        fsums = fsums.chunks(n).map(|c| c.iter().sum()).collect();
        let len = shape.block_len(d) as f64;
        levels.push(LevelAverages {
            m: sums.iter().map(|&s| s as f64 / len).collect(),
            x: fsums.iter().map(|&s| s / len).collect(),
        });
    }
    BlockObservables { levels }
}

/// `sum_d w_d (x^(d) + m^(d))` over the blocks containing `site`, read from
/// precomputed observables.
pub fn flip_argument_from(obs: &BlockObservables, params: &ModelParams, site: usize) -> Result<f64> {
    let shape = params.shape;
    if site >= shape.total_sites() {
        return Err(Error::Index(format!("site {site} of {}", shape.total_sites())));
    }
    let w = params.level_weights();
    Ok((1..=shape.levels)
        .map(|d| {
            let b = shape.block_of(site, d);
            let l = obs.level(d);
            w[d - 1] * (l.x[b] + l.m[b])
        })
        .sum())
}

pub fn local_flip_argument(state: &SystemState, params: &ModelParams, site: usize) -> Result<f64> {
    flip_argument_from(&block_observables(state, &params.shape), params, site)
}

/// `1 + tanh(-spin * arg)`, or `1 + sign(-spin * arg)` at zero temperature.
#[inline]
pub fn flip_rate(spin: i8, arg: f64, zero_temperature: bool) -> f64 {
    let a = -(spin as f64) * arg;
    if zero_temperature {
        1.0 + sign0(a)
    } else {
        1.0 + a.tanh()
    }
}

/// Sign with `sign(0) = 0`.
#[inline]
pub fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn state(spins: Vec<i8>, fields: Vec<f64>) -> SystemState {
        SystemState { time: 0.0, spins, fields }
    }

    #[test]
    fn shape_indexing() {
        let s = HierarchyShape::new(2, 3).unwrap();
        assert_eq!(s.total_sites(), 9);
        assert_eq!(s.blocks_at(1), 3);
        assert_eq!(s.block_of(7, 1), 2);
        assert_eq!(s.site_tuple(7), vec![1, 2]);
        assert_eq!(s.distance(0, 0), 0);
        assert_eq!(s.distance(0, 2), 1);
        assert_eq!(s.distance(0, 5), 2);
    }

    #[test]
    fn observables_by_hand() {
        let shape = HierarchyShape::new(1, 4).unwrap();
        let o = block_observables(&state(vec![1, 1, -1, -1], vec![0.0; 4]), &shape);
        assert_eq!(o.top().0, 0.0);

        let shape = HierarchyShape::new(2, 2).unwrap();
        let o = block_observables(&state(vec![1, 1, 1, -1], vec![0.0; 4]), &shape);
        assert_eq!(o.level(1).m, vec![1.0, 0.0]);
        assert_eq!(o.top().0, 0.5);

        let o = block_observables(&state(vec![1; 4], vec![0.0; 4]), &shape);
        assert!(o.levels.iter().all(|l| l.m.iter().all(|&m| m == 1.0)));
    }

    #[test]
    fn flip_argument_examples() {
        let p = ModelParams::mean_field(4, 0.5, 1.0, 1.0).unwrap();
        let z = local_flip_argument(&state(vec![1, -1, 1, -1], vec![0.0; 4]), &p, 2).unwrap();
        assert_eq!(z, 0.0);

        // m_j = 0.5, x_j = 0.1, M = 0.2, X = 0 via hand-built observables.
        let shape = HierarchyShape::new(2, 2).unwrap();
        let p = ModelParams::new(shape, vec![1.0, 1.0], vec![1.0, 1.0], 1.0).unwrap();
        let obs = BlockObservables {
            levels: vec![
                LevelAverages { m: vec![0.5, -0.1], x: vec![0.1, -0.1] },
                LevelAverages { m: vec![0.2], x: vec![0.0] },
            ],
        };
        assert_abs_diff_eq!(flip_argument_from(&obs, &p, 1).unwrap(), 0.8, epsilon = 1e-15);

        let p = ModelParams::new(shape, vec![0.3, 0.3], vec![1.0, 1.0], 1.0).unwrap();
        let z = local_flip_argument(&state(vec![1; 4], vec![1.0; 4]), &p, 3).unwrap();
        assert_abs_diff_eq!(z, 1.2, epsilon = 1e-15);

        assert!(matches!(
            local_flip_argument(&state(vec![1; 4], vec![1.0; 4]), &p, 4),
            Err(Error::Index(_))
        ));
    }

    #[test]
    fn rate_examples() {
        assert_eq!(flip_rate(1, 0.0, false), 1.0);
        assert_eq!(flip_rate(1, 3.0, true), 0.0);
        assert_eq!(flip_rate(1, 0.0, true), 1.0);
        assert_abs_diff_eq!(flip_rate(-1, 0.5, false), 1.4621171572600098, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_params() {
        let shape = HierarchyShape::new(2, 3).unwrap();
        assert!(ModelParams::new(shape, vec![0.3], vec![1.0, 1.0], 1.0).is_err());
        assert!(ModelParams::new(shape, vec![0.3, -1.0], vec![1.0, 1.0], 1.0).is_err());
        assert!(ModelParams::new(shape, vec![0.3, 0.3], vec![1.0, 1.0], -1.0).is_err());
    }

    proptest! {
        #[test]
        fn rates_complement(z in -50.0f64..50.0) {
            prop_assert!((flip_rate(1, z, false) + flip_rate(-1, z, false) - 2.0).abs() < 1e-12);
            let r = flip_rate(1, z, false);
            prop_assert!((0.0..=2.0).contains(&r));
        }

        #[test]
        fn rate_monotone(a in -20.0f64..20.0, b in -20.0f64..20.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(flip_rate(1, hi, false) <= flip_rate(1, lo, false));
            prop_assert!(flip_rate(1, hi, true) <= flip_rate(1, lo, true));
        }

        #[test]
        fn aggregation_identity(bits in proptest::collection::vec(any::<bool>(), 27)) {
            let shape = HierarchyShape::new(3, 3).unwrap();
            let spins: Vec<i8> = bits.iter().map(|&b| if b { 1 } else { -1 }).collect();
            let fields: Vec<f64> = (0..27).map(|i| (i as f64 * 0.37).sin()).collect();
            let o = block_observables(&state(spins, fields), &shape);
            for d in 1..3 {
                for (b, parent) in o.level(d + 1).m.iter().enumerate() {
                    let kids: f64 = o.level(d).m[3 * b..3 * b + 3].iter().sum::<f64>() / 3.0;
                    prop_assert!((kids - parent).abs() < 1e-12);
                }
                for &m in &o.level(d).m {
                    let count = m * shape.block_len(d) as f64;
                    prop_assert!((count - count.round()).abs() < 1e-9 && m.abs() <= 1.0);
                }
            }
        }
    }
}
