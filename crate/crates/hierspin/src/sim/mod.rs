//! Exact finite-N simulation of the coupled spin and field system.
//!
//! # Algorithm
//!
//! Every spin flips at rate at most 2, so candidate events form a Poisson
//! stream of rate `2 * sites` in microscopic time. At a candidate time the
//! fields of the chosen site's blocks are read exactly from the lazily
//! advanced [`FieldSystem`], and the flip is accepted with probability
//! `rate / 2`. Block spin sums are integers updated in `O(k)` per flip.

pub mod export;
pub mod fields;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{BlockObservables, HierarchyShape, LevelAverages, ModelParams, SystemState};
use crate::rng::SeedSpec;
pub use fields::FieldSystem;

/// Macroscopic time `t` maps to microscopic time `N^exponent * t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimescaleSpec {
    pub exponent: u32,
    pub horizon: f64,
    pub output_grid: Vec<f64>,
    /// Times (macroscopic) at which full site snapshots are kept.
    pub snapshot_times: Vec<f64>,
}

impl TimescaleSpec {
    /// Evenly spaced output grid with `points` intervals on `[0, horizon]`.
    pub fn uniform(exponent: u32, horizon: f64, points: usize) -> Self {
        let output_grid = (0..=points)
            .map(|i| horizon * i as f64 / points as f64)
            .collect();
        Self {
            exponent,
            horizon,
            output_grid,
            snapshot_times: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Config("horizon must be positive".into()));
        }
        for g in [&self.output_grid, &self.snapshot_times] {
            if g.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Config("time grids must be strictly increasing".into()));
            }
            if g.iter().any(|&t| !(0.0..=self.horizon).contains(&t)) {
                return Err(Error::Config("time grid outside [0, horizon]".into()));
            }
        }
        Ok(())
    }

    pub fn scale(&self, shape: &HierarchyShape) -> f64 {
        (shape.block_size as f64).powi(self.exponent as i32)
    }
}

/// Sampled path of all block averages, in macroscopic time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObservablePath {
    pub times: Vec<f64>,
    pub observables: Vec<BlockObservables>,
    pub snapshots: Vec<(f64, SystemState)>,
}

impl ObservablePath {
    /// Series of the top magnetisation.
    pub fn top_m(&self) -> Vec<f64> {
        self.observables.iter().map(|o| o.top().0).collect()
    }

    pub fn top_x(&self) -> Vec<f64> {
        self.observables.iter().map(|o| o.top().1).collect()
    }
}

pub fn sample_initial_state(params: &ModelParams, seed: SeedSpec) -> SystemState {
    let mut rng = seed.rng();
    let shape = params.shape;
    let n = shape.total_sites();
    let p = params.spin_up_prob;
    let spins = (0..n)
        .map(|_| if rng.random::<f64>() < p { 1 } else { -1 })
        .collect();
    let fi = params.field_init;
    let len = shape.block_len(fi.level);
    let mut fields = Vec::with_capacity(n);
    for _ in 0..shape.blocks_at(fi.level) {
        let z: f64 = rng.sample(StandardNormal);
        let v = fi.mean + fi.std * z;
        fields.extend(std::iter::repeat_n(v, len));
    }
    SystemState {
        time: 0.0,
        spins,
        fields,
    }
}

/// How the field subsystem is propagated by [`simulate_diffusions_exact`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldIntegrator {
    Exact,
    /// Explicit fallback with the given microscopic step.
    EulerMaruyama { step: f64 },
}

/// Field values at query times: block averages at levels `1..=k` and,
/// optionally, every site.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FieldPath {
    pub times: Vec<f64>,
    /// `levels[i][d - 1]` are the level-`d` averages at `times[i]`.
    pub levels: Vec<Vec<Vec<f64>>>,
    pub sites: Option<Vec<Vec<f64>>>,
}

/// Sample the field subsystem at microscopic `query_times`.
///
/// Alpha is a per-level vector, so the level decomposition always applies and
/// the exact integrator never needs to refuse a configuration.
pub fn simulate_diffusions_exact(
    params: &ModelParams,
    fields0: &[f64],
    query_times: &[f64],
    seed: SeedSpec,
    integrator: FieldIntegrator,
    keep_sites: bool,
) -> Result<FieldPath> {
    params.validate()?;
    if query_times.windows(2).any(|w| w[1] < w[0]) || query_times.iter().any(|t| *t < 0.0) {
        return Err(Error::Config("query times must be sorted and nonnegative".into()));
    }
    let shape = params.shape;
    let k = shape.levels;
    let mut rng = seed.rng();
    let mut out = FieldPath {
        times: query_times.to_vec(),
        levels: Vec::with_capacity(query_times.len()),
        sites: keep_sites.then(Vec::new),
    };
    match integrator {
        FieldIntegrator::Exact => {
            let mut fs = FieldSystem::new(params, fields0, 0.0)?;
            for &t in query_times {
                let min_level = if keep_sites { 0 } else { 1 };
                fs.advance_all(t, min_level, &mut rng);
                if let Some(s) = out.sites.as_mut() {
                    s.push(fs.site_fields(t, &mut rng));
                }
                out.levels
                    .push((1..=k).map(|d| fs.level_averages(d, t, &mut rng)).collect());
            }
        }
        FieldIntegrator::EulerMaruyama { step } => {
            if !(step > 0.0) {
                return Err(Error::Config("Euler-Maruyama step must be positive".into()));
            }
            let mut x = fields0.to_vec();
            let mut now = 0.0;
            for &t in query_times {
                while now < t {
                    let h = step.min(t - now);
                    fields::euler_maruyama_step(params, &mut x, h, &mut rng);
                    now += h;
                }
                if let Some(s) = out.sites.as_mut() {
                    s.push(x.clone());
                }
                let state = SystemState {
                    time: t,
                    spins: vec![1; x.len()],
                    fields: x.clone(),
                };
                let obs = crate::model::block_observables(&state, &shape);
                out.levels.push(obs.levels.into_iter().map(|l| l.x).collect());
            }
        }
    }
    Ok(out)
}

/// Candidate event reported to observers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub site: usize,
    pub accepted: bool,
    /// Flip argument used for the decision.
    pub arg: f64,
}

/// Event-driven simulation in microscopic time.
#[derive(Debug, Clone)]
pub struct Simulation {
    params: ModelParams,
    shape: HierarchyShape,
    weights: Vec<f64>,
    zero_temperature: bool,
    spins: Vec<i8>,
    /// `sums[d - 1][b]`: spin sum of the level-`d` block `b`.
    sums: Vec<Vec<i64>>,
    fields: FieldSystem,
    time: f64,
    rng: ChaCha8Rng,
    xbuf: Vec<f64>,
    /// `N^d` for `d = 0..=k`.
    block_len: Vec<usize>,
    events: u64,
    flips: u64,
}

impl Simulation {
    pub fn new(params: &ModelParams, state: &SystemState, seed: SeedSpec) -> Result<Self> {
        params.validate()?;
        state.check(&params.shape)?;
        let fields = FieldSystem::new(params, &state.fields, state.time)?;
        Self::from_parts(params, state.spins.clone(), fields, state.time, seed)
    }

    /// Start from spins and an already constructed field system.
    pub fn from_parts(
        params: &ModelParams,
        spins: Vec<i8>,
        fields: FieldSystem,
        time: f64,
        seed: SeedSpec,
    ) -> Result<Self> {
        let shape = params.shape;
        if spins.len() != shape.total_sites() || fields.shape() != shape {
            return Err(Error::Config("spins or fields do not match the hierarchy".into()));
        }
        let sums = Self::spin_sums(&spins, &shape);
        Ok(Self {
            params: params.clone(),
            shape,
            weights: params.level_weights(),
            zero_temperature: params.is_zero_temperature(),
            spins,
            sums,
            fields,
            time,
            rng: seed.rng(),
            xbuf: vec![0.0; shape.levels],
            block_len: (0..=shape.levels).map(|d| shape.block_len(d)).collect(),
            events: 0,
            flips: 0,
        })
    }

    fn spin_sums(spins: &[i8], shape: &HierarchyShape) -> Vec<Vec<i64>> {
        let n = shape.block_size;
        let mut cur: Vec<i64> = spins.iter().map(|&s| s as i64).collect();
        (0..shape.levels)
            .map(|_| {
                cur = cur.chunks(n).map(|c| c.iter().sum()).collect();
                cur.clone()
            })
            .collect()
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn event_count(&self) -> u64 {
        self.events
    }

    pub fn flip_count(&self) -> u64 {
        self.flips
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn block_sum(&self, d: usize, b: usize) -> i64 {
        self.sums[d - 1][b]
    }

    pub fn magnetization(&self, d: usize, b: usize) -> f64 {
        self.sums[d - 1][b] as f64 / self.shape.block_len(d) as f64
    }

    /// Block field average at the current time.
    pub fn field(&mut self, d: usize, b: usize) -> f64 {
        self.fields.block_field(d, b, self.time, &mut self.rng)
    }

    /// Field averages `x^(1..=k)` seen by the most recent candidate event.
    pub fn event_fields(&self) -> &[f64] {
        &self.xbuf
    }

    pub fn fields_mut(&mut self) -> &mut FieldSystem {
        &mut self.fields
    }

    pub fn observables(&mut self) -> BlockObservables {
        let t = self.time;
        let levels = (1..=self.shape.levels)
            .map(|d| {
                let len = self.shape.block_len(d) as f64;
                LevelAverages {
                    m: self.sums[d - 1].iter().map(|&s| s as f64 / len).collect(),
                    x: self.fields.level_averages(d, t, &mut self.rng),
                }
            })
            .collect();
        BlockObservables { levels }
    }

    pub fn state(&mut self) -> SystemState {
        let t = self.time;
        SystemState {
            time: t,
            spins: self.spins.clone(),
            fields: self.fields.site_fields(t, &mut self.rng),
        }
    }

    /// Recompute the spin sums from scratch and compare.
    pub fn sums_consistent(&self) -> bool {
        Self::spin_sums(&self.spins, &self.shape) == self.sums
    }

    /// Advance to microscopic time `t_end` without observing events.
    pub fn run_to(&mut self, t_end: f64) {
        self.run_until(t_end, |_, _| {});
    }

    /// Advance to microscopic time `t_end`, calling `observer` after every
    /// candidate event.
    pub fn run_until<F: FnMut(&mut Self, &Event)>(&mut self, t_end: f64, mut observer: F) {
        let sites = self.shape.total_sites();
        let total_rate = 2.0 * sites as f64;
        let k = self.shape.levels;
        loop {
            let e: f64 = self.rng.sample(Exp1);
            let next = self.time + e / total_rate;
            if next > t_end {
                self.time = self.time.max(t_end);
                return;
            }
            self.time = next;
            let site = self.rng.random_range(0..sites);
            self.fields
                .site_levels(site, next, &mut self.rng, &mut self.xbuf);
            let mut arg = 0.0;
            for d in 1..=k {
                let len = self.block_len[d];
                let m = self.sums[d - 1][site / len] as f64 / len as f64;
                arg += self.weights[d - 1] * (self.xbuf[d - 1] + m);
            }
            let spin = self.spins[site];
            let rate = crate::model::flip_rate(spin, arg, self.zero_temperature);
            let u: f64 = self.rng.random();
            let accepted = 2.0 * u < rate;
            self.events += 1;
            if accepted {
                self.spins[site] = -spin;
                let delta = -2 * spin as i64;
                for d in 1..=k {
                    self.sums[d - 1][site / self.block_len[d]] += delta;
                }
                self.flips += 1;
            }
            let ev = Event {
                time: next,
                site,
                accepted,
                arg,
            };
            observer(self, &ev);
        }
    }
}

/// Expected number of candidate events for a run.
pub fn expected_events(shape: &HierarchyShape, ts: &TimescaleSpec) -> f64 {
    2.0 * shape.total_sites() as f64 * ts.scale(shape) * ts.horizon
}

pub fn simulate_system(
    params: &ModelParams,
    state0: &SystemState,
    ts: &TimescaleSpec,
    seed: SeedSpec,
) -> Result<ObservablePath> {
    ts.validate()?;
    let shape = params.shape;
    let expected = expected_events(&shape, ts);
    if expected > 2f64.powi(63) {
        return Err(Error::Resource(format!(
            "about {expected:.3e} candidate events; reduce N, the timescale exponent or the horizon"
        )));
    }
    let scale = ts.scale(&shape);
    let mut sim = Simulation::new(params, state0, seed)?;
    let t0 = state0.time;
    let mut path = ObservablePath::default();

    let mut marks: Vec<(f64, bool, bool)> = ts
        .output_grid
        .iter()
        .map(|&t| (t, true, false))
        .chain(ts.snapshot_times.iter().map(|&t| (t, false, true)))
        .collect();
    marks.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (t, obs, snap) in marks {
        sim.run_to(t0 + t * scale);
        if obs {
            path.times.push(t);
            path.observables.push(sim.observables());
        }
        if snap {
            path.snapshots.push((t, sim.state()));
        }
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{block_observables, FieldInit};

    fn hier(n: usize, beta: f64) -> ModelParams {
        ModelParams::new(HierarchyShape::new(2, n).unwrap(), vec![beta; 2], vec![1.0; 2], 1.0).unwrap()
    }

    #[test]
    fn initial_state_examples() {
        let p = hier(4, 0.1).with_spin_up_prob(1.0).with_field_init(FieldInit {
            mean: 0.3,
            std: 0.0,
            level: 0,
        });
        let s = sample_initial_state(&p, SeedSpec::new(3, 0));
        assert!(s.spins.iter().all(|&x| x == 1));
        assert!(s.fields.iter().all(|&x| x == 0.3));

        let p = hier(100, 0.1);
        let mut bad = 0;
        for r in 0..100 {
            let s = sample_initial_state(&p, SeedSpec::new(5, r));
            let m = s.spins.iter().map(|&x| x as f64).sum::<f64>() / 1e4;
            if m.abs() >= 0.05 {
                bad += 1;
            }
        }
        assert!(bad <= 2);
    }

    #[test]
    fn block_level_init_shares_values() {
        let p = hier(3, 0.1).with_field_init(FieldInit {
            mean: 0.0,
            std: 1.0,
            level: 1,
        });
        let s = sample_initial_state(&p, SeedSpec::new(3, 0));
        for c in s.fields.chunks(3) {
            assert!(c.iter().all(|&x| x == c[0]));
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let p = hier(5, 0.3);
        let s0 = sample_initial_state(&p, SeedSpec::new(1, 0));
        let ts = TimescaleSpec::uniform(1, 0.5, 5);
        let a = simulate_system(&p, &s0, &ts, SeedSpec::new(9, 2)).unwrap();
        let b = simulate_system(&p, &s0, &ts, SeedSpec::new(9, 2)).unwrap();
        assert_eq!(a, b);
        let c = simulate_system(&p, &s0, &ts, SeedSpec::new(9, 3)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn incremental_sums_match_recount() {
        let p = hier(6, 0.4);
        let s0 = sample_initial_state(&p, SeedSpec::new(1, 0));
        let mut sim = Simulation::new(&p, &s0, SeedSpec::new(2, 0)).unwrap();
        sim.run_to(50.0);
        assert!(sim.flip_count() > 100);
        assert!(sim.sums_consistent());
        let st = sim.state();
        let direct = block_observables(&st, &p.shape);
        let inc = sim.observables();
        for d in 1..=2 {
            assert_eq!(direct.level(d).m, inc.level(d).m);
            for (a, b) in direct.level(d).x.iter().zip(&inc.level(d).x) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn resource_guard() {
        let p = ModelParams::new(HierarchyShape::new(2, 1000).unwrap(), vec![0.1; 2], vec![1.0; 2], 1.0)
            .unwrap();
        let s0 = SystemState {
            time: 0.0,
            spins: vec![1; 1_000_000],
            fields: vec![0.0; 1_000_000],
        };
        let ts = TimescaleSpec::uniform(2, 1e9, 1);
        assert!(matches!(
            simulate_system(&p, &s0, &ts, SeedSpec::new(1, 0)),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn bad_grid_rejected() {
        let mut ts = TimescaleSpec::uniform(0, 1.0, 4);
        ts.output_grid.push(0.5);
        assert!(ts.validate().is_err());
    }
}
