//! Experiment configuration: strict JSON in, canonical JSON out.

use serde::{Deserialize, Serialize};

use hierspin::model::{FieldInit, HierarchyShape, ModelParams, Temperature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Simulate,
    Limits,
    Zerotemp,
    Converge,
    Accept,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Simulate => "simulate",
            Kind::Limits => "limits",
            Kind::Zerotemp => "zerotemp",
            Kind::Converge => "converge",
            Kind::Accept => "accept",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldInitConfig {
    pub mean: f64,
    pub std: f64,
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimescaleConfig {
    pub exponent: u32,
    pub horizon: f64,
    /// Intervals of the uniform output grid.
    pub points: usize,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub ns: Vec<usize>,
    pub replicas: usize,
    pub statistic: String,
}

/// Uniform grid `from..=to` with `points` nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl GridConfig {
    pub fn nodes(&self) -> Vec<f64> {
        if self.points <= 1 {
            return vec![self.from];
        }
        (0..self.points)
            .map(|i| self.from + (self.to - self.from) * i as f64 / (self.points - 1) as f64)
            .collect()
    }
}

/// Validated configuration with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub op: String,
    pub levels: usize,
    pub block_size: usize,
    pub beta: Vec<f64>,
    pub zero_temperature: bool,
    pub alpha: Vec<f64>,
    pub sigma: f64,
    pub spin_up_prob: f64,
    pub field_init: FieldInitConfig,
    pub timescale: TimescaleConfig,
    pub sweep: SweepConfig,
    pub master_seed: u64,
    pub output_dir: String,
    pub budget: String,
    pub x_grid: GridConfig,
    pub x_top: f64,
    pub t: f64,
    pub offset: f64,
    pub m0: f64,
    pub dt: f64,
    pub depth: usize,
    pub y: f64,
    pub x0: f64,
    pub mode: String,
    pub criteria: Vec<usize>,
}

/// Input document: everything optional except `kind`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: Option<Kind>,
    op: Option<String>,
    levels: Option<usize>,
    block_size: Option<usize>,
    beta: Option<Vec<f64>>,
    zero_temperature: Option<bool>,
    alpha: Option<Vec<f64>>,
    sigma: Option<f64>,
    spin_up_prob: Option<f64>,
    field_init: Option<FieldInitConfig>,
    timescale: Option<TimescaleConfig>,
    sweep: Option<SweepConfig>,
    master_seed: Option<u64>,
    output_dir: Option<String>,
    budget: Option<String>,
    x_grid: Option<GridConfig>,
    x_top: Option<f64>,
    t: Option<f64>,
    offset: Option<f64>,
    m0: Option<f64>,
    dt: Option<f64>,
    depth: Option<usize>,
    y: Option<f64>,
    x0: Option<f64>,
    mode: Option<String>,
    criteria: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn default_op(kind: Kind) -> &'static str {
    match kind {
        Kind::Simulate => "path",
        Kind::Limits => "critical_points",
        Kind::Zerotemp => "region",
        Kind::Converge => "contraction",
        Kind::Accept => "all",
    }
}

pub const OPS: [(Kind, &[&str]); 5] = [
    (Kind::Simulate, &["path", "snapshot"]),
    (
        Kind::Limits,
        &[
            "critical_points",
            "invariant_curve",
            "meanfield_ode",
            "limit_sde",
            "order_n2_law",
            "renormalization",
        ],
    ),
    (Kind::Zerotemp, &["region", "attractor", "dynamics"]),
    (Kind::Converge, &["contraction", "chaos"]),
    (Kind::Accept, &["all"]),
];

/// Parsed config plus the names of the fields that took their default.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub config: ExperimentConfig,
    pub defaults: Vec<String>,
}

pub fn parse_config(text: &str) -> Result<Parsed, ConfigError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
    let mut defaults = Vec::new();
    macro_rules! take {
        ($field:ident, $default:expr) => {
            match raw.$field {
                Some(v) => v,
                None => {
                    defaults.push(stringify!($field).to_string());
                    $default
                }
            }
        };
    }
    let kind = raw.kind.ok_or_else(|| ConfigError("missing field `kind`".into()))?;
    let op = take!(op, default_op(kind).to_string());
    let beta = take!(beta, vec![0.5]);
    let levels = take!(levels, if kind == Kind::Limits { 1 } else { beta.len().max(1) });
    let config = ExperimentConfig {
        kind,
        op,
        levels,
        block_size: take!(block_size, 100),
        zero_temperature: take!(zero_temperature, false),
        alpha: take!(alpha, vec![1.0; levels]),
        sigma: take!(sigma, 1.0),
        spin_up_prob: take!(spin_up_prob, 0.5),
        field_init: take!(
            field_init,
            FieldInitConfig {
                mean: 0.0,
                std: 1.0,
                level: 0
            }
        ),
        timescale: take!(
            timescale,
            TimescaleConfig {
                exponent: 0,
                horizon: 1.0,
                points: 100,
                snapshot_times: Vec::new()
            }
        ),
        sweep: take!(
            sweep,
            SweepConfig {
                ns: vec![50, 100, 200],
                replicas: 20,
                statistic: "E[sup|y|]".into()
            }
        ),
        master_seed: take!(master_seed, 0),
        output_dir: take!(output_dir, ".".into()),
        budget: take!(budget, "desk".into()),
        x_grid: take!(
            x_grid,
            GridConfig {
                from: -3.0,
                to: 3.0,
                points: 61
            }
        ),
        x_top: take!(x_top, 0.0),
        t: take!(t, 1.0),
        offset: take!(offset, 0.0),
        m0: take!(m0, 0.0),
        dt: take!(dt, 1e-3),
        depth: take!(depth, 1),
        y: take!(y, 0.0),
        x0: take!(x0, 0.0),
        mode: take!(mode, "conditional".into()),
        criteria: take!(criteria, (1..=12).collect()),
        beta,
    };
    validate(&config)?;
    Ok(Parsed { config, defaults })
}

pub fn validate(c: &ExperimentConfig) -> Result<(), ConfigError> {
    let ops = OPS.iter().find(|(k, _)| *k == c.kind).map(|(_, o)| *o).unwrap_or(&[]);
    if !ops.contains(&c.op.as_str()) {
        return Err(ConfigError(format!(
            "op: `{}` is not valid for kind `{}` (expected one of {})",
            c.op,
            c.kind.as_str(),
            ops.join(", ")
        )));
    }
    if c.beta.is_empty() || c.beta.iter().any(|b| !b.is_finite() || *b < 0.0) {
        return Err(ConfigError("beta: entries must be finite and >= 0".into()));
    }
    if c.budget != "desk" && c.budget != "full" {
        return Err(ConfigError(format!("budget: expected `desk` or `full`, got `{}`", c.budget)));
    }
    if c.mode != "conditional" && c.mode != "unconditional" {
        return Err(ConfigError(format!("mode: expected `conditional` or `unconditional`, got `{}`", c.mode)));
    }
    if c.criteria.iter().any(|&i| !(1..=12).contains(&i)) {
        return Err(ConfigError("criteria: ids must lie in 1..=12".into()));
    }
    if c.kind == Kind::Converge {
        if c.zero_temperature || c.beta.iter().sum::<f64>() >= 1.0 {
            return Err(ConfigError(format!(
                "beta: subciticality violated (sum of beta = {} must be < 1 for converge)",
                c.beta.iter().sum::<f64>()
            )));
        }
    }
    let needs_model = matches!(c.kind, Kind::Simulate | Kind::Converge)
        || (c.kind == Kind::Limits && c.op == "renormalization");
    if needs_model {
        model_params(c)?;
    }
    if matches!(c.kind, Kind::Simulate | Kind::Converge) {
        timescale(c).validate().map_err(|e| ConfigError(format!("timescale: {e}")))?;
    }
    Ok(())
}

pub fn model_params(c: &ExperimentConfig) -> Result<ModelParams, ConfigError> {
    let shape = HierarchyShape::new(c.levels, c.block_size).map_err(|e| ConfigError(format!("levels/block_size: {e}")))?;
    let mut p = ModelParams::new(shape, c.beta.clone(), c.alpha.clone(), c.sigma)
        .map_err(|e| ConfigError(format!("model: {e}")))?
        .with_spin_up_prob(c.spin_up_prob)
        .with_field_init(FieldInit {
            mean: c.field_init.mean,
            std: c.field_init.std,
            level: c.field_init.level,
        });
    if c.zero_temperature {
        p.temperature = Temperature::Zero;
    }
    p.validate().map_err(|e| ConfigError(format!("model: {e}")))?;
    Ok(p)
}

pub fn timescale(c: &ExperimentConfig) -> hierspin::sim::TimescaleSpec {
    let mut ts = hierspin::sim::TimescaleSpec::uniform(c.timescale.exponent, c.timescale.horizon, c.timescale.points.max(1));
    ts.snapshot_times = c.timescale.snapshot_times.clone();
    ts
}

/// Canonical serialization: fixed field order, no whitespace.
pub fn canonical(c: &ExperimentConfig) -> String {
    serde_json::to_string(c).expect("config serializes")
}
