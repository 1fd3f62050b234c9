//! Experiment dispatch and output files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use hierspin::acceptance::{self, Budget};
use hierspin::harness::{chaos_error, contraction_stat, SweepSpec};
use hierspin::limits::curve::critical_points;
use hierspin::limits::fixed::{order_n2_law, LawMode};
use hierspin::limits::measure::GaussianMeasure;
use hierspin::limits::ode::meanfield_ode;
use hierspin::limits::renorm::renormalization_map;
use hierspin::limits::sde::{limit_sde_meanfield, ArrivalRule, Regime};
use hierspin::limits::{curve_table, jump_target, path_table as limit_path_table};
use hierspin::rng::SeedSpec;
use hierspin::sim::export::{path_table, snapshot_table};
use hierspin::sim::{sample_initial_state, simulate_system};
use hierspin::table::{num, Table, SCHEMA_VERSION};
use hierspin::zerotemp::{
    attractor_threshold, covering_grid, profile_table, region_borders, region_table, sign_dynamics,
    Side, StaircaseProfile,
};

use crate::config::{canonical, model_params, timescale, ExperimentConfig, Kind, Parsed};

/// Run failure tagged with the module and operation that raised it.
#[derive(Debug)]
pub struct RunError(pub String);

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for RunError {}

fn ctx<T, E: std::fmt::Display>(r: Result<T, E>, module: &str, op: &str) -> Result<T, RunError> {
    r.map_err(|e| RunError(format!("{module}.{op}: {e}")))
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub kind: &'static str,
    pub op: String,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub defaults_applied: Vec<String>,
    pub outputs: Vec<String>,
    pub passed: Option<bool>,
}

#[derive(Debug)]
pub struct RunReport {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    /// `Some(false)` when an acceptance run had failures.
    pub passed: Option<bool>,
    pub summary: Vec<String>,
}

/// First 16 hex digits of the SHA-256 of the canonical config, output
/// directory excluded.
pub fn config_hash(c: &ExperimentConfig) -> String {
    let mut c = c.clone();
    c.output_dir.clear();
    let digest = Sha256::digest(canonical(&c).as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub fn run_experiment(parsed: &Parsed) -> Result<RunReport, RunError> {
    let c = &parsed.config;
    let (table, passed, summary) = match c.kind {
        Kind::Simulate => (simulate(c)?, None, Vec::new()),
        Kind::Limits => (limits(c)?, None, Vec::new()),
        Kind::Zerotemp => (zerotemp(c)?, None, Vec::new()),
        Kind::Converge => (converge(c)?, None, Vec::new()),
        Kind::Accept => {
            let budget = if c.budget == "full" { Budget::Full } else { Budget::Desk };
            let outcomes: Vec<_> = c
                .criteria
                .iter()
                .map(|&id| acceptance::run(id, c.master_seed, budget))
                .collect();
            let ok = outcomes.iter().all(|o| o.passed);
            let lines = outcomes.iter().map(|o| o.line()).collect();
            (acceptance::outcome_table(&outcomes), Some(ok), lines)
        }
    };
    let hash = config_hash(c);
    let dir = Path::new(&c.output_dir);
    ctx(fs::create_dir_all(dir), "cli", "emit_plot_data")?;
    let stem = format!("{}_{}", c.kind.as_str(), hash);
    let csv = dir.join(format!("{stem}.csv"));
    ctx(table.write_file(&csv), "cli", "emit_plot_data")?;
    let manifest_path = dir.join(format!("{stem}.manifest.json"));
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        kind: c.kind.as_str(),
        op: c.op.clone(),
        config_hash: hash,
        config: serde_json::to_value(c).expect("config serializes"),
        defaults_applied: parsed.defaults.clone(),
        outputs: vec![csv.file_name().unwrap().to_string_lossy().into_owned()],
        passed,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    ctx(fs::write(&manifest_path, text + "\n"), "cli", "emit_plot_data")?;
    Ok(RunReport {
        csv,
        manifest: manifest_path,
        passed,
        summary,
    })
}

fn simulate(c: &ExperimentConfig) -> Result<Table, RunError> {
    let params = ctx(model_params(c), "model", "ModelParams")?;
    let ts = timescale(c);
    let seed = SeedSpec::new(c.master_seed, 0);
    let state = sample_initial_state(&params, seed.derive(1));
    let path = ctx(simulate_system(&params, &state, &ts, seed.derive(2)), "sim", "simulate_system")?;
    Ok(match c.op.as_str() {
        "snapshot" => {
            let (_, st) = path
                .snapshots
                .last()
                .ok_or_else(|| RunError("sim.simulate_system: op `snapshot` needs timescale.snapshot_times".into()))?;
            snapshot_table(st)
        }
        _ => path_table(&path),
    })
}

fn limits(c: &ExperimentConfig) -> Result<Table, RunError> {
    let op = c.op.as_str();
    let b0 = c.beta[0];
    match op {
        "critical_points" => {
            let mut t = Table::new("critical_points", &["beta", "lambda_a", "m_a", "m_b"]);
            for &beta in &c.beta {
                let (la, ma) = ctx(critical_points(beta), "limits", op)?;
                let mb = ctx(jump_target(beta), "limits", "jump_target")?;
                t.push(vec![num(beta), format!("{la:.6}"), format!("{ma:.6}"), format!("{mb:.4}")]);
            }
            Ok(t)
        }
        "invariant_curve" => {
            let xs = c.x_grid.nodes();
            let mut t = Table::new("curve", &["beta", "x", "m", "branch"]);
            for &beta in &c.beta {
                for row in curve_table(beta, c.offset, &xs).rows {
                    let mut r = vec![num(beta)];
                    r.extend(row);
                    t.rows.push(r);
                }
            }
            Ok(t)
        }
        "meanfield_ode" => {
            let path = ctx(
                meanfield_ode(b0, c.x0 + c.m0, c.m0, c.timescale.horizon, c.dt, 1),
                "limits",
                op,
            )?;
            let mut t = Table::new("ode_path", &["t", "lambda", "m"]);
            for i in 0..path.t.len() {
                t.push(vec![num(path.t[i]), num(path.lambda[i]), num(path.m[i])]);
            }
            Ok(t)
        }
        "limit_sde" => {
            let regime = if b0 > 1.0 { Regime::Supercritical } else { Regime::Subcritical };
            let path = ctx(
                limit_sde_meanfield(
                    b0,
                    c.sigma,
                    c.m0,
                    c.timescale.horizon,
                    c.dt,
                    SeedSpec::new(c.master_seed, 0),
                    regime,
                    ArrivalRule::OppositeBranch,
                ),
                "limits",
                op,
            )?;
            Ok(limit_path_table(&path))
        }
        "order_n2_law" => {
            let b2 = c.beta.get(1).copied().unwrap_or(0.0);
            let a2 = c.alpha.get(1).copied().unwrap_or(1.0);
            let mode = if c.mode == "unconditional" { LawMode::Unconditional } else { LawMode::Conditional };
            let mut t = Table::new("order_n2_law", &["X", "t", "M"]);
            for x in c.x_grid.nodes() {
                let m = ctx(order_n2_law(b0, b2, c.sigma, a2, x, c.t, mode), "limits", op)?;
                t.push(vec![num(x), num(c.t), num(m)]);
            }
            Ok(t)
        }
        "renormalization" => {
            let params = ctx(model_params(c), "model", "ModelParams")?;
            let mut t = Table::new("renormalization", &["x", "y", "t", "value", "ledger"]);
            for x in c.x_grid.nodes() {
                let r = ctx(renormalization_map(c.depth, &params, x, c.y, c.t), "limits", op)?;
                let ledger = r.ledger.iter().map(|&l| num(l)).collect::<Vec<_>>().join(";");
                t.push(vec![num(x), num(c.y), num(c.t), num(r.value), ledger]);
            }
            Ok(t)
        }
        _ => unreachable!("validated op"),
    }
}

fn zerotemp(c: &ExperimentConfig) -> Result<Table, RunError> {
    let op = c.op.as_str();
    let a2 = c.alpha.get(1).copied().unwrap_or(c.alpha[0]);
    match op {
        "region" => {
            let b = ctx(region_borders(c.sigma, a2, &c.x_grid.nodes()), "zerotemp", "region_borders")?;
            Ok(region_table(&b))
        }
        "attractor" => {
            let mu = ctx(GaussianMeasure::new(0.0, c.sigma * c.sigma / (2.0 * a2)), "zerotemp", op)?;
            let l = ctx(attractor_threshold(mu, Side::Left), "zerotemp", "attractor_threshold")?;
            let r = ctx(attractor_threshold(mu, Side::Right), "zerotemp", "attractor_threshold")?;
            let mut t = Table::new("attractor", &["variance", "left", "right"]);
            t.push(vec![num(mu.variance), num(l), num(r)]);
            Ok(t)
        }
        "dynamics" => {
            let mu = ctx(GaussianMeasure::new(0.0, c.sigma * c.sigma / (2.0 * a2)), "zerotemp", op)?;
            let xs = covering_grid(&mu, c.x_top, 0.01);
            let p0 = ctx(StaircaseProfile { x0: c.x0 }.on_grid(&xs, mu), "zerotemp", "staircase")?;
            let h = c.dt.min(0.5).max(1e-4);
            let every = ((c.timescale.horizon / h) / c.timescale.points.max(1) as f64).ceil() as usize;
            let path = ctx(
                sign_dynamics(&p0, c.x_top, c.timescale.horizon, h, every.max(1)),
                "zerotemp",
                "sign_dynamics",
            )?;
            Ok(profile_table(&path, &xs))
        }
        _ => unreachable!("validated op"),
    }
}

fn converge(c: &ExperimentConfig) -> Result<Table, RunError> {
    let params = ctx(model_params(c), "model", "ModelParams")?;
    let budget = if c.budget == "full" { 4 } else { 1 };
    let sweep = SweepSpec {
        ns: c.sweep.ns.clone(),
        replicas: c.sweep.replicas * budget,
        timescale: timescale(c),
        master_seed: c.master_seed,
        statistic: c.sweep.statistic.clone(),
    };
    let table = match c.op.as_str() {
        "contraction" => ctx(contraction_stat(&params, &sweep, 1.0), "harness", "contraction_stat")?,
        _ => ctx(chaos_error(&params, &sweep), "harness", "chaos_error")?,
    };
    Ok(table.to_table())
}
