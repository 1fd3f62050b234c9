use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use hierspin_cli::config::validate;
use hierspin_cli::{parse_config, run_experiment, Kind};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Simulate,
    Limits,
    Zerotemp,
    Converge,
    Accept,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BudgetArg {
    Desk,
    Full,
}

/// Hierarchical spin systems with dynamical fields: simulation, limits and acceptance.
#[derive(Debug, Parser)]
#[command(name = "hierspin", version)]
struct Cli {
    kind: KindArg,
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the config and HIERSPIN_OUT.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    budget: Option<BudgetArg>,
}

fn kind_of(k: KindArg) -> Kind {
    match k {
        KindArg::Simulate => Kind::Simulate,
        KindArg::Limits => Kind::Limits,
        KindArg::Zerotemp => Kind::Zerotemp,
        KindArg::Converge => Kind::Converge,
        KindArg::Accept => Kind::Accept,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let kind = kind_of(cli.kind);
    let text = match &cli.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return ExitCode::from(1);
            }
        },
        None => format!("{{\"kind\":\"{}\"}}", kind.as_str()),
    };
    let mut parsed = match parse_config(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let c = &mut parsed.config;
    if c.kind != kind {
        eprintln!("error: config kind `{}` does not match command `{}`", c.kind.as_str(), kind.as_str());
        return ExitCode::from(1);
    }
    if let Some(s) = cli.seed {
        c.master_seed = s;
    }
    if let Some(b) = cli.budget {
        c.budget = match b {
            BudgetArg::Desk => "desk".into(),
            BudgetArg::Full => "full".into(),
        };
    }
    if let Some(out) = cli.out {
        c.output_dir = out.to_string_lossy().into_owned();
    } else if let Ok(env_out) = std::env::var("HIERSPIN_OUT") {
        if parsed.defaults.iter().any(|d| d == "output_dir") {
            c.output_dir = env_out;
        }
    }
    if let Err(e) = validate(c) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match run_experiment(&parsed) {
        Ok(rep) => {
            for line in &rep.summary {
                println!("{line}");
            }
            println!("wrote {}", rep.csv.display());
            println!("wrote {}", rep.manifest.display());
            if rep.passed == Some(false) {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
