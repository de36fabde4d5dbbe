//! `gauge`: command-line runner for the regularized scenario catalog.
//!
//! Every run resolves its configuration from defaults, then an optional
//! `key = value` config file, then explicit flags, and emits one JSON report
//! on stdout (or to `--out`; a `.csv` path gets the raw ladder instead).
//! Exit codes: 0 success, 2 usage, 3 numerical failure.

use std::fs;
use std::path::PathBuf;
use std::process;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod report;

use commands::CliError;
use config::{Command, RunConfig};

#[derive(Parser)]
#[command(name = "gauge", version, about = "Regularized gauge-field scenarios: flux, holonomy, and classification")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Scenario name; see `gauge list-scenarios`.
    #[arg(long)]
    scenario: Option<String>,
    /// Coupling strength.
    #[arg(long)]
    alpha: Option<f64>,
    /// Coarsest regularization scale.
    #[arg(long)]
    eps0: Option<f64>,
    /// Geometric ladder ratio in (0, 1).
    #[arg(long)]
    ratio: Option<f64>,
    /// Number of ladder rungs (at least 8).
    #[arg(long)]
    count: Option<usize>,
    /// Quadrature / extrapolation tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Transport step in curve parameter (holonomy only).
    #[arg(long)]
    step: Option<f64>,
    /// Integration surface, e.g. `disk:R=1` or `sphere:R=1`.
    #[arg(long)]
    patch: Option<String>,
    /// Transport loop, e.g. `circle:R=1`.
    #[arg(long = "loop")]
    loop_spec: Option<String>,
    /// Classification region (`box` = scenario default).
    #[arg(long)]
    region: Option<String>,
    /// Smooth part for su2_singular: zero, constant, or poly.
    #[arg(long)]
    smooth: Option<String>,
    /// Config file of `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout (`.csv` gets the ladder).
    #[arg(long)]
    out: Option<String>,
    /// Record transport samples in the diagnostics (holonomy only).
    #[arg(long)]
    trace: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Surface flux of the curvature along the ladder, extrapolated to the limit.
    Flux(Common),
    /// Parallel transport around a loop at the finest ladder rung.
    Holonomy(Common),
    /// Moderateness classification of the potential over a region.
    Classify(Common),
    /// Distributional pairing of the transverse curvature with a Gaussian.
    Shadow(Common),
    /// First Chern number over a closed surface.
    Chern(Common),
    /// Classify each curvature piece and their sum.
    Decompose(Common),
    /// Residuals of the connection-form axioms along the ladder.
    Axioms(Common),
    /// Distance between the reconstructed form and its canonicalization.
    Canonicalize(Common),
    /// List the built-in scenarios.
    ListScenarios,
}

fn usage_exit(msg: &str) -> ! {
    eprintln!("error: {msg}");
    process::exit(2);
}

fn build_config(command: Command, common: Common) -> RunConfig {
    let mut cfg = RunConfig::new(command);
    if let Some(path) = &common.config {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => usage_exit(&format!("cannot read config {}: {e}", path.display())),
        };
        if let Err(e) = cfg.apply_file(&text) {
            usage_exit(&e);
        }
        // the subcommand on the command line wins over a `command` line
        cfg.command = command;
    }
    if let Some(v) = common.scenario {
        cfg.scenario = v;
    }
    if let Some(v) = common.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = common.eps0 {
        cfg.eps0 = v;
    }
    if let Some(v) = common.ratio {
        cfg.ratio = v;
    }
    if let Some(v) = common.count {
        cfg.count = v;
    }
    if let Some(v) = common.tol {
        cfg.tol = v;
    }
    if let Some(v) = common.step {
        cfg.step = Some(v);
    }
    if let Some(v) = common.patch {
        cfg.patch = Some(v);
    }
    if let Some(v) = common.loop_spec {
        cfg.loop_spec = Some(v);
    }
    if let Some(v) = common.region {
        cfg.region = Some(v);
    }
    if let Some(v) = common.smooth {
        cfg.smooth = v;
    }
    if let Some(v) = common.out {
        cfg.out = Some(v);
    }
    if common.trace {
        cfg.trace = true;
    }
    if let Err(e) = cfg.validate() {
        usage_exit(&e);
    }
    cfg
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let (command, common) = match cli.cmd {
        Cmd::ListScenarios => {
            print!("{}", commands::list_scenarios());
            return;
        }
        Cmd::Flux(c) => (Command::Flux, c),
        Cmd::Holonomy(c) => (Command::Holonomy, c),
        Cmd::Classify(c) => (Command::Classify, c),
        Cmd::Shadow(c) => (Command::Shadow, c),
        Cmd::Chern(c) => (Command::Chern, c),
        Cmd::Decompose(c) => (Command::Decompose, c),
        Cmd::Axioms(c) => (Command::Axioms, c),
        Cmd::Canonicalize(c) => (Command::Canonicalize, c),
    };
    let cfg = build_config(command, common);
    if cfg.scenario == "su2_singular" {
        let two_alpha = 2.0 * cfg.alpha;
        if (two_alpha - two_alpha.round()).abs() <= 1e-9 {
            eprintln!(
                "warning: 2*alpha = {two_alpha} is an integer; the su2_singular holonomy is trivial at this coupling"
            );
        }
    }
    match commands::run(&cfg) {
        Ok(rep) => match &cfg.out {
            None => print!("{}", rep.to_json_string()),
            Some(path) => {
                let payload =
                    if path.ends_with(".csv") { rep.to_csv() } else { rep.to_json_string() };
                if let Err(e) = fs::write(path, payload) {
                    eprintln!("error: cannot write {path}: {e}");
                    process::exit(1);
                }
            }
        },
        Err(CliError::Usage(msg)) => usage_exit(&msg),
        Err(CliError::Numeric(err)) => {
            print!("{}", report::failure_json(&cfg, &err));
            process::exit(3);
        }
    }
}
