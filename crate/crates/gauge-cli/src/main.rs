//! `gauge-sim`: experiment harness around the patch-frame dynamics
//! engine. Five subcommands cover the standard workflows (quench
//! observables, deviation traces, asymptote scaling sweeps, onset scans,
//! butterfly-effect comparisons); each reads an optional `key = value`
//! config file, applies command-line overrides, writes CSV, and prints
//! fit summaries to standard output plus a `.fit.txt` sidecar.

mod commands;
mod config;
mod csvio;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{CommandKind, Overrides, RunConfig};
use error::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "gauge-sim",
    version,
    about = "Patch-frame quantum dynamics: quenches, deviation scaling, onset scans, chaos checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-site observables after a quench (single gamma, single L)
    Quench(CommonArgs),
    /// Pairwise deviations S_IJ(t) and their mean, per gamma
    Deviation(CommonArgs),
    /// Asymptote scaling over a (gamma, L) grid with the three-parameter fit
    Sweep(CommonArgs),
    /// Squiggle-onset scan over a gamma grid with the divergence fit
    Squiggle(CommonArgs),
    /// Frame dynamics vs exact reference at two step sizes, with growth fits
    Chaos(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Flat key = value config file ('#' comments)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Driving strength(s), comma-separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    gamma: Option<Vec<f64>>,
    /// Ring size(s) L, comma-separated
    #[arg(long, value_delimiter = ',')]
    length: Option<Vec<usize>>,
    /// Ising coupling J
    #[arg(long)]
    j: Option<f64>,
    /// Transverse field h_x
    #[arg(long)]
    hx: Option<f64>,
    /// Longitudinal field h_z
    #[arg(long)]
    hz: Option<f64>,
    /// Integration step
    #[arg(long)]
    dt: Option<f64>,
    /// Final time
    #[arg(long)]
    tmax: Option<f64>,
    /// Steps between recorded samples
    #[arg(long)]
    stride: Option<usize>,
    /// Output CSV path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default 1; results are deterministic either way)
    #[arg(long)]
    threads: Option<usize>,
    /// Identity-driving convention: literal | normalized
    #[arg(long)]
    convention: Option<String>,
    /// Size tier: desk (L <= 8) | full (L <= 10, slow)
    #[arg(long)]
    tier: Option<String>,
    /// Asymptote read-out time
    #[arg(long = "t-eval")]
    t_eval: Option<f64>,
    /// Trailing-window width for the asymptote
    #[arg(long)]
    window: Option<f64>,
    /// Initial state: plus_x | basis:<index>
    #[arg(long = "initial-state")]
    initial_state: Option<String>,
    /// Quench only: add exact-reference columns
    #[arg(long = "with-exact")]
    with_exact: bool,
    /// Fit-only mode: read points from this CSV instead of simulating
    #[arg(long)]
    points: Option<PathBuf>,
    /// Chaos only: step sizes, comma-separated (one or two)
    #[arg(long = "dt-list", value_delimiter = ',')]
    dt_list: Option<Vec<f64>>,
    /// Chaos only: row cadence of the comparison table
    #[arg(long = "sample-interval")]
    sample_interval: Option<f64>,
    /// Onset detection: ignore turnovers before this time
    #[arg(long = "onset-t-min")]
    onset_t_min: Option<f64>,
    /// Onset detection: relative drop threshold
    #[arg(long = "onset-epsilon")]
    onset_epsilon: Option<f64>,
}

impl CommonArgs {
    fn overrides(self) -> Overrides {
        Overrides {
            config: self.config,
            gamma: self.gamma,
            length: self.length,
            j: self.j,
            hx: self.hx,
            hz: self.hz,
            dt: self.dt,
            tmax: self.tmax,
            stride: self.stride,
            out: self.out,
            threads: self.threads,
            convention: self.convention,
            tier: self.tier,
            t_eval: self.t_eval,
            window: self.window,
            initial_state: self.initial_state,
            with_exact: self.with_exact,
            points: self.points,
            dt_list: self.dt_list,
            sample_interval: self.sample_interval,
            onset_t_min: self.onset_t_min,
            onset_epsilon: self.onset_epsilon,
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let (kind, args) = match cli.command {
        Command::Quench(a) => (CommandKind::Quench, a),
        Command::Deviation(a) => (CommandKind::Deviation, a),
        Command::Sweep(a) => (CommandKind::Sweep, a),
        Command::Squiggle(a) => (CommandKind::Squiggle, a),
        Command::Chaos(a) => (CommandKind::Chaos, a),
    };
    let cfg = RunConfig::load(kind, &args.overrides())?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    match kind {
        CommandKind::Quench => commands::quench::run(&cfg),
        CommandKind::Deviation => commands::deviation::run(&cfg),
        CommandKind::Sweep => commands::sweep::run(&cfg),
        CommandKind::Squiggle => commands::squiggle::run(&cfg),
        CommandKind::Chaos => commands::chaos::run(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
