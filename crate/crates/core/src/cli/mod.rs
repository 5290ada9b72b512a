//! Command-line front end.
//!
//! Every command is a pure function of its input files, flags and `--seed`.
//! Exit codes: 0 success, 2 usage error, 3 input error, 4 numerical guard.

mod analyze;
mod render;
mod sweep;
mod train;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::region::LineAnchor;
use crate::toy::RolloutMode;

pub use analyze::{segment_report, SegmentReport};
pub use sweep::{fixed_trajectory, rows_csv, sweep, SweepMetric, SweepOptions, SweepRow};

#[derive(Debug, Parser)]
#[command(name = "region-atlas", version, about = "Exact linear-region analysis of ReLU policies")]
pub struct Cli {
    /// Seed for every random choice the command makes.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file or directory; standard output when omitted and allowed.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a toy policy and write a run directory.
    TrainToy(TrainArgs),
    /// Count regions for one network.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Evaluate a metric for every epoch of a run; CSV columns epoch,mean,std.
    Sweep(SweepArgs),
    /// Render the regions of a 2D slice as SVG.
    RenderPlane(RenderArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Ppo,
    Bc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Deterministic,
    Stochastic,
}

impl From<ModeArg> for RolloutMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Deterministic => RolloutMode::Deterministic,
            ModeArg::Stochastic => RolloutMode::Stochastic,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    /// Environment steps collected per PPO epoch.
    #[arg(long, default_value_t = crate::toy::PpoConfig::default().steps_per_epoch)]
    pub steps_per_epoch: usize,
    /// Learning rate; defaults to 3e-4 for PPO and 1e-3 for BC.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Hidden widths of the policy network.
    #[arg(long, value_delimiter = ',', default_value = "8,8")]
    pub widths: Vec<usize>,
    /// BC training data: a dataset JSON file or an expert run directory.
    #[arg(long, required_if_eq("algo", "bc"))]
    pub dataset: Option<PathBuf>,
    /// Noisy expert episodes labelled when `--dataset` is a run directory.
    #[arg(long, default_value_t = 20)]
    pub expert_episodes: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Deterministic)]
    pub current_mode: ModeArg,
    #[arg(long, default_value_t = 1)]
    pub current_episodes: usize,
    /// Replace an existing run directory.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct NetArgs {
    /// Checkpoint JSON file.
    #[arg(long, conflicts_with = "init_ppo")]
    pub ckpt: Option<PathBuf>,
    /// Use a freshly initialized PPO policy with these hidden widths instead
    /// of a checkpoint.
    #[arg(long, value_delimiter = ',', requires = "input_dim")]
    pub init_ppo: Option<Vec<usize>>,
    #[arg(long)]
    pub input_dim: Option<usize>,
    /// Attach a normalizer fitted to the trajectory's states.
    #[arg(long)]
    pub fit_normalizer: bool,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Regions crossed by the segment between two points.
    Segment {
        #[command(flatten)]
        net: NetArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        from: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        to: Vec<f64>,
    },
    /// Metrics along every trajectory in a trajectory or batch file.
    Trajectory {
        #[command(flatten)]
        net: NetArgs,
        #[arg(long)]
        traj: PathBuf,
    },
    /// Transitions on random infinite lines through trajectory states.
    Lines {
        #[command(flatten)]
        net: NetArgs,
        #[arg(long)]
        traj: PathBuf,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, value_enum, default_value_t = AnchorArg::Origin)]
        anchor: AnchorArg,
    },
    /// Metrics along random-action episodes of the toy environment.
    RandomTraj {
        #[command(flatten)]
        net: NetArgs,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AnchorArg {
    Origin,
    Mean,
}

impl From<AnchorArg> for LineAnchor {
    fn from(a: AnchorArg) -> Self {
        match a {
            AnchorArg::Origin => LineAnchor::Origin,
            AnchorArg::Mean => LineAnchor::Mean,
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub run: PathBuf,
    #[arg(long, value_enum)]
    pub metric: SweepMetric,
    /// Lines per epoch for the line metrics.
    #[arg(long, default_value_t = 100)]
    pub lines: usize,
    /// Random-action episodes for `random-traj`.
    #[arg(long, default_value_t = 10)]
    pub random_count: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Deterministic)]
    pub fixed_mode: ModeArg,
    /// Also write the fixed trajectory to this file.
    #[arg(long)]
    pub save_fixed: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OverlayArg {
    None,
    Fixed,
    Current,
    Both,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Run directory; renders the epochs listed in `--epochs`.
    #[arg(long, conflicts_with = "ckpt")]
    pub run: Option<PathBuf>,
    /// Single checkpoint to render.
    #[arg(long)]
    pub ckpt: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub epochs: Option<Vec<usize>>,
    /// Plot window `a_min,a_max,b_min,b_max` for two-dimensional inputs.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
    pub window: Option<Vec<f64>>,
    /// Build the plane through states sampled from this trajectory file.
    #[arg(long, conflicts_with = "window")]
    pub points_from: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 0.1)]
    pub margin: f64,
    #[arg(long, value_enum, default_value_t = OverlayArg::Both)]
    pub overlay: OverlayArg,
    /// Also write each arrangement as JSON next to its SVG.
    #[arg(long)]
    pub json: bool,
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::TrainToy(a) => train::run(cli, a),
        Command::Analyze(a) => analyze::run(cli, a),
        Command::Sweep(a) => sweep_cmd(cli, a),
        Command::RenderPlane(a) => render::run(cli, a),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::file(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn sweep_cmd(cli: &Cli, a: &SweepArgs) -> Result<()> {
    let run = crate::toy::TrainRun::load(&a.run)?;
    let mut opts = SweepOptions::new(a.metric);
    opts.lines = a.lines;
    opts.random_count = a.random_count;
    opts.fixed_mode = a.fixed_mode.into();
    opts.seed = cli.seed;
    opts.decompose = crate::region::DecomposeOptions::from_env()?;
    if let Some(p) = &a.save_fixed {
        crate::region::write_trajectory(p, &fixed_trajectory(&run, opts.fixed_mode, opts.seed)?)?;
    }
    let rows = sweep(&run, &opts)?;
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => rows_csv(&rows)?,
        Format::Json => to_json(&rows)?,
    };
    emit(cli.out.as_deref(), &text)
}
