use serde::Serialize;

use super::{emit, to_json, AnalyzeCommand, Cli, Format, NetArgs};
use crate::error::{Error, Result};
use crate::net::init::{init_net, InitScheme};
use crate::net::{ReluNet, RunningObsStats};
use crate::region::{
    decompose_segment_with, metrics_csv, random_lines_density_with, read_trajectories, trajectory_metrics_with,
    DecomposeOptions, ParamSegment, Trajectory, TrajectoryMetrics,
};
use crate::rng;
use crate::toy::{random_action_trajectories, ToyEnvConfig};

/// Metrics for a single segment plus where it crosses region boundaries.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentReport {
    #[serde(flatten)]
    pub metrics: TrajectoryMetrics,
    /// Crossing parameters in `(0, 1)`.
    pub crossings: Vec<f64>,
    /// Hex-encoded patterns in order along the segment.
    pub patterns: Vec<String>,
}

pub fn segment_report(net: &ReluNet, from: &[f64], to: &[f64], opts: &DecomposeOptions) -> Result<SegmentReport> {
    let seg = ParamSegment::segment(from, to)?;
    let dec = decompose_segment_with(net, &seg, opts)?;
    let traj = Trajectory::new(vec![from.to_vec(), to.to_vec()], crate::region::Provenance::External)?;
    Ok(SegmentReport {
        metrics: trajectory_metrics_with(net, &traj, opts)?,
        crossings: dec.crossing_points(),
        patterns: dec.patterns().map(|p| p.to_hex()).collect(),
    })
}

fn load_net(cli: &Cli, args: &NetArgs, traj: Option<&[Trajectory]>) -> Result<ReluNet> {
    let net = match (&args.ckpt, &args.init_ppo) {
        (Some(p), _) => ReluNet::load(p)?,
        (None, Some(widths)) => {
            let d = args.input_dim.ok_or_else(|| Error::Usage("--init-ppo needs --input-dim".into()))?;
            let mut r = rng::stream(cli.seed, "cli-init");
            init_net(&mut r, d, widths, 1, InitScheme::ppo_policy())
        }
        (None, None) => return Err(Error::Usage("pass --ckpt <file> or --init-ppo <widths>".into())),
    };
    if !args.fit_normalizer {
        return Ok(net);
    }
    let trajs = traj.ok_or_else(|| Error::Usage("--fit-normalizer needs a trajectory input".into()))?;
    let mut stats = RunningObsStats::new(net.input_dim());
    for s in trajs.iter().flat_map(|t| t.states()) {
        if s.len() != net.input_dim() {
            return Err(Error::DimensionMismatch {
                what: "trajectory",
                expected: net.input_dim(),
                found: s.len(),
            });
        }
        stats.update(s);
    }
    net.without_normalizer().with_normalizer(stats.to_normalizer(None))
}

fn metrics_output(cli: &Cli, metrics: &[TrajectoryMetrics]) -> Result<String> {
    match cli.format.unwrap_or(Format::Json) {
        Format::Csv => metrics_csv(metrics.iter().enumerate()),
        Format::Json if metrics.len() == 1 => to_json(&metrics[0]),
        Format::Json => to_json(&metrics),
    }
}

pub(super) fn run(cli: &Cli, cmd: &AnalyzeCommand) -> Result<()> {
    let opts = DecomposeOptions::from_env()?;
    let text = match cmd {
        AnalyzeCommand::Segment { net, from, to } => {
            let n = load_net(cli, net, None)?;
            let r = segment_report(&n, from, to, &opts)?;
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&r)?,
                Format::Csv => metrics_csv([(0, &r.metrics)])?,
            }
        }
        AnalyzeCommand::Trajectory { net, traj } => {
            let trajs = read_trajectories(traj)?;
            let n = load_net(cli, net, Some(&trajs))?;
            let m: Vec<TrajectoryMetrics> =
                trajs.iter().map(|t| trajectory_metrics_with(&n, t, &opts)).collect::<Result<_>>()?;
            metrics_output(cli, &m)?
        }
        AnalyzeCommand::Lines { net, traj, n, anchor } => {
            let trajs = read_trajectories(traj)?;
            let states: Vec<Vec<f64>> = trajs.iter().flat_map(|t| t.states().iter().cloned()).collect();
            let all = Trajectory::new(states, crate::region::Provenance::External)?;
            let netw = load_net(cli, net, Some(&trajs))?;
            let mut r = rng::stream(cli.seed, "lines");
            let s = random_lines_density_with(&netw, &all, *n, (*anchor).into(), &mut r, &opts)?;
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&s)?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["line", "R_T", "density"])?;
                    for (i, t) in s.transitions.iter().enumerate() {
                        w.write_record([i.to_string(), t.to_string(), (*t as f64 / s.neurons as f64).to_string()])?;
                    }
                    String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
                        .expect("csv output is utf-8")
                }
            }
        }
        AnalyzeCommand::RandomTraj { net, count } => {
            let trajs = random_action_trajectories(&ToyEnvConfig::default(), *count, cli.seed);
            let n = load_net(cli, net, Some(&trajs))?;
            let m: Vec<TrajectoryMetrics> =
                trajs.iter().map(|t| trajectory_metrics_with(&n, t, &opts)).collect::<Result<_>>()?;
            metrics_output(cli, &m)?
        }
    };
    emit(cli.out.as_deref(), &text)
}
