//! Per-epoch metric series over a training run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::ReluNet;
use crate::region::{
    mean_std, random_lines_density_with, trajectory_counts, DecomposeOptions, LineAnchor, Provenance,
    Trajectory,
};
use crate::rng;
use crate::toy::{random_action_trajectories, rollout, RolloutMode, TrainRun};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMetric {
    /// `R_T / (N L)` along the fixed final-policy trajectory.
    DensityFixed,
    /// `R_T / (N L)` along each epoch's own trajectories.
    DensityCurrent,
    TransitionsFixed,
    TransitionsCurrent,
    LengthCurrent,
    RepeatsCurrent,
    /// `R_T / N` on random lines through fixed-trajectory states and the raw origin.
    LinesOrigin,
    /// As `lines-origin`, anchored at the mean of the sampled states.
    LinesMean,
    /// `R_T / (N L)` along random-action trajectories.
    RandomTraj,
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub metric: SweepMetric,
    pub lines: usize,
    pub random_count: usize,
    /// Rollout mode for the fixed trajectory.
    pub fixed_mode: RolloutMode,
    pub seed: u64,
    pub decompose: DecomposeOptions,
}

impl SweepOptions {
    pub fn new(metric: SweepMetric) -> Self {
        Self {
            metric,
            lines: 100,
            random_count: 10,
            fixed_mode: RolloutMode::Deterministic,
            seed: 0,
            decompose: DecomposeOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epoch: usize,
    pub mean: f64,
    pub std: f64,
}

/// The fixed trajectory: one rollout of the final checkpoint.
pub fn fixed_trajectory(run: &TrainRun, mode: RolloutMode, seed: u64) -> Result<Trajectory> {
    let ep = rollout(&run.meta.env, &run.final_policy()?, mode, seed)?;
    Ok(ep.trajectory(Provenance::Fixed))
}

fn density(net: &ReluNet, traj: &Trajectory, opts: &DecomposeOptions) -> Result<Option<f64>> {
    let (rt, _, l) = trajectory_counts(net, traj, opts)?;
    Ok((l > 0.0).then(|| rt as f64 / (net.neuron_count() as f64 * l)))
}

fn row(epoch: usize, values: &[f64]) -> SweepRow {
    let (mean, std) = mean_std(values);
    SweepRow { epoch, mean, std }
}

/// One row per epoch. Densities along zero-length trajectories are
/// undefined and left out of the average; a row with no defined value
/// reports NaN.
pub fn sweep(run: &TrainRun, opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    use SweepMetric::*;
    if run.checkpoints.is_empty() {
        return Err(Error::InvalidInput("run has no checkpoints".into()));
    }
    let needs_fixed = matches!(opts.metric, DensityFixed | TransitionsFixed | LinesOrigin | LinesMean);
    let fixed = if needs_fixed {
        Some(fixed_trajectory(run, opts.fixed_mode, opts.seed)?)
    } else {
        None
    };
    let random = if opts.metric == RandomTraj {
        random_action_trajectories(&run.meta.env, opts.random_count, opts.seed)
    } else {
        Vec::new()
    };
    let d = &opts.decompose;
    let mut rows = Vec::with_capacity(run.checkpoints.len());
    for (epoch, net) in run.checkpoints.iter().enumerate() {
        let current = || -> Result<&Vec<Trajectory>> {
            match run.current.get(epoch) {
                Some(b) if !b.is_empty() => Ok(b),
                _ => Err(Error::InvalidInput(format!("no current trajectories stored for epoch {epoch}"))),
            }
        };
        let mut values = Vec::new();
        match opts.metric {
            DensityFixed => values.extend(density(net, fixed.as_ref().unwrap(), d)?),
            TransitionsFixed => values.push(trajectory_counts(net, fixed.as_ref().unwrap(), d)?.0 as f64),
            DensityCurrent => {
                for t in current()? {
                    values.extend(density(net, t, d)?);
                }
            }
            TransitionsCurrent | LengthCurrent | RepeatsCurrent => {
                for t in current()? {
                    let (rt, ru, l) = trajectory_counts(net, t, d)?;
                    values.push(match opts.metric {
                        TransitionsCurrent => rt as f64,
                        LengthCurrent => l,
                        _ => rt as f64 - ru as f64,
                    });
                }
            }
            LinesOrigin | LinesMean => {
                let anchor = if opts.metric == LinesOrigin { LineAnchor::Origin } else { LineAnchor::Mean };
                let mut r = rng::stream(opts.seed, "lines");
                let s = random_lines_density_with(net, fixed.as_ref().unwrap(), opts.lines, anchor, &mut r, d)?;
                values.extend(s.transitions.iter().map(|&t| t as f64 / s.neurons as f64));
            }
            RandomTraj => {
                for t in &random {
                    values.extend(density(net, t, d)?);
                }
            }
        }
        rows.push(row(epoch, &values));
    }
    Ok(rows)
}

pub fn rows_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
