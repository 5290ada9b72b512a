use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::segment::{count_line_with, DecomposeOptions, LineMode};
use super::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::net::ReluNet;
use crate::rng::Rng;

const MAX_RESAMPLES: usize = 100;

/// Second point through which each random line passes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineAnchor {
    /// The all-zero raw observation.
    Origin,
    /// Mean of the sampled points.
    Mean,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineDensitySummary {
    /// Mean of `R_T / N` over the lines.
    pub mean: f64,
    /// Population standard deviation of `R_T / N`.
    pub std: f64,
    /// Transition count on each line, in sampling order.
    pub transitions: Vec<usize>,
    #[serde(rename = "N")]
    pub neurons: usize,
    pub anchor: LineAnchor,
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn coincide(a: &[f64], b: &[f64]) -> bool {
    let scale = 1.0 + b.iter().map(|v| v * v).sum::<f64>().sqrt();
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt() <= 1e-12 * scale
}

/// Infinite lines through `n` states drawn uniformly (with replacement) from
/// the trajectory and the chosen anchor. Returns the transition counts and
/// their normalized mean and spread.
pub fn random_lines_density(
    net: &ReluNet,
    traj: &Trajectory,
    n: usize,
    anchor: LineAnchor,
    rng: &mut Rng,
) -> Result<LineDensitySummary> {
    random_lines_density_with(net, traj, n, anchor, rng, &DecomposeOptions::default())
}

pub fn random_lines_density_with(
    net: &ReluNet,
    traj: &Trajectory,
    n: usize,
    anchor: LineAnchor,
    rng: &mut Rng,
    opts: &DecomposeOptions,
) -> Result<LineDensitySummary> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one line".into()));
    }
    if traj.dim() != net.input_dim() {
        return Err(Error::DimensionMismatch {
            what: "trajectory",
            expected: net.input_dim(),
            found: traj.dim(),
        });
    }
    let states = traj.states();
    let mut points: Vec<&[f64]> = (0..n)
        .map(|_| states[rng.random_range(0..states.len())].as_slice())
        .collect();
    let d = traj.dim();
    let anchor_point: Vec<f64> = match anchor {
        LineAnchor::Origin => vec![0.0; d],
        LineAnchor::Mean => (0..d)
            .map(|i| points.iter().map(|p| p[i]).sum::<f64>() / n as f64)
            .collect(),
    };
    for p in &mut points {
        let mut tries = 0;
        while coincide(p, &anchor_point) {
            if tries == MAX_RESAMPLES {
                return Err(Error::Degenerate(format!(
                    "could not sample a state away from the line anchor after {MAX_RESAMPLES} retries"
                )));
            }
            *p = states[rng.random_range(0..states.len())].as_slice();
            tries += 1;
        }
    }
    let neurons = net.neuron_count();
    let mut transitions = Vec::with_capacity(n);
    for p in points {
        let dir: Vec<f64> = p.iter().zip(&anchor_point).map(|(a, b)| a - b).collect();
        let dec = count_line_with(net, &anchor_point, &dir, LineMode::Infinite, opts)?;
        transitions.push(dec.transitions());
    }
    let normalized: Vec<f64> = transitions.iter().map(|&t| t as f64 / neurons as f64).collect();
    let (mean, std) = mean_std(&normalized);
    Ok(LineDensitySummary {
        mean,
        std,
        transitions,
        neurons,
        anchor,
    })
}
