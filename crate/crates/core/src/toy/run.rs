//! Training runs and their on-disk layout.
//!
//! ```text
//! run.json                 seed, environment, algorithm and hyperparameters
//! ckpt/epoch_0000.json     checkpoint per epoch, contiguous from 0
//! traj/epoch_0000.json     current-trajectory batch per epoch
//! returns.csv              epoch,mean_return,std_return,final_error,log_std
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::bc::BcConfig;
use super::env::ToyEnvConfig;
use super::policy::GaussianPolicy;
use super::ppo::PpoConfig;
use super::rollout::{rollout, Episode, RolloutMode};
use crate::error::{Error, Result};
use crate::net::ReluNet;
use crate::region::{read_trajectories, Provenance, Trajectory, TrajectoryBatch};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algo", content = "hyper", rename_all = "lowercase")]
pub enum RunConfig {
    Ppo(PpoConfig),
    Bc(BcConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub seed: u64,
    pub env: ToyEnvConfig,
    #[serde(flatten)]
    pub config: RunConfig,
}

/// Evaluation of one epoch's checkpoint on its current-trajectory batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_return: f64,
    pub std_return: f64,
    /// Mean `|x(T) - target|` over the batch.
    pub final_error: f64,
    pub log_std: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainRun {
    pub meta: RunMeta,
    /// Policy mean networks with their normalizer snapshots, indexed by epoch.
    pub checkpoints: Vec<ReluNet>,
    pub current: Vec<Vec<Trajectory>>,
    pub stats: Vec<EpochStats>,
}

/// Summary of a batch of evaluation episodes.
pub(crate) fn epoch_stats(epoch: usize, env: &ToyEnvConfig, episodes: &[Episode], log_std: f64) -> EpochStats {
    let returns: Vec<f64> = episodes.iter().map(Episode::total_return).collect();
    let (mean_return, std_return) = crate::region::mean_std(&returns);
    let final_error = episodes.iter().map(|e| e.final_error(env)).sum::<f64>() / episodes.len() as f64;
    EpochStats {
        epoch,
        mean_return,
        std_return,
        final_error,
        log_std,
    }
}

/// Rollout settings for each epoch's current-trajectory batch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurrentBatch {
    pub mode: RolloutMode,
    pub episodes: usize,
}

impl Default for CurrentBatch {
    fn default() -> Self {
        Self {
            mode: RolloutMode::Deterministic,
            episodes: 1,
        }
    }
}

impl CurrentBatch {
    /// Rolls out the batch for `epoch`; episode `i` uses seed
    /// `base + epoch * episodes + i`.
    pub(crate) fn collect(
        &self,
        env: &ToyEnvConfig,
        policy: &GaussianPolicy,
        epoch: usize,
        base_seed: u64,
    ) -> Result<(Vec<Trajectory>, EpochStats)> {
        let n = self.episodes.max(1);
        let mut eps = Vec::with_capacity(n);
        for i in 0..n {
            let seed = base_seed.wrapping_add((epoch * n + i) as u64);
            eps.push(rollout(env, policy, self.mode, seed)?);
        }
        let stats = epoch_stats(epoch, env, &eps, policy.log_std[0]);
        if !stats.mean_return.is_finite() {
            return Err(Error::Training(format!("non-finite return at epoch {epoch}")));
        }
        let trajs = eps.iter().map(|e| e.trajectory(Provenance::Current)).collect();
        Ok((trajs, stats))
    }
}

fn epoch_file(dir: &Path, sub: &str, epoch: usize) -> PathBuf {
    dir.join(sub).join(format!("epoch_{epoch:04}.json"))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::file(path, e))
}

impl TrainRun {
    /// Number of training epochs; the run holds `epochs() + 1` checkpoints.
    pub fn epochs(&self) -> usize {
        self.checkpoints.len().saturating_sub(1)
    }

    pub fn checkpoint(&self, epoch: usize) -> Result<&ReluNet> {
        self.checkpoints
            .get(epoch)
            .ok_or_else(|| Error::InvalidInput(format!("run has no checkpoint for epoch {epoch}")))
    }

    pub fn policy(&self, epoch: usize) -> Result<GaussianPolicy> {
        let log_std = self.stats.get(epoch).map_or(0.0, |s| s.log_std);
        GaussianPolicy::new(self.checkpoint(epoch)?.clone(), vec![log_std])
    }

    pub fn final_policy(&self) -> Result<GaussianPolicy> {
        self.policy(self.epochs())
    }

    /// Deterministic rollout of the final checkpoint.
    pub fn fixed_trajectory(&self) -> Result<Trajectory> {
        let ep = rollout(&self.meta.env, &self.final_policy()?, RolloutMode::Deterministic, self.meta.seed)?;
        Ok(ep.trajectory(Provenance::Fixed))
    }

    /// Writes the run under `dir`. An existing non-empty directory is refused
    /// unless `overwrite` is set.
    pub fn save(&self, dir: impl AsRef<Path>, overwrite: bool) -> Result<()> {
        let dir = dir.as_ref();
        if dir.exists() {
            let non_empty = fs::read_dir(dir).map_err(|e| Error::file(dir, e))?.next().is_some();
            if non_empty && !overwrite {
                return Err(Error::InvalidInput(format!(
                    "{} already exists; refusing to overwrite a training run",
                    dir.display()
                )));
            }
            for sub in ["ckpt", "traj"] {
                let p = dir.join(sub);
                if p.exists() {
                    fs::remove_dir_all(&p).map_err(|e| Error::file(&p, e))?;
                }
            }
        }
        for sub in ["ckpt", "traj"] {
            let p = dir.join(sub);
            fs::create_dir_all(&p).map_err(|e| Error::file(&p, e))?;
        }
        write(&dir.join("run.json"), &serde_json::to_string_pretty(&self.meta)?)?;
        for (e, net) in self.checkpoints.iter().enumerate() {
            net.save(epoch_file(dir, "ckpt", e))?;
        }
        for (e, batch) in self.current.iter().enumerate() {
            write(
                &epoch_file(dir, "traj", e),
                &serde_json::to_string(&TrajectoryBatch::new(Some(e), batch))?,
            )?;
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        for s in &self.stats {
            w.serialize(s)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        let path = dir.join("returns.csv");
        fs::write(&path, bytes).map_err(|e| Error::file(&path, e))
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let meta_path = dir.join("run.json");
        let meta: RunMeta =
            serde_json::from_str(&fs::read_to_string(&meta_path).map_err(|e| Error::file(&meta_path, e))?)?;
        let mut checkpoints = Vec::new();
        loop {
            let p = epoch_file(dir, "ckpt", checkpoints.len());
            if !p.exists() {
                break;
            }
            checkpoints.push(ReluNet::load(&p)?);
        }
        if checkpoints.is_empty() {
            return Err(Error::InvalidInput(format!(
                "{} has no checkpoints (expected ckpt/epoch_0000.json)",
                dir.display()
            )));
        }
        let mut current = Vec::with_capacity(checkpoints.len());
        for e in 0..checkpoints.len() {
            let p = epoch_file(dir, "traj", e);
            current.push(if p.exists() { read_trajectories(&p)? } else { Vec::new() });
        }
        let csv_path = dir.join("returns.csv");
        let mut stats = Vec::new();
        if csv_path.exists() {
            let mut r = csv::Reader::from_path(&csv_path)?;
            for row in r.deserialize() {
                stats.push(row?);
            }
        }
        Ok(Self {
            meta,
            checkpoints,
            current,
            stats,
        })
    }
}
