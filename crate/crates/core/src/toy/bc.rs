//! Behavior cloning: regress a fresh policy mean onto expert actions.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::env::ToyEnvConfig;
use super::mlp;
use super::optim::sgd_step;
use super::policy::{GaussianPolicy, INIT_LOG_STD};
use super::rollout::{rollout_with, RolloutMode};
use super::run::{CurrentBatch, EpochStats, RunConfig, RunMeta, TrainRun};
use crate::error::{Error, Result};
use crate::net::init::{init_net, InitScheme};
use crate::net::{ObsNormalizer, ReluNet, DEFAULT_EPS};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BcConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub widths: Vec<usize>,
    pub current: CurrentBatch,
}

impl Default for BcConfig {
    fn default() -> Self {
        Self {
            epochs: 125,
            learning_rate: 1e-3,
            batch_size: 64,
            widths: vec![8, 8],
            current: CurrentBatch::default(),
        }
    }
}

/// State/action pairs. Actions are in policy units, the same space the
/// policy mean network outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BcDataset {
    pub states: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
}

impl BcDataset {
    pub fn new(states: Vec<Vec<f64>>, actions: Vec<Vec<f64>>) -> Result<Self> {
        let d = Self { states, actions };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.states.is_empty() {
            return Err(Error::InvalidInput("behavior-cloning dataset is empty".into()));
        }
        if self.states.len() != self.actions.len() {
            return Err(Error::DimensionMismatch {
                what: "dataset action count",
                expected: self.states.len(),
                found: self.actions.len(),
            });
        }
        let (ds, da) = (self.states[0].len(), self.actions[0].len());
        for (s, a) in self.states.iter().zip(&self.actions) {
            if s.len() != ds {
                return Err(Error::DimensionMismatch {
                    what: "dataset state",
                    expected: ds,
                    found: s.len(),
                });
            }
            if a.len() != da {
                return Err(Error::DimensionMismatch {
                    what: "dataset action",
                    expected: da,
                    found: a.len(),
                });
            }
            if s.iter().chain(a).any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("dataset entry".into()));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state_dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn action_dim(&self) -> usize {
        self.actions.first().map_or(0, Vec::len)
    }

    /// Labels the states of `episodes` noisy expert rollouts (plus one
    /// noise-free rollout) with the expert's mean action.
    pub fn from_expert(env: &ToyEnvConfig, expert: &GaussianPolicy, episodes: usize, seed: u64) -> Result<Self> {
        let mut states = Vec::new();
        let mut actions = Vec::new();
        for i in 0..=episodes {
            let mode = if i == 0 { RolloutMode::Deterministic } else { RolloutMode::Stochastic };
            let mut r = rng::indexed_stream(seed, "bc-expert", i as u64);
            let ep = rollout_with(env, expert, mode, &mut r)?;
            for s in &ep.states[..ep.states.len() - 1] {
                states.push(s.to_vec());
                actions.push(expert.mean_action(s)?);
            }
        }
        Self::new(states, actions)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        let d: Self = serde_json::from_str(&s)?;
        d.validate()?;
        Ok(d)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, serde_json::to_string(self)?).map_err(|e| Error::file(path, e))
    }

    /// Normalizer with the dataset's mean and population variance.
    pub fn fit_normalizer(&self) -> ObsNormalizer {
        let n = self.len() as f64;
        let d = self.state_dim();
        let mut mean = vec![0.0; d];
        for s in &self.states {
            for (m, v) in mean.iter_mut().zip(s) {
                *m += v / n;
            }
        }
        let mut var = vec![0.0; d];
        for s in &self.states {
            for i in 0..d {
                var[i] += (s[i] - mean[i]).powi(2) / n;
            }
        }
        ObsNormalizer {
            mean,
            var,
            clip: None,
            eps: DEFAULT_EPS,
        }
    }
}

/// Mean squared error over all action coordinates.
pub fn bc_loss(net: &ReluNet, dataset: &BcDataset) -> Result<f64> {
    let mut total = 0.0;
    for (s, a) in dataset.states.iter().zip(&dataset.actions) {
        let out = net.forward(s)?;
        total += out.iter().zip(a).map(|(o, t)| (o - t).powi(2)).sum::<f64>();
    }
    Ok(total / (dataset.len() * dataset.action_dim()) as f64)
}

pub fn behavior_clone(dataset: &BcDataset, env: &ToyEnvConfig, cfg: &BcConfig, seed: u64) -> Result<TrainRun> {
    behavior_clone_with(dataset, env, cfg, seed, |_| {})
}

pub fn behavior_clone_with(
    dataset: &BcDataset,
    env: &ToyEnvConfig,
    cfg: &BcConfig,
    seed: u64,
    mut on_epoch: impl FnMut(&EpochStats),
) -> Result<TrainRun> {
    dataset.validate()?;
    if dataset.state_dim() != 2 || dataset.action_dim() != 1 {
        return Err(Error::DimensionMismatch {
            what: "toy dataset state/action",
            expected: 2,
            found: dataset.state_dim(),
        });
    }
    if cfg.batch_size == 0 {
        return Err(Error::InvalidInput("batch size must be positive".into()));
    }
    let norm = dataset.fit_normalizer();
    let inputs: Vec<Vec<f64>> = dataset.states.iter().map(|s| norm.standardize(s)).collect();
    let mut net = init_net(&mut rng::stream(seed, "bc-init"), 2, &cfg.widths, 1, InitScheme::FanIn);
    let mut shuffle = rng::stream(seed, "bc-shuffle");
    let mut run = TrainRun {
        meta: RunMeta {
            seed,
            env: *env,
            config: RunConfig::Bc(cfg.clone()),
        },
        checkpoints: Vec::with_capacity(cfg.epochs + 1),
        current: Vec::with_capacity(cfg.epochs + 1),
        stats: Vec::with_capacity(cfg.epochs + 1),
    };
    let mut snapshot = |run: &mut TrainRun, net: &ReluNet, epoch: usize| -> Result<()> {
        let ckpt = net.clone().with_normalizer(norm.clone())?;
        let policy = GaussianPolicy::new(ckpt.clone(), vec![INIT_LOG_STD])?;
        let (trajs, s) = cfg.current.collect(env, &policy, epoch, seed)?;
        on_epoch(&s);
        run.checkpoints.push(ckpt);
        run.current.push(trajs);
        run.stats.push(s);
        Ok(())
    };
    snapshot(&mut run, &net, 0)?;

    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut params = net.to_flat();
    let mut grad = vec![0.0; params.len()];
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle);
        for chunk in order.chunks(cfg.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let scale = 2.0 / chunk.len() as f64;
            for &i in chunk {
                let (out, cache) = mlp::forward_cached(&net, &inputs[i]);
                let g: Vec<f64> = out.iter().zip(&dataset.actions[i]).map(|(o, t)| scale * (o - t)).collect();
                mlp::backward(&net, &cache, &g, &mut grad);
            }
            sgd_step(&mut params, &grad, cfg.learning_rate);
            net.set_flat(&params);
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Training(format!("non-finite parameters after epoch {epoch}")));
        }
        snapshot(&mut run, &net, epoch)?;
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pair_is_interpolated() {
        let data = BcDataset::new(vec![vec![3.0, -1.0]], vec![vec![0.4]]).unwrap();
        let cfg = BcConfig {
            epochs: 3000,
            learning_rate: 0.05,
            widths: vec![16],
            ..Default::default()
        };
        let run = behavior_clone(&data, &ToyEnvConfig { horizon: 2, ..Default::default() }, &cfg, 0).unwrap();
        let last = run.checkpoints.last().unwrap();
        assert!(bc_loss(last, &data).unwrap() < 1e-6);
        assert!(bc_loss(last, &data).unwrap() < bc_loss(&run.checkpoints[0], &data).unwrap());
    }

    #[test]
    fn zero_learning_rate_keeps_weights() {
        let data = BcDataset::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![0.1], vec![-0.1]]).unwrap();
        let cfg = BcConfig {
            epochs: 3,
            learning_rate: 0.0,
            ..Default::default()
        };
        let run = behavior_clone(&data, &ToyEnvConfig::default(), &cfg, 2).unwrap();
        assert_eq!(run.checkpoints.len(), 4);
        assert!(run.checkpoints.iter().all(|c| c == &run.checkpoints[0]));
    }

    #[test]
    fn dataset_errors() {
        assert!(BcDataset::new(vec![], vec![]).is_err());
        assert!(BcDataset::new(vec![vec![1.0, 2.0]], vec![]).is_err());
        assert!(BcDataset::new(vec![vec![1.0, 2.0], vec![1.0]], vec![vec![0.0], vec![0.0]]).is_err());
        let d3 = BcDataset::new(vec![vec![1.0, 2.0, 3.0]], vec![vec![0.0]]).unwrap();
        assert!(behavior_clone(&d3, &ToyEnvConfig::default(), &BcConfig::default(), 0).is_err());
    }

    #[test]
    fn normalizer_is_population_two_pass() {
        let d = BcDataset::new(vec![vec![0.0, 1.0], vec![2.0, 1.0]], vec![vec![0.0], vec![0.0]]).unwrap();
        let n = d.fit_normalizer();
        assert_eq!(n.mean, vec![1.0, 1.0]);
        assert_eq!(n.var, vec![1.0, 0.0]);
    }
}
