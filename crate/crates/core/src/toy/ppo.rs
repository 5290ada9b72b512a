//! Clipped-surrogate PPO with GAE for the toy environment.

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::env::{ToyEnv, ToyEnvConfig};
use super::gae::gae;
use super::mlp;
use super::optim::{clip_grad_norm, Adam};
use super::policy::{entropy, log_prob, GaussianPolicy, INIT_LOG_STD};
use super::rollout::to_accel;
use super::run::{CurrentBatch, EpochStats, RunConfig, RunMeta, TrainRun};
use crate::error::{Error, Result};
use crate::net::init::{init_net, InitScheme};
use crate::net::{ReluNet, RunningObsStats};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PpoConfig {
    /// Training iterations; each collects `steps_per_epoch` transitions and
    /// runs `update_passes` passes of minibatch updates over them.
    pub epochs: usize,
    pub learning_rate: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip_range: f64,
    pub vf_coef: f64,
    pub ent_coef: f64,
    pub minibatch_size: usize,
    pub steps_per_epoch: usize,
    pub update_passes: usize,
    pub max_grad_norm: Option<f64>,
    pub adam_eps: f64,
    pub init_log_std: f64,
    pub normalize_advantage: bool,
    /// Scale rewards by a running estimate of the discounted-return spread.
    pub normalize_reward: bool,
    pub policy_widths: Vec<usize>,
    pub value_widths: Vec<usize>,
    pub current: CurrentBatch,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            epochs: 125,
            learning_rate: 3e-4,
            gamma: 0.99,
            gae_lambda: 0.95,
            clip_range: 0.2,
            vf_coef: 0.5,
            ent_coef: 0.0,
            minibatch_size: 64,
            steps_per_epoch: 512,
            update_passes: 10,
            max_grad_norm: Some(0.5),
            adam_eps: 1e-5,
            init_log_std: INIT_LOG_STD,
            normalize_advantage: true,
            normalize_reward: true,
            policy_widths: vec![8, 8],
            value_widths: vec![64, 64],
            current: CurrentBatch::default(),
        }
    }
}

/// Transitions for one loss evaluation. Observations are already in network
/// coordinates; actions are in policy units.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PpoBatch {
    pub obs: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    pub old_log_prob: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl PpoBatch {
    pub fn len(&self) -> usize {
        self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PpoLoss {
    pub total: f64,
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
    pub clip_fraction: f64,
}

/// Parameter vector layout used by the loss gradient: policy mean network,
/// then log standard deviations, then the value network.
pub fn joint_params(policy: &GaussianPolicy, value: &ReluNet) -> Vec<f64> {
    let mut p = policy.mean.to_flat();
    p.extend_from_slice(&policy.log_std);
    p.extend(value.to_flat());
    p
}

pub fn set_joint_params(policy: &mut GaussianPolicy, value: &mut ReluNet, params: &[f64]) {
    let np = policy.mean.param_count();
    let na = policy.log_std.len();
    policy.mean.set_flat(&params[..np]);
    policy.log_std.copy_from_slice(&params[np..np + na]);
    value.set_flat(&params[np + na..]);
}

fn normalized_advantages(batch: &PpoBatch, cfg: &PpoConfig) -> Vec<f64> {
    let n = batch.len();
    if !cfg.normalize_advantage || n < 2 {
        return batch.advantages.clone();
    }
    let mean = batch.advantages.iter().sum::<f64>() / n as f64;
    let var = batch.advantages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt() + 1e-8;
    batch.advantages.iter().map(|a| (a - mean) / sd).collect()
}

/// Loss value only, evaluated through the networks' own forward pass.
pub fn ppo_loss(policy: &GaussianPolicy, value: &ReluNet, batch: &PpoBatch, cfg: &PpoConfig) -> Result<PpoLoss> {
    let n = batch.len() as f64;
    let adv = normalized_advantages(batch, cfg);
    let (mut pl, mut vl, mut clipped) = (0.0, 0.0, 0usize);
    for i in 0..batch.len() {
        let mu = policy.mean.forward(&batch.obs[i])?;
        let lp = log_prob(&mu, &policy.log_std, &batch.actions[i]);
        let ratio = (lp - batch.old_log_prob[i]).exp();
        let rc = ratio.clamp(1.0 - cfg.clip_range, 1.0 + cfg.clip_range);
        pl -= (ratio * adv[i]).min(rc * adv[i]);
        if (ratio - 1.0).abs() > cfg.clip_range {
            clipped += 1;
        }
        let v = value.forward(&batch.obs[i])?[0];
        vl += (batch.returns[i] - v).powi(2);
    }
    let policy_loss = pl / n;
    let value_loss = vl / n;
    let ent = entropy(&policy.log_std);
    Ok(PpoLoss {
        total: policy_loss + cfg.vf_coef * value_loss - cfg.ent_coef * ent,
        policy: policy_loss,
        value: value_loss,
        entropy: ent,
        clip_fraction: clipped as f64 / n,
    })
}

/// Loss and its gradient with respect to [`joint_params`].
pub fn ppo_loss_grad(
    policy: &GaussianPolicy,
    value: &ReluNet,
    batch: &PpoBatch,
    cfg: &PpoConfig,
) -> (PpoLoss, Vec<f64>) {
    let n = batch.len() as f64;
    let np = policy.mean.param_count();
    let na = policy.log_std.len();
    let mut grad = vec![0.0; np + na + value.param_count()];
    let adv = normalized_advantages(batch, cfg);
    let inv_var: Vec<f64> = policy.log_std.iter().map(|ls| (-2.0 * ls).exp()).collect();
    let (mut pl, mut vl, mut clipped) = (0.0, 0.0, 0usize);
    let mut g_mu = vec![0.0; na];
    for i in 0..batch.len() {
        let (mu, cache) = mlp::forward_cached(&policy.mean, &batch.obs[i]);
        let a = &batch.actions[i];
        let lp = log_prob(&mu, &policy.log_std, a);
        let ratio = (lp - batch.old_log_prob[i]).exp();
        let rc = ratio.clamp(1.0 - cfg.clip_range, 1.0 + cfg.clip_range);
        let (unclipped, clip_term) = (ratio * adv[i], rc * adv[i]);
        pl -= unclipped.min(clip_term);
        if (ratio - 1.0).abs() > cfg.clip_range {
            clipped += 1;
        }
        if unclipped <= clip_term {
            // d(-ratio * adv / n) / d(log_prob)
            let dlp = -ratio * adv[i] / n;
            for k in 0..na {
                let diff = a[k] - mu[k];
                g_mu[k] = dlp * diff * inv_var[k];
                grad[np + k] += dlp * (diff * diff * inv_var[k] - 1.0);
            }
            mlp::backward(&policy.mean, &cache, &g_mu, &mut grad[..np]);
        }

        let (v, vcache) = mlp::forward_cached(value, &batch.obs[i]);
        let err = v[0] - batch.returns[i];
        vl += err * err;
        mlp::backward(value, &vcache, &[cfg.vf_coef * 2.0 * err / n], &mut grad[np + na..]);
    }
    for k in 0..na {
        grad[np + k] -= cfg.ent_coef;
    }
    let policy_loss = pl / n;
    let value_loss = vl / n;
    let ent = entropy(&policy.log_std);
    let loss = PpoLoss {
        total: policy_loss + cfg.vf_coef * value_loss - cfg.ent_coef * ent,
        policy: policy_loss,
        value: value_loss,
        entropy: ent,
        clip_fraction: clipped as f64 / n,
    };
    (loss, grad)
}

/// Running variance of a scalar, used for reward scaling.
#[derive(Clone, Debug)]
struct ScalarStats {
    stats: RunningObsStats,
}

impl ScalarStats {
    fn new() -> Self {
        Self {
            stats: RunningObsStats::new(1),
        }
    }

    fn update(&mut self, x: f64) {
        self.stats.update(&[x]);
    }

    fn std(&self) -> f64 {
        (self.stats.variance()[0] + 1e-8).sqrt()
    }
}

/// PPO from the default initialization for `seed`.
pub fn ppo_train(env: &ToyEnvConfig, cfg: &PpoConfig, seed: u64) -> Result<TrainRun> {
    ppo_train_with(env, cfg, seed, |_| {})
}

pub fn ppo_train_with(
    env: &ToyEnvConfig,
    cfg: &PpoConfig,
    seed: u64,
    on_epoch: impl FnMut(&EpochStats),
) -> Result<TrainRun> {
    let mut rng = rng::stream(seed, "ppo-init");
    let policy = GaussianPolicy::init_ppo(&mut rng, 2, &cfg.policy_widths, 1, cfg.init_log_std);
    let value = init_net(&mut rng, 2, &cfg.value_widths, 1, InitScheme::ppo_value());
    ppo_train_from(env, policy, value, cfg, seed, on_epoch)
}

/// PPO from given networks. The networks must not carry a normalizer; the
/// running observation statistics are attached to each saved checkpoint.
pub fn ppo_train_from(
    env: &ToyEnvConfig,
    mut policy: GaussianPolicy,
    mut value: ReluNet,
    cfg: &PpoConfig,
    seed: u64,
    mut on_epoch: impl FnMut(&EpochStats),
) -> Result<TrainRun> {
    if policy.mean.normalizer().is_some() || value.normalizer().is_some() {
        return Err(Error::InvalidNet("PPO networks must not carry a normalizer".into()));
    }
    if policy.mean.input_dim() != 2 || value.input_dim() != 2 || value.output_dim() != 1 || policy.action_dim() != 1 {
        return Err(Error::InvalidNet("toy PPO needs a 2 -> 1 policy and a 2 -> 1 value network".into()));
    }
    if cfg.minibatch_size == 0 || cfg.steps_per_epoch == 0 {
        return Err(Error::InvalidInput("minibatch size and steps per epoch must be positive".into()));
    }
    let meta = RunMeta {
        seed,
        env: *env,
        config: RunConfig::Ppo(cfg.clone()),
    };
    let mut obs_stats = RunningObsStats::new(2);
    let mut ret_stats = ScalarStats::new();
    let mut running_return = 0.0;
    let mut opt = Adam::new(joint_params(&policy, &value).len(), cfg.learning_rate, cfg.adam_eps);
    let mut collect_rng = rng::stream(seed, "ppo-collect");
    let mut shuffle_rng = rng::stream(seed, "ppo-shuffle");

    let mut run = TrainRun {
        meta,
        checkpoints: Vec::with_capacity(cfg.epochs + 1),
        current: Vec::with_capacity(cfg.epochs + 1),
        stats: Vec::with_capacity(cfg.epochs + 1),
    };
    let mut snapshot = |run: &mut TrainRun, policy: &GaussianPolicy, stats: &RunningObsStats, epoch: usize| -> Result<()> {
        let ckpt = policy.mean.clone().with_normalizer(stats.to_normalizer(None))?;
        let eval = GaussianPolicy::new(ckpt.clone(), policy.log_std.clone())?;
        let (trajs, s) = cfg.current.collect(env, &eval, epoch, seed)?;
        on_epoch(&s);
        run.checkpoints.push(ckpt);
        run.current.push(trajs);
        run.stats.push(s);
        Ok(())
    };
    snapshot(&mut run, &policy, &obs_stats, 0)?;

    let mut sim = ToyEnv::new(*env);
    let mut obs = sim.reset();
    obs_stats.update(&obs);
    let n = cfg.steps_per_epoch;
    let sigma_of = |p: &GaussianPolicy| p.log_std[0].exp();

    for epoch in 1..=cfg.epochs {
        let mut buf = PpoBatch::default();
        let mut values = Vec::with_capacity(n);
        let mut rewards = Vec::with_capacity(n);
        let mut ends = Vec::with_capacity(n);
        let mut bootstrap: Vec<Option<f64>> = Vec::with_capacity(n);
        for _ in 0..n {
            let norm = obs_stats.to_normalizer(None);
            let x = norm.standardize(&obs);
            let mu = mlp::forward(&policy.mean, &x);
            let z: f64 = StandardNormal.sample(&mut collect_rng);
            let a = vec![mu[0] + sigma_of(&policy) * z];
            let lp = log_prob(&mu, &policy.log_std, &a);
            let v = mlp::forward(&value, &x)[0];
            let step = sim.step(to_accel(env, a[0]));
            let mut r = step.reward;
            if cfg.normalize_reward {
                running_return = running_return * cfg.gamma + r;
                ret_stats.update(running_return);
                r = (r / ret_stats.std()).clamp(-10.0, 10.0);
            }
            obs_stats.update(&step.state);
            buf.obs.push(x);
            buf.actions.push(a);
            buf.old_log_prob.push(lp);
            values.push(v);
            rewards.push(r);
            ends.push(step.done);
            if step.done {
                let xt = obs_stats.to_normalizer(None).standardize(&step.state);
                bootstrap.push(Some(mlp::forward(&value, &xt)[0]));
                running_return = 0.0;
                obs = sim.reset();
                obs_stats.update(&obs);
            } else {
                bootstrap.push(None);
                obs = step.state;
            }
        }
        let last_value = {
            let x = obs_stats.to_normalizer(None).standardize(&obs);
            mlp::forward(&value, &x)[0]
        };
        let next_values: Vec<f64> = (0..n)
            .map(|t| bootstrap[t].unwrap_or_else(|| if t + 1 < n { values[t + 1] } else { last_value }))
            .collect();
        let (adv, ret) = gae(&rewards, &values, &next_values, &ends, cfg.gamma, cfg.gae_lambda);
        buf.advantages = adv;
        buf.returns = ret;

        let mut params = joint_params(&policy, &value);
        let mut order: Vec<usize> = (0..n).collect();
        for _ in 0..cfg.update_passes {
            order.shuffle(&mut shuffle_rng);
            for chunk in order.chunks(cfg.minibatch_size) {
                let mb = PpoBatch {
                    obs: chunk.iter().map(|&i| buf.obs[i].clone()).collect(),
                    actions: chunk.iter().map(|&i| buf.actions[i].clone()).collect(),
                    old_log_prob: chunk.iter().map(|&i| buf.old_log_prob[i]).collect(),
                    advantages: chunk.iter().map(|&i| buf.advantages[i]).collect(),
                    returns: chunk.iter().map(|&i| buf.returns[i]).collect(),
                };
                let (loss, mut grad) = ppo_loss_grad(&policy, &value, &mb, cfg);
                if !loss.total.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                    return Err(Error::Training(format!(
                        "non-finite PPO loss at epoch {epoch} (policy {}, value {})",
                        loss.policy, loss.value
                    )));
                }
                if let Some(m) = cfg.max_grad_norm {
                    clip_grad_norm(&mut grad, m);
                }
                opt.step(&mut params, &grad);
                set_joint_params(&mut policy, &mut value, &params);
            }
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Training(format!("non-finite parameters after epoch {epoch}")));
        }
        snapshot(&mut run, &policy, &obs_stats, epoch)?;
    }
    Ok(run)
}
