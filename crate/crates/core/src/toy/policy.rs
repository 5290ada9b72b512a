use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::net::init::{init_net, InitScheme};
use crate::net::ReluNet;
use crate::rng::Rng;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Diagonal Gaussian policy with a state-independent log standard deviation.
///
/// The mean network maps raw observations (through its normalizer, if any)
/// to actions in policy units.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianPolicy {
    pub mean: ReluNet,
    pub log_std: Vec<f64>,
}

pub const INIT_LOG_STD: f64 = -1.0;

impl GaussianPolicy {
    pub fn new(mean: ReluNet, log_std: Vec<f64>) -> Result<Self> {
        if log_std.len() != mean.output_dim() {
            return Err(Error::DimensionMismatch {
                what: "log_std",
                expected: mean.output_dim(),
                found: log_std.len(),
            });
        }
        Ok(Self { mean, log_std })
    }

    /// PPO-style initialization: orthogonal weights, gain `sqrt(2)` on hidden
    /// layers and `0.01` on the action head.
    pub fn init_ppo(rng: &mut Rng, obs_dim: usize, widths: &[usize], action_dim: usize, log_std: f64) -> Self {
        Self {
            mean: init_net(rng, obs_dim, widths, action_dim, InitScheme::ppo_policy()),
            log_std: vec![log_std; action_dim],
        }
    }

    pub fn action_dim(&self) -> usize {
        self.log_std.len()
    }

    pub fn mean_action(&self, obs: &[f64]) -> Result<Vec<f64>> {
        self.mean.forward(obs)
    }

    pub fn sample(&self, obs: &[f64], rng: &mut Rng) -> Result<Vec<f64>> {
        let mut a = self.mean_action(obs)?;
        for (ai, ls) in a.iter_mut().zip(&self.log_std) {
            let z: f64 = StandardNormal.sample(rng);
            *ai += ls.exp() * z;
        }
        Ok(a)
    }
}

pub fn log_prob(mean: &[f64], log_std: &[f64], action: &[f64]) -> f64 {
    mean.iter()
        .zip(log_std)
        .zip(action)
        .map(|((m, ls), a)| {
            let z = (a - m) / ls.exp();
            -0.5 * z * z - ls - 0.5 * LN_2PI
        })
        .sum()
}

pub fn entropy(log_std: &[f64]) -> f64 {
    log_std.iter().map(|ls| ls + 0.5 * (LN_2PI + 1.0)).sum()
}
