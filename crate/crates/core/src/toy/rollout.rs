use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::env::{ToyEnv, ToyEnvConfig};
use super::policy::GaussianPolicy;
use crate::error::{Error, Result};
use crate::region::{Provenance, Trajectory};
use crate::rng::{self, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RolloutMode {
    /// Mean action plus Gaussian noise.
    Stochastic,
    /// Mean action.
    Deterministic,
    /// Accelerations drawn uniformly from the action bounds; the policy is
    /// ignored.
    RandomActions,
}

/// One full episode. `states` holds `horizon + 1` raw states, start included;
/// `actions` are environment accelerations before clipping.
#[derive(Clone, Debug, PartialEq)]
pub struct Episode {
    pub states: Vec<[f64; 2]>,
    pub actions: Vec<f64>,
    pub rewards: Vec<f64>,
}

impl Episode {
    pub fn total_return(&self) -> f64 {
        self.rewards.iter().sum()
    }

    pub fn final_state(&self) -> [f64; 2] {
        *self.states.last().expect("episodes include the start state")
    }

    /// Distance of the final position from the target.
    pub fn final_error(&self, env: &ToyEnvConfig) -> f64 {
        (self.final_state()[0] - env.target).abs()
    }

    pub fn trajectory(&self, provenance: Provenance) -> Trajectory {
        Trajectory::new(self.states.iter().map(|s| s.to_vec()).collect(), provenance)
            .expect("toy states are finite and two-dimensional")
    }
}

/// Maps a policy output in `[-1, 1]` units to an acceleration.
pub fn to_accel(env: &ToyEnvConfig, policy_action: f64) -> f64 {
    env.action_max * policy_action.clamp(-1.0, 1.0)
}

pub fn rollout(env: &ToyEnvConfig, policy: &GaussianPolicy, mode: RolloutMode, seed: u64) -> Result<Episode> {
    rollout_with(env, policy, mode, &mut rng::stream(seed, "rollout"))
}

pub fn rollout_with(env: &ToyEnvConfig, policy: &GaussianPolicy, mode: RolloutMode, rng: &mut Rng) -> Result<Episode> {
    if policy.mean.input_dim() != 2 || policy.action_dim() != 1 {
        return Err(Error::InvalidNet(format!(
            "toy policy must map 2 inputs to 1 action, got {} -> {}",
            policy.mean.input_dim(),
            policy.action_dim()
        )));
    }
    let mut sim = ToyEnv::new(*env);
    let mut s = sim.reset();
    let mut ep = Episode {
        states: vec![s],
        actions: Vec::with_capacity(env.horizon),
        rewards: Vec::with_capacity(env.horizon),
    };
    for _ in 0..env.horizon {
        let accel = match mode {
            RolloutMode::RandomActions => rng.random_range(-env.action_max..=env.action_max),
            RolloutMode::Deterministic => to_accel(env, policy.mean_action(&s)?[0]),
            RolloutMode::Stochastic => to_accel(env, policy.sample(&s, rng)?[0]),
        };
        let step = sim.step(accel);
        s = step.state;
        if !(s[0].is_finite() && s[1].is_finite()) {
            return Err(Error::NonFinite("rollout state".into()));
        }
        ep.states.push(s);
        ep.actions.push(accel);
        ep.rewards.push(step.reward);
    }
    Ok(ep)
}

/// `count` random-action episodes with independent streams `seed + i`.
pub fn random_action_trajectories(env: &ToyEnvConfig, count: usize, seed: u64) -> Vec<Trajectory> {
    let dummy = GaussianPolicy::new(
        crate::net::ReluNet::zeros(2, &[1], 1).expect("valid shape"),
        vec![0.0],
    )
    .expect("valid policy");
    (0..count)
        .map(|i| {
            let mut r = rng::indexed_stream(seed, "random-actions", i as u64);
            rollout_with(env, &dummy, RolloutMode::RandomActions, &mut r)
                .expect("random-action rollouts stay finite")
                .trajectory(Provenance::Random)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::ReluNet;

    fn zero_policy() -> GaussianPolicy {
        GaussianPolicy::new(ReluNet::zeros(2, &[3], 1).unwrap(), vec![-1.0]).unwrap()
    }

    #[test]
    fn zero_policy_stays_at_origin() {
        let env = ToyEnvConfig::default();
        let ep = rollout(&env, &zero_policy(), RolloutMode::Deterministic, 0).unwrap();
        assert_eq!(ep.states.len(), env.horizon + 1);
        assert!(ep.actions.iter().all(|&a| a == 0.0));
        assert!(ep.states.iter().all(|s| *s == [0.0, 0.0]));
        assert_eq!(ep.trajectory(Provenance::Current).length(), 0.0);
    }

    #[test]
    fn stochastic_rollouts_are_seeded() {
        let env = ToyEnvConfig::default();
        let p = zero_policy();
        let a = rollout(&env, &p, RolloutMode::Stochastic, 5).unwrap();
        let b = rollout(&env, &p, RolloutMode::Stochastic, 5).unwrap();
        let c = rollout(&env, &p, RolloutMode::Stochastic, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn random_actions_respect_bounds() {
        let env = ToyEnvConfig::default();
        let ep = rollout(&env, &zero_policy(), RolloutMode::RandomActions, 1).unwrap();
        assert!(ep.actions.iter().all(|a| a.abs() <= env.action_max));
        let t1 = random_action_trajectories(&env, 3, 11);
        let t2 = random_action_trajectories(&env, 3, 11);
        assert_eq!(t1, t2);
        assert_ne!(t1[0], t1[1]);
        assert_eq!(t1[0].provenance(), Provenance::Random);
    }

    #[test]
    fn wrong_policy_shape_rejected() {
        let p = GaussianPolicy::new(ReluNet::zeros(3, &[3], 1).unwrap(), vec![0.0]).unwrap();
        assert!(rollout(&ToyEnvConfig::default(), &p, RolloutMode::Deterministic, 0).is_err());
    }
}
