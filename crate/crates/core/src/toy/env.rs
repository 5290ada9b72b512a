use serde::{Deserialize, Serialize};

/// Point mass on a line that should reach and hold `target`.
///
/// State is `[position, velocity]`; the action is an acceleration clipped to
/// `[-action_max, action_max]`. Each step applies semi-implicit Euler:
/// velocity first, then position with the new velocity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyEnvConfig {
    pub target: f64,
    pub dt: f64,
    pub action_max: f64,
    pub horizon: usize,
}

impl Default for ToyEnvConfig {
    fn default() -> Self {
        Self {
            target: 100.0,
            dt: 0.1,
            action_max: 10.0,
            horizon: 200,
        }
    }
}

pub const START_STATE: [f64; 2] = [0.0, 0.0];

impl ToyEnvConfig {
    pub fn clip_action(&self, a: f64) -> f64 {
        if a.is_nan() {
            0.0
        } else {
            a.clamp(-self.action_max, self.action_max)
        }
    }

    /// One integration step.
    pub fn transition(&self, state: [f64; 2], accel: f64) -> [f64; 2] {
        let a = self.clip_action(accel);
        let v = state[1] + a * self.dt;
        [state[0] + v * self.dt, v]
    }

    /// Dense quadratic penalty on distance to the target.
    pub fn reward(&self, state: [f64; 2]) -> f64 {
        let e = (state[0] - self.target) / self.target;
        -e * e
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    pub state: [f64; 2],
    pub reward: f64,
    pub done: bool,
}

#[derive(Clone, Debug)]
pub struct ToyEnv {
    config: ToyEnvConfig,
    state: [f64; 2],
    steps: usize,
}

impl ToyEnv {
    pub fn new(config: ToyEnvConfig) -> Self {
        Self {
            config,
            state: START_STATE,
            steps: 0,
        }
    }

    pub fn config(&self) -> &ToyEnvConfig {
        &self.config
    }

    pub fn state(&self) -> [f64; 2] {
        self.state
    }

    pub fn reset(&mut self) -> [f64; 2] {
        self.state = START_STATE;
        self.steps = 0;
        self.state
    }

    /// Advances one step with acceleration `accel`. `done` is set once the
    /// horizon is reached.
    pub fn step(&mut self, accel: f64) -> Step {
        self.state = self.config.transition(self.state, accel);
        self.steps += 1;
        Step {
            state: self.state,
            reward: self.config.reward(self.state),
            done: self.steps >= self.config.horizon,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_state_is_fixed_point_under_zero_action() {
        let mut env = ToyEnv::new(ToyEnvConfig::default());
        assert_eq!(env.reset(), [0.0, 0.0]);
        let s = env.step(0.0);
        assert_eq!(s.state, [0.0, 0.0]);
        assert!(!s.done);
        assert_eq!(s.reward, -1.0);
    }

    #[test]
    fn one_full_throttle_step() {
        let cfg = ToyEnvConfig::default();
        let next = cfg.transition([0.0, 0.0], cfg.action_max);
        assert!((next[1] - cfg.action_max * 0.1).abs() < 1e-15);
        assert!((next[0] - cfg.action_max * 0.01).abs() < 1e-15);
        // Actions beyond the bounds are clipped.
        assert_eq!(cfg.transition([0.0, 0.0], 1e9), next);
        assert_eq!(cfg.transition([0.0, 0.0], f64::NAN), [0.0, 0.0]);
    }

    #[test]
    fn done_at_horizon() {
        let mut env = ToyEnv::new(ToyEnvConfig {
            horizon: 3,
            ..Default::default()
        });
        assert!(!env.step(1.0).done);
        assert!(!env.step(1.0).done);
        assert!(env.step(1.0).done);
        assert_eq!(env.reset(), START_STATE);
    }

    #[test]
    fn reward_at_target_is_zero() {
        assert_eq!(ToyEnvConfig::default().reward([100.0, 3.0]), 0.0);
    }
}
