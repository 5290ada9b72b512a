//! Point-mass toy environment with PPO and behavior-cloning trainers.

pub mod bc;
pub mod env;
pub mod gae;
pub mod mlp;
pub mod optim;
pub mod policy;
pub mod ppo;
pub mod rollout;
pub mod run;

pub use bc::{bc_loss, behavior_clone, behavior_clone_with, BcConfig, BcDataset};
pub use env::{Step, ToyEnv, ToyEnvConfig, START_STATE};
pub use gae::gae;
pub use policy::{GaussianPolicy, INIT_LOG_STD};
pub use ppo::{ppo_loss, ppo_loss_grad, ppo_train, ppo_train_from, ppo_train_with, PpoBatch, PpoConfig, PpoLoss};
pub use rollout::{random_action_trajectories, rollout, rollout_with, Episode, RolloutMode};
pub use run::{CurrentBatch, EpochStats, RunConfig, RunMeta, TrainRun};
