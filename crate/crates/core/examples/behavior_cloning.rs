//! Trains a PPO expert, clones it with minibatch SGD from a fresh
//! fan-in initialization, and compares returns and region counts.
//!
//! cargo run --release --example behavior_cloning

use region_atlas::region::trajectory_metrics;
use region_atlas::toy::{
    behavior_clone, ppo_train, rollout, BcConfig, BcDataset, PpoConfig, RolloutMode, ToyEnvConfig,
};

fn main() -> region_atlas::Result<()> {
    let env = ToyEnvConfig::default();
    let expert_run = ppo_train(&env, &PpoConfig { epochs: 60, ..Default::default() }, 0)?;
    let expert = expert_run.final_policy()?;
    let data = BcDataset::from_expert(&env, &expert, 20, 0)?;
    println!("dataset: {} pairs", data.len());
    let clone_run = behavior_clone(&data, &env, &BcConfig::default(), 0)?;
    let clone = clone_run.final_policy()?;

    for (name, policy) in [("expert", &expert), ("clone", &clone)] {
        let ep = rollout(&env, policy, RolloutMode::Deterministic, 0)?;
        let m = trajectory_metrics(&policy.mean, &ep.trajectory(region_atlas::region::Provenance::Fixed))?;
        println!(
            "{name:6} return {:8.3}  |x(T)-100| {:6.3}  R_T {}  rho {:.5}",
            ep.total_return(),
            ep.final_error(&env),
            m.transitions,
            m.rho
        );
    }
    Ok(())
}
