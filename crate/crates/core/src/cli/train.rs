use super::{Algo, Cli, TrainArgs};
use crate::error::{Error, Result};
use crate::toy::{
    behavior_clone_with, ppo_train_with, BcConfig, BcDataset, CurrentBatch, EpochStats, PpoConfig, ToyEnvConfig,
    TrainRun,
};

fn print_epoch(s: &EpochStats) {
    println!(
        "epoch {:04} mean_return {:.6} std_return {:.6} final_error {:.6}",
        s.epoch, s.mean_return, s.std_return, s.final_error
    );
}

fn load_dataset(path: &std::path::Path, episodes: usize, seed: u64, env: &ToyEnvConfig) -> Result<BcDataset> {
    if path.is_dir() {
        let expert = TrainRun::load(path)?.final_policy()?;
        BcDataset::from_expert(env, &expert, episodes, seed)
    } else {
        BcDataset::load(path)
    }
}

pub(super) fn run(cli: &Cli, a: &TrainArgs) -> Result<()> {
    let out = cli
        .out
        .as_deref()
        .ok_or_else(|| Error::Usage("train-toy needs --out <run directory>".into()))?;
    if out.exists() && !a.force && std::fs::read_dir(out).map_err(|e| Error::file(out, e))?.next().is_some() {
        return Err(Error::InvalidInput(format!(
            "{} exists and is not empty; pass --force to replace it",
            out.display()
        )));
    }
    let env = ToyEnvConfig::default();
    let current = CurrentBatch {
        mode: a.current_mode.into(),
        episodes: a.current_episodes,
    };
    let run = match a.algo {
        Algo::Ppo => {
            let mut cfg = PpoConfig {
                epochs: a.epochs,
                steps_per_epoch: a.steps_per_epoch,
                policy_widths: a.widths.clone(),
                current,
                ..Default::default()
            };
            if let Some(lr) = a.lr {
                cfg.learning_rate = lr;
            }
            ppo_train_with(&env, &cfg, cli.seed, print_epoch)?
        }
        Algo::Bc => {
            let path = a.dataset.as_deref().ok_or_else(|| Error::Usage("--algo bc needs --dataset".into()))?;
            let data = load_dataset(path, a.expert_episodes, cli.seed, &env)?;
            let mut cfg = BcConfig {
                epochs: a.epochs,
                widths: a.widths.clone(),
                current,
                ..Default::default()
            };
            if let Some(lr) = a.lr {
                cfg.learning_rate = lr;
            }
            behavior_clone_with(&data, &env, &cfg, cli.seed, print_epoch)?
        }
    };
    run.save(out, a.force)
}
