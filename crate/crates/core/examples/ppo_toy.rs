//! Trains a [8, 8] PPO policy on the point-mass task, saves the run and
//! reports how the regions crossed by its own trajectories evolve.
//!
//! cargo run --release --example ppo_toy -- [epochs] [seed] [steps_per_epoch] [out_dir]

use region_atlas::region::{trajectory_counts, DecomposeOptions};
use region_atlas::toy::{ppo_train_with, PpoConfig, ToyEnvConfig};

fn main() -> region_atlas::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let epochs = args.get(1).map_or(100, |s| s.parse().expect("epochs"));
    let seed = args.get(2).map_or(0, |s| s.parse().expect("seed"));
    let steps = args.get(3).map_or(PpoConfig::default().steps_per_epoch, |s| s.parse().expect("steps"));
    let env = ToyEnvConfig::default();
    let cfg = PpoConfig {
        epochs,
        steps_per_epoch: steps,
        ..Default::default()
    };
    let run = ppo_train_with(&env, &cfg, seed, |s| {
        if s.epoch % 10 == 0 {
            eprintln!("epoch {:4}  return {:9.3}  |x(T)-100| {:8.3}", s.epoch, s.mean_return, s.final_error);
        }
    })?;
    if let Some(dir) = args.get(4) {
        run.save(dir, true)?;
        eprintln!("saved run to {dir}");
    }
    let fixed = run.fixed_trajectory()?;
    let opts = DecomposeOptions::default();
    let n = run.checkpoints[0].neuron_count() as f64;
    println!("epoch,return,final_error,R_T,L,rho_fixed");
    for (e, net) in run.checkpoints.iter().enumerate() {
        let (rt, _, l) = trajectory_counts(net, &run.current[e][0], &opts)?;
        let (rtf, _, lf) = trajectory_counts(net, &fixed, &opts)?;
        let s = &run.stats[e];
        println!("{e},{:.3},{:.3},{rt},{l:.3},{:.5}", s.mean_return, s.final_error, rtf as f64 / (n * lf));
    }
    Ok(())
}
