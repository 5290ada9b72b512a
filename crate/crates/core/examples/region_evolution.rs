//! Per-epoch region metrics for a saved run, as produced by `ppo_toy` or
//! `region-atlas train-toy`.
//!
//! cargo run --release --example region_evolution -- <run_dir>

use region_atlas::cli::{sweep, SweepMetric, SweepOptions};
use region_atlas::toy::TrainRun;

fn main() -> region_atlas::Result<()> {
    let dir = std::env::args().nth(1).expect("usage: region_evolution <run_dir>");
    let run = TrainRun::load(&dir)?;
    let metrics = [
        SweepMetric::TransitionsCurrent,
        SweepMetric::LengthCurrent,
        SweepMetric::DensityFixed,
        SweepMetric::LinesMean,
    ];
    let columns: Vec<_> = metrics
        .iter()
        .map(|&m| sweep(&run, &SweepOptions::new(m)))
        .collect::<Result<_, _>>()?;
    println!("epoch,transitions_current,length_current,density_fixed,lines_mean");
    for e in 0..run.checkpoints.len() {
        let vals: Vec<String> = columns.iter().map(|c| format!("{:.5}", c[e].mean)).collect();
        println!("{e},{}", vals.join(","));
    }
    Ok(())
}
