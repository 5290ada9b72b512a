//! Region metrics along a trajectory, with a normalizer fitted to its states.
//!
//! cargo run --example trajectory_metrics

use region_atlas::net::init::{init_net, InitScheme};
use region_atlas::net::RunningObsStats;
use region_atlas::region::{metrics_csv, trajectory_metrics, Provenance, Trajectory};
use region_atlas::rng;

fn main() -> region_atlas::Result<()> {
    // A spiral in 2D: visits the same area several times.
    let states: Vec<Vec<f64>> = (0..400)
        .map(|i| {
            let t = i as f64 * 0.05;
            vec![(1.0 + 0.1 * t) * t.cos(), (1.0 + 0.1 * t) * t.sin()]
        })
        .collect();
    let traj = Trajectory::new(states, Provenance::External)?;

    let mut stats = RunningObsStats::new(2);
    traj.states().iter().for_each(|s| stats.update(s));
    let net = init_net(&mut rng::stream(3, "example"), 2, &[16, 16], 1, InitScheme::FanIn)
        .with_normalizer(stats.to_normalizer(None))?;

    let forward = trajectory_metrics(&net, &traj)?;
    let backward = trajectory_metrics(&net, &traj.reversed())?;
    println!("{}", serde_json::to_string_pretty(&forward)?);
    println!("revisits (R_T + 1 - R_U): {}", forward.revisits());
    assert_eq!(forward.transitions, backward.transitions);
    print!("{}", metrics_csv([(0, &forward), (1, &backward)])?);
    Ok(())
}
