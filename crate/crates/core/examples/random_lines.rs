//! Transition density on random lines for freshly initialized policies of
//! several depths at input dimension 17.
//!
//! cargo run --release --example random_lines

use region_atlas::net::init::{init_net, InitScheme};
use region_atlas::net::RunningObsStats;
use region_atlas::region::{random_lines_density, LineAnchor, Provenance, Trajectory};
use region_atlas::rng;
use rand_distr::{Distribution, Normal};

fn main() -> region_atlas::Result<()> {
    // Random-walk states with a drifting mean stand in for observations.
    let mut r = rng::stream(0, "walk");
    let step = Normal::new(0.0, 1.0).unwrap();
    let mut x = vec![0.0; 17];
    let mut states = Vec::new();
    for _ in 0..500 {
        for (i, v) in x.iter_mut().enumerate() {
            *v += step.sample(&mut r) + 0.05 * i as f64;
        }
        states.push(x.clone());
    }
    let traj = Trajectory::new(states, Provenance::External)?;
    let mut stats = RunningObsStats::new(17);
    traj.states().iter().for_each(|s| stats.update(s));

    for widths in [vec![64], vec![32, 32], vec![16, 16, 16, 16]] {
        let net = init_net(&mut rng::stream(1, "arch"), 17, &widths, 6, InitScheme::ppo_policy())
            .with_normalizer(stats.to_normalizer(None))?;
        for anchor in [LineAnchor::Origin, LineAnchor::Mean] {
            let s = random_lines_density(&net, &traj, 100, anchor, &mut rng::stream(2, "lines"))?;
            println!("{widths:?} {anchor:?}: R_T/N = {:.3} +- {:.3}", s.mean, s.std);
        }
    }
    Ok(())
}
