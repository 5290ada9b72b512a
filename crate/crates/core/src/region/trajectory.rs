use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::segment::{decompose_segment_with, DecomposeOptions, ParamSegment};
use crate::error::{Error, Result};
use crate::net::{ActivationPattern, ReluNet};

/// Where a trajectory came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Rolled out from the final trained policy.
    Fixed,
    /// Rolled out from the policy snapshot at the current epoch.
    Current,
    /// Generated by uniformly random actions.
    Random,
    External,
}

/// Ordered sequence of raw (un-normalized) states.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    states: Vec<Vec<f64>>,
    provenance: Provenance,
}

impl Trajectory {
    pub fn new(states: Vec<Vec<f64>>, provenance: Provenance) -> Result<Self> {
        let Some(first) = states.first() else {
            return Err(Error::InvalidInput("trajectory has no states".into()));
        };
        let d = first.len();
        if d == 0 {
            return Err(Error::InvalidInput("trajectory states are empty".into()));
        }
        for s in &states {
            if s.len() != d {
                return Err(Error::DimensionMismatch {
                    what: "trajectory state",
                    expected: d,
                    found: s.len(),
                });
            }
            if s.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("trajectory state".into()));
            }
        }
        Ok(Self { states, provenance })
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn into_states(self) -> Vec<Vec<f64>> {
        self.states
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Sum of Euclidean distances between consecutive raw states.
    pub fn length(&self) -> f64 {
        self.states
            .windows(2)
            .map(|w| {
                w[0].iter()
                    .zip(&w[1])
                    .map(|(a, b)| (b - a) * (b - a))
                    .sum::<f64>()
                    .sqrt()
            })
            .sum()
    }

    /// Same states in reverse order.
    pub fn reversed(&self) -> Self {
        let mut states = self.states.clone();
        states.reverse();
        Self {
            states,
            provenance: self.provenance,
        }
    }

    /// Every state multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            states: self
                .states
                .iter()
                .map(|s| s.iter().map(|v| v * factor).collect())
                .collect(),
            provenance: self.provenance,
        }
    }
}

/// Region counts along a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMetrics {
    /// Total region transitions.
    #[serde(rename = "R_T")]
    pub transitions: usize,
    /// Number of distinct activation patterns visited.
    #[serde(rename = "R_U")]
    pub unique_regions: usize,
    /// Euclidean length in raw state coordinates.
    #[serde(rename = "L")]
    pub length: f64,
    /// `R_T / (N * L)`.
    pub rho: f64,
    /// `R_T - R_U`. Counting every visit, the number of returns to an
    /// already-seen region is `R_T + 1 - R_U`; see [`Self::revisits`].
    pub repeats: i64,
    #[serde(rename = "N")]
    pub neurons: usize,
}

impl TrajectoryMetrics {
    /// Region visits beyond the first visit of each region, `R_T + 1 - R_U`.
    pub fn revisits(&self) -> usize {
        self.transitions + 1 - self.unique_regions
    }
}

/// Patterns visited along the trajectory in order, with consecutive
/// duplicates removed.
pub fn trajectory_patterns(net: &ReluNet, traj: &Trajectory) -> Result<Vec<ActivationPattern>> {
    trajectory_patterns_with(net, traj, &DecomposeOptions::default())
}

pub fn trajectory_patterns_with(
    net: &ReluNet,
    traj: &Trajectory,
    opts: &DecomposeOptions,
) -> Result<Vec<ActivationPattern>> {
    if traj.dim() != net.input_dim() {
        return Err(Error::DimensionMismatch {
            what: "trajectory",
            expected: net.input_dim(),
            found: traj.dim(),
        });
    }
    if traj.len() < 2 {
        return Err(Error::InvalidInput("trajectory needs at least two states".into()));
    }
    let mut out: Vec<ActivationPattern> = Vec::new();
    for w in traj.states().windows(2) {
        let seg = ParamSegment::segment(&w[0], &w[1])?;
        let dec = decompose_segment_with(net, &seg, opts)?;
        for iv in dec.intervals {
            if out.last() != Some(&iv.pattern) {
                out.push(iv.pattern);
            }
        }
    }
    Ok(out)
}

/// Transition count, unique count and length. Unlike
/// [`trajectory_metrics`] this accepts zero-length trajectories.
pub fn trajectory_counts(
    net: &ReluNet,
    traj: &Trajectory,
    opts: &DecomposeOptions,
) -> Result<(usize, usize, f64)> {
    let patterns = trajectory_patterns_with(net, traj, opts)?;
    let unique: BTreeSet<&ActivationPattern> = patterns.iter().collect();
    Ok((patterns.len() - 1, unique.len(), traj.length()))
}

pub fn trajectory_metrics(net: &ReluNet, traj: &Trajectory) -> Result<TrajectoryMetrics> {
    trajectory_metrics_with(net, traj, &DecomposeOptions::default())
}

/// Decomposes every segment between consecutive states and counts pattern
/// changes over the concatenated piece list. A boundary that passes exactly
/// through a shared state is therefore counted once.
pub fn trajectory_metrics_with(
    net: &ReluNet,
    traj: &Trajectory,
    opts: &DecomposeOptions,
) -> Result<TrajectoryMetrics> {
    let (transitions, unique_regions, length) = trajectory_counts(net, traj, opts)?;
    if !(length > 0.0) {
        return Err(Error::Degenerate(
            "trajectory has zero length; density is undefined".into(),
        ));
    }
    let neurons = net.neuron_count();
    Ok(TrajectoryMetrics {
        transitions,
        unique_regions,
        length,
        rho: transitions as f64 / (neurons as f64 * length),
        repeats: transitions as i64 - unique_regions as i64,
        neurons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::init::uniform_net;
    use crate::net::Dense;
    use proptest::prelude::*;
    use rand::Rng;

    fn one_neuron() -> ReluNet {
        ReluNet::new(
            vec![Dense::from_rows(&[vec![1.0, 0.0]], &[0.0]).unwrap()],
            Dense::from_rows(&[vec![1.0]], &[0.0]).unwrap(),
        )
        .unwrap()
    }

    fn walk(seed: u64, d: usize, n: usize, step: f64) -> Trajectory {
        let mut rng = crate::rng::stream(seed, "walk");
        let mut x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut states = vec![x.clone()];
        for _ in 1..n {
            for v in &mut x {
                *v += rng.random_range(-step..step);
            }
            states.push(x.clone());
        }
        Trajectory::new(states, Provenance::External).unwrap()
    }

    #[test]
    fn single_region() {
        let t = Trajectory::new(vec![vec![1.0, 0.0], vec![2.0, 1.0], vec![3.0, 0.0]], Provenance::Fixed)
            .unwrap();
        let m = trajectory_metrics(&one_neuron(), &t).unwrap();
        assert_eq!(m.transitions, 0);
        assert_eq!(m.unique_regions, 1);
        assert_eq!(m.repeats, -1);
        assert_eq!(m.revisits(), 0);
        assert_eq!(m.rho, 0.0);
        assert!((m.length - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn one_crossing() {
        let t = Trajectory::new(vec![vec![-1.0, 0.0], vec![2.0, 0.0]], Provenance::External).unwrap();
        let m = trajectory_metrics(&one_neuron(), &t).unwrap();
        assert_eq!((m.transitions, m.unique_regions, m.neurons), (1, 2, 1));
        assert!((m.rho - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_through_shared_state_counts_once() {
        let t = Trajectory::new(
            vec![vec![-1.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0]],
            Provenance::External,
        )
        .unwrap();
        let m = trajectory_metrics(&one_neuron(), &t).unwrap();
        assert_eq!(m.transitions, 1);
    }

    #[test]
    fn revisits_and_repeats() {
        let t = Trajectory::new(
            vec![vec![-1.0, 0.0], vec![1.0, 0.0], vec![-1.0, 0.0], vec![1.0, 0.0]],
            Provenance::External,
        )
        .unwrap();
        let m = trajectory_metrics(&one_neuron(), &t).unwrap();
        assert_eq!((m.transitions, m.unique_regions), (3, 2));
        assert_eq!(m.repeats, 1);
        assert_eq!(m.revisits(), 2);
    }

    #[test]
    fn crossing_between_states_is_counted() {
        // Both states lie in the positive region; the segment between them dips
        // through the negative side of a second neuron.
        let h = Dense::from_rows(&[vec![0.0, 1.0]], &[0.0]).unwrap();
        let n = ReluNet::new(vec![h], Dense::from_rows(&[vec![1.0]], &[0.0]).unwrap()).unwrap();
        let t = Trajectory::new(vec![vec![0.0, 1.0], vec![1.0, -1.0], vec![2.0, 1.0]], Provenance::External)
            .unwrap();
        assert_eq!(trajectory_metrics(&n, &t).unwrap().transitions, 2);
    }

    #[test]
    fn errors() {
        let single = Trajectory::new(vec![vec![0.0, 0.0]], Provenance::External).unwrap();
        assert!(trajectory_metrics(&one_neuron(), &single).is_err());
        let still = Trajectory::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]], Provenance::External).unwrap();
        assert!(matches!(
            trajectory_metrics(&one_neuron(), &still),
            Err(Error::Degenerate(_))
        ));
        assert_eq!(
            trajectory_counts(&one_neuron(), &still, &DecomposeOptions::default()).unwrap(),
            (0, 1, 0.0)
        );
        assert!(Trajectory::new(vec![], Provenance::External).is_err());
        assert!(Trajectory::new(vec![vec![0.0], vec![0.0, 1.0]], Provenance::External).is_err());
        let t3 = Trajectory::new(vec![vec![0.0; 3], vec![1.0; 3]], Provenance::External).unwrap();
        assert!(matches!(
            trajectory_metrics(&one_neuron(), &t3),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn identities_and_symmetries(seed in 0u64..100_000) {
            let net = uniform_net(&mut crate::rng::stream(seed, "tm-net"), 3, &[8, 8], 1, 1.0, 0.5);
            let t = walk(seed, 3, 20, 0.6);
            let m = trajectory_metrics(&net, &t).unwrap();
            prop_assert!(m.transitions + 1 >= m.unique_regions);
            prop_assert_eq!(m.repeats, m.transitions as i64 - m.unique_regions as i64);

            let r = trajectory_metrics(&net, &t.reversed()).unwrap();
            prop_assert_eq!((r.transitions, r.unique_regions), (m.transitions, m.unique_regions));
        }

        #[test]
        fn rescaling_states_with_inverse_first_layer(seed in 0u64..100_000, c in 0.1f64..10.0) {
            let net = uniform_net(&mut crate::rng::stream(seed, "sc-net"), 2, &[6, 6], 1, 1.0, 0.5);
            let mut scaled_net = net.clone();
            for l in scaled_net.layers_mut().take(1) {
                l.weight /= c;
            }
            let t = walk(seed, 2, 15, 0.5);
            let m = trajectory_metrics(&net, &t).unwrap();
            let s = trajectory_metrics(&scaled_net, &t.scaled(c)).unwrap();
            prop_assert_eq!((s.transitions, s.unique_regions), (m.transitions, m.unique_regions));
            if m.transitions > 0 {
                prop_assert!((s.rho * c - m.rho).abs() <= 1e-9 * m.rho);
            }
        }
    }
}
