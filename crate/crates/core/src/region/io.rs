//! Trajectory files and metric tables.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::trajectory::{Provenance, Trajectory, TrajectoryMetrics};
use crate::error::{Error, Result};

/// `{ "dim": d, "states": [[...], ...], "provenance": "fixed|current|random|external" }`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFile {
    pub dim: usize,
    pub states: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

/// Several trajectories in one file, e.g. one training epoch's rollouts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryBatch {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epoch: Option<usize>,
    pub trajectories: Vec<TrajectoryFile>,
}

impl From<&Trajectory> for TrajectoryFile {
    fn from(t: &Trajectory) -> Self {
        Self {
            dim: t.dim(),
            states: t.states().to_vec(),
            provenance: t.provenance(),
        }
    }
}

impl TryFrom<TrajectoryFile> for Trajectory {
    type Error = Error;

    fn try_from(f: TrajectoryFile) -> Result<Self> {
        let t = Trajectory::new(f.states, f.provenance)?;
        if t.dim() != f.dim {
            return Err(Error::DimensionMismatch {
                what: "trajectory dim field",
                expected: f.dim,
                found: t.dim(),
            });
        }
        Ok(t)
    }
}

impl TrajectoryBatch {
    pub fn new(epoch: Option<usize>, trajectories: &[Trajectory]) -> Self {
        Self {
            epoch,
            trajectories: trajectories.iter().map(TrajectoryFile::from).collect(),
        }
    }

    pub fn into_trajectories(self) -> Result<Vec<Trajectory>> {
        self.trajectories.into_iter().map(Trajectory::try_from).collect()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AnyTrajectoryFile {
    Single(TrajectoryFile),
    Batch(TrajectoryBatch),
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::file(path, e))
}

pub fn read_trajectory(path: impl AsRef<Path>) -> Result<Trajectory> {
    let f: TrajectoryFile = serde_json::from_str(&read(path.as_ref())?)?;
    f.try_into()
}

/// Reads either a single-trajectory file or a batch file.
pub fn read_trajectories(path: impl AsRef<Path>) -> Result<Vec<Trajectory>> {
    match serde_json::from_str(&read(path.as_ref())?)? {
        AnyTrajectoryFile::Single(f) => Ok(vec![f.try_into()?]),
        AnyTrajectoryFile::Batch(b) => b.into_trajectories(),
    }
}

pub fn write_trajectory(path: impl AsRef<Path>, traj: &Trajectory) -> Result<()> {
    let path = path.as_ref();
    let s = serde_json::to_string(&TrajectoryFile::from(traj))?;
    fs::write(path, s).map_err(|e| Error::file(path, e))
}

/// CSV table with one row per trajectory.
pub fn metrics_csv<'a>(rows: impl IntoIterator<Item = (usize, &'a TrajectoryMetrics)>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["trajectory", "R_T", "R_U", "L", "rho", "repeats", "N"])?;
    for (i, m) in rows {
        w.write_record([
            i.to_string(),
            m.transitions.to_string(),
            m.unique_regions.to_string(),
            m.length.to_string(),
            m.rho.to_string(),
            m.repeats.to_string(),
            m.neurons.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn metrics_json_field_names() {
        let m = TrajectoryMetrics {
            transitions: 3,
            unique_regions: 2,
            length: 1.5,
            rho: 0.25,
            repeats: 1,
            neurons: 8,
        };
        let v: serde_json::Value = serde_json::to_value(m).unwrap();
        for key in ["R_T", "R_U", "L", "rho", "repeats", "N"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let csv = metrics_csv([(0, &m)]).unwrap();
        assert_eq!(csv, "trajectory,R_T,R_U,L,rho,repeats,N\n0,3,2,1.5,0.25,1,8\n");
    }

    #[test]
    fn reads_single_and_batch() {
        let dir = tempfile::tempdir().unwrap();
        let t = Trajectory::new(vec![vec![1.0, 2.0], vec![3.0, 4.0]], Provenance::Random).unwrap();
        let single = dir.path().join("t.json");
        write_trajectory(&single, &t).unwrap();
        assert_eq!(read_trajectories(&single).unwrap(), vec![t.clone()]);
        let text = std::fs::read_to_string(&single).unwrap();
        assert!(text.contains("\"provenance\":\"random\""));

        let batch = dir.path().join("b.json");
        let b = TrajectoryBatch::new(Some(3), &[t.clone(), t.reversed()]);
        std::fs::write(&batch, serde_json::to_string(&b).unwrap()).unwrap();
        assert_eq!(read_trajectories(&batch).unwrap().len(), 2);
    }

    #[test]
    fn rejects_wrong_dim_field() {
        let f = TrajectoryFile {
            dim: 3,
            states: vec![vec![0.0, 1.0]],
            provenance: Provenance::External,
        };
        assert!(Trajectory::try_from(f).is_err());
    }

    proptest! {
        #[test]
        fn json_preserves_every_bit(values in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 2..60)) {
            let states: Vec<Vec<f64>> = values.chunks(2).filter(|c| c.len() == 2).map(|c| c.to_vec()).collect();
            let t = Trajectory::new(states, Provenance::External).unwrap();
            let s = serde_json::to_string(&TrajectoryFile::from(&t)).unwrap();
            let back: Trajectory = serde_json::from_str::<TrajectoryFile>(&s).unwrap().try_into().unwrap();
            for (a, b) in back.states().iter().flatten().zip(t.states().iter().flatten()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
