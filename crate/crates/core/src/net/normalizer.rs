use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_EPS: f64 = 1e-8;

/// Coordinate-wise standardization `(x - mean) / sqrt(var + eps)`, optionally
/// clipped to `[-clip, clip]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObsNormalizer {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub clip: Option<f64>,
    pub eps: f64,
}

impl ObsNormalizer {
    pub fn new(mean: Vec<f64>, var: Vec<f64>, clip: Option<f64>, eps: f64) -> Result<Self> {
        let n = Self {
            mean,
            var,
            clip,
            eps,
        };
        n.validate()?;
        Ok(n)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            var: vec![1.0; dim],
            clip: None,
            eps: DEFAULT_EPS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mean.len() != self.var.len() {
            return Err(Error::DimensionMismatch {
                what: "normalizer variance",
                expected: self.mean.len(),
                found: self.var.len(),
            });
        }
        if self.mean.iter().chain(&self.var).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("normalizer statistics".into()));
        }
        if self.var.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidNet("normalizer variance must be non-negative".into()));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidNet("normalizer eps must be positive".into()));
        }
        if let Some(c) = self.clip {
            if !(c > 0.0) {
                return Err(Error::InvalidNet("normalizer clip must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Per-coordinate multiplier `1 / sqrt(var + eps)`.
    pub fn scale(&self, i: usize) -> f64 {
        1.0 / (self.var[i] + self.eps).sqrt()
    }

    /// Affine part only, without clipping.
    pub fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, &v)| (v - self.mean[i]) * self.scale(i))
            .collect()
    }

    /// Applies a direction vector through the linear part (no offset).
    pub fn standardize_direction(&self, v: &[f64]) -> Vec<f64> {
        v.iter().enumerate().map(|(i, &d)| d * self.scale(i)).collect()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.standardize(x);
        if let Some(c) = self.clip {
            for v in &mut y {
                *v = v.clamp(-c, c);
            }
        }
        y
    }

    /// Checks that clipping cannot bind on the convex hull of the given
    /// standardized points.
    pub(crate) fn ensure_clip_inactive<'a>(
        &self,
        standardized: impl IntoIterator<Item = &'a [f64]>,
    ) -> Result<()> {
        let Some(c) = self.clip else { return Ok(()) };
        for p in standardized {
            if let Some(i) = p.iter().position(|v| v.abs() > c) {
                return Err(Error::ClipActive { coordinate: i });
            }
        }
        Ok(())
    }
}

/// Running mean and population variance of observed states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunningObsStats {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RunningObsStats {
    pub fn new(dim: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn update(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.mean.len());
        self.count += 1;
        let n = self.count as f64;
        for (i, &v) in x.iter().enumerate() {
            let delta = v - self.mean[i];
            self.mean[i] += delta / n;
            self.m2[i] += delta * (v - self.mean[i]);
        }
    }

    pub fn variance(&self) -> Vec<f64> {
        if self.count == 0 {
            return vec![1.0; self.mean.len()];
        }
        self.m2.iter().map(|m| m / self.count as f64).collect()
    }

    /// Snapshot as a normalizer. Before any observation this is the identity.
    pub fn to_normalizer(&self, clip: Option<f64>) -> ObsNormalizer {
        ObsNormalizer {
            mean: self.mean.clone(),
            var: self.variance(),
            clip,
            eps: DEFAULT_EPS,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn running_stats_match_two_pass() {
        let mut rng = crate::rng::stream(3, "test");
        let data: Vec<Vec<f64>> = (0..500)
            .map(|_| vec![rng.random_range(-50.0..150.0), rng.random_range(-20.0..20.0) * 3.0])
            .collect();
        let mut stats = RunningObsStats::new(2);
        for x in &data {
            stats.update(x);
        }
        let var = stats.variance();
        for i in 0..2 {
            let mean = data.iter().map(|x| x[i]).sum::<f64>() / data.len() as f64;
            let v = data.iter().map(|x| (x[i] - mean).powi(2)).sum::<f64>() / data.len() as f64;
            assert!((stats.mean()[i] - mean).abs() < 1e-9);
            assert!((var[i] - v).abs() < 1e-9 * v.max(1.0));
        }
    }

    #[test]
    fn empty_stats_are_identity() {
        let n = RunningObsStats::new(3).to_normalizer(None);
        let y = n.apply(&[1.0, -2.0, 3.0]);
        for (a, b) in y.iter().zip([1.0, -2.0, 3.0]) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn rejects_negative_variance() {
        assert!(ObsNormalizer::new(vec![0.0], vec![-1.0], None, 1e-8).is_err());
        assert!(ObsNormalizer::new(vec![0.0], vec![1.0], Some(0.0), 1e-8).is_err());
    }

    #[test]
    fn clip_detection() {
        let n = ObsNormalizer::new(vec![0.0], vec![1.0], Some(5.0), 1e-8).unwrap();
        assert!(n.ensure_clip_inactive([&[4.0][..]]).is_ok());
        assert!(matches!(
            n.ensure_clip_inactive([&[4.0][..], &[-6.0][..]]),
            Err(Error::ClipActive { coordinate: 0 })
        ));
    }
}
