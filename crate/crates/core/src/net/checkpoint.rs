//! Interchange checkpoint format.
//!
//! ```json
//! { "format_version": 1, "input_dim": 2, "output_dim": 1, "activation": "relu",
//!   "layers": [{ "w": [[...], ...], "b": [...] }, ...],
//!   "output": { "w": [[...]], "b": [...] },
//!   "normalizer": { "mean": [...], "var": [...], "clip": null, "eps": 1e-8 } }
//! ```
//!
//! Floats are written in shortest round-trip form, so save/load is lossless.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dense, ObsNormalizer, ReluNet};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointLayer {
    pub w: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointNormalizer {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub clip: Option<f64>,
    pub eps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub input_dim: usize,
    pub output_dim: usize,
    pub activation: String,
    pub layers: Vec<CheckpointLayer>,
    pub output: CheckpointLayer,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalizer: Option<CheckpointNormalizer>,
}

impl From<&Dense> for CheckpointLayer {
    fn from(d: &Dense) -> Self {
        Self {
            w: d.rows(),
            b: d.bias.iter().copied().collect(),
        }
    }
}

impl From<&ReluNet> for Checkpoint {
    fn from(net: &ReluNet) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            input_dim: net.input_dim(),
            output_dim: net.output_dim(),
            activation: "relu".into(),
            layers: net.hidden().iter().map(CheckpointLayer::from).collect(),
            output: net.output().into(),
            normalizer: net.normalizer().map(|n| CheckpointNormalizer {
                mean: n.mean.clone(),
                var: n.var.clone(),
                clip: n.clip,
                eps: n.eps,
            }),
        }
    }
}

impl TryFrom<Checkpoint> for ReluNet {
    type Error = Error;

    fn try_from(c: Checkpoint) -> Result<Self> {
        if c.format_version != FORMAT_VERSION {
            return Err(Error::InvalidNet(format!(
                "unsupported format_version {}",
                c.format_version
            )));
        }
        if c.activation != "relu" {
            return Err(Error::InvalidNet(format!(
                "unsupported activation {:?}",
                c.activation
            )));
        }
        let layer = |l: &CheckpointLayer| Dense::from_rows(&l.w, &l.b);
        let hidden = c.layers.iter().map(layer).collect::<Result<Vec<_>>>()?;
        let net = ReluNet::new(hidden, layer(&c.output)?)?;
        if net.input_dim() != c.input_dim {
            return Err(Error::DimensionMismatch {
                what: "checkpoint input_dim",
                expected: c.input_dim,
                found: net.input_dim(),
            });
        }
        if net.output_dim() != c.output_dim {
            return Err(Error::DimensionMismatch {
                what: "checkpoint output_dim",
                expected: c.output_dim,
                found: net.output_dim(),
            });
        }
        match c.normalizer {
            Some(n) => net.with_normalizer(ObsNormalizer::new(n.mean, n.var, n.clip, n.eps)?),
            None => Ok(net),
        }
    }
}

impl ReluNet {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&Checkpoint::from(self)).expect("checkpoint serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Checkpoint = serde_json::from_str(s)?;
        c.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| Error::file(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Self::from_json(&s)
    }
}
