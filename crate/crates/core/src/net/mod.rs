//! ReLU networks, activation patterns and region-local affine maps.

mod checkpoint;
pub mod init;
mod normalizer;
mod pattern;

use nalgebra::{DMatrix, DVector};

pub use checkpoint::{Checkpoint, CheckpointLayer, CheckpointNormalizer, FORMAT_VERSION};
pub use normalizer::{ObsNormalizer, RunningObsStats, DEFAULT_EPS};
pub use pattern::ActivationPattern;

use crate::error::{Error, Result};

/// Affine layer `x -> W x + b` with `W` of shape `outputs × inputs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub weight: DMatrix<f64>,
    pub bias: DVector<f64>,
}

impl Dense {
    pub fn new(weight: DMatrix<f64>, bias: DVector<f64>) -> Result<Self> {
        if weight.nrows() != bias.len() {
            return Err(Error::DimensionMismatch {
                what: "layer bias",
                expected: weight.nrows(),
                found: bias.len(),
            });
        }
        if weight.nrows() == 0 || weight.ncols() == 0 {
            return Err(Error::InvalidNet("layers must have positive width".into()));
        }
        Ok(Self { weight, bias })
    }

    pub fn zeros(outputs: usize, inputs: usize) -> Self {
        Self {
            weight: DMatrix::zeros(outputs, inputs),
            bias: DVector::zeros(outputs),
        }
    }

    /// Builds a layer from row-major weights.
    pub fn from_rows(rows: &[Vec<f64>], bias: &[f64]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                what: "weight row",
                expected: cols,
                found: r.len(),
            });
        }
        let weight = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
        Self::new(weight, DVector::from_column_slice(bias))
    }

    pub fn inputs(&self) -> usize {
        self.weight.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weight.nrows()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.weight
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    fn is_finite(&self) -> bool {
        self.weight.iter().chain(self.bias.iter()).all(|v| v.is_finite())
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.weight * x + &self.bias
    }

    pub fn param_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }
}

/// Feed-forward ReLU network with an optional input normalizer.
///
/// The output layer is affine and is not counted among the hidden neurons.
#[derive(Clone, Debug, PartialEq)]
pub struct ReluNet {
    hidden: Vec<Dense>,
    output: Dense,
    normalizer: Option<ObsNormalizer>,
}

/// Affine map `x -> W x + b` the network computes on one linear region.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionAffine {
    pub weight: DMatrix<f64>,
    pub bias: DVector<f64>,
}

impl RegionAffine {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (&self.weight * DVector::from_column_slice(x) + &self.bias)
            .iter()
            .copied()
            .collect()
    }
}

impl ReluNet {
    pub fn new(hidden: Vec<Dense>, output: Dense) -> Result<Self> {
        if hidden.is_empty() {
            return Err(Error::InvalidNet("at least one hidden layer is required".into()));
        }
        for k in 1..hidden.len() {
            if hidden[k].inputs() != hidden[k - 1].outputs() {
                return Err(Error::DimensionMismatch {
                    what: "hidden layer input",
                    expected: hidden[k - 1].outputs(),
                    found: hidden[k].inputs(),
                });
            }
        }
        let last = hidden.last().unwrap().outputs();
        if output.inputs() != last {
            return Err(Error::DimensionMismatch {
                what: "output layer input",
                expected: last,
                found: output.inputs(),
            });
        }
        if !hidden.iter().chain(std::iter::once(&output)).all(Dense::is_finite) {
            return Err(Error::NonFinite("network weights".into()));
        }
        Ok(Self {
            hidden,
            output,
            normalizer: None,
        })
    }

    /// Network with every weight and bias equal to zero.
    pub fn zeros(input_dim: usize, widths: &[usize], output_dim: usize) -> Result<Self> {
        let mut hidden = Vec::with_capacity(widths.len());
        let mut prev = input_dim;
        for &w in widths {
            hidden.push(Dense::zeros(w, prev));
            prev = w;
        }
        if input_dim == 0 || output_dim == 0 || widths.contains(&0) {
            return Err(Error::InvalidNet("dimensions must be positive".into()));
        }
        Self::new(hidden, Dense::zeros(output_dim, prev))
    }

    pub fn with_normalizer(mut self, normalizer: ObsNormalizer) -> Result<Self> {
        normalizer.validate()?;
        if normalizer.dim() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                what: "normalizer",
                expected: self.input_dim(),
                found: normalizer.dim(),
            });
        }
        self.normalizer = Some(normalizer);
        Ok(self)
    }

    pub fn without_normalizer(mut self) -> Self {
        self.normalizer = None;
        self
    }

    pub fn normalizer(&self) -> Option<&ObsNormalizer> {
        self.normalizer.as_ref()
    }

    pub fn hidden(&self) -> &[Dense] {
        &self.hidden
    }

    pub fn output(&self) -> &Dense {
        &self.output
    }

    pub(crate) fn layers_mut(&mut self) -> impl Iterator<Item = &mut Dense> {
        self.hidden.iter_mut().chain(std::iter::once(&mut self.output))
    }

    pub fn input_dim(&self) -> usize {
        self.hidden[0].inputs()
    }

    pub fn output_dim(&self) -> usize {
        self.output.outputs()
    }

    pub fn hidden_widths(&self) -> Vec<usize> {
        self.hidden.iter().map(Dense::outputs).collect()
    }

    pub fn depth(&self) -> usize {
        self.hidden.len()
    }

    /// Total number of hidden neurons.
    pub fn neuron_count(&self) -> usize {
        self.hidden.iter().map(Dense::outputs).sum()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                what: "network input",
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("network input".into()));
        }
        Ok(())
    }

    /// Input after the normalizer (clipping included).
    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        match &self.normalizer {
            Some(n) => n.apply(x),
            None => x.to_vec(),
        }
    }

    /// Maps a raw point into the network's input space without clipping.
    pub(crate) fn standardize_point(&self, x: &[f64]) -> Vec<f64> {
        match &self.normalizer {
            Some(n) => n.standardize(x),
            None => x.to_vec(),
        }
    }

    pub(crate) fn standardize_direction(&self, v: &[f64]) -> Vec<f64> {
        match &self.normalizer {
            Some(n) => n.standardize_direction(v),
            None => v.to_vec(),
        }
    }

    pub(crate) fn ensure_clip_inactive<'a>(
        &self,
        standardized: impl IntoIterator<Item = &'a [f64]>,
    ) -> Result<()> {
        match &self.normalizer {
            Some(n) => n.ensure_clip_inactive(standardized),
            None => Ok(()),
        }
    }

    /// True when the normalizer clips, so unbounded domains cannot be analyzed.
    pub(crate) fn clips(&self) -> bool {
        self.normalizer.as_ref().is_some_and(|n| n.clip.is_some())
    }

    /// Pre-activations of every hidden layer for input `x`.
    pub fn pre_activations(&self, x: &[f64]) -> Result<Vec<DVector<f64>>> {
        self.check_input(x)?;
        let mut h = DVector::from_vec(self.normalize(x));
        let mut out = Vec::with_capacity(self.hidden.len());
        for layer in &self.hidden {
            let z = layer.apply(&h);
            h = z.map(|v| v.max(0.0));
            out.push(z);
        }
        Ok(out)
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut h = DVector::from_vec(self.normalize(x));
        for layer in &self.hidden {
            h = layer.apply(&h).map(|v| v.max(0.0));
        }
        Ok(self.output.apply(&h).iter().copied().collect())
    }

    pub fn activation_pattern(&self, x: &[f64]) -> Result<ActivationPattern> {
        let pre = self.pre_activations(x)?;
        let mut p = ActivationPattern::zeros(self.neuron_count());
        let mut i = 0;
        for z in &pre {
            for &v in z.iter() {
                p.set(i, v >= 0.0);
                i += 1;
            }
        }
        Ok(p)
    }

    /// Affine map valid on the linear region containing `x`, in raw input
    /// coordinates (the normalizer's affine part is folded in).
    pub fn region_affine(&self, x: &[f64]) -> Result<RegionAffine> {
        let pattern = self.activation_pattern(x)?;
        Ok(self.affine_for_pattern(&pattern))
    }

    /// Composes the layers with each inactive neuron's row zeroed, which is
    /// the same as zeroing the matching column of the following layer.
    pub fn affine_for_pattern(&self, pattern: &ActivationPattern) -> RegionAffine {
        assert_eq!(pattern.len(), self.neuron_count());
        let d = self.input_dim();
        let (mut a, mut c) = match &self.normalizer {
            Some(n) => (
                DMatrix::from_diagonal(&DVector::from_fn(d, |i, _| n.scale(i))),
                DVector::from_fn(d, |i, _| -n.mean[i] * n.scale(i)),
            ),
            None => (DMatrix::identity(d, d), DVector::zeros(d)),
        };
        let mut bit = 0;
        for layer in &self.hidden {
            a = &layer.weight * a;
            c = &layer.weight * c + &layer.bias;
            for j in 0..layer.outputs() {
                if !pattern.get(bit) {
                    a.row_mut(j).fill(0.0);
                    c[j] = 0.0;
                }
                bit += 1;
            }
        }
        RegionAffine {
            weight: &self.output.weight * a,
            bias: &self.output.weight * c + &self.output.bias,
        }
    }

    /// Equivalent network with the normalizer's affine part absorbed into the
    /// first layer. Clipping, if any, is dropped.
    pub fn folded(&self) -> ReluNet {
        let mut net = self.clone().without_normalizer();
        if let Some(n) = &self.normalizer {
            let first = &mut net.hidden[0];
            let scale = DVector::from_fn(n.dim(), |i, _| n.scale(i));
            let shift = DVector::from_fn(n.dim(), |i, _| n.mean[i] * n.scale(i));
            first.bias -= &first.weight * shift;
            for (j, mut col) in first.weight.column_iter_mut().enumerate() {
                col *= scale[j];
            }
        }
        net
    }

    pub fn param_count(&self) -> usize {
        self.hidden.iter().map(Dense::param_count).sum::<usize>() + self.output.param_count()
    }

    /// All weights and biases, layer by layer, each weight matrix row-major
    /// followed by its bias.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in self.hidden.iter().chain(std::iter::once(&self.output)) {
            for i in 0..layer.outputs() {
                for j in 0..layer.inputs() {
                    out.push(layer.weight[(i, j)]);
                }
            }
            out.extend(layer.bias.iter());
        }
        out
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.param_count());
        let mut it = flat.iter().copied();
        for layer in self.layers_mut() {
            for i in 0..layer.outputs() {
                for j in 0..layer.inputs() {
                    layer.weight[(i, j)] = it.next().unwrap();
                }
            }
            for b in layer.bias.iter_mut() {
                *b = it.next().unwrap();
            }
        }
    }
}


/// Restriction of a layer to an affine family of inputs.
///
/// Each input coordinate is given as an affine function of `K - 1` parameters
/// (coefficients first, constant term last); the result holds the same
/// representation for each of the layer's outputs.
pub(crate) fn restrict_layer<const K: usize>(layer: &Dense, input: &[[f64; K]]) -> Vec<[f64; K]> {
    debug_assert_eq!(input.len(), layer.inputs());
    let mut out = vec![[0.0; K]; layer.outputs()];
    for (j, o) in out.iter_mut().enumerate() {
        for (i, x) in input.iter().enumerate() {
            let w = layer.weight[(j, i)];
            if w != 0.0 {
                for k in 0..K {
                    o[k] += w * x[k];
                }
            }
        }
        o[K - 1] += layer.bias[j];
    }
    out
}

pub(crate) fn eval_affine<const K: usize>(c: &[f64; K], params: &[f64]) -> f64 {
    let mut v = c[K - 1];
    for k in 0..K - 1 {
        v += c[k] * params[k];
    }
    v
}
