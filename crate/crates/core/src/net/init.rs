//! Weight initialization schemes.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::{Dense, ReluNet};
use crate::rng::Rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitScheme {
    /// Orthogonal weights scaled by a gain, zero biases. Hidden layers and the
    /// output layer use separate gains.
    Orthogonal { hidden_gain: f64, output_gain: f64 },
    /// Fan-in scaled normal weights with variance `1 / (3 fan_in)` (He init
    /// with negative slope `sqrt(5)`) and normal biases with variance
    /// `1 / fan_in`.
    FanIn,
}

impl InitScheme {
    /// Policy-network defaults for PPO: gain `sqrt(2)` on hidden layers,
    /// `0.01` on the action head.
    pub fn ppo_policy() -> Self {
        InitScheme::Orthogonal {
            hidden_gain: std::f64::consts::SQRT_2,
            output_gain: 0.01,
        }
    }

    /// Value-network defaults for PPO: gain `sqrt(2)` on hidden layers, `1`
    /// on the output.
    pub fn ppo_value() -> Self {
        InitScheme::Orthogonal {
            hidden_gain: std::f64::consts::SQRT_2,
            output_gain: 1.0,
        }
    }
}

/// Semi-orthogonal `rows × cols` matrix scaled by `gain`: orthonormal rows
/// when `rows <= cols`, orthonormal columns otherwise.
pub fn orthogonal(rng: &mut Rng, rows: usize, cols: usize, gain: f64) -> DMatrix<f64> {
    let (tall, short) = (rows.max(cols), rows.min(cols));
    let g = DMatrix::<f64>::from_fn(tall, short, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..short {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    let q = if rows < cols { q.transpose() } else { q };
    q * gain
}

fn dense(rng: &mut Rng, outputs: usize, inputs: usize, scheme: InitScheme, is_output: bool) -> Dense {
    match scheme {
        InitScheme::Orthogonal {
            hidden_gain,
            output_gain,
        } => {
            let gain = if is_output { output_gain } else { hidden_gain };
            Dense {
                weight: orthogonal(rng, outputs, inputs, gain),
                bias: DVector::zeros(outputs),
            }
        }
        InitScheme::FanIn => {
            let fan_in = inputs as f64;
            let w = Normal::new(0.0, (1.0 / (3.0 * fan_in)).sqrt()).unwrap();
            let b = Normal::new(0.0, (1.0 / fan_in).sqrt()).unwrap();
            Dense {
                weight: DMatrix::from_fn(outputs, inputs, |_, _| w.sample(rng)),
                bias: DVector::from_fn(outputs, |_, _| b.sample(rng)),
            }
        }
    }
}

pub fn init_net(
    rng: &mut Rng,
    input_dim: usize,
    widths: &[usize],
    output_dim: usize,
    scheme: InitScheme,
) -> ReluNet {
    let mut hidden = Vec::with_capacity(widths.len());
    let mut prev = input_dim;
    for &w in widths {
        hidden.push(dense(rng, w, prev, scheme, false));
        prev = w;
    }
    let output = dense(rng, output_dim, prev, scheme, true);
    ReluNet::new(hidden, output).expect("initialized layers are consistent")
}

/// Uniform weights in `[-w, w]` and biases in `[-b, b]`, for test fixtures and
/// examples.
pub fn uniform_net(
    rng: &mut Rng,
    input_dim: usize,
    widths: &[usize],
    output_dim: usize,
    weight_range: f64,
    bias_range: f64,
) -> ReluNet {
    let mut draw = |r: f64| if r > 0.0 { rng.random_range(-r..r) } else { 0.0 };
    let mut hidden = Vec::new();
    let mut prev = input_dim;
    for &w in widths {
        hidden.push(Dense {
            weight: DMatrix::from_fn(w, prev, |_, _| draw(weight_range)),
            bias: DVector::from_fn(w, |_, _| draw(bias_range)),
        });
        prev = w;
    }
    let output = Dense {
        weight: DMatrix::from_fn(output_dim, prev, |_, _| draw(weight_range)),
        bias: DVector::from_fn(output_dim, |_, _| draw(bias_range)),
    };
    ReluNet::new(hidden, output).expect("consistent layers")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_rows_or_columns() {
        let mut rng = crate::rng::stream(1, "init");
        for (r, c) in [(8, 17), (17, 8), (16, 16), (1, 64)] {
            let m = orthogonal(&mut rng, r, c, 2.0);
            let gram = if r <= c { &m * m.transpose() } else { m.transpose() * &m };
            let n = r.min(c);
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 4.0 } else { 0.0 };
                    assert!((gram[(i, j)] - want).abs() < 1e-10, "{r}x{c}");
                }
            }
        }
    }

    #[test]
    fn ppo_init_has_zero_biases() {
        let mut rng = crate::rng::stream(2, "init");
        let net = init_net(&mut rng, 2, &[8, 8], 1, InitScheme::ppo_policy());
        assert!(net.hidden().iter().all(|l| l.bias.iter().all(|&b| b == 0.0)));
        let out_norm: f64 = net.output().weight.iter().map(|w| w * w).sum::<f64>().sqrt();
        assert!((out_norm - 0.01).abs() < 1e-12);
    }

    #[test]
    fn fan_in_init_variance() {
        let mut rng = crate::rng::stream(3, "init");
        let net = init_net(&mut rng, 300, &[400], 1, InitScheme::FanIn);
        let w = &net.hidden()[0].weight;
        let var = w.iter().map(|v| v * v).sum::<f64>() / w.len() as f64;
        assert!((var - 1.0 / 900.0).abs() < 0.05 / 900.0);
    }
}
