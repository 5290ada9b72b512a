//! Reverse-mode gradients for `ReluNet` parameters.
//!
//! The normalizer is not applied here: callers pass inputs that are already in
//! network coordinates. Gradients are laid out like [`ReluNet::to_flat`].

use crate::net::ReluNet;

pub struct ForwardCache {
    /// Input to every layer, hidden layers first, then the output layer.
    inputs: Vec<Vec<f64>>,
    /// Pre-activations of the hidden layers.
    pre: Vec<Vec<f64>>,
}

pub fn forward_cached(net: &ReluNet, x: &[f64]) -> (Vec<f64>, ForwardCache) {
    let mut inputs = Vec::with_capacity(net.depth() + 1);
    let mut pre = Vec::with_capacity(net.depth());
    let mut h = x.to_vec();
    for layer in net.hidden() {
        let mut z = vec![0.0; layer.outputs()];
        for (j, zj) in z.iter_mut().enumerate() {
            let mut s = layer.bias[j];
            for (i, hi) in h.iter().enumerate() {
                s += layer.weight[(j, i)] * hi;
            }
            *zj = s;
        }
        let next: Vec<f64> = z.iter().map(|v| v.max(0.0)).collect();
        inputs.push(std::mem::replace(&mut h, next));
        pre.push(z);
    }
    let out_layer = net.output();
    let out: Vec<f64> = (0..out_layer.outputs())
        .map(|j| {
            out_layer.bias[j]
                + h.iter()
                    .enumerate()
                    .map(|(i, v)| out_layer.weight[(j, i)] * v)
                    .sum::<f64>()
        })
        .collect();
    inputs.push(h);
    (out, ForwardCache { inputs, pre })
}

/// Plain forward pass without caching.
pub fn forward(net: &ReluNet, x: &[f64]) -> Vec<f64> {
    forward_cached(net, x).0
}

/// Accumulates `d loss / d params` into `grad` given `d loss / d output`.
pub fn backward(net: &ReluNet, cache: &ForwardCache, grad_out: &[f64], grad: &mut [f64]) {
    // Offsets of each layer's block within the flat vector.
    let layers: Vec<_> = net.hidden().iter().chain(std::iter::once(net.output())).collect();
    let mut offsets = Vec::with_capacity(layers.len());
    let mut off = 0;
    for l in &layers {
        offsets.push(off);
        off += l.param_count();
    }
    debug_assert_eq!(off, grad.len());

    let mut g = grad_out.to_vec();
    for k in (0..layers.len()).rev() {
        let layer = layers[k];
        let input = &cache.inputs[k];
        let (rows, cols) = (layer.outputs(), layer.inputs());
        let base = offsets[k];
        for j in 0..rows {
            let gj = g[j];
            if gj == 0.0 {
                continue;
            }
            let row = &mut grad[base + j * cols..base + (j + 1) * cols];
            for (r, x) in row.iter_mut().zip(input) {
                *r += gj * x;
            }
            grad[base + rows * cols + j] += gj;
        }
        if k == 0 {
            break;
        }
        let pre = &cache.pre[k - 1];
        let mut prev = vec![0.0; cols];
        for (i, p) in prev.iter_mut().enumerate() {
            if pre[i] > 0.0 {
                let mut s = 0.0;
                for (j, gj) in g.iter().enumerate() {
                    s += layer.weight[(j, i)] * gj;
                }
                *p = s;
            }
        }
        g = prev;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::init::uniform_net;

    #[test]
    fn matches_finite_differences() {
        let mut net = uniform_net(&mut crate::rng::stream(9, "mlp"), 3, &[5, 4], 2, 1.0, 0.5);
        let x = [0.3, -0.7, 1.1];
        let w = [0.7, -1.3];
        let loss = |n: &ReluNet| forward(n, &x).iter().zip(&w).map(|(o, c)| o * c).sum::<f64>();
        let (_, cache) = forward_cached(&net, &x);
        let mut grad = vec![0.0; net.param_count()];
        backward(&net, &cache, &w, &mut grad);
        let flat = net.to_flat();
        let h = 1e-6;
        for i in 0..flat.len() {
            let mut p = flat.clone();
            p[i] += h;
            net.set_flat(&p);
            let up = loss(&net);
            p[i] -= 2.0 * h;
            net.set_flat(&p);
            let down = loss(&net);
            let num = (up - down) / (2.0 * h);
            assert!((num - grad[i]).abs() < 1e-6, "param {i}: {num} vs {}", grad[i]);
        }
        net.set_flat(&flat);
        for (a, b) in forward(&net, &x).iter().zip(net.forward(&x).unwrap()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
