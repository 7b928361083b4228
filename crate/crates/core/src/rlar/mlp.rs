//! Fully connected ReLU network with exact backpropagation.

use std::io::{BufRead, Write};

use rand::Rng;

use crate::error::{MineError, Result};

#[derive(Debug, Clone, PartialEq)]
struct Layer {
    n_in: usize,
    n_out: usize,
    /// Row-major `n_out × n_in`.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl Layer {
    fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.n_out {
            let row = &self.weights[o * self.n_in..(o + 1) * self.n_in];
            out.push(self.bias[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>());
        }
    }
}

/// Multilayer perceptron with ReLU on every hidden layer and a linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
}

/// Gradient with the same layout as [`Mlp::parameters`].
pub type Gradient = Vec<f64>;

/// One regression example: the loss looks only at output `action`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub input: Vec<f64>,
    pub action: usize,
    pub target: f64,
}

impl Mlp {
    /// Layer widths from input to output, e.g. `[M+3, 128, 128, 128, M]`.
    /// All parameters start at zero.
    pub fn zeros(sizes: &[usize]) -> Result<Mlp> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(MineError::InvalidConfig(format!("bad layer sizes {sizes:?}")));
        }
        let layers = sizes
            .windows(2)
            .map(|w| Layer { n_in: w[0], n_out: w[1], weights: vec![0.0; w[0] * w[1]], bias: vec![0.0; w[1]] })
            .collect();
        Ok(Mlp { layers })
    }

    /// Uniform initialisation in ±1/√fan_in for weights and biases.
    pub fn random<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Mlp> {
        let mut net = Mlp::zeros(sizes)?;
        for layer in &mut net.layers {
            let bound = 1.0 / (layer.n_in as f64).sqrt();
            for w in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
                *w = rng.random_range(-bound..bound);
            }
        }
        Ok(net)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.layers[0].n_in];
        s.extend(self.layers.iter().map(|l| l.n_out));
        s
    }

    pub fn n_inputs(&self) -> usize {
        self.layers[0].n_in
    }

    pub fn n_outputs(&self) -> usize {
        self.layers.last().expect("at least one layer").n_out
    }

    /// Σ (n_in + 1)·n_out over layers.
    pub fn n_parameters(&self) -> usize {
        self.layers.iter().map(|l| (l.n_in + 1) * l.n_out).sum()
    }

    /// Weights then biases, layer by layer.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_parameters());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_parameters() {
            return Err(MineError::InvalidConfig(format!(
                "expected {} parameters, got {}",
                self.n_parameters(),
                params.len()
            )));
        }
        let mut at = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&params[at..at + nw]);
            at += nw;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&params[at..at + nb]);
            at += nb;
        }
        Ok(())
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        assert_eq!(input.len(), self.n_inputs(), "input width");
        let mut cur = input.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            l.apply(&cur, &mut next);
            if i < last {
                next.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    /// Mean over samples of (output[action] − target)².
    pub fn loss(&self, batch: &[Sample]) -> f64 {
        if batch.is_empty() {
            return 0.0;
        }
        batch
            .iter()
            .map(|s| {
                let d = self.forward(&s.input)[s.action] - s.target;
                d * d
            })
            .sum::<f64>()
            / batch.len() as f64
    }

    /// Loss and its exact gradient with respect to every parameter.
    pub fn loss_and_gradient(&self, batch: &[Sample]) -> (f64, Gradient) {
        let mut grad = vec![0.0; self.n_parameters()];
        if batch.is_empty() {
            return (0.0, grad);
        }
        let offsets: Vec<usize> = self
            .layers
            .iter()
            .scan(0, |acc, l| {
                let o = *acc;
                *acc += (l.n_in + 1) * l.n_out;
                Some(o)
            })
            .collect();
        let scale = 1.0 / batch.len() as f64;
        let last = self.layers.len() - 1;
        let mut loss = 0.0;
        for s in batch {
            // activations[i] is the input to layer i
            let mut activations = vec![s.input.clone()];
            let mut pre = Vec::with_capacity(self.layers.len());
            for (i, l) in self.layers.iter().enumerate() {
                let mut z = Vec::new();
                l.apply(&activations[i], &mut z);
                let a = if i < last { z.iter().map(|v| v.max(0.0)).collect() } else { z.clone() };
                pre.push(z);
                activations.push(a);
            }
            let diff = activations[last + 1][s.action] - s.target;
            loss += diff * diff * scale;
            let mut delta = vec![0.0; self.n_outputs()];
            delta[s.action] = 2.0 * diff * scale;
            for i in (0..=last).rev() {
                let l = &self.layers[i];
                let input = &activations[i];
                let off = offsets[i];
                for o in 0..l.n_out {
                    let d = delta[o];
                    if d == 0.0 {
                        continue;
                    }
                    let row = &mut grad[off + o * l.n_in..off + (o + 1) * l.n_in];
                    for (g, x) in row.iter_mut().zip(input) {
                        *g += d * x;
                    }
                    grad[off + l.weights.len() + o] += d;
                }
                if i > 0 {
                    let mut back = vec![0.0; l.n_in];
                    for o in 0..l.n_out {
                        let d = delta[o];
                        if d == 0.0 {
                            continue;
                        }
                        for (b, w) in back.iter_mut().zip(&l.weights[o * l.n_in..(o + 1) * l.n_in]) {
                            *b += d * w;
                        }
                    }
                    for (b, z) in back.iter_mut().zip(&pre[i - 1]) {
                        if *z <= 0.0 {
                            *b = 0.0;
                        }
                    }
                    delta = back;
                }
            }
        }
        (loss, grad)
    }

    /// One gradient-descent step; returns the loss before the step.
    pub fn sgd_step(&mut self, batch: &[Sample], learning_rate: f64) -> f64 {
        let (loss, grad) = self.loss_and_gradient(batch);
        let mut at = 0;
        for l in &mut self.layers {
            for p in l.weights.iter_mut().chain(l.bias.iter_mut()) {
                *p -= learning_rate * grad[at];
                at += 1;
            }
        }
        loss
    }

    /// Text format: a `mlp` header line with the layer widths, then one parameter per line.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let sizes: Vec<String> = self.sizes().iter().map(|s| s.to_string()).collect();
        writeln!(w, "mlp {}", sizes.join(" "))?;
        for p in self.parameters() {
            writeln!(w, "{p:?}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Mlp> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| MineError::InvalidData("empty network file".into()))??;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("mlp") {
            return Err(MineError::InvalidData("missing mlp header".into()));
        }
        let sizes = parts
            .map(|s| s.parse::<usize>().map_err(|e| MineError::InvalidData(format!("layer width {s:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let mut net = Mlp::zeros(&sizes)?;
        let mut params = Vec::with_capacity(net.n_parameters());
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            params.push(line.trim().parse::<f64>().map_err(|e| MineError::Parse {
                row: i + 2,
                column: "parameter".into(),
                message: e.to_string(),
            })?);
        }
        net.set_parameters(&params)?;
        Ok(net)
    }
}
