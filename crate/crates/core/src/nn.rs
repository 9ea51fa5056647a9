//! Small dense networks with hand-written backpropagation.
//!
//! Hidden layers apply `tanh` or `relu`; the output layer is linear. Callers
//! add softmax or squared-error heads themselves, which keeps the same type
//! usable for the tagger classifier and the Q-network.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative expressed through the activation output `a`.
    #[inline]
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn code(self) -> u32 {
        match self {
            Activation::Tanh => 0,
            Activation::Relu => 1,
        }
    }

    fn from_code(c: u32) -> Result<Self> {
        match c {
            0 => Ok(Activation::Tanh),
            1 => Ok(Activation::Relu),
            _ => Err(Error::Archive(format!("unknown activation code {c}"))),
        }
    }
}

/// Fully connected layer, weights stored row-major as `[outputs][inputs]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    inputs: usize,
    outputs: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
}

impl Layer {
    pub fn new(inputs: usize, outputs: usize, weights: Vec<f64>, biases: Vec<f64>) -> Result<Self> {
        if weights.len() != inputs * outputs {
            return Err(Error::DimensionMismatch {
                expected: inputs * outputs,
                got: weights.len(),
            });
        }
        if biases.len() != outputs {
            return Err(Error::DimensionMismatch {
                expected: outputs,
                got: biases.len(),
            });
        }
        Ok(Layer {
            inputs,
            outputs,
            weights,
            biases,
        })
    }

    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Layer {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    fn affine(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.weights.chunks_exact(self.inputs).zip(&self.biases).map(|(row, b)| {
            row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + b
        }));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    layers: Vec<Layer>,
    activation: Activation,
}

/// Activations recorded by [`DenseNet::forward_trace`]: `values[0]` is the
/// input, `values[l + 1]` the output of layer `l`.
#[derive(Debug, Clone, Default)]
pub struct ForwardTrace {
    values: Vec<Vec<f64>>,
}

impl ForwardTrace {
    pub fn output(&self) -> &[f64] {
        self.values.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
    /// Gradient with respect to the network input.
    pub input: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(net: &DenseNet) -> Self {
        Gradients {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGrad {
                    weights: vec![0.0; l.weights.len()],
                    biases: vec![0.0; l.biases.len()],
                })
                .collect(),
            input: vec![0.0; net.input_size()],
        }
    }

    pub fn accumulate(&mut self, other: &Gradients) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights.iter_mut().zip(&b.weights).for_each(|(x, y)| *x += y);
            a.biases.iter_mut().zip(&b.biases).for_each(|(x, y)| *x += y);
        }
        self.input.iter_mut().zip(&other.input).for_each(|(x, y)| *x += y);
    }

    pub fn scale(&mut self, k: f64) {
        for l in &mut self.layers {
            l.weights.iter_mut().for_each(|x| *x *= k);
            l.biases.iter_mut().for_each(|x| *x *= k);
        }
        self.input.iter_mut().for_each(|x| *x *= k);
    }

    /// Parameter gradients in [`DenseNet::parameters`] order.
    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases))
            .copied()
            .collect()
    }
}

impl DenseNet {
    /// Xavier-scaled normal initialisation. `sizes` lists every layer width
    /// including input and output.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], activation: Activation, rng: &mut R) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidConfig(format!(
                "network needs at least two positive layer sizes, got {sizes:?}"
            )));
        }
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let std = (2.0 / (fan_in + fan_out) as f64).sqrt();
                let normal = Normal::new(0.0, std).expect("positive std");
                let weights = (0..fan_in * fan_out).map(|_| normal.sample(rng)).collect();
                Layer {
                    inputs: fan_in,
                    outputs: fan_out,
                    weights,
                    biases: vec![0.0; fan_out],
                }
            })
            .collect();
        Ok(DenseNet { layers, activation })
    }

    pub fn from_layers(layers: Vec<Layer>, activation: Activation) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidConfig("network has no layers".into()));
        }
        for w in layers.windows(2) {
            if w[0].outputs != w[1].inputs {
                return Err(Error::DimensionMismatch {
                    expected: w[0].outputs,
                    got: w[1].inputs,
                });
            }
        }
        Ok(DenseNet { layers, activation })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_size())
            .chain(self.layers.iter().map(|l| l.outputs))
            .collect()
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_size(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn num_parameters(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    pub fn parameters(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.biases))
    }

    pub fn parameters_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }

    /// Mutable access to the `k`-th parameter in [`DenseNet::parameters`] order.
    pub fn parameter_mut(&mut self, mut k: usize) -> Option<&mut f64> {
        for layer in &mut self.layers {
            if k < layer.weights.len() {
                return Some(&mut layer.weights[k]);
            }
            k -= layer.weights.len();
            if k < layer.biases.len() {
                return Some(&mut layer.biases[k]);
            }
            k -= layer.biases.len();
        }
        None
    }

    pub fn is_finite(&self) -> bool {
        self.parameters().all(|p| p.is_finite())
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_size() {
            return Err(Error::DimensionMismatch {
                expected: self.input_size(),
                got: input.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        let last = self.layers.len() - 1;
        let mut cur = input.to_vec();
        let mut next = Vec::new();
        for (l, layer) in self.layers.iter().enumerate() {
            layer.affine(&cur, &mut next);
            if l < last {
                next.iter_mut().for_each(|x| *x = self.activation.apply(*x));
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    pub fn forward_trace(&self, input: &[f64]) -> Result<ForwardTrace> {
        self.check_input(input)?;
        let last = self.layers.len() - 1;
        let mut values = Vec::with_capacity(self.layers.len() + 1);
        values.push(input.to_vec());
        for (l, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::with_capacity(layer.outputs);
            layer.affine(&values[l], &mut out);
            if l < last {
                out.iter_mut().for_each(|x| *x = self.activation.apply(*x));
            }
            values.push(out);
        }
        Ok(ForwardTrace { values })
    }

    /// Gradients of a scalar loss given `dL/d(output)`.
    pub fn backward(&self, trace: &ForwardTrace, output_grad: &[f64]) -> Result<Gradients> {
        if trace.values.len() != self.layers.len() + 1 {
            return Err(Error::MissingForwardPass);
        }
        if output_grad.len() != self.output_size() {
            return Err(Error::DimensionMismatch {
                expected: self.output_size(),
                got: output_grad.len(),
            });
        }
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut delta = output_grad.to_vec();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let x = &trace.values[l];
            let mut gw = vec![0.0; layer.weights.len()];
            for (row, d) in gw.chunks_exact_mut(layer.inputs).zip(&delta) {
                row.iter_mut().zip(x).for_each(|(g, xi)| *g = d * xi);
            }
            let mut back = vec![0.0; layer.inputs];
            for (row, d) in layer.weights.chunks_exact(layer.inputs).zip(&delta) {
                back.iter_mut().zip(row).for_each(|(b, w)| *b += d * w);
            }
            if l > 0 {
                back.iter_mut()
                    .zip(x)
                    .for_each(|(b, a)| *b *= self.activation.derivative_from_output(*a));
            }
            grads.push(LayerGrad {
                weights: gw,
                biases: delta,
            });
            delta = back;
        }
        grads.reverse();
        Ok(Gradients {
            layers: grads,
            input: delta,
        })
    }

    /// Dimension header followed by row-major little-endian `f64` parameters.
    pub fn encode(&self, w: &mut Writer) {
        w.u32(self.activation.code());
        w.u32(self.layers.len() as u32);
        for size in self.sizes() {
            w.u32(size as u32);
        }
        for layer in &self.layers {
            w.f64s(&layer.weights);
            w.f64s(&layer.biases);
        }
    }

    pub fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let activation = Activation::from_code(r.u32()?)?;
        let n = r.u32()? as usize;
        if n == 0 {
            return Err(Error::Archive("network with zero layers".into()));
        }
        let sizes = (0..=n).map(|_| r.u32().map(|s| s as usize)).collect::<Result<Vec<_>>>()?;
        let mut layers = Vec::with_capacity(n);
        for w in sizes.windows(2) {
            let weights = r.f64s(w[0] * w[1])?;
            let biases = r.f64s(w[1])?;
            layers.push(Layer::new(w[0], w[1], weights, biases)?);
        }
        Self::from_layers(layers, activation)
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Cross-entropy of a softmax output against `target`, plus `dL/dlogits`.
pub fn cross_entropy(probs: &[f64], target: usize) -> (f64, Vec<f64>) {
    let loss = -probs[target].max(f64::MIN_POSITIVE).ln();
    let mut grad = probs.to_vec();
    grad[target] -= 1.0;
    (loss, grad)
}

pub fn argmax(values: &[f64]) -> usize {
    // Lowest index wins ties.
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub batch_size: usize,
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be positive".into()));
        }
        Ok(())
    }
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Adam,
            learning_rate: 1e-3,
            batch_size: 16,
        }
    }
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Plain SGD or Adam over one or more flat parameter groups.
#[derive(Debug, Clone)]
pub struct Optimizer {
    config: OptimizerConfig,
    steps: u64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl Optimizer {
    pub fn new(config: OptimizerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Optimizer {
            config,
            steps: 0,
            first: Vec::new(),
            second: Vec::new(),
        })
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    pub fn step(&mut self, net: &mut DenseNet, grads: &Gradients) -> Result<()> {
        if grads.layers.len() != net.layers.len() {
            return Err(Error::DimensionMismatch {
                expected: net.layers.len(),
                got: grads.layers.len(),
            });
        }
        let mut params: Vec<&mut [f64]> = Vec::with_capacity(2 * net.layers.len());
        let mut gs: Vec<&[f64]> = Vec::with_capacity(2 * net.layers.len());
        for (layer, g) in net.layers.iter_mut().zip(&grads.layers) {
            params.push(&mut layer.weights);
            params.push(&mut layer.biases);
            gs.push(&g.weights);
            gs.push(&g.biases);
        }
        self.update(params, &gs)
    }

    pub fn step_slice(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        self.update(vec![params], &[grads])
    }

    fn update(&mut self, mut params: Vec<&mut [f64]>, grads: &[&[f64]]) -> Result<()> {
        for (p, g) in params.iter().zip(grads) {
            if p.len() != g.len() {
                return Err(Error::DimensionMismatch {
                    expected: p.len(),
                    got: g.len(),
                });
            }
            if g.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("gradient".into()));
            }
        }
        let lr = self.config.learning_rate;
        match self.config.kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.iter_mut().zip(grads) {
                    p.iter_mut().zip(g.iter()).for_each(|(x, d)| *x -= lr * d);
                }
            }
            OptimizerKind::Adam => {
                if self.first.is_empty() {
                    self.first = grads.iter().map(|g| vec![0.0; g.len()]).collect();
                    self.second = self.first.clone();
                }
                if self.first.len() != grads.len() {
                    return Err(Error::DimensionMismatch {
                        expected: self.first.len(),
                        got: grads.len(),
                    });
                }
                self.steps += 1;
                let t = self.steps as i32;
                let c1 = 1.0 - ADAM_BETA1.powi(t);
                let c2 = 1.0 - ADAM_BETA2.powi(t);
                for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
                    let m = &mut self.first[k];
                    let v = &mut self.second[k];
                    for i in 0..p.len() {
                        let d = g[i];
                        m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * d;
                        v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * d * d;
                        p[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + ADAM_EPS);
                    }
                }
            }
        }
        if params.iter().any(|p| p.iter().any(|x| !x.is_finite())) {
            return Err(Error::NonFinite("parameters after update".into()));
        }
        Ok(())
    }
}

/// Finite-difference gradient estimates built only from forward evaluations.
pub mod gradcheck {
    use super::DenseNet;

    /// Central differences of `loss` with respect to every parameter, in
    /// [`DenseNet::parameters`] order.
    pub fn central_differences<F>(net: &DenseNet, step: f64, loss: F) -> Vec<f64>
    where
        F: Fn(&DenseNet) -> f64,
    {
        let mut probe = net.clone();
        let n = net.num_parameters();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let original = *probe.parameter_mut(k).expect("index in range");
            *probe.parameter_mut(k).unwrap() = original + step;
            let plus = loss(&probe);
            *probe.parameter_mut(k).unwrap() = original - step;
            let minus = loss(&probe);
            *probe.parameter_mut(k).unwrap() = original;
            out.push((plus - minus) / (2.0 * step));
        }
        out
    }

    /// Largest per-entry relative error, with magnitudes below `floor`
    /// compared absolutely.
    pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
        analytic
            .iter()
            .zip(numeric)
            .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
            .fold(0.0, f64::max)
    }
}
