//! Fixed-topology feed-forward networks with hand-written backpropagation.
//!
//! Weights are stored input-major (`weights[i * outputs + o]`) so the forward
//! pass and the weight gradient are axpy updates over contiguous rows. Zero
//! inputs are skipped, which makes one-hot observation batches cheap.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::tensor::Tensor;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply<S: Scalar>(self, x: S) -> S {
        match self {
            Activation::Relu => {
                if x > S::zero() {
                    x
                } else {
                    S::zero()
                }
            }
            Activation::Sigmoid => sigmoid(x),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation's output `y`.
    #[inline]
    pub fn derivative_at_output<S: Scalar>(self, y: S) -> S {
        match self {
            Activation::Relu => {
                if y > S::zero() {
                    S::one()
                } else {
                    S::zero()
                }
            }
            Activation::Sigmoid => y * (S::one() - y),
            Activation::Identity => S::one(),
        }
    }
}

#[inline]
pub fn sigmoid<S: Scalar>(x: S) -> S {
    if x >= S::zero() {
        S::one() / (S::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (S::one() + e)
    }
}

/// One affine layer followed by an elementwise activation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Dense<S> {
    pub inputs: usize,
    pub outputs: usize,
    /// Input-major: `weights[i * outputs + o]` connects input `i` to output `o`.
    pub weights: Vec<S>,
    pub bias: Vec<S>,
    pub activation: Activation,
}

impl<S: Scalar> Dense<S> {
    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![S::zero(); inputs * outputs],
            bias: vec![S::zero(); outputs],
            activation,
        }
    }

    /// Uniform fan-in scaled initialisation: `sqrt(6 / fan_in)` for relu
    /// layers, `sqrt(3 / fan_in)` otherwise. Biases start at zero.
    pub fn init<R: Rng + ?Sized>(inputs: usize, outputs: usize, activation: Activation, rng: &mut R) -> Self {
        let gain = match activation {
            Activation::Relu => 6.0,
            _ => 3.0,
        };
        let limit = (gain / inputs.max(1) as f64).sqrt();
        let weights = (0..inputs * outputs)
            .map(|_| S::of(rng.gen_range(-limit..limit)))
            .collect();
        Self {
            inputs,
            outputs,
            weights,
            bias: vec![S::zero(); outputs],
            activation,
        }
    }

    fn check(&self) -> Result<()> {
        if self.weights.len() != self.inputs * self.outputs || self.bias.len() != self.outputs {
            return Err(Error::Checkpoint(format!(
                "layer {}x{} has {} weights and {} biases",
                self.inputs,
                self.outputs,
                self.weights.len(),
                self.bias.len()
            )));
        }
        Ok(())
    }

    fn forward_into(&self, input: &[S], batch: usize, out: &mut Vec<S>) {
        let (ni, no) = (self.inputs, self.outputs);
        out.clear();
        out.reserve(batch * no);
        for b in 0..batch {
            out.extend_from_slice(&self.bias);
            let row = &mut out[b * no..(b + 1) * no];
            let x = &input[b * ni..(b + 1) * ni];
            for (i, &xi) in x.iter().enumerate() {
                if xi == S::zero() {
                    continue;
                }
                let w = &self.weights[i * no..(i + 1) * no];
                for (r, &wv) in row.iter_mut().zip(w) {
                    *r += xi * wv;
                }
            }
            if self.activation != Activation::Identity {
                for r in row.iter_mut() {
                    *r = self.activation.apply(*r);
                }
            }
        }
    }
}

/// Gradient buffers shaped like a network's parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients<S> {
    pub weights: Vec<Vec<S>>,
    pub bias: Vec<Vec<S>>,
}

impl<S: Scalar> Gradients<S> {
    pub fn clear(&mut self) {
        for g in self.weights.iter_mut().chain(self.bias.iter_mut()) {
            g.iter_mut().for_each(|v| *v = S::zero());
        }
    }

    pub fn scale(&mut self, k: S) {
        for g in self.weights.iter_mut().chain(self.bias.iter_mut()) {
            g.iter_mut().for_each(|v| *v *= k);
        }
    }

    pub fn max_abs(&self) -> S {
        self.weights
            .iter()
            .chain(self.bias.iter())
            .flat_map(|g| g.iter())
            .fold(S::zero(), |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(self.bias.iter())
            .flat_map(|g| g.iter())
            .all(|v| v.is_finite())
    }
}

/// Ordered access to every trainable (or gradient) slice of a model.
///
/// Networks and their gradient buffers must yield slices in the same order
/// so optimizers can zip them.
pub trait Parameters<S> {
    fn slices(&self) -> Vec<&[S]>;
    fn slices_mut(&mut self) -> Vec<&mut [S]>;
}

impl<S: Scalar> Parameters<S> for Gradients<S> {
    fn slices(&self) -> Vec<&[S]> {
        self.weights
            .iter()
            .zip(&self.bias)
            .flat_map(|(w, b)| [w.as_slice(), b.as_slice()])
            .collect()
    }

    fn slices_mut(&mut self) -> Vec<&mut [S]> {
        self.weights
            .iter_mut()
            .zip(self.bias.iter_mut())
            .flat_map(|(w, b)| [w.as_mut_slice(), b.as_mut_slice()])
            .collect()
    }
}

/// Activations recorded by [`Mlp::forward`], needed for backpropagation.
#[derive(Clone, Debug)]
pub struct ForwardCache<S> {
    batch: usize,
    /// `activations[0]` is the input, `activations[l + 1]` the output of layer `l`.
    activations: Vec<Vec<S>>,
}

impl<S: Scalar> ForwardCache<S> {
    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn input(&self) -> &[S] {
        &self.activations[0]
    }

    pub fn output(&self) -> &[S] {
        self.activations.last().expect("cache holds the input at least")
    }

    pub fn output_row(&self, b: usize) -> &[S] {
        let out = self.output();
        let w = out.len() / self.batch;
        &out[b * w..(b + 1) * w]
    }

    pub fn output_tensor(&self) -> Tensor<S> {
        let out = self.output().to_vec();
        let w = out.len() / self.batch;
        Tensor::matrix(self.batch, w, out)
    }
}

/// Multilayer perceptron: the parameter set of every trainable function here.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Mlp<S> {
    layers: Vec<Dense<S>>,
}

impl<S: Scalar> Mlp<S> {
    /// Builds `sizes.len() - 1` layers; hidden layers use `hidden`, the last uses `output`.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], hidden: Activation, output: Activation, rng: &mut R) -> Self {
        assert!(sizes.len() >= 2, "a network needs input and output sizes");
        let n = sizes.len() - 1;
        let layers = (0..n)
            .map(|l| {
                let act = if l + 1 == n { output } else { hidden };
                Dense::init(sizes[l], sizes[l + 1], act, rng)
            })
            .collect();
        Self { layers }
    }

    pub fn from_layers(layers: Vec<Dense<S>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Checkpoint("network has no layers".into()));
        }
        for l in &layers {
            l.check()?;
        }
        for pair in layers.windows(2) {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::Checkpoint(format!(
                    "layer output {} feeds input {}",
                    pair[0].outputs, pair[1].inputs
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Dense<S>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense<S>] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn zero_grads(&self) -> Gradients<S> {
        Gradients {
            weights: self.layers.iter().map(|l| vec![S::zero(); l.weights.len()]).collect(),
            bias: self.layers.iter().map(|l| vec![S::zero(); l.bias.len()]).collect(),
        }
    }

    /// Bit-copies parameters from a network with identical topology.
    pub fn copy_from(&mut self, other: &Mlp<S>) {
        assert_eq!(self.layers.len(), other.layers.len(), "topology mismatch");
        for (dst, src) in self.layers.iter_mut().zip(&other.layers) {
            assert_eq!((dst.inputs, dst.outputs), (src.inputs, src.outputs));
            dst.weights.copy_from_slice(&src.weights);
            dst.bias.copy_from_slice(&src.bias);
            dst.activation = src.activation;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }

    /// Forward pass over a `[batch, input_dim]` tensor (or a single vector).
    ///
    /// Panics on a width mismatch.
    pub fn forward(&self, input: &Tensor<S>) -> ForwardCache<S> {
        self.forward_slice(input.data(), input.rows())
    }

    /// Forward pass over `batch` rows packed in `input`.
    pub fn forward_slice(&self, input: &[S], batch: usize) -> ForwardCache<S> {
        assert_eq!(
            input.len(),
            batch * self.input_dim(),
            "input width does not match the first layer ({} inputs)",
            self.input_dim()
        );
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(input.to_vec());
        for layer in &self.layers {
            let mut out = Vec::new();
            layer.forward_into(activations.last().unwrap(), batch, &mut out);
            activations.push(out);
        }
        ForwardCache { batch, activations }
    }

    /// Single-sample evaluation without keeping a cache.
    pub fn predict(&self, input: &[S]) -> Vec<S> {
        assert_eq!(input.len(), self.input_dim(), "input width mismatch");
        let mut cur = input.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            layer.forward_into(&cur, 1, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    /// Reverse-mode pass: accumulates parameter gradients into `grads` and
    /// returns the gradient with respect to the input.
    pub fn backward(&self, cache: &ForwardCache<S>, grad_output: &[S], grads: &mut Gradients<S>) -> Vec<S> {
        self.backprop(cache, grad_output, Some(grads), true)
            .expect("input gradient requested")
    }

    /// Accumulates parameter gradients only.
    pub fn accumulate_gradients(&self, cache: &ForwardCache<S>, grad_output: &[S], grads: &mut Gradients<S>) {
        self.backprop(cache, grad_output, Some(grads), false);
    }

    /// Input gradient only; parameters and their gradients are untouched.
    pub fn input_gradient(&self, cache: &ForwardCache<S>, grad_output: &[S]) -> Vec<S> {
        self.backprop(cache, grad_output, None, true)
            .expect("input gradient requested")
    }

    fn backprop(
        &self,
        cache: &ForwardCache<S>,
        grad_output: &[S],
        mut grads: Option<&mut Gradients<S>>,
        want_input: bool,
    ) -> Option<Vec<S>> {
        assert_eq!(
            cache.activations.len(),
            self.layers.len() + 1,
            "cache does not belong to this network"
        );
        let batch = cache.batch;
        assert_eq!(grad_output.len(), batch * self.output_dim());

        let mut delta = grad_output.to_vec();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let (ni, no) = (layer.inputs, layer.outputs);
            let out = &cache.activations[l + 1];
            let input = &cache.activations[l];
            if layer.activation != Activation::Identity {
                for (d, &y) in delta.iter_mut().zip(out) {
                    *d *= layer.activation.derivative_at_output(y);
                }
            }
            if let Some(g) = grads.as_deref_mut() {
                let gb = &mut g.bias[l];
                let gw = &mut g.weights[l];
                for b in 0..batch {
                    let d = &delta[b * no..(b + 1) * no];
                    for (acc, &v) in gb.iter_mut().zip(d) {
                        *acc += v;
                    }
                    let x = &input[b * ni..(b + 1) * ni];
                    for (i, &xi) in x.iter().enumerate() {
                        if xi == S::zero() {
                            continue;
                        }
                        let row = &mut gw[i * no..(i + 1) * no];
                        for (acc, &v) in row.iter_mut().zip(d) {
                            *acc += xi * v;
                        }
                    }
                }
            }
            if l == 0 && !want_input {
                return None;
            }
            let mut next = vec![S::zero(); batch * ni];
            for b in 0..batch {
                let d = &delta[b * no..(b + 1) * no];
                let dst = &mut next[b * ni..(b + 1) * ni];
                for (i, slot) in dst.iter_mut().enumerate() {
                    let w = &layer.weights[i * no..(i + 1) * no];
                    *slot = w.iter().zip(d).map(|(&wv, &dv)| wv * dv).sum();
                }
            }
            delta = next;
        }
        Some(delta)
    }
}

impl<S: Scalar> Parameters<S> for Mlp<S> {
    fn slices(&self) -> Vec<&[S]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
            .collect()
    }

    fn slices_mut(&mut self) -> Vec<&mut [S]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    /// Direct evaluation with explicit loops over an `[out][in]` view, used
    /// as an oracle independent of the input-major kernels above.
    fn reference_eval(net: &Mlp<f64>, x: &[f64]) -> Vec<f64> {
        let mut cur = x.to_vec();
        for l in net.layers() {
            let mut out = vec![0.0; l.outputs];
            for (o, slot) in out.iter_mut().enumerate() {
                let mut z = l.bias[o];
                for (i, xi) in cur.iter().enumerate() {
                    z += l.weights[i * l.outputs + o] * xi;
                }
                *slot = match l.activation {
                    Activation::Relu => z.max(0.0),
                    Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
                    Activation::Identity => z,
                };
            }
            cur = out;
        }
        cur
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::<f64>::from_layers(vec![Dense::zeros(3, 2, Activation::Identity)]).unwrap();
        assert_eq!(net.predict(&[1.0, -2.0, 3.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn scalar_affine_layer() {
        let mut layer = Dense::<f64>::zeros(1, 1, Activation::Identity);
        layer.weights[0] = 2.0;
        layer.bias[0] = 1.0;
        let net = Mlp::from_layers(vec![layer]).unwrap();
        assert_eq!(net.predict(&[3.0]), vec![7.0]);
    }

    #[test]
    fn forward_matches_reference_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let net = Mlp::<f64>::new(&[6, 9, 4, 3], Activation::Relu, Activation::Sigmoid, &mut rng);
            let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let got = net.predict(&x);
            let want = reference_eval(&net, &x);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() < 1e-12);
            }
            let batch = net.forward(&Tensor::from_rows(&[x.clone(), x.clone()]));
            assert_eq!(batch.output_row(1), got.as_slice());
        }
    }

    #[test]
    fn zero_output_gradient_gives_zero_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = Mlp::<f64>::new(&[4, 5, 2], Activation::Relu, Activation::Identity, &mut rng);
        let cache = net.forward(&Tensor::vector(vec![0.3, -0.1, 0.7, 1.0]));
        let mut g = net.zero_grads();
        let dx = net.backward(&cache, &[0.0, 0.0], &mut g);
        assert_eq!(g.max_abs(), 0.0);
        assert!(dx.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_layer_input_gradient_is_weight_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let net = Mlp::<f64>::new(&[3, 2], Activation::Identity, Activation::Identity, &mut rng);
        let cache = net.forward(&Tensor::vector(vec![0.5, 0.2, -0.4]));
        let dy = [1.5, -2.0];
        let dx = net.input_gradient(&cache, &dy);
        let l = &net.layers()[0];
        for i in 0..3 {
            let want = l.weights[i * 2] * dy[0] + l.weights[i * 2 + 1] * dy[1];
            assert!((dx[i] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn input_gradient_leaves_parameters_alone() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let net = Mlp::<f32>::new(&[4, 8, 3], Activation::Relu, Activation::Identity, &mut rng);
        let before = net.clone();
        let cache = net.forward(&Tensor::vector(vec![1.0, 0.0, 0.5, 0.25]));
        let _ = net.input_gradient(&cache, &[1.0, 1.0, 1.0]);
        assert_eq!(before, net);
    }

    #[test]
    fn from_layers_rejects_mismatched_dimensions() {
        let a = Dense::<f64>::zeros(3, 4, Activation::Relu);
        let b = Dense::<f64>::zeros(5, 1, Activation::Identity);
        assert!(Mlp::from_layers(vec![a, b]).is_err());
    }

    #[test]
    #[should_panic(expected = "input width")]
    fn forward_shape_mismatch_panics() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Mlp::<f64>::new(&[3, 2], Activation::Relu, Activation::Identity, &mut rng);
        net.forward(&Tensor::vector(vec![1.0, 2.0]));
    }

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        assert_eq!(sigmoid(-1e4f64), 0.0);
        assert_eq!(sigmoid(1e4f64), 1.0);
        assert!((sigmoid(0.0f64) - 0.5).abs() < 1e-15);
    }
}
