use serde::{Deserialize, Serialize};

use crate::numerics::mlp::Parameters;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum Method {
    Sgd,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Method {
    pub fn adam() -> Self {
        Method::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Optimizer configuration as it appears in config files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub method: MethodName,
    pub learning_rate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Sgd,
    Adam,
}

impl OptimizerConfig {
    pub fn adam(learning_rate: f64) -> Self {
        Self {
            method: MethodName::Adam,
            learning_rate,
        }
    }

    pub fn build<S: Scalar>(&self) -> Optimizer<S> {
        match self.method {
            MethodName::Sgd => Optimizer::sgd(self.learning_rate),
            MethodName::Adam => Optimizer::adam(self.learning_rate),
        }
    }
}

/// Optimizer state: method, learning rate, moment buffers and step count.
#[derive(Clone, Debug, PartialEq)]
pub struct Optimizer<S> {
    method: Method,
    learning_rate: f64,
    first: Vec<Vec<S>>,
    second: Vec<Vec<S>>,
    steps: u64,
}

impl<S: Scalar> Optimizer<S> {
    pub fn new(method: Method, learning_rate: f64) -> Self {
        Self {
            method,
            learning_rate,
            first: Vec::new(),
            second: Vec::new(),
            steps: 0,
        }
    }

    pub fn sgd(learning_rate: f64) -> Self {
        Self::new(Method::Sgd, learning_rate)
    }

    pub fn adam(learning_rate: f64) -> Self {
        Self::new(Method::adam(), learning_rate)
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Applies one update of `grads` to `params`. Both must enumerate slices
    /// of identical shapes in the same order.
    pub fn step<P, G>(&mut self, params: &mut P, grads: &G)
    where
        P: Parameters<S> + ?Sized,
        G: Parameters<S> + ?Sized,
    {
        let mut ps = params.slices_mut();
        let gs = grads.slices();
        assert_eq!(ps.len(), gs.len(), "parameter/gradient count mismatch");
        for (p, g) in ps.iter().zip(&gs) {
            assert_eq!(p.len(), g.len(), "parameter/gradient shape mismatch");
        }
        self.steps += 1;
        let lr = S::of(self.learning_rate);
        match self.method {
            Method::Sgd => {
                for (p, g) in ps.iter_mut().zip(&gs) {
                    for (pv, &gv) in p.iter_mut().zip(g.iter()) {
                        *pv -= lr * gv;
                    }
                }
            }
            Method::Adam { beta1, beta2, epsilon } => {
                if self.first.is_empty() {
                    self.first = gs.iter().map(|g| vec![S::zero(); g.len()]).collect();
                    self.second = self.first.clone();
                }
                assert_eq!(self.first.len(), gs.len(), "moment buffers belong to another model");
                let t = self.steps as i32;
                let (b1, b2, eps) = (S::of(beta1), S::of(beta2), S::of(epsilon));
                let c1 = S::one() - b1.powi(t);
                let c2 = S::one() - b2.powi(t);
                for (((p, g), m), v) in ps
                    .iter_mut()
                    .zip(&gs)
                    .zip(self.first.iter_mut())
                    .zip(self.second.iter_mut())
                {
                    assert_eq!(m.len(), g.len(), "moment buffer shape mismatch");
                    for i in 0..g.len() {
                        let gv = g[i];
                        m[i] = b1 * m[i] + (S::one() - b1) * gv;
                        v[i] = b2 * v[i] + (S::one() - b2) * gv * gv;
                        let mhat = m[i] / c1;
                        let vhat = v[i] / c2;
                        p[i] -= lr * mhat / (vhat.sqrt() + eps);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::numerics::mlp::{Activation, Dense, Mlp};

    fn scalar_net(w: f64) -> Mlp<f64> {
        let mut l = Dense::zeros(1, 1, Activation::Identity);
        l.weights[0] = w;
        Mlp::from_layers(vec![l]).unwrap()
    }

    #[test]
    fn sgd_single_step() {
        let mut net = scalar_net(1.0);
        let mut g = net.zero_grads();
        g.weights[0][0] = 1.0;
        Optimizer::sgd(0.1).step(&mut net, &g);
        assert!((net.layers()[0].weights[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_is_a_no_op_for_both_methods() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = Mlp::<f64>::new(&[3, 4, 2], Activation::Relu, Activation::Identity, &mut rng);
        let g = net.zero_grads();
        for mut opt in [Optimizer::sgd(0.5), Optimizer::adam(0.5)] {
            let mut n = net.clone();
            opt.step(&mut n, &g);
            assert_eq!(n, net);
        }
    }

    #[test]
    fn adam_first_step_matches_hand_calculation() {
        // t = 1: m = 0.1 g, v = 0.001 g^2, mhat = g, vhat = g^2,
        // update = lr * g / (|g| + eps).
        let mut net = scalar_net(0.5);
        let mut g = net.zero_grads();
        g.weights[0][0] = 0.2;
        g.bias[0][0] = -3.0;
        let mut opt = Optimizer::adam(0.01);
        opt.step(&mut net, &g);
        let want_w = 0.5 - 0.01 * 0.2 / (0.2 + 1e-8);
        let want_b = 0.0 + 0.01 * 3.0 / (3.0 + 1e-8);
        assert!((net.layers()[0].weights[0] - want_w).abs() < 1e-15);
        assert!((net.layers()[0].bias[0] - want_b).abs() < 1e-15);

        // t = 2 with the same gradient: m = 0.19 g, v = 0.001999 g^2.
        opt.step(&mut net, &g);
        let m = 0.19 * 0.2;
        let v = 0.001999 * 0.04;
        let mhat = m / (1.0 - 0.81);
        let vhat = v / (1.0 - 0.999f64.powi(2));
        let want_w2 = want_w - 0.01 * mhat / (vhat.sqrt() + 1e-8);
        assert!((net.layers()[0].weights[0] - want_w2).abs() < 1e-12);
    }

    #[test]
    fn updates_are_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let net = Mlp::<f32>::new(&[5, 7, 3], Activation::Relu, Activation::Identity, &mut rng);
        let mut g = net.zero_grads();
        for (i, v) in g.weights[0].iter_mut().enumerate() {
            *v = (i as f32 * 0.37).sin();
        }
        let run = || {
            let mut n = net.clone();
            let mut opt = Optimizer::adam(1e-3);
            for _ in 0..5 {
                opt.step(&mut n, &g);
            }
            n
        };
        let (a, b) = (run(), run());
        for (la, lb) in a.layers().iter().zip(b.layers()) {
            let bits = |v: &[f32]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&la.weights), bits(&lb.weights));
        }
    }
}
