use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::numerics::{cross_entropy_index, softmax, Activation, Mlp, Optimizer};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CslConfig {
    pub hidden: Vec<usize>,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Gradient steps taken by [`StandaloneQHat::fit`].
    pub steps: usize,
}

impl Default for CslConfig {
    fn default() -> Self {
        Self {
            hidden: vec![64, 64],
            batch_size: 64,
            learning_rate: 1e-3,
            steps: 2000,
        }
    }
}

/// Action classifier over independent-agent observations; its logits are
/// read as action values.
#[derive(Clone, Debug, PartialEq)]
pub struct StandaloneQHat<S> {
    pub net: Mlp<S>,
    optimizer: Optimizer<S>,
}

impl<S: Scalar> StandaloneQHat<S> {
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, actions: usize, config: &CslConfig, rng: &mut R) -> Self {
        let mut sizes = vec![obs_dim];
        sizes.extend_from_slice(&config.hidden);
        sizes.push(actions);
        Self {
            net: Mlp::new(&sizes, Activation::Relu, Activation::Identity, rng),
            optimizer: Optimizer::adam(config.learning_rate),
        }
    }

    pub fn from_network(net: Mlp<S>, config: &CslConfig) -> Self {
        Self {
            net,
            optimizer: Optimizer::adam(config.learning_rate),
        }
    }

    pub fn values(&self, obs: &[S]) -> Vec<S> {
        self.net.predict(obs)
    }

    /// One cross-entropy step on a packed batch; returns the mean loss.
    pub fn train_step(&mut self, obs: &[S], actions: &[usize]) -> S {
        let n = actions.len();
        assert!(n > 0, "empty classification batch");
        let cache = self.net.forward_slice(obs, n);
        let k = self.net.output_dim();
        let inv = S::one() / S::of(n as f64);
        let mut grad = vec![S::zero(); n * k];
        let mut total = S::zero();
        for (b, &a) in actions.iter().enumerate() {
            let ce = cross_entropy_index(a, &softmax(cache.output_row(b)));
            total += ce.loss;
            for (g, v) in grad[b * k..(b + 1) * k].iter_mut().zip(ce.grad) {
                *g = v * inv;
            }
        }
        let mut grads = self.net.zero_grads();
        self.net.accumulate_gradients(&cache, &grad, &mut grads);
        self.optimizer.step(&mut self.net, &grads);
        total * inv
    }

    /// Fits a fresh classifier to `(s_i, a_i)` pairs. Panics on empty data.
    pub fn fit(data: &[(Vec<S>, usize)], actions: usize, config: &CslConfig, seed: u64) -> Self {
        assert!(!data.is_empty(), "classifier needs at least one example");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut model = Self::new(data[0].0.len(), actions, config, &mut rng);
        let batch = config.batch_size.min(data.len()).max(1);
        for _ in 0..config.steps {
            let ix = rand::seq::index::sample(&mut rng, data.len(), batch);
            let mut obs = Vec::new();
            let mut acts = Vec::with_capacity(batch);
            for i in ix {
                obs.extend_from_slice(&data[i].0);
                acts.push(data[i].1);
            }
            model.train_step(&obs, &acts);
        }
        model
    }
}
