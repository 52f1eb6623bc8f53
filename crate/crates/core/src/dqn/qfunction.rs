use rand::Rng;

use crate::dqn::replay::{ReplayBuffer, RewardChannel, Transition};
use crate::error::{Error, Result};
use crate::numerics::{Activation, Mlp, Optimizer, RegressionLoss};
use crate::scalar::Scalar;

/// Index of the largest value; ties go to the lowest index.
pub fn argmax<S: Scalar>(values: &[S]) -> usize {
    assert!(!values.is_empty(), "argmax of an empty slice");
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn max_value<S: Scalar>(values: &[S]) -> S {
    values[argmax(values)]
}

/// Uniform action with probability `epsilon`, otherwise greedy.
///
/// Always draws one uniform number, plus an index when exploring.
pub fn epsilon_greedy<S: Scalar, R: Rng + ?Sized>(values: &[S], epsilon: f64, rng: &mut R) -> usize {
    assert!((0.0..=1.0).contains(&epsilon), "epsilon {epsilon} outside [0, 1]");
    if rng.gen::<f64>() < epsilon {
        rng.gen_range(0..values.len())
    } else {
        argmax(values)
    }
}

/// How a TD update is formed from a sampled batch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TdSpec {
    pub batch_size: usize,
    pub gamma: f64,
    pub channel: RewardChannel,
    pub loss: RegressionLoss,
}

/// Online network plus a target network that only changes on [`sync_target`](Self::sync_target).
#[derive(Clone, Debug, PartialEq)]
pub struct QFunction<S> {
    online: Mlp<S>,
    target: Mlp<S>,
}

impl<S: Scalar> QFunction<S> {
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, hidden: &[usize], actions: usize, rng: &mut R) -> Self {
        let mut sizes = vec![obs_dim];
        sizes.extend_from_slice(hidden);
        sizes.push(actions);
        Self::from_network(Mlp::new(&sizes, Activation::Relu, Activation::Identity, rng))
    }

    pub fn from_network(online: Mlp<S>) -> Self {
        Self {
            target: online.clone(),
            online,
        }
    }

    pub fn from_parts(online: Mlp<S>, target: Mlp<S>) -> Self {
        Self { online, target }
    }

    pub fn online(&self) -> &Mlp<S> {
        &self.online
    }

    pub fn online_mut(&mut self) -> &mut Mlp<S> {
        &mut self.online
    }

    pub fn target(&self) -> &Mlp<S> {
        &self.target
    }

    pub fn actions(&self) -> usize {
        self.online.output_dim()
    }

    pub fn values(&self, obs: &[S]) -> Vec<S> {
        self.online.predict(obs)
    }

    pub fn target_values(&self, obs: &[S]) -> Vec<S> {
        self.target.predict(obs)
    }

    pub fn select_action<R: Rng + ?Sized>(&self, obs: &[S], epsilon: f64, rng: &mut R) -> usize {
        epsilon_greedy(&self.values(obs), epsilon, rng)
    }

    pub fn sync_target(&mut self) {
        self.target.copy_from(&self.online);
    }

    /// `r` for terminal transitions, `r + gamma * max_a' Q_target(s', a')` otherwise.
    pub fn td_targets(&self, batch: &[&Transition<S>], gamma: f64, channel: RewardChannel) -> Vec<S> {
        assert!(gamma > 0.0 && gamma <= 1.0, "gamma {gamma} outside (0, 1]");
        let dim = self.target.input_dim();
        let live: Vec<usize> = (0..batch.len()).filter(|&i| !batch[i].is_terminal()).collect();
        let mut next = Vec::with_capacity(live.len() * dim);
        for &i in &live {
            next.extend_from_slice(batch[i].next_obs.as_ref().unwrap());
        }
        let mut targets: Vec<S> = batch.iter().map(|t| t.reward(channel)).collect();
        if !live.is_empty() {
            let cache = self.target.forward_slice(&next, live.len());
            let g = S::of(gamma);
            for (row, &i) in live.iter().enumerate() {
                targets[i] += g * max_value(cache.output_row(row));
            }
        }
        targets
    }

    /// One optimizer step on the mean TD loss of `batch`; returns that loss.
    pub fn train_on_batch(
        &mut self,
        batch: &[&Transition<S>],
        optimizer: &mut Optimizer<S>,
        spec: &TdSpec,
    ) -> Result<S> {
        assert!(!batch.is_empty(), "empty training batch");
        let targets = self.td_targets(batch, spec.gamma, spec.channel);
        let n = batch.len();
        let dim = self.online.input_dim();
        let actions = self.actions();
        let mut inputs = Vec::with_capacity(n * dim);
        for t in batch {
            inputs.extend_from_slice(&t.obs);
        }
        let cache = self.online.forward_slice(&inputs, n);
        let mut grad_out = vec![S::zero(); n * actions];
        let scale = S::one() / S::of(n as f64);
        let mut total = S::zero();
        for (b, t) in batch.iter().enumerate() {
            let pred = cache.output_row(b)[t.action];
            let (l, dl) = spec.loss.eval(pred, targets[b]);
            total += l;
            grad_out[b * actions + t.action] = dl * scale;
        }
        let loss = total * scale;
        if !loss.is_finite() {
            return Err(Error::Divergence(format!("TD loss became {loss}")));
        }
        let mut grads = self.online.zero_grads();
        self.online.accumulate_gradients(&cache, &grad_out, &mut grads);
        optimizer.step(&mut self.online, &grads);
        if !self.online.is_finite() {
            return Err(Error::Divergence("Q-network parameters became non-finite".into()));
        }
        Ok(loss)
    }

    /// Samples a batch and trains on it; `Ok(None)` when the buffer is underfilled.
    pub fn train_step<R: Rng + ?Sized>(
        &mut self,
        buffer: &ReplayBuffer<Transition<S>>,
        optimizer: &mut Optimizer<S>,
        spec: &TdSpec,
        rng: &mut R,
    ) -> Result<Option<S>> {
        match buffer.sample(rng, spec.batch_size) {
            None => Ok(None),
            Some(batch) => self.train_on_batch(&batch, optimizer, spec).map(Some),
        }
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::numerics::Dense;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(5)
    }

    #[test]
    fn greedy_picks_max_and_breaks_ties_low() {
        let mut r = rng();
        assert_eq!(epsilon_greedy(&[1.0f32, 5.0, 2.0, 0.0, 0.0], 0.0, &mut r), 1);
        assert_eq!(epsilon_greedy(&[3.0f32, 3.0, 0.0, 0.0, 0.0], 0.0, &mut r), 0);
    }

    #[test]
    fn full_exploration_is_uniform() {
        let mut r = rng();
        let mut counts = [0usize; 5];
        let n = 10_000;
        for _ in 0..n {
            counts[epsilon_greedy(&[0.0f64, 9.0, 0.0, 0.0, 0.0], 1.0, &mut r)] += 1;
        }
        // Binomial(10^4, 0.2) has sd 0.004; 0.02 is five of them.
        for c in counts {
            assert!((c as f64 / n as f64 - 0.2).abs() < 0.02, "{counts:?}");
        }
    }

    fn constant_q(values: [f64; 2]) -> QFunction<f64> {
        // One identity layer with zero weights: output = bias.
        let mut d = Dense::zeros(1, 2, Activation::Identity);
        d.bias = values.to_vec();
        QFunction::from_network(Mlp::from_layers(vec![d]).unwrap())
    }

    #[test]
    fn td_targets_terminal_and_bootstrap() {
        let q = constant_q([10.0, 4.0]);
        let term = Transition::new(vec![1.0], 0, -50.0, None);
        let live = Transition::new(vec![1.0], 0, 0.0, Some(vec![1.0]));
        let y = q.td_targets(&[&term, &live], 0.9, RewardChannel::Environment);
        assert_eq!(y[0], -50.0);
        assert!((y[1] - 9.0).abs() < 1e-12);
    }

    #[test]
    fn exact_predictions_leave_params_unchanged_under_sgd() {
        let mut q = constant_q([3.0, 1.0]);
        let t = Transition::new(vec![1.0], 0, 3.0, None);
        let before = q.online().clone();
        let spec = TdSpec {
            batch_size: 1,
            gamma: 0.9,
            channel: RewardChannel::Environment,
            loss: RegressionLoss::Squared,
        };
        let loss = q.train_on_batch(&[&t], &mut Optimizer::sgd(0.1), &spec).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(q.online(), &before);
    }

    #[test]
    fn sync_copies_and_is_idempotent() {
        let mut r = rng();
        let mut q = QFunction::<f32>::new(4, &[8], 3, &mut r);
        let buf = {
            let mut b = ReplayBuffer::new(8);
            for i in 0..8 {
                let mut o = vec![0.0; 4];
                o[i % 4] = 1.0;
                b.push(Transition::new(o.clone(), i % 3, 1.0, Some(o)));
            }
            b
        };
        let spec = TdSpec {
            batch_size: 4,
            gamma: 0.9,
            channel: RewardChannel::Environment,
            loss: RegressionLoss::Squared,
        };
        let mut opt = Optimizer::adam(1e-2);
        for _ in 0..5 {
            q.train_step(&buf, &mut opt, &spec, &mut r).unwrap().unwrap();
        }
        assert_ne!(q.online(), q.target());
        q.sync_target();
        assert_eq!(q.online(), q.target());
        let once = q.clone();
        q.sync_target();
        assert_eq!(q, once);
        for i in 0..4 {
            let mut o = vec![0.0; 4];
            o[i] = 1.0;
            assert_eq!(q.values(&o), q.target_values(&o));
        }
    }

    #[test]
    fn loss_falls_on_fixed_batch_and_is_reproducible() {
        let run = || {
            let mut r = rng();
            let mut q = QFunction::<f64>::new(3, &[16], 2, &mut r);
            let data: Vec<Transition<f64>> = (0..6)
                .map(|i| {
                    let mut o = vec![0.0; 3];
                    o[i % 3] = 1.0;
                    Transition::new(o, i % 2, (i as f64) - 2.0, None)
                })
                .collect();
            let batch: Vec<&Transition<f64>> = data.iter().collect();
            let spec = TdSpec {
                batch_size: 6,
                gamma: 0.9,
                channel: RewardChannel::Environment,
                loss: RegressionLoss::Squared,
            };
            let mut opt = Optimizer::adam(1e-2);
            (0..100)
                .map(|_| q.train_on_batch(&batch, &mut opt, &spec).unwrap())
                .collect::<Vec<_>>()
        };
        let a = run();
        assert!(a[99] < 0.1 * a[0], "{} -> {}", a[0], a[99]);
        let first: f64 = a[..10].iter().sum();
        let last: f64 = a[90..].iter().sum();
        assert!(last < first);
        assert_eq!(a, run());
    }

    #[test]
    fn non_finite_loss_is_divergence() {
        let mut q = constant_q([0.0, 0.0]);
        let t = Transition::new(vec![1.0], 0, f64::INFINITY, None);
        let spec = TdSpec {
            batch_size: 1,
            gamma: 0.9,
            channel: RewardChannel::Environment,
            loss: RegressionLoss::Squared,
        };
        let err = q.train_on_batch(&[&t], &mut Optimizer::sgd(0.1), &spec).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }
}
