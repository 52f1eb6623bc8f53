use serde::{Deserialize, Serialize};

use crate::emote::imagination::{ImaginationGrads, ImaginationNetwork};
use crate::gridworld::OBS_DIM;
use crate::numerics::{cross_entropy_index, l1_loss, softmax, Mlp, Optimizer};
use crate::scalar::Scalar;

/// Components of the imagination loss, averaged over a batch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct EmoteLossBreakdown<S> {
    /// `(1 - delta) * ce + delta * l1`, evaluated in exactly that form.
    pub total: S,
    /// Cross entropy of the observed action under `softmax(Q_copy(s_e))`.
    pub ce: S,
    /// `|s_i - s_e|_1`.
    pub l1: S,
    pub delta: S,
}

impl<S: Scalar> EmoteLossBreakdown<S> {
    pub fn combine(ce: S, l1: S, delta: S) -> Self {
        Self {
            total: (S::one() - delta) * ce + delta * l1,
            ce,
            l1,
            delta,
        }
    }
}

/// Evaluates the imagination loss over a batch and, when `grads` is given,
/// accumulates its gradient with respect to the imagination parameters.
///
/// `q_copy` is read only: its input gradient carries the cross-entropy term
/// back to `s_e`, its parameters receive nothing.
pub fn emote_loss<S: Scalar>(
    net: &ImaginationNetwork<S>,
    q_copy: &Mlp<S>,
    s_i: &[S],
    actions: &[usize],
    delta: S,
    grads: Option<&mut ImaginationGrads<S>>,
) -> EmoteLossBreakdown<S> {
    assert!(delta >= S::zero() && delta <= S::one(), "delta {delta} outside [0, 1]");
    let batch = actions.len();
    assert!(batch > 0, "empty imagination batch");
    let cache = net.forward(s_i, batch);
    let s_e = cache.output();
    let q_cache = q_copy.forward_slice(s_e, batch);
    let n_actions = q_copy.output_dim();

    let inv = S::one() / S::of(batch as f64);
    let mut ce_sum = S::zero();
    let mut l1_sum = S::zero();
    let mut grad_logits = vec![S::zero(); batch * n_actions];
    let mut grad_se = vec![S::zero(); batch * OBS_DIM];
    let ce_weight = (S::one() - delta) * inv;
    let l1_weight = delta * inv;
    for b in 0..batch {
        let probs = softmax(q_cache.output_row(b));
        let ce = cross_entropy_index(actions[b], &probs);
        ce_sum += ce.loss;
        for (g, v) in grad_logits[b * n_actions..(b + 1) * n_actions].iter_mut().zip(ce.grad) {
            *g = v * ce_weight;
        }
        let row = b * OBS_DIM..(b + 1) * OBS_DIM;
        let l1 = l1_loss(&s_e[row.clone()], &s_i[row.clone()]);
        l1_sum += l1.loss;
        for (g, v) in grad_se[row].iter_mut().zip(l1.grad) {
            *g = v * l1_weight;
        }
    }
    let out = EmoteLossBreakdown::combine(ce_sum * inv, l1_sum * inv, delta);
    if let Some(grads) = grads {
        if ce_weight != S::zero() {
            let through_q = q_copy.input_gradient(&q_cache, &grad_logits);
            for (g, v) in grad_se.iter_mut().zip(through_q) {
                *g += v;
            }
        }
        net.backward(&cache, &grad_se, grads);
    }
    out
}

/// One optimizer step on the mean loss of `(s_i, a_i)` pairs.
/// `None` (nothing changes) for an empty batch.
pub fn train_imagination<S: Scalar>(
    net: &mut ImaginationNetwork<S>,
    q_copy: &Mlp<S>,
    s_i: &[S],
    actions: &[usize],
    delta: S,
    optimizer: &mut Optimizer<S>,
) -> Option<EmoteLossBreakdown<S>> {
    if actions.is_empty() {
        return None;
    }
    let mut grads = net.zero_grads();
    let loss = emote_loss(net, q_copy, s_i, actions, delta, Some(&mut grads));
    optimizer.step(net, &grads);
    Some(loss)
}

/// Whether the greedy action under the empathetic state matches the
/// observed action.
pub fn action_matches<S: Scalar>(net: &ImaginationNetwork<S>, q_copy: &Mlp<S>, s_i: &[S], a_i: usize) -> bool {
    crate::dqn::argmax(&q_copy.predict(&net.imagine(s_i))) == a_i
}
