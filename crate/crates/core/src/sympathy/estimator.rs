//! Estimates of the independent agent's action values and inferred rewards.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dqn::{argmax, ReplayBuffer};
use crate::emote::{train_imagination, EmoteLossBreakdown, EmpathyModel, FrozenQCopy};
use crate::error::{Error, Result};
use crate::irl::{feature_reward_report, invert_one, l1_scale, CslConfig, LabeledReward, StandaloneQHat};
use crate::numerics::{Checkpoint, Mlp, Optimizer};
use crate::scalar::Scalar;

/// Online training schedule of the imagination network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImaginationTraining {
    /// Recent independent-agent `(s_i, a_i)` pairs kept for training.
    pub buffer_capacity: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// `Q_selfish` gradient steps required before the first imagination step.
    pub warmup_updates: u64,
    /// Episodes between refreshes of the frozen `Q_selfish` copy.
    pub refresh_episodes: u32,
    /// Learner steps between imagination steps.
    pub train_every: u64,
}

impl Default for ImaginationTraining {
    fn default() -> Self {
        Self {
            buffer_capacity: 10_000,
            batch_size: 32,
            learning_rate: 1e-3,
            warmup_updates: 1_000,
            refresh_episodes: 10,
            train_every: 1,
        }
    }
}

impl ImaginationTraining {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return Err(Error::Config(
                "imagination: need 0 < batch_size <= buffer_capacity".into(),
            ));
        }
        if self.refresh_episodes == 0 || self.train_every == 0 {
            return Err(Error::Config(
                "imagination: refresh_episodes and train_every must be positive".into(),
            ));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("imagination: learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// Schedule of the standalone classifier used by the sympathy baseline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CslTraining {
    pub buffer_capacity: usize,
    /// Episodes between recomputations of the l1 scale factor.
    pub rescale_episodes: u32,
    /// Inferred rewards kept for the scale factor.
    pub rescale_window: usize,
}

impl Default for CslTraining {
    fn default() -> Self {
        Self {
            buffer_capacity: 10_000,
            rescale_episodes: 10,
            rescale_window: 5_000,
        }
    }
}

pub struct EmpathyEstimator<S> {
    pub model: EmpathyModel<S>,
    pub copy: FrozenQCopy<S>,
    optimizer: Optimizer<S>,
    buffer: ReplayBuffer<(Vec<S>, usize)>,
    settings: ImaginationTraining,
    delta: f64,
    steps: u64,
    updates: u64,
}

pub struct CslEstimator<S> {
    pub qhat: StandaloneQHat<S>,
    /// Factor applied to raw inferred rewards.
    pub scale: f64,
    buffer: ReplayBuffer<(Vec<S>, usize)>,
    batch_size: usize,
    settings: CslTraining,
    la_vector: Vec<f64>,
    recent: VecDeque<LabeledReward>,
    since_rescale: u32,
}

/// The learner's model of the independent agent.
pub enum Estimator<S> {
    /// Selfish baseline: nothing is inferred.
    Absent,
    Empathy(Box<EmpathyEstimator<S>>),
    Csl(Box<CslEstimator<S>>),
}

fn pack<S: Scalar>(buffer: &ReplayBuffer<(Vec<S>, usize)>, idx: &[usize]) -> (Vec<S>, Vec<usize>) {
    let mut obs = Vec::with_capacity(idx.len() * buffer.get(idx[0]).0.len());
    let mut actions = Vec::with_capacity(idx.len());
    for &i in idx {
        let (o, a) = buffer.get(i);
        obs.extend_from_slice(o);
        actions.push(*a);
    }
    (obs, actions)
}

impl<S: Scalar> Estimator<S> {
    pub fn empathy(model: EmpathyModel<S>, q_selfish: &Mlp<S>, settings: &ImaginationTraining, delta: f64) -> Self {
        Estimator::Empathy(Box::new(EmpathyEstimator {
            model,
            copy: FrozenQCopy::new(q_selfish, settings.refresh_episodes),
            optimizer: Optimizer::adam(settings.learning_rate),
            buffer: ReplayBuffer::new(settings.buffer_capacity),
            settings: settings.clone(),
            delta,
            steps: 0,
            updates: 0,
        }))
    }

    pub fn csl(qhat: StandaloneQHat<S>, config: &CslConfig, settings: &CslTraining, la_vector: Vec<f64>) -> Self {
        Estimator::Csl(Box::new(CslEstimator {
            qhat,
            scale: 1.0,
            buffer: ReplayBuffer::new(settings.buffer_capacity),
            batch_size: config.batch_size,
            settings: settings.clone(),
            la_vector,
            recent: VecDeque::new(),
            since_rescale: 0,
        }))
    }

    pub fn is_absent(&self) -> bool {
        matches!(self, Estimator::Absent)
    }

    /// `Q_indep(s_i, .)`, before any rescaling. `None` when absent.
    pub fn values(&self, s_i: &[S]) -> Option<Vec<S>> {
        match self {
            Estimator::Absent => None,
            Estimator::Empathy(e) => Some(e.copy.net().predict(&e.model.empathetic_state(s_i))),
            Estimator::Csl(c) => Some(c.qhat.values(s_i)),
        }
    }

    fn scale(&self) -> f64 {
        match self {
            Estimator::Csl(c) => c.scale,
            _ => 1.0,
        }
    }

    /// Raw bellman-inverted reward of one transition (zero when absent).
    pub fn infer_raw(&self, s_i: &[S], a_i: usize, next: Option<&[S]>, gamma: f64) -> f64 {
        let Some(q) = self.values(s_i) else {
            return 0.0;
        };
        let next_q = next.map(|n| self.values(n).expect("estimator present"));
        invert_one(q[a_i], next_q.as_deref(), gamma).as_f64()
    }

    /// Inferred reward in learner units.
    pub fn infer(&self, s_i: &[S], a_i: usize, next: Option<&[S]>, gamma: f64) -> f64 {
        self.infer_raw(s_i, a_i, next, gamma) * self.scale()
    }

    /// Stores an observed independent-agent pair and its raw inferred reward.
    pub fn observe(&mut self, s_i: Vec<S>, a_i: usize, labeled_raw: LabeledReward) {
        match self {
            Estimator::Absent => {}
            Estimator::Empathy(e) => {
                if e.model.network().is_some() {
                    e.buffer.push((s_i, a_i));
                }
            }
            Estimator::Csl(c) => {
                c.buffer.push((s_i, a_i));
                c.recent.push_back(labeled_raw);
                while c.recent.len() > c.settings.rescale_window {
                    c.recent.pop_front();
                }
            }
        }
    }

    /// One scheduled training step after a learner step.
    pub fn train_step<R: Rng + ?Sized>(
        &mut self,
        selfish_updates: u64,
        rng: &mut R,
    ) -> Result<Option<EmoteLossBreakdown<S>>> {
        match self {
            Estimator::Absent => Ok(None),
            Estimator::Empathy(e) => {
                e.steps += 1;
                let EmpathyEstimator {
                    model,
                    copy,
                    optimizer,
                    buffer,
                    settings,
                    delta,
                    steps,
                    updates,
                } = &mut **e;
                let Some(net) = model.network_mut() else {
                    return Ok(None);
                };
                if selfish_updates < settings.warmup_updates || *steps % settings.train_every != 0 {
                    return Ok(None);
                }
                let Some(idx) = buffer.sample_indices(rng, settings.batch_size) else {
                    return Ok(None);
                };
                let (obs, actions) = pack(buffer, &idx);
                let loss = train_imagination(net, copy.net(), &obs, &actions, S::of(*delta), optimizer);
                if !net.is_finite() || loss.is_some_and(|l| !l.total.as_f64().is_finite()) {
                    return Err(Error::Divergence("imagination network became non-finite".into()));
                }
                *updates += 1;
                Ok(loss)
            }
            Estimator::Csl(c) => {
                if let Some(idx) = c.buffer.sample_indices(rng, c.batch_size) {
                    let (obs, actions) = pack(&c.buffer, &idx);
                    let loss = c.qhat.train_step(&obs, &actions);
                    if !loss.as_f64().is_finite() || !c.qhat.net.is_finite() {
                        return Err(Error::Divergence("classifier became non-finite".into()));
                    }
                }
                Ok(None)
            }
        }
    }

    /// End-of-episode maintenance: Q-copy refresh or l1 rescaling.
    pub fn end_episode(&mut self, q_selfish: &Mlp<S>) {
        match self {
            Estimator::Absent => {}
            Estimator::Empathy(e) => {
                e.copy.refresh(q_selfish, 1);
            }
            Estimator::Csl(c) => {
                c.since_rescale += 1;
                if c.since_rescale >= c.settings.rescale_episodes {
                    c.since_rescale = 0;
                    let samples: Vec<LabeledReward> = c.recent.iter().copied().collect();
                    let means: Vec<f64> = feature_reward_report(&samples, usize::MAX)
                        .values()
                        .map(|s| s.mean)
                        .collect();
                    // A degenerate (all-zero) estimate keeps the previous factor.
                    if let Ok(k) = l1_scale(&means, &c.la_vector) {
                        c.scale = k;
                    }
                }
            }
        }
    }

    /// Imagination steps taken so far.
    pub fn imagination_updates(&self) -> u64 {
        match self {
            Estimator::Empathy(e) => e.updates,
            _ => 0,
        }
    }

    pub fn empathy_model(&self) -> Option<&EmpathyModel<S>> {
        match self {
            Estimator::Empathy(e) => Some(&e.model),
            _ => None,
        }
    }

    pub fn q_copy(&self) -> Option<&Mlp<S>> {
        match self {
            Estimator::Empathy(e) => Some(e.copy.net()),
            _ => None,
        }
    }

    /// Whether the greedy action under `Q_indep` equals `a_i`.
    pub fn predicts(&self, s_i: &[S], a_i: usize) -> Option<bool> {
        self.values(s_i).map(|q| argmax(&q) == a_i)
    }

    pub fn csl_scale(&self) -> Option<f64> {
        match self {
            Estimator::Csl(c) => Some(c.scale),
            _ => None,
        }
    }

    /// Restores the sympathy baseline's scale factor; no-op otherwise.
    pub fn set_csl_scale(&mut self, k: f64) {
        if let Estimator::Csl(c) = self {
            c.scale = k;
        }
    }

    pub fn store(&self, ckpt: Checkpoint<S>) -> Checkpoint<S> {
        match self {
            Estimator::Absent => ckpt,
            Estimator::Empathy(e) => {
                let ckpt = ckpt.with("q_copy", e.copy.net());
                match e.model.network() {
                    Some(net) => net.store(ckpt),
                    None => ckpt,
                }
            }
            Estimator::Csl(c) => ckpt.with("csl_qhat", &c.qhat.net),
        }
    }
}
