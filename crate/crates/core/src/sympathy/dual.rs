use rand::Rng;

use crate::dqn::{DqnConfig, Learner, ReplayBuffer, RewardChannel, Transition};
use crate::error::Result;
use crate::numerics::Checkpoint;
use crate::scalar::Scalar;

/// `Q_selfish` on environment rewards and, unless running the selfish
/// baseline, `Q_symp` on sympathetic rewards from the same replay buffer.
/// Actions come from `Q_symp` when it exists.
#[derive(Clone, Debug)]
pub struct DualQTrainer<S> {
    selfish: Learner<S>,
    symp: Option<Learner<S>>,
}

/// Losses of the gradient steps taken on one environment step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepLosses<S> {
    pub selfish: Option<S>,
    pub symp: Option<S>,
}

impl<S: Scalar> DualQTrainer<S> {
    pub fn new<R: Rng + ?Sized>(
        obs_dim: usize,
        actions: usize,
        config: &DqnConfig,
        gamma: f64,
        dual: bool,
        rng: &mut R,
    ) -> Self {
        let selfish = Learner::new(obs_dim, actions, config, gamma, RewardChannel::Environment, rng);
        let symp = dual.then(|| Learner::new(obs_dim, actions, config, gamma, RewardChannel::Sympathetic, rng));
        Self { selfish, symp }
    }

    pub fn from_learners(selfish: Learner<S>, symp: Option<Learner<S>>) -> Self {
        assert_eq!(selfish.channel(), RewardChannel::Environment);
        if let Some(s) = &symp {
            assert_eq!(s.channel(), RewardChannel::Sympathetic);
        }
        Self { selfish, symp }
    }

    pub fn selfish(&self) -> &Learner<S> {
        &self.selfish
    }

    pub fn symp(&self) -> Option<&Learner<S>> {
        self.symp.as_ref()
    }

    pub fn is_dual(&self) -> bool {
        self.symp.is_some()
    }

    /// The learner whose greedy policy is followed.
    pub fn acting(&self) -> &Learner<S> {
        self.symp.as_ref().unwrap_or(&self.selfish)
    }

    pub fn epsilon(&self) -> f64 {
        self.acting().epsilon()
    }

    pub fn select_action<R: Rng + ?Sized>(&self, obs: &[S], epsilon: f64, rng: &mut R) -> usize {
        self.acting().q.select_action(obs, epsilon, rng)
    }

    pub fn on_env_step<R: Rng + ?Sized>(
        &mut self,
        buffer: &ReplayBuffer<Transition<S>>,
        rng: &mut R,
    ) -> Result<StepLosses<S>> {
        let selfish = self.selfish.on_env_step(buffer, rng)?;
        let symp = match self.symp.as_mut() {
            Some(l) => l.on_env_step(buffer, rng)?,
            None => None,
        };
        Ok(StepLosses { selfish, symp })
    }

    pub fn store(&self, ckpt: Checkpoint<S>) -> Checkpoint<S> {
        let mut ckpt = ckpt
            .with("q_selfish", self.selfish.q.online())
            .with("q_selfish_target", self.selfish.q.target());
        if let Some(s) = &self.symp {
            ckpt = ckpt.with("q_symp", s.q.online()).with("q_symp_target", s.q.target());
        }
        ckpt
    }
}
