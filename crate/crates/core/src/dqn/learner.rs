use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dqn::qfunction::{QFunction, TdSpec};
use crate::dqn::replay::{ReplayBuffer, RewardChannel, Transition};
use crate::error::{Error, Result};
use crate::numerics::{Optimizer, OptimizerConfig, RegressionLoss};
use crate::scalar::Scalar;

/// Linear exploration decay from `start` to `end` over `decay_steps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_steps: u64,
}

impl EpsilonSchedule {
    pub fn value(&self, step: u64) -> f64 {
        if self.decay_steps == 0 || step >= self.decay_steps {
            return self.end;
        }
        let f = step as f64 / self.decay_steps as f64;
        self.start + (self.end - self.start) * f
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DqnConfig {
    pub hidden: Vec<usize>,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    pub epsilon: EpsilonSchedule,
    /// Environment steps between target synchronisations.
    pub target_sync_steps: u64,
    /// Environment steps between gradient steps.
    pub train_every: u64,
    /// Stored transitions required before the first gradient step.
    pub learning_starts: usize,
    pub optimizer: OptimizerConfig,
    pub loss: RegressionLoss,
}

impl Default for DqnConfig {
    fn default() -> Self {
        Self {
            hidden: vec![128, 128],
            buffer_capacity: 50_000,
            batch_size: 64,
            epsilon: EpsilonSchedule {
                start: 1.0,
                end: 0.05,
                decay_steps: 50_000,
            },
            target_sync_steps: 1_000,
            train_every: 1,
            learning_starts: 1_000,
            optimizer: OptimizerConfig::adam(1e-3),
            loss: RegressionLoss::Squared,
        }
    }
}

impl DqnConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("dqn: {m}")));
        if self.hidden.contains(&0) {
            return bad("hidden layer widths must be positive");
        }
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return bad("need 0 < batch_size <= buffer_capacity");
        }
        let e = &self.epsilon;
        if !(0.0..=1.0).contains(&e.start) || !(0.0..=1.0).contains(&e.end) {
            return bad("epsilon bounds must lie in [0, 1]");
        }
        if self.target_sync_steps == 0 || self.train_every == 0 {
            return bad("target_sync_steps and train_every must be positive");
        }
        if !(self.optimizer.learning_rate > 0.0) {
            return bad("learning rate must be positive");
        }
        Ok(())
    }
}

/// A Q-function with its optimizer and the step bookkeeping of the DQN recipe.
#[derive(Clone, Debug)]
pub struct Learner<S> {
    pub q: QFunction<S>,
    optimizer: Optimizer<S>,
    config: DqnConfig,
    gamma: f64,
    channel: RewardChannel,
    steps: u64,
    updates: u64,
}

impl<S: Scalar> Learner<S> {
    pub fn new<R: Rng + ?Sized>(
        obs_dim: usize,
        actions: usize,
        config: &DqnConfig,
        gamma: f64,
        channel: RewardChannel,
        rng: &mut R,
    ) -> Self {
        Self::from_q(
            QFunction::new(obs_dim, &config.hidden, actions, rng),
            config,
            gamma,
            channel,
        )
    }

    pub fn from_q(q: QFunction<S>, config: &DqnConfig, gamma: f64, channel: RewardChannel) -> Self {
        Self {
            q,
            optimizer: config.optimizer.build(),
            config: config.clone(),
            gamma,
            channel,
            steps: 0,
            updates: 0,
        }
    }

    pub fn config(&self) -> &DqnConfig {
        &self.config
    }

    pub fn channel(&self) -> RewardChannel {
        self.channel
    }

    /// Environment steps seen so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Gradient steps taken so far.
    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn epsilon(&self) -> f64 {
        self.config.epsilon.value(self.steps)
    }

    fn spec(&self) -> TdSpec {
        TdSpec {
            batch_size: self.config.batch_size,
            gamma: self.gamma,
            channel: self.channel,
            loss: self.config.loss,
        }
    }

    /// Advances one environment step: trains and syncs on schedule.
    /// Returns the loss when a gradient step was taken.
    pub fn on_env_step<R: Rng + ?Sized>(
        &mut self,
        buffer: &ReplayBuffer<Transition<S>>,
        rng: &mut R,
    ) -> Result<Option<S>> {
        self.steps += 1;
        let mut loss = None;
        if self.steps.is_multiple_of(self.config.train_every)
            && buffer.len() >= self.config.learning_starts.max(self.config.batch_size)
        {
            let spec = self.spec();
            loss = self.q.train_step(buffer, &mut self.optimizer, &spec, rng)?;
            if loss.is_some() {
                self.updates += 1;
            }
        }
        if self.steps.is_multiple_of(self.config.target_sync_steps) {
            self.q.sync_target();
        }
        Ok(loss)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_decays_linearly_then_holds() {
        let e = EpsilonSchedule {
            start: 1.0,
            end: 0.05,
            decay_steps: 100,
        };
        assert_eq!(e.value(0), 1.0);
        assert!((e.value(50) - 0.525).abs() < 1e-12);
        assert_eq!(e.value(100), 0.05);
        assert_eq!(e.value(10_000), 0.05);
    }

    #[test]
    fn default_config_is_valid_and_toml_round_trips() {
        let c = DqnConfig::default();
        c.validate().unwrap();
        let text = toml::to_string(&c).unwrap();
        let back: DqnConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_toml_falls_back_to_defaults() {
        let c: DqnConfig = toml::from_str("batch_size = 16\nhidden = [32]").unwrap();
        assert_eq!(c.batch_size, 16);
        assert_eq!(c.hidden, vec![32]);
        assert_eq!(c.buffer_capacity, 50_000);
        assert!(toml::from_str::<DqnConfig>("bogus = 1").is_err());
    }

    #[test]
    fn invalid_configs_are_config_errors() {
        let c = DqnConfig {
            batch_size: 0,
            ..DqnConfig::default()
        };
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
        let mut c = DqnConfig::default();
        c.epsilon.end = 1.5;
        assert!(c.validate().is_err());
    }
}
