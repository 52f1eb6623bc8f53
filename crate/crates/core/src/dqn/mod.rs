//! Plain DQN: replay, target network, epsilon-greedy exploration.

pub mod learner;
pub mod qfunction;
pub mod replay;

pub use learner::{DqnConfig, EpsilonSchedule, Learner};
pub use qfunction::{argmax, epsilon_greedy, max_value, QFunction, TdSpec};
pub use replay::{ReplayBuffer, RewardChannel, Transition};

/// One row of the training-metrics CSV.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainingMetricsRow {
    /// Environment steps taken when the episode ended.
    pub step: u64,
    /// Mean TD loss over the episode's gradient steps; empty if none.
    pub loss: Option<f64>,
    pub epsilon: f64,
    pub episodic_return: f64,
}
