use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::sigmoid;

/// `beta * r + (1 - beta) * r_hat`. Panics unless `beta` lies in `[0, 1]`.
pub fn sympathetic_reward(r: f64, r_hat: f64, beta: f64) -> f64 {
    assert!((0.0..=1.0).contains(&beta), "selfishness {beta} outside [0, 1]");
    beta * r + (1.0 - beta) * r_hat
}

/// Weight of the learner's own reward in the sympathetic reward.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SelfishnessPolicy {
    Constant {
        beta: f64,
    },
    /// `clamp(sigmoid(temperature * (max Q_selfish - max Q_indep)), lo, hi)`.
    /// With no independent agent in play the weight is `hi`.
    ValueAdaptive {
        temperature: f64,
        lo: f64,
        hi: f64,
    },
}

impl Default for SelfishnessPolicy {
    fn default() -> Self {
        SelfishnessPolicy::Constant { beta: 0.5 }
    }
}

impl SelfishnessPolicy {
    pub fn adaptive_default() -> Self {
        SelfishnessPolicy::ValueAdaptive {
            temperature: 1.0,
            lo: 0.2,
            hi: 0.8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        match *self {
            SelfishnessPolicy::Constant { beta } if !unit(beta) => {
                Err(Error::Config(format!("beta {beta} outside [0, 1]")))
            }
            SelfishnessPolicy::ValueAdaptive { temperature, lo, hi }
                if !temperature.is_finite() || !unit(lo) || !unit(hi) || lo > hi =>
            {
                Err(Error::Config(
                    "adaptive selfishness needs finite temperature and 0 <= lo <= hi <= 1".into(),
                ))
            }
            _ => Ok(()),
        }
    }

    pub fn needs_values(&self) -> bool {
        matches!(self, SelfishnessPolicy::ValueAdaptive { .. })
    }

    /// `max_selfish` is `max_a Q_selfish` at the learner's state and
    /// `max_indep` is `max_a Q_indep` at the independent agent's state.
    pub fn beta(&self, max_selfish: f64, max_indep: Option<f64>) -> f64 {
        match *self {
            SelfishnessPolicy::Constant { beta } => beta,
            SelfishnessPolicy::ValueAdaptive { temperature, lo, hi } => match max_indep {
                None => hi,
                Some(m) => {
                    let b: f64 = sigmoid(temperature * (max_selfish - m));
                    if b.is_nan() {
                        hi
                    } else {
                        b.clamp(lo, hi)
                    }
                }
            },
        }
    }
}
