//! Sympathetic reward, the dual Q-learner and the learner's episode loop.

pub mod dual;
pub mod estimator;
pub mod reward;
pub mod run;

use serde::{Deserialize, Serialize};

pub use dual::{DualQTrainer, StepLosses};
pub use estimator::{CslTraining, Estimator, ImaginationTraining};
pub use reward::{sympathetic_reward, SelfishnessPolicy};
pub use run::{EpisodeRow, IndependentPolicy, Phase, Recorder, SympathyAgent};

use crate::emote::{Benchmark, Variant};

/// The six learner configurations compared by the harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    /// Single DQN on the environment reward.
    Selfish,
    /// Sympathetic reward from a standalone classifier and l1 rescaling.
    Sympathy,
    EFeature,
    EImage,
    BVis,
    BInvis,
}

impl Baseline {
    pub const ALL: [Baseline; 6] = [
        Baseline::Selfish,
        Baseline::Sympathy,
        Baseline::EFeature,
        Baseline::EImage,
        Baseline::BVis,
        Baseline::BInvis,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::Selfish => "selfish",
            Baseline::Sympathy => "sympathy",
            Baseline::EFeature => "e-feature",
            Baseline::EImage => "e-image",
            Baseline::BVis => "b-vis",
            Baseline::BInvis => "b-invis",
        }
    }

    pub fn variant(self) -> Option<Variant> {
        match self {
            Baseline::EFeature => Some(Variant::Feature),
            Baseline::EImage => Some(Variant::Image),
            _ => None,
        }
    }

    pub fn benchmark(self) -> Option<Benchmark> {
        match self {
            Baseline::BVis => Some(Benchmark::Visible),
            Baseline::BInvis => Some(Benchmark::Invisible),
            _ => None,
        }
    }

    /// Learned or rule-based empathetic states.
    pub fn uses_empathy(self) -> bool {
        self.variant().is_some() || self.benchmark().is_some()
    }

    pub fn is_dual(self) -> bool {
        self != Baseline::Selfish
    }
}

impl std::fmt::Display for Baseline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Baseline {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        Baseline::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| crate::Error::Config(format!("unknown baseline {s:?}")))
    }
}
