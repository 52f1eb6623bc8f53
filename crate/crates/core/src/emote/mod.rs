//! Imagination networks, the imagination loss, the frozen Q-copy and the
//! rule-based benchmark transforms.

pub mod divergence;
pub mod frozen;
pub mod imagination;
pub mod loss;
pub mod synthetic;
pub mod transform;

pub use divergence::{state_divergence, CellChange, DivergenceReport, EmpatheticDump, GridState};
pub use frozen::FrozenQCopy;
pub use imagination::{ImaginationConfig, ImaginationGrads, ImaginationNetwork, ImagineCache, Init, Variant};
pub use loss::{action_matches, emote_loss, train_imagination, EmoteLossBreakdown};
pub use transform::{binvis_transform, bvis_transform, Benchmark, EmpathyModel};

use crate::numerics::Mlp;
use crate::scalar::Scalar;

/// Estimated action values of the independent agent: `Q_copy(M(s_i), .)`.
pub fn q_indep<S: Scalar>(model: &EmpathyModel<S>, q_copy: &FrozenQCopy<S>, s_i: &[S]) -> Vec<S> {
    q_copy.net().predict(&model.empathetic_state(s_i))
}

/// Same as [`q_indep`] for a bare network.
pub fn q_indep_with<S: Scalar>(model: &EmpathyModel<S>, q: &Mlp<S>, s_i: &[S]) -> Vec<S> {
    q.predict(&model.empathetic_state(s_i))
}
