// `!(x > 0.0)` is the intended NaN-rejecting form in config validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod csvio;
pub mod dqn;
pub mod emote;
pub mod error;
pub mod gridworld;
pub mod harness;
pub mod irl;
pub mod jsonl;
pub mod numerics;
pub mod scalar;
pub mod sympathy;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Scalar type used by training runs.
pub type Real = f32;
pub type Network = numerics::Mlp<Real>;
pub type Network64 = numerics::Mlp<f64>;
pub type Tensor32 = numerics::Tensor<Real>;
