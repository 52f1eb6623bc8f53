//! Dense tensors, MLPs with reverse-mode gradients, losses and optimizers.

pub mod checkpoint;
pub mod loss;
pub mod mlp;
pub mod optim;
pub mod tensor;

pub use checkpoint::Checkpoint;
pub use loss::{cross_entropy, cross_entropy_index, l1_loss, softmax, LossGrad, RegressionLoss};
pub use mlp::{sigmoid, Activation, Dense, ForwardCache, Gradients, Mlp, Parameters};
pub use optim::{Method, MethodName, Optimizer, OptimizerConfig};
pub use tensor::Tensor;
