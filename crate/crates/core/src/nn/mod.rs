//! Neural-network engine: tensors, layers, losses, backpropagation,
//! optimizers, training loop and gradient checking.

mod activation;
mod gemm;
mod gradcheck;
mod init;
pub mod layers;
mod loss;
mod network;
mod optim;
mod scalar;
mod tensor;
mod train;

pub use activation::{activation, sigmoid, softmax_in_place, Activation};
pub use gradcheck::{grad_check, grad_check_with};
pub use layers::{Layer, LayerSpec, DEFAULT_MASK_VALUE};
pub use loss::{loss, loss_and_grad, LossKind};
pub use network::Network;
pub use optim::{Optimizer, OptimizerState};
pub use scalar::Scalar;
pub use tensor::Tensor;
pub use train::{evaluate, fit, train, Dataset, EpochStats, MetricKind, TrainConfig, TrainReport};
pub(crate) use train::argmax;
