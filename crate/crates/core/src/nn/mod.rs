//! ConvNet building blocks with hand-written forward and backward passes.

pub mod checkpoint;
pub mod conv;
pub mod full;
pub mod loss;
pub mod network;
pub mod nonlin;
pub mod norm;
pub mod pool;
pub mod sgd;
pub mod tensor;

pub use conv::{ConnectionTable, Conv};
pub use full::{Activation, FullLayer};
pub use loss::{argmax, mse_gradient, mse_loss, one_hot};
pub use network::{GradientBuffers, Layer, Network, Trace};
pub use nonlin::{Nonlinearity, NonlinearityKind};
pub use norm::{DivisiveNorm, GaussianWindow, SubtractiveNorm, DEFAULT_EPSILON};
pub use pool::{LpPool, PNorm, PoolingKind, Subsampling};
pub use sgd::{sgd_step, TrainConfig};
pub use tensor::{FeatureStack, Shape};
