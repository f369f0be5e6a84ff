//! Small dense neural-network engine: six layer kinds, cross-entropy loss,
//! momentum SGD and finite-difference gradient verification.

mod gradcheck;
mod layer;
mod network;
mod optim;
pub mod weights;

pub use gradcheck::{compare_gradients, gradient_check};
pub use layer::{ActShape, LayerSpec};
pub use network::{Gradients, InputShape, Network, Params};
pub use optim::{sgd_momentum_step, Hyperparams};

pub(crate) use network::init_params;
