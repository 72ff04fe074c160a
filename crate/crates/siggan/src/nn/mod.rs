//! Minimal neural-network engine: tensors, layers, Adam, gradient checking.

pub mod activation;
pub mod adam;
pub mod gradcheck;
pub mod layer;
pub mod tensor;

pub use activation::Activation;
pub use adam::{Adam, AdamConfig};
pub use gradcheck::{best_over_points, grad_check, jitter_params, GradCheckReport, ParamNet};
pub use layer::{Conv1d, ConvSpec, ConvTranspose1d, Dense, Layer};
pub use tensor::{params_checksum, Tensor};
