pub mod fitness;
pub mod genome;
pub mod interp;
pub mod ir;
pub mod scalar;
pub mod search;

pub use scalar::Scalar;

/// Tensor values carried at single precision, as used by the search.
pub type Tensor = interp::TensorValue<f32>;
/// Double-precision tensors, used for numerical derivative checks.
pub type Tensor64 = interp::TensorValue<f64>;
