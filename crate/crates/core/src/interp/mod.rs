//! Reference interpreter for the tensor dialect and its cost model.

mod cost;
mod eval;
mod exec;
mod tensor;

use crate::ir::{TensorType, ValueId, VerifyReport};

pub use cost::{cost_of, cost_of_with, CostModel};
pub use eval::{apply, eval_op, Env};
pub use exec::{interpret, interpret_with, Execution, Program};
pub use tensor::{Buffer, TensorValue};

#[derive(Debug, Clone, thiserror::Error)]
pub enum InterpError {
    #[error("module does not verify: {0}")]
    Malformed(VerifyReport),
    #[error("no function named @{0}")]
    UnknownFunction(String),
    #[error("expected {expected} inputs, got {got}")]
    InputCount { expected: usize, got: usize },
    #[error("input {index} is {got}, expected {expected}")]
    InputType { index: usize, expected: TensorType, got: TensorType },
    #[error("value {0} is not available")]
    MissingValue(ValueId),
    #[error("bad tensor data: {0}")]
    BadData(String),
}
