//! The tensor dialect: types, straight-line SSA functions, a textual
//! format and its verifier.

mod module;
mod op;
pub mod parse;
pub mod print;
mod types;
pub mod verify;

pub use module::{FunctionBody, Global, Initializer, Module, Param};
pub use op::{Attr, Attributes, CompareKind, OpId, Opcode, Operation, ReduceKind, ValueId};
pub use parse::{parse_module, parse_module_unverified, ParseError};
pub use print::{print_functions, print_module, print_module_with, PrintOptions};
pub use types::{ElementKind, TensorType, TypeParseError};
pub use verify::{check_signature, verify_module, Rule, VerifyReport, Violation};
