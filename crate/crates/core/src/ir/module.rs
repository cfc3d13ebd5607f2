use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::op::{bits_eq, OpId, Operation, ValueId};
use super::types::TensorType;

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub value: ValueId,
    pub ty: TensorType,
}

/// Straight-line SSA function: parameters, an ordered op list, and returns.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionBody {
    pub name: String,
    pub params: Vec<Param>,
    pub ops: Vec<Operation>,
    pub returns: Vec<ValueId>,
    pub return_types: Vec<TensorType>,
}

impl FunctionBody {
    pub fn op_index(&self, id: OpId) -> Option<usize> {
        self.ops.iter().position(|op| op.id == id)
    }

    pub fn op(&self, id: OpId) -> Option<&Operation> {
        self.ops.iter().find(|op| op.id == id)
    }

    pub fn param_types(&self) -> Vec<TensorType> {
        self.params.iter().map(|p| p.ty.clone()).collect()
    }

    /// Position at which `value` becomes available: `Some(0)` for
    /// parameters, `Some(i + 1)` for the result of op `i`.
    pub fn definition_point(&self, value: &ValueId) -> Option<usize> {
        if self.params.iter().any(|p| &p.value == value) {
            return Some(0);
        }
        self.ops.iter().position(|op| &op.result == value).map(|i| i + 1)
    }

    pub fn type_of(&self, value: &ValueId) -> Option<&TensorType> {
        self.params
            .iter()
            .find(|p| &p.value == value)
            .map(|p| &p.ty)
            .or_else(|| self.ops.iter().find(|op| &op.result == value).map(|op| &op.result_type))
    }

    /// Values visible to an op inserted at `position` (before `ops[position]`).
    pub fn values_in_scope(&self, position: usize) -> Vec<(ValueId, TensorType)> {
        self.params
            .iter()
            .map(|p| (p.value.clone(), p.ty.clone()))
            .chain(self.ops[..position.min(self.ops.len())].iter().map(|op| (op.result.clone(), op.result_type.clone())))
            .collect()
    }

    pub fn defines(&self, value: &ValueId) -> bool {
        self.definition_point(value).is_some()
    }
}

/// How a global (weight) tensor gets its initial contents.
#[derive(Clone, Debug)]
pub enum Initializer {
    /// Row-major literal values.
    Dense(Vec<f64>),
    /// Deterministic uniform draw in `[low, high)` from a seeded stream.
    Uniform { seed: u64, low: f64, high: f64 },
}

impl PartialEq for Initializer {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Initializer::Dense(a), Initializer::Dense(b)) => bits_eq(a, b),
            (
                Initializer::Uniform { seed: s1, low: l1, high: h1 },
                Initializer::Uniform { seed: s2, low: l2, high: h2 },
            ) => s1 == s2 && l1.to_bits() == l2.to_bits() && h1.to_bits() == h2.to_bits(),
            _ => false,
        }
    }
}

impl Initializer {
    pub fn materialize(&self, count: usize) -> Vec<f64> {
        match self {
            Initializer::Dense(v) => v.clone(),
            Initializer::Uniform { seed, low, high } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..count).map(|_| low + (high - low) * rng.gen::<f64>()).collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Global {
    pub name: String,
    pub ty: TensorType,
    pub init: Initializer,
}

/// A program: named weight tensors plus straight-line functions.
///
/// Entry functions receive the globals as trailing parameters, in
/// declaration order; the module itself never mutates them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Module {
    pub globals: Vec<Global>,
    pub functions: Vec<FunctionBody>,
}

impl Module {
    pub fn function(&self, name: &str) -> Option<&FunctionBody> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn function_index(&self, name: &str) -> Option<usize> {
        self.functions.iter().position(|f| f.name == name)
    }

    pub fn global(&self, name: &str) -> Option<&Global> {
        self.globals.iter().find(|g| g.name == name)
    }

    /// Locate an op by id: (function index, op index).
    pub fn find_op(&self, id: OpId) -> Option<(usize, usize)> {
        self.functions
            .iter()
            .enumerate()
            .find_map(|(fi, f)| f.op_index(id).map(|oi| (fi, oi)))
    }

    pub fn op(&self, id: OpId) -> Option<&Operation> {
        self.find_op(id).map(|(fi, oi)| &self.functions[fi].ops[oi])
    }

    pub fn ops(&self) -> impl Iterator<Item = &Operation> {
        self.functions.iter().flat_map(|f| f.ops.iter())
    }

    pub fn op_count(&self) -> usize {
        self.functions.iter().map(|f| f.ops.len()).sum()
    }

    pub fn contains_op(&self, id: OpId) -> bool {
        self.find_op(id).is_some()
    }
}
