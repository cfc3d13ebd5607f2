use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::types::TensorType;

/// Stable identity of an operation. Assigned at parse time and carried
/// through every transformation; copies get fresh ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OpId(pub u32);

impl fmt::Display for OpId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Name of one SSA value (without the leading `%`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValueId(pub String);

impl ValueId {
    pub fn new(name: impl Into<String>) -> Self {
        ValueId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ValueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "%{}", self.0)
    }
}

impl From<&str> for ValueId {
    fn from(s: &str) -> Self {
        ValueId(s.trim_start_matches('%').to_string())
    }
}

macro_rules! opcodes {
    ($($variant:ident => $name:literal, $arity:expr;)*) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum Opcode {
            $($variant,)*
        }

        impl Opcode {
            pub const ALL: &'static [Opcode] = &[$(Opcode::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(Opcode::$variant => $name,)*
                }
            }

            pub fn from_name(s: &str) -> Option<Opcode> {
                match s {
                    $($name => Some(Opcode::$variant),)*
                    _ => None,
                }
            }

            /// Number of operands the opcode takes.
            pub fn arity(self) -> usize {
                match self {
                    $(Opcode::$variant => $arity,)*
                }
            }
        }
    };
}

opcodes! {
    Constant => "constant", 0;
    Add => "add", 2;
    Subtract => "subtract", 2;
    Multiply => "multiply", 2;
    Divide => "divide", 2;
    Maximum => "maximum", 2;
    Negate => "negate", 1;
    Exponential => "exponential", 1;
    Log => "log", 1;
    Dot => "dot", 2;
    Transpose => "transpose", 1;
    Reshape => "reshape", 1;
    BroadcastInDim => "broadcast_in_dim", 1;
    Reduce => "reduce", 1;
    Pad => "pad", 2;
    Slice => "slice", 1;
    Compare => "compare", 2;
    Select => "select", 3;
    Iota => "iota", 0;
    Convert => "convert", 1;
}

impl Opcode {
    pub fn is_elementwise_binary(self) -> bool {
        matches!(
            self,
            Opcode::Add | Opcode::Subtract | Opcode::Multiply | Opcode::Divide | Opcode::Maximum
        )
    }

    pub fn is_elementwise_unary(self) -> bool {
        matches!(self, Opcode::Negate | Opcode::Exponential | Opcode::Log)
    }

    /// Attribute names the opcode requires, in canonical order.
    pub fn attribute_names(self) -> &'static [&'static str] {
        match self {
            Opcode::Constant => &["value"],
            Opcode::Transpose => &["perm"],
            Opcode::BroadcastInDim => &["dims"],
            Opcode::Reduce => &["axis", "kind"],
            Opcode::Pad => &["high", "low"],
            Opcode::Slice => &["limit", "start"],
            Opcode::Compare => &["kind"],
            Opcode::Iota => &["dim"],
            _ => &[],
        }
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReduceKind {
    Sum,
    Max,
}

impl ReduceKind {
    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "sum" => Some(ReduceKind::Sum),
            "max" => Some(ReduceKind::Max),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompareKind {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareKind {
    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "eq" => Some(CompareKind::Eq),
            "ne" => Some(CompareKind::Ne),
            "lt" => Some(CompareKind::Lt),
            "le" => Some(CompareKind::Le),
            "gt" => Some(CompareKind::Gt),
            "ge" => Some(CompareKind::Ge),
            _ => None,
        }
    }
}

/// Attribute literal. Floats compare by bit pattern so that NaN constants
/// still give structural equality.
#[derive(Clone, Debug)]
pub enum Attr {
    Int(i64),
    Float(f64),
    Ints(Vec<i64>),
    Dense(Vec<f64>),
    Ident(String),
}

impl PartialEq for Attr {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Attr::Int(a), Attr::Int(b)) => a == b,
            (Attr::Float(a), Attr::Float(b)) => a.to_bits() == b.to_bits(),
            (Attr::Ints(a), Attr::Ints(b)) => a == b,
            (Attr::Dense(a), Attr::Dense(b)) => bits_eq(a, b),
            (Attr::Ident(a), Attr::Ident(b)) => a == b,
            _ => false,
        }
    }
}

pub(crate) fn bits_eq(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

impl Attr {
    pub fn ints<I: IntoIterator<Item = usize>>(values: I) -> Self {
        Attr::Ints(values.into_iter().map(|v| v as i64).collect())
    }

    pub fn ident(s: &str) -> Self {
        Attr::Ident(s.to_string())
    }
}

pub type Attributes = BTreeMap<String, Attr>;

#[derive(Clone, Debug, PartialEq)]
pub struct Operation {
    pub id: OpId,
    pub opcode: Opcode,
    pub operands: Vec<ValueId>,
    pub attrs: Attributes,
    pub result: ValueId,
    pub result_type: TensorType,
}

impl Operation {
    pub fn attr(&self, name: &str) -> Option<&Attr> {
        self.attrs.get(name)
    }

    pub fn attr_int(&self, name: &str) -> Option<i64> {
        match self.attrs.get(name) {
            Some(Attr::Int(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn attr_ints(&self, name: &str) -> Option<&[i64]> {
        match self.attrs.get(name) {
            Some(Attr::Ints(v)) => Some(v),
            _ => None,
        }
    }

    /// Non-negative integer sequence attribute converted to extents/indices.
    pub fn attr_usizes(&self, name: &str) -> Option<Vec<usize>> {
        let v = self.attr_ints(name)?;
        v.iter().map(|&x| usize::try_from(x).ok()).collect()
    }

    pub fn attr_ident(&self, name: &str) -> Option<&str> {
        match self.attrs.get(name) {
            Some(Attr::Ident(s)) => Some(s),
            _ => None,
        }
    }

    pub fn reduce_kind(&self) -> Option<ReduceKind> {
        self.attr_ident("kind").and_then(ReduceKind::from_name)
    }

    pub fn compare_kind(&self) -> Option<CompareKind> {
        self.attr_ident("kind").and_then(CompareKind::from_name)
    }

    pub fn uses(&self, value: &ValueId) -> bool {
        self.operands.iter().any(|o| o == value)
    }
}
