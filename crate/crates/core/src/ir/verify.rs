use std::collections::{HashMap, HashSet};
use std::fmt;

use super::module::{FunctionBody, Initializer, Module};
use super::op::{Attr, Opcode, OpId, Operation, ValueId};
use super::types::{ElementKind, TensorType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    UndefinedValue,
    UseBeforeDefinition,
    DuplicateDefinition,
    DuplicateOpId,
    DuplicateFunction,
    DuplicateGlobal,
    OperandCount,
    Attribute,
    ShapeMismatch,
    ElementMismatch,
    ZeroExtent,
    ReturnMismatch,
    Initializer,
}

impl Rule {
    pub fn describe(self) -> &'static str {
        match self {
            Rule::UndefinedValue => "use of undefined value",
            Rule::UseBeforeDefinition => "use before definition",
            Rule::DuplicateDefinition => "duplicate definition",
            Rule::DuplicateOpId => "duplicate op id",
            Rule::DuplicateFunction => "duplicate function",
            Rule::DuplicateGlobal => "duplicate global",
            Rule::OperandCount => "operand count",
            Rule::Attribute => "bad attribute",
            Rule::ShapeMismatch => "shape mismatch",
            Rule::ElementMismatch => "element kind mismatch",
            Rule::ZeroExtent => "zero-extent tensor",
            Rule::ReturnMismatch => "return mismatch",
            Rule::Initializer => "bad initializer",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub function: Option<String>,
    pub op: Option<OpId>,
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.rule.describe())?;
        if let Some(func) = &self.function {
            write!(f, " in @{func}")?;
        }
        if let Some(op) = self.op {
            write!(f, " at op {op}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_rule(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Check SSA, dominance, op signatures and shape rules in one forward pass
/// per function.
pub fn verify_module(m: &Module) -> VerifyReport {
    let mut out = Vec::new();

    let mut names = HashSet::new();
    for g in &m.globals {
        if !names.insert(g.name.as_str()) {
            out.push(violation(None, None, Rule::DuplicateGlobal, format!("@{}", g.name)));
        }
        if g.ty.has_zero_extent() {
            out.push(violation(None, None, Rule::ZeroExtent, format!("global @{}", g.name)));
        }
        match &g.init {
            Initializer::Dense(v) if v.len() != g.ty.num_elements() => out.push(violation(
                None,
                None,
                Rule::Initializer,
                format!("@{} has {} values for {}", g.name, v.len(), g.ty),
            )),
            Initializer::Uniform { low, high, .. } if !(low <= high) => out.push(violation(
                None,
                None,
                Rule::Initializer,
                format!("@{} has empty uniform range", g.name),
            )),
            _ => {}
        }
    }

    let mut fnames = HashSet::new();
    let mut op_ids = HashSet::new();
    for f in &m.functions {
        if !fnames.insert(f.name.as_str()) {
            out.push(violation(None, None, Rule::DuplicateFunction, format!("@{}", f.name)));
        }
        for op in &f.ops {
            if !op_ids.insert(op.id) {
                out.push(violation(Some(&f.name), Some(op.id), Rule::DuplicateOpId, format!("{}", op.id)));
            }
        }
        verify_function(f, &mut out);
    }
    VerifyReport { violations: out }
}

fn violation(function: Option<&str>, op: Option<OpId>, rule: Rule, detail: String) -> Violation {
    Violation { function: function.map(str::to_string), op, rule, detail }
}

fn verify_function(f: &FunctionBody, out: &mut Vec<Violation>) {
    let fname = Some(f.name.as_str());
    // every name the function defines anywhere, to tell "undefined" from "later"
    let all_defs: HashSet<&ValueId> =
        f.params.iter().map(|p| &p.value).chain(f.ops.iter().map(|o| &o.result)).collect();
    let mut scope: HashMap<&ValueId, &TensorType> = HashMap::new();

    for p in &f.params {
        if p.ty.has_zero_extent() {
            out.push(violation(fname, None, Rule::ZeroExtent, format!("parameter {}", p.value)));
        }
        if scope.insert(&p.value, &p.ty).is_some() {
            out.push(violation(fname, None, Rule::DuplicateDefinition, format!("{}", p.value)));
        }
    }

    for op in &f.ops {
        let mut operand_types = Vec::with_capacity(op.operands.len());
        let mut resolved = true;
        for v in &op.operands {
            match scope.get(v) {
                Some(t) => operand_types.push((*t).clone()),
                None => {
                    resolved = false;
                    let rule = if all_defs.contains(v) { Rule::UseBeforeDefinition } else { Rule::UndefinedValue };
                    out.push(violation(fname, Some(op.id), rule, format!("{v}")));
                }
            }
        }
        if op.result_type.has_zero_extent() {
            out.push(violation(fname, Some(op.id), Rule::ZeroExtent, format!("{}", op.result_type)));
        } else if op.operands.len() != op.opcode.arity() {
            out.push(violation(
                fname,
                Some(op.id),
                Rule::OperandCount,
                format!("{} takes {} operands, got {}", op.opcode, op.opcode.arity(), op.operands.len()),
            ));
        } else if resolved {
            if let Err((rule, detail)) = check_signature(op, &operand_types) {
                out.push(violation(fname, Some(op.id), rule, format!("{}: {detail}", op.opcode)));
            }
        }
        if scope.insert(&op.result, &op.result_type).is_some() {
            out.push(violation(fname, Some(op.id), Rule::DuplicateDefinition, format!("{}", op.result)));
        }
    }

    if f.returns.len() != f.return_types.len() {
        out.push(violation(
            fname,
            None,
            Rule::ReturnMismatch,
            format!("returns {} values, signature declares {}", f.returns.len(), f.return_types.len()),
        ));
    }
    for (i, v) in f.returns.iter().enumerate() {
        match scope.get(v) {
            None => out.push(violation(fname, None, Rule::UndefinedValue, format!("returned {v}"))),
            Some(t) => {
                if let Some(decl) = f.return_types.get(i) {
                    if *t != decl {
                        out.push(violation(
                            fname,
                            None,
                            Rule::ReturnMismatch,
                            format!("result {i} is {t}, signature declares {decl}"),
                        ));
                    }
                }
            }
        }
    }
}

type Check = Result<(), (Rule, String)>;

fn shape_err(msg: impl Into<String>) -> Check {
    Err((Rule::ShapeMismatch, msg.into()))
}

fn elem_err(msg: impl Into<String>) -> Check {
    Err((Rule::ElementMismatch, msg.into()))
}

fn attr_err(msg: impl Into<String>) -> Check {
    Err((Rule::Attribute, msg.into()))
}

fn expect_result(op: &Operation, expected: &TensorType) -> Check {
    if &op.result_type == expected {
        Ok(())
    } else if op.result_type.element != expected.element {
        elem_err(format!("result is {}, expected {}", op.result_type, expected))
    } else {
        shape_err(format!("result is {}, expected {}", op.result_type, expected))
    }
}

fn usizes(op: &Operation, name: &str) -> Result<Vec<usize>, (Rule, String)> {
    op.attr_usizes(name)
        .ok_or_else(|| (Rule::Attribute, format!("`{name}` must be a list of non-negative integers")))
}

fn index_attr(op: &Operation, name: &str) -> Result<usize, (Rule, String)> {
    op.attr_int(name)
        .and_then(|v| usize::try_from(v).ok())
        .ok_or_else(|| (Rule::Attribute, format!("`{name}` must be a non-negative integer")))
}

/// Shape and attribute rules for one op given its operand types.
pub fn check_signature(op: &Operation, operands: &[TensorType]) -> Result<(), (Rule, String)> {
    let expected: &[&str] = op.opcode.attribute_names();
    let have: Vec<&str> = op.attrs.keys().map(String::as_str).collect();
    if have != expected {
        return attr_err(format!("expected attributes {expected:?}, got {have:?}"));
    }
    let res = &op.result_type;

    match op.opcode {
        Opcode::Constant => match op.attr("value") {
            Some(Attr::Int(_)) | Some(Attr::Float(_)) => Ok(()),
            Some(Attr::Dense(v)) if v.len() == res.num_elements() => Ok(()),
            Some(Attr::Dense(v)) => attr_err(format!("{} values for {}", v.len(), res)),
            _ => attr_err("`value` must be a number or dense<[...]>"),
        },
        op_code if op_code.is_elementwise_binary() => {
            let (a, b) = (&operands[0], &operands[1]);
            if a.element != b.element {
                return elem_err(format!("{a} vs {b}"));
            }
            if a.shape != b.shape {
                return shape_err(format!("{a} vs {b}"));
            }
            if !a.element.is_numeric() {
                return elem_err("arithmetic on i1");
            }
            expect_result(op, a)
        }
        Opcode::Negate | Opcode::Exponential | Opcode::Log => {
            let a = &operands[0];
            let ok = match op.opcode {
                Opcode::Negate => a.element.is_numeric(),
                _ => a.element == ElementKind::F32,
            };
            if !ok {
                return elem_err(format!("unsupported operand {a}"));
            }
            expect_result(op, a)
        }
        Opcode::Dot => {
            let (a, b) = (&operands[0], &operands[1]);
            if a.element != b.element || !a.element.is_numeric() {
                return elem_err(format!("{a} · {b}"));
            }
            if a.rank() != 2 || b.rank() != 2 || a.shape[1] != b.shape[0] {
                return shape_err(format!("{a} · {b}"));
            }
            expect_result(op, &a.with_shape(vec![a.shape[0], b.shape[1]]))
        }
        Opcode::Transpose => {
            let a = &operands[0];
            let perm = usizes(op, "perm")?;
            let mut seen = perm.clone();
            seen.sort_unstable();
            if seen != (0..a.rank()).collect::<Vec<_>>() {
                return attr_err(format!("perm {perm:?} is not a permutation of rank {}", a.rank()));
            }
            expect_result(op, &a.with_shape(perm.iter().map(|&p| a.shape[p]).collect()))
        }
        Opcode::Reshape => {
            let a = &operands[0];
            if a.element != res.element {
                return elem_err(format!("{a} -> {res}"));
            }
            if a.num_elements() != res.num_elements() {
                return shape_err(format!("{a} -> {res} changes element count"));
            }
            Ok(())
        }
        Opcode::BroadcastInDim => {
            let a = &operands[0];
            let dims = usizes(op, "dims")?;
            if a.element != res.element {
                return elem_err(format!("{a} -> {res}"));
            }
            if dims.len() != a.rank() {
                return attr_err(format!("dims {dims:?} for operand rank {}", a.rank()));
            }
            if dims.windows(2).any(|w| w[0] >= w[1]) || dims.iter().any(|&d| d >= res.rank()) {
                return attr_err(format!("dims {dims:?} must be increasing and below rank {}", res.rank()));
            }
            for (i, &d) in dims.iter().enumerate() {
                if a.shape[i] != 1 && a.shape[i] != res.shape[d] {
                    return shape_err(format!("operand dim {i} ({}) vs result dim {d} ({})", a.shape[i], res.shape[d]));
                }
            }
            Ok(())
        }
        Opcode::Reduce => {
            let a = &operands[0];
            let axis = index_attr(op, "axis")?;
            if op.reduce_kind().is_none() {
                return attr_err("`kind` must be sum or max");
            }
            if !a.element.is_numeric() {
                return elem_err(format!("reduce over {a}"));
            }
            if axis >= a.rank() {
                return attr_err(format!("axis {axis} out of range for {a}"));
            }
            let mut shape = a.shape.clone();
            shape.remove(axis);
            expect_result(op, &a.with_shape(shape))
        }
        Opcode::Pad => {
            let (a, v) = (&operands[0], &operands[1]);
            let (low, high) = (usizes(op, "low")?, usizes(op, "high")?);
            if v.rank() != 0 || v.element != a.element {
                return elem_err(format!("pad value {v} for {a}"));
            }
            if low.len() != a.rank() || high.len() != a.rank() {
                return attr_err(format!("padding lists must have length {}", a.rank()));
            }
            let shape = a.shape.iter().zip(low.iter().zip(&high)).map(|(e, (l, h))| l + e + h).collect();
            expect_result(op, &a.with_shape(shape))
        }
        Opcode::Slice => {
            let a = &operands[0];
            let (start, limit) = (usizes(op, "start")?, usizes(op, "limit")?);
            if start.len() != a.rank() || limit.len() != a.rank() {
                return attr_err(format!("start/limit must have length {}", a.rank()));
            }
            for d in 0..a.rank() {
                if start[d] >= limit[d] || limit[d] > a.shape[d] {
                    return attr_err(format!("window [{}, {}) invalid for extent {}", start[d], limit[d], a.shape[d]));
                }
            }
            let shape = start.iter().zip(&limit).map(|(s, l)| l - s).collect();
            expect_result(op, &a.with_shape(shape))
        }
        Opcode::Compare => {
            let (a, b) = (&operands[0], &operands[1]);
            if op.compare_kind().is_none() {
                return attr_err("`kind` must be one of eq, ne, lt, le, gt, ge");
            }
            if a.element != b.element {
                return elem_err(format!("{a} vs {b}"));
            }
            if a.shape != b.shape {
                return shape_err(format!("{a} vs {b}"));
            }
            expect_result(op, &a.with_element(ElementKind::I1))
        }
        Opcode::Select => {
            let (p, t, f) = (&operands[0], &operands[1], &operands[2]);
            if p.element != ElementKind::I1 {
                return elem_err(format!("predicate {p}"));
            }
            if t.element != f.element {
                return elem_err(format!("{t} vs {f}"));
            }
            if p.shape != t.shape || t.shape != f.shape {
                return shape_err(format!("{p}, {t}, {f}"));
            }
            expect_result(op, t)
        }
        Opcode::Iota => {
            let dim = index_attr(op, "dim")?;
            if dim >= res.rank() {
                return attr_err(format!("dim {dim} out of range for {res}"));
            }
            if !res.element.is_numeric() {
                return elem_err(format!("iota of {res}"));
            }
            Ok(())
        }
        Opcode::Convert => {
            let a = &operands[0];
            if a.shape != res.shape {
                return shape_err(format!("{a} -> {res}"));
            }
            Ok(())
        }
        _ => unreachable!("all opcodes handled"),
    }
}
