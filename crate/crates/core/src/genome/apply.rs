use std::collections::HashSet;

use thiserror::Error;

use super::edit::{copy_value, Binding, Edit, Patch, Rebind, UseSite};
use crate::ir::{verify_module, FunctionBody, Module, OpId, Operation, ValueId, VerifyReport};

/// Why an edit left the module unchanged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SkipReason {
    MissingOp(OpId),
    MissingFunction(String),
    MissingValue(ValueId),
    StaleUse,
    IdCollision(OpId),
}

/// Why an edit could not be applied at all.
#[derive(Clone, Debug, PartialEq, Error)]
pub enum ApplyError {
    #[error("edit {index}: {message}")]
    Malformed { index: usize, message: String },
    #[error("edit {index}: deleting {target} leaves uses of {value} unrepaired")]
    Orphaned { index: usize, target: OpId, value: ValueId },
    #[error("edit {index}: result does not verify: {report}")]
    Invalid { index: usize, report: VerifyReport },
}

impl ApplyError {
    pub fn index(&self) -> usize {
        match self {
            ApplyError::Malformed { index, .. } | ApplyError::Orphaned { index, .. } | ApplyError::Invalid { index, .. } => {
                *index
            }
        }
    }

    fn at(self, i: usize) -> Self {
        match self {
            ApplyError::Malformed { message, .. } => ApplyError::Malformed { index: i, message },
            ApplyError::Orphaned { target, value, .. } => ApplyError::Orphaned { index: i, target, value },
            ApplyError::Invalid { report, .. } => ApplyError::Invalid { index: i, report },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EditOutcome {
    Applied(Module),
    Skipped(SkipReason),
}

/// The module produced by a patch together with the indices of the edits
/// that were skipped.
#[derive(Clone, Debug, PartialEq)]
pub struct Applied {
    pub module: Module,
    pub skipped: Vec<usize>,
}

/// Apply every edit of `patch` in order to `original`.
pub fn apply_patch(original: &Module, patch: &Patch) -> Result<Applied, ApplyError> {
    let mut module = original.clone();
    let mut skipped = Vec::new();
    for (i, edit) in patch.edits.iter().enumerate() {
        match apply_edit(&module, edit).map_err(|e| e.at(i))? {
            EditOutcome::Applied(m) => module = m,
            EditOutcome::Skipped(_) => skipped.push(i),
        }
    }
    Ok(Applied { module, skipped })
}

type Step<T> = Result<T, Halt>;

enum Halt {
    Skip(SkipReason),
    Fail(ApplyError),
}

fn malformed(message: impl Into<String>) -> Halt {
    Halt::Fail(ApplyError::Malformed { index: 0, message: message.into() })
}

/// Apply one edit to `m`. The result is verified; an edit whose references
/// no longer resolve is skipped rather than failed.
pub fn apply_edit(m: &Module, edit: &Edit) -> Result<EditOutcome, ApplyError> {
    let result = check_fresh(m, edit).and_then(|_| match edit {
        Edit::Copy { source, function, before, id, operands, consumer } => {
            apply_copy(m, *source, function, *before, *id, operands, consumer.as_ref())
        }
        Edit::Delete { target, repairs } => apply_delete(m, *target, repairs),
    });
    match result {
        Ok(out) => {
            let report = verify_module(&out);
            if report.is_ok() {
                Ok(EditOutcome::Applied(out))
            } else {
                Err(ApplyError::Invalid { index: 0, report })
            }
        }
        Err(Halt::Skip(r)) => Ok(EditOutcome::Skipped(r)),
        Err(Halt::Fail(e)) => Err(e),
    }
}

fn check_fresh(m: &Module, edit: &Edit) -> Step<()> {
    let mut seen = HashSet::new();
    for id in edit.fresh_ids() {
        if m.contains_op(id) || !seen.insert(id) {
            return Err(Halt::Skip(SkipReason::IdCollision(id)));
        }
    }
    Ok(())
}

fn function_mut<'a>(m: &'a mut Module, name: &str) -> Step<&'a mut FunctionBody> {
    m.functions
        .iter_mut()
        .find(|f| f.name == name)
        .ok_or_else(|| Halt::Skip(SkipReason::MissingFunction(name.to_string())))
}

/// Ops for `binding`, checked to be usable at `position` of `f`.
fn bind(f: &FunctionBody, binding: &Binding, position: usize) -> Step<(Vec<Operation>, ValueId)> {
    let Some(def) = f.definition_point(&binding.value) else {
        return Err(Halt::Skip(SkipReason::MissingValue(binding.value.clone())));
    };
    if def > position {
        return Err(Halt::Skip(SkipReason::StaleUse));
    }
    let ty = f.type_of(&binding.value).unwrap();
    if *ty != binding.recipe.src {
        return Err(malformed(format!("{} has type {ty}, recipe expects {}", binding.value, binding.recipe.src)));
    }
    if binding.ids.len() != binding.recipe.op_count() {
        return Err(malformed(format!("recipe for {} needs {} ids", binding.value, binding.recipe.op_count())));
    }
    for id in &binding.ids {
        let name = super::resize::fresh_value(*id);
        if f.defines(&name) {
            return Err(Halt::Skip(SkipReason::MissingValue(name)));
        }
    }
    Ok(binding.recipe.materialize(&binding.value, &binding.ids))
}

/// Redirect the use at `site` to `binding`, inserting its recipe ops right
/// before the use. `expected` is the value the site must currently read,
/// if any.
fn rebind(f: &mut FunctionBody, rebind: &Rebind, expected: Option<&ValueId>) -> Step<()> {
    let (position, current) = match &rebind.site {
        UseSite::Operand { op, index } => {
            let pos = f.op_index(*op).ok_or(Halt::Skip(SkipReason::MissingOp(*op)))?;
            let current = f.ops[pos].operands.get(*index).ok_or_else(|| malformed(format!("{op} has no operand {index}")))?;
            (pos, current.clone())
        }
        UseSite::Return { function, index } => {
            if *function != f.name {
                return Err(malformed(format!("return site in @{function} used from @{}", f.name)));
            }
            let current = f.returns.get(*index).ok_or_else(|| malformed(format!("@{function} has no return {index}")))?;
            (f.ops.len(), current.clone())
        }
    };
    if expected.is_some_and(|e| *e != current) {
        return Err(Halt::Skip(SkipReason::StaleUse));
    }
    let (ops, value) = bind(f, &rebind.binding, position)?;
    let n = ops.len();
    f.ops.splice(position..position, ops);
    match &rebind.site {
        UseSite::Operand { index, .. } => f.ops[position + n].operands[*index] = value,
        UseSite::Return { index, .. } => f.returns[*index] = value,
    }
    Ok(())
}

fn apply_copy(
    m: &Module,
    source: OpId,
    function: &str,
    before: Option<OpId>,
    id: OpId,
    operands: &[Binding],
    consumer: Option<&Rebind>,
) -> Step<Module> {
    let src = m.op(source).ok_or(Halt::Skip(SkipReason::MissingOp(source)))?.clone();
    if operands.len() != src.operands.len() {
        return Err(malformed(format!("copy of {source} binds {} of {} operands", operands.len(), src.operands.len())));
    }
    let mut out = m.clone();
    let f = function_mut(&mut out, function)?;
    let position = match before {
        Some(anchor) => f.op_index(anchor).ok_or(Halt::Skip(SkipReason::MissingOp(anchor)))?,
        None => f.ops.len(),
    };
    let result = copy_value(id);
    if f.defines(&result) {
        return Err(Halt::Skip(SkipReason::MissingValue(result)));
    }
    let mut inserted = Vec::new();
    let mut values = Vec::new();
    for b in operands {
        let (ops, v) = bind(f, b, position)?;
        inserted.extend(ops);
        values.push(v);
    }
    inserted.push(Operation { id, operands: values, result: result.clone(), ..src });
    f.ops.splice(position..position, inserted);
    if let Some(c) = consumer {
        if c.binding.value != result {
            return Err(malformed(format!("consumer of copy {id} must read {result}")));
        }
        if let UseSite::Operand { op, .. } = &c.site {
            let copy_at = f.op_index(id).unwrap();
            match f.op_index(*op) {
                Some(p) if p > copy_at => {}
                Some(_) => return Err(Halt::Skip(SkipReason::StaleUse)),
                None => return Err(Halt::Skip(SkipReason::MissingOp(*op))),
            }
        }
        rebind(f, c, None)?;
    }
    Ok(out)
}

fn apply_delete(m: &Module, target: OpId, repairs: &[Rebind]) -> Step<Module> {
    let (fi, oi) = m.find_op(target).ok_or(Halt::Skip(SkipReason::MissingOp(target)))?;
    let mut out = m.clone();
    let f = &mut out.functions[fi];
    let removed = f.ops.remove(oi);
    for r in repairs {
        if r.binding.value == removed.result {
            return Err(malformed(format!("repair of {target} reuses its own result")));
        }
        rebind(f, r, Some(&removed.result))?;
    }
    if f.ops.iter().any(|op| op.uses(&removed.result)) || f.returns.contains(&removed.result) {
        return Err(Halt::Fail(ApplyError::Orphaned { index: 0, target, value: removed.result }));
    }
    Ok(out)
}
