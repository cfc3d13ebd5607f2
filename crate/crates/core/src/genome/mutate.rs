use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::apply::{apply_edit, EditOutcome};
use super::edit::{copy_value, Binding, Edit, Rebind, UseSite};
use super::resize::{synthesize_resize, ResizeRecipe};
use crate::ir::{FunctionBody, Module, OpId, TensorType, ValueId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MutationConfig {
    /// Functions whose ops may be copied or deleted, and that may receive
    /// copies. Empty means every function.
    pub scope: Vec<String>,
    pub copy_probability: f64,
    pub retry_budget: usize,
}

impl Default for MutationConfig {
    fn default() -> Self {
        MutationConfig { scope: vec![], copy_probability: 0.5, retry_budget: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MutationError {
    #[error("no valid mutation found in {0} attempts")]
    Exhausted(usize),
    #[error("no function in scope has any operations")]
    Empty,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("no in-scope value of element kind {} for {site:?}", needed.element.suffix())]
pub struct RepairError {
    pub site: UseSite,
    pub needed: TensorType,
}

/// Draws op ids in `[2^24, u32::MAX)` that are unused in a module and not
/// handed out before.
pub struct FreshIds {
    taken: HashSet<u32>,
}

impl FreshIds {
    pub fn for_module(m: &Module) -> Self {
        FreshIds { taken: m.ops().map(|op| op.id.0).collect() }
    }

    pub fn next<R: Rng + ?Sized>(&mut self, rng: &mut R) -> OpId {
        loop {
            let id = rng.gen_range(1u32 << 24..u32::MAX);
            if self.taken.insert(id) {
                return OpId(id);
            }
        }
    }

    pub fn many<R: Rng + ?Sized>(&mut self, n: usize, rng: &mut R) -> Vec<OpId> {
        (0..n).map(|_| self.next(rng)).collect()
    }
}

/// Pick a replacement among `candidates` for a use needing type `needed`:
/// uniformly among exact-type values if any, otherwise uniformly among
/// values of the same element kind, adding a resize.
pub fn choose_binding<R: Rng + ?Sized>(
    candidates: &[(ValueId, TensorType)],
    needed: &TensorType,
    fresh: &mut FreshIds,
    rng: &mut R,
) -> Option<Binding> {
    let exact: Vec<_> = candidates.iter().filter(|(_, t)| t == needed).collect();
    let pool = if exact.is_empty() {
        candidates.iter().filter(|(_, t)| t.element == needed.element).collect()
    } else {
        exact
    };
    let (value, ty) = pool.choose(rng)?;
    let recipe = if ty == needed { ResizeRecipe::identity(ty) } else { synthesize_resize(ty, needed) };
    let ids = fresh.many(recipe.op_count(), rng);
    Some(Binding { value: value.clone(), recipe, ids })
}

fn use_sites(f: &FunctionBody, value: &ValueId) -> Vec<(UseSite, usize)> {
    let mut sites = Vec::new();
    for (pos, op) in f.ops.iter().enumerate() {
        for (index, v) in op.operands.iter().enumerate() {
            if v == value {
                sites.push((UseSite::Operand { op: op.id, index }, pos));
            }
        }
    }
    for (index, v) in f.returns.iter().enumerate() {
        if v == value {
            sites.push((UseSite::Return { function: f.name.clone(), index }, f.ops.len()));
        }
    }
    sites
}

/// Rebind every use of `broken` in `f` to another in-scope value, as needed
/// when its producer is deleted.
pub fn repair_uses<R: Rng + ?Sized>(
    f: &FunctionBody,
    broken: &ValueId,
    fresh: &mut FreshIds,
    rng: &mut R,
) -> Result<Vec<Rebind>, RepairError> {
    let needed = f.type_of(broken).cloned().expect("broken value is defined");
    use_sites(f, broken)
        .into_iter()
        .map(|(site, pos)| {
            let candidates: Vec<_> = f.values_in_scope(pos).into_iter().filter(|(v, _)| v != broken).collect();
            match choose_binding(&candidates, &needed, fresh, rng) {
                Some(binding) => Ok(Rebind { site, binding }),
                None => Err(RepairError { site, needed: needed.clone() }),
            }
        })
        .collect()
}

fn in_scope<'a>(m: &'a Module, cfg: &MutationConfig) -> Vec<&'a FunctionBody> {
    m.functions.iter().filter(|f| cfg.scope.is_empty() || cfg.scope.contains(&f.name)).collect()
}

/// Propose a random delete, or `None` when its uses cannot be repaired.
pub fn propose_delete<R: Rng + ?Sized>(m: &Module, cfg: &MutationConfig, rng: &mut R) -> Option<Edit> {
    let targets: Vec<(&FunctionBody, usize)> =
        in_scope(m, cfg).into_iter().flat_map(|f| (0..f.ops.len()).map(move |i| (f, i))).collect();
    let &(f, oi) = targets.choose(rng)?;
    let target = &f.ops[oi];
    let mut fresh = FreshIds::for_module(m);
    let repairs = repair_uses(f, &target.result, &mut fresh, rng).ok()?;
    Some(Edit::Delete { target: target.id, repairs })
}

/// Propose a random copy, or `None` when some operand has no candidate.
pub fn propose_copy<R: Rng + ?Sized>(m: &Module, cfg: &MutationConfig, rng: &mut R) -> Option<Edit> {
    let functions = in_scope(m, cfg);
    let sources: Vec<(&FunctionBody, usize)> =
        functions.iter().flat_map(|f| (0..f.ops.len()).map(move |i| (*f, i))).collect();
    let &(sf, si) = sources.choose(rng)?;
    let source = &sf.ops[si];
    let f = *functions.choose(rng)?;
    let position = rng.gen_range(0..=f.ops.len());
    let before = f.ops.get(position).map(|op| op.id);

    let mut fresh = FreshIds::for_module(m);
    let id = fresh.next(rng);
    let scope = f.values_in_scope(position);
    let mut operands = Vec::new();
    for v in &source.operands {
        let needed = sf.type_of(v).expect("operand is defined").clone();
        let original = scope.iter().find(|(s, t)| s == v && *t == needed);
        let binding = match original {
            Some((value, ty)) => Binding { value: value.clone(), recipe: ResizeRecipe::identity(ty), ids: vec![] },
            None => choose_binding(&scope, &needed, &mut fresh, rng)?,
        };
        operands.push(binding);
    }

    // a later use that can read the copy's result
    let produced = &source.result_type;
    let mut sites: Vec<(UseSite, TensorType)> = Vec::new();
    for op in &f.ops[position..] {
        for (index, v) in op.operands.iter().enumerate() {
            sites.push((UseSite::Operand { op: op.id, index }, f.type_of(v).unwrap().clone()));
        }
    }
    for (index, ty) in f.return_types.iter().enumerate() {
        sites.push((UseSite::Return { function: f.name.clone(), index }, ty.clone()));
    }
    let exact: Vec<_> = sites.iter().filter(|(_, t)| t == produced).collect();
    let pool: Vec<_> = if exact.is_empty() {
        sites.iter().filter(|(_, t)| t.element == produced.element).collect()
    } else {
        exact
    };
    let consumer = pool.choose(rng).map(|(site, ty)| {
        let recipe = if ty == produced { ResizeRecipe::identity(ty) } else { synthesize_resize(produced, ty) };
        let ids = fresh.many(recipe.op_count(), rng);
        Rebind { site: site.clone(), binding: Binding { value: copy_value(id), recipe, ids } }
    });

    Some(Edit::Copy { source: source.id, function: f.name.clone(), before, id, operands, consumer })
}

/// Draw random copy/delete edits against `m` until one applies, verifies and
/// passes `valid`, returning it with the mutated module.
pub fn mutate<R: Rng + ?Sized>(
    m: &Module,
    cfg: &MutationConfig,
    rng: &mut R,
    valid: &dyn Fn(&Module) -> bool,
) -> Result<(Edit, Module), MutationError> {
    if in_scope(m, cfg).iter().all(|f| f.ops.is_empty()) {
        return Err(MutationError::Empty);
    }
    for _ in 0..cfg.retry_budget {
        let proposal =
            if rng.gen_bool(cfg.copy_probability) { propose_copy(m, cfg, rng) } else { propose_delete(m, cfg, rng) };
        let Some(edit) = proposal else { continue };
        if let Ok(EditOutcome::Applied(out)) = apply_edit(m, &edit) {
            if valid(&out) {
                return Ok((edit, out));
            }
        }
    }
    Err(MutationError::Exhausted(cfg.retry_budget))
}
