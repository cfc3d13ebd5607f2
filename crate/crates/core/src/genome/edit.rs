use serde::{Deserialize, Serialize};

use super::resize::ResizeRecipe;
use crate::ir::{OpId, ValueId};

/// A value, optionally passed through a resize, together with the op ids
/// the resize ops receive.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Binding {
    pub value: ValueId,
    pub recipe: ResizeRecipe,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ids: Vec<OpId>,
}

/// A single use of a value: an operand slot or a return slot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "at", rename_all = "snake_case")]
pub enum UseSite {
    Operand { op: OpId, index: usize },
    Return { function: String, index: usize },
}

/// Point a use site at a (possibly resized) value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rebind {
    pub site: UseSite,
    pub binding: Binding,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Edit {
    /// Insert a copy of `source` into `function` right before the op
    /// `before` (at the end of the body when absent). The copy gets op id
    /// `id` and result `%k{id}`; `consumer` optionally redirects one later
    /// use to it.
    Copy {
        source: OpId,
        function: String,
        before: Option<OpId>,
        id: OpId,
        operands: Vec<Binding>,
        consumer: Option<Rebind>,
    },
    /// Remove `target`, rebinding each of its uses as listed.
    Delete { target: OpId, repairs: Vec<Rebind> },
}

impl Edit {
    /// Every op id this edit introduces.
    pub fn fresh_ids(&self) -> Vec<OpId> {
        let mut out = Vec::new();
        match self {
            Edit::Copy { id, operands, consumer, .. } => {
                out.push(*id);
                for b in operands {
                    out.extend(&b.ids);
                }
                if let Some(c) = consumer {
                    out.extend(&c.binding.ids);
                }
            }
            Edit::Delete { repairs, .. } => {
                for r in repairs {
                    out.extend(&r.binding.ids);
                }
            }
        }
        out
    }
}

/// An individual's genome: edits applied in order to the original module.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Patch {
    pub edits: Vec<Edit>,
}

impl Patch {
    pub fn new(edits: Vec<Edit>) -> Self {
        Patch { edits }
    }

    pub fn len(&self) -> usize {
        self.edits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }

    pub fn with(&self, edit: Edit) -> Patch {
        let mut edits = self.edits.clone();
        edits.push(edit);
        Patch { edits }
    }
}

/// Name of the result of the copy with op id `id`.
pub fn copy_value(id: OpId) -> ValueId {
    ValueId::new(format!("k{}", id.0))
}
