use serde::{Deserialize, Serialize};

use crate::ir::{Attr, Attributes, ElementKind, OpId, Opcode, Operation, TensorType, ValueId};

/// One step of a resize. A `Pad` step materializes as two ops: a scalar
/// constant 1 and the pad itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ResizeStep {
    Reshape { shape: Vec<usize> },
    Slice { start: Vec<usize>, limit: Vec<usize> },
    Pad { low: Vec<usize>, high: Vec<usize> },
}

impl ResizeStep {
    pub fn op_count(&self) -> usize {
        match self {
            ResizeStep::Pad { .. } => 2,
            _ => 1,
        }
    }
}

/// Conversion of a value of type `src` into one of type `dst`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResizeRecipe {
    pub src: TensorType,
    pub dst: TensorType,
    pub steps: Vec<ResizeStep>,
}

impl ResizeRecipe {
    pub fn identity(ty: &TensorType) -> Self {
        ResizeRecipe { src: ty.clone(), dst: ty.clone(), steps: vec![] }
    }

    pub fn is_identity(&self) -> bool {
        self.steps.is_empty()
    }

    /// Number of ops (and fresh ids) the recipe inserts.
    pub fn op_count(&self) -> usize {
        self.steps.iter().map(ResizeStep::op_count).sum()
    }

    /// Emit the recipe's ops applied to `input`, using `ids` for the new ops
    /// and naming each result `%r{id}`. Returns the ops and the final value.
    ///
    /// Panics if `ids.len() != self.op_count()`.
    pub fn materialize(&self, input: &ValueId, ids: &[OpId]) -> (Vec<Operation>, ValueId) {
        assert_eq!(ids.len(), self.op_count(), "resize recipe needs {} ids", self.op_count());
        let element = self.src.element;
        let mut ops = Vec::new();
        let mut cur = input.clone();
        let mut cur_shape = self.src.shape.clone();
        let mut ids = ids.iter().copied();
        let mut emit = |opcode, operands: Vec<ValueId>, attrs: Attributes, ty: TensorType, ops: &mut Vec<Operation>| {
            let id = ids.next().unwrap();
            let result = fresh_value(id);
            ops.push(Operation { id, opcode, operands, attrs, result: result.clone(), result_type: ty });
            result
        };
        for step in &self.steps {
            cur = match step {
                ResizeStep::Reshape { shape } => {
                    cur_shape = shape.clone();
                    emit(Opcode::Reshape, vec![cur], Attributes::new(), TensorType::new(shape.clone(), element), &mut ops)
                }
                ResizeStep::Slice { start, limit } => {
                    cur_shape = start.iter().zip(limit).map(|(s, l)| l - s).collect();
                    let attrs = [("start", Attr::ints(start.clone())), ("limit", Attr::ints(limit.clone()))];
                    emit(
                        Opcode::Slice,
                        vec![cur],
                        attrs.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
                        TensorType::new(cur_shape.clone(), element),
                        &mut ops,
                    )
                }
                ResizeStep::Pad { low, high } => {
                    let one = match element {
                        ElementKind::F32 => Attr::Float(1.0),
                        _ => Attr::Int(1),
                    };
                    let one = emit(
                        Opcode::Constant,
                        vec![],
                        [("value".to_string(), one)].into_iter().collect(),
                        TensorType::scalar(element),
                        &mut ops,
                    );
                    cur_shape = cur_shape.iter().zip(low.iter().zip(high)).map(|(e, (l, h))| e + l + h).collect();
                    let attrs = [("low", Attr::ints(low.clone())), ("high", Attr::ints(high.clone()))];
                    emit(
                        Opcode::Pad,
                        vec![cur, one],
                        attrs.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
                        TensorType::new(cur_shape.clone(), element),
                        &mut ops,
                    )
                }
            };
        }
        (ops, cur)
    }
}

/// Name given to the result of a recipe op.
pub fn fresh_value(id: OpId) -> ValueId {
    ValueId::new(format!("r{}", id.0))
}

/// Build the recipe converting `src` into `dst`.
///
/// Ranks are aligned at the trailing end: a rank increase first reshapes by
/// prepending size-1 dimensions, a rank decrease slices the surplus leading
/// dimensions down to 1 and collapses them with a final reshape. In between,
/// oversized dimensions are sliced to a centered window and undersized ones
/// are padded with 1 on both sides; odd differences put the extra element on
/// the high side.
///
/// The element kinds of `src` and `dst` are expected to agree; `dst`'s is
/// ignored.
pub fn synthesize_resize(src: &TensorType, dst: &TensorType) -> ResizeRecipe {
    let mut steps = Vec::new();
    let mut cur = src.shape.clone();
    if dst.rank() > src.rank() {
        let mut shape = vec![1; dst.rank() - src.rank()];
        shape.extend(&cur);
        cur = shape;
        steps.push(ResizeStep::Reshape { shape: cur.clone() });
    }
    let target: Vec<usize> = if dst.rank() < src.rank() {
        let mut t = vec![1; src.rank() - dst.rank()];
        t.extend(&dst.shape);
        t
    } else {
        dst.shape.clone()
    };

    if cur.iter().zip(&target).any(|(c, t)| c > t) {
        let start: Vec<usize> = cur.iter().zip(&target).map(|(&c, &t)| if c > t { (c - t) / 2 } else { 0 }).collect();
        let limit: Vec<usize> = start.iter().zip(cur.iter().zip(&target)).map(|(s, (&c, &t))| s + c.min(t)).collect();
        cur = cur.iter().zip(&target).map(|(&c, &t)| c.min(t)).collect();
        steps.push(ResizeStep::Slice { start, limit });
    }
    if cur.iter().zip(&target).any(|(c, t)| c < t) {
        let low: Vec<usize> = cur.iter().zip(&target).map(|(&c, &t)| (t - c) / 2).collect();
        let high: Vec<usize> = low.iter().zip(cur.iter().zip(&target)).map(|(l, (&c, &t))| t - c - l).collect();
        steps.push(ResizeStep::Pad { low, high });
    }
    if dst.rank() < src.rank() {
        steps.push(ResizeStep::Reshape { shape: dst.shape.clone() });
    }
    ResizeRecipe { src: src.clone(), dst: TensorType::new(dst.shape.clone(), src.element), steps }
}
