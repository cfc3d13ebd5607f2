use std::collections::HashMap;

use crate::ir::{Attr, CompareKind, ElementKind, Opcode, Operation, ReduceKind, TensorType, ValueId};
use crate::scalar::Scalar;

use super::tensor::{strided_offsets, strides, Buffer, TensorValue};
use super::InterpError;

pub type Env<T> = HashMap<ValueId, TensorValue<T>>;

/// Evaluate one op, looking its operands up in `env`.
pub fn eval_op<T: Scalar>(op: &Operation, env: &Env<T>) -> Result<TensorValue<T>, InterpError> {
    let operands = op
        .operands
        .iter()
        .map(|v| env.get(v).ok_or_else(|| InterpError::MissingValue(v.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    apply(op, &operands)
}

fn bad(op: &Operation, what: &str) -> InterpError {
    InterpError::BadData(format!("{} ({}): {what}", op.opcode, op.id))
}

fn floats<'a, T: Scalar>(op: &Operation, t: &'a TensorValue<T>) -> Result<&'a [T], InterpError> {
    t.as_floats().ok_or_else(|| bad(op, "expected f32 operand"))
}

/// Evaluate one op on already-resolved operands. Operand types are assumed
/// to satisfy the verifier; violations produce `BadData` rather than panics.
pub fn apply<T: Scalar>(op: &Operation, args: &[&TensorValue<T>]) -> Result<TensorValue<T>, InterpError> {
    if args.len() != op.opcode.arity() {
        return Err(bad(op, "wrong operand count"));
    }
    let rt = op.result_type.clone();
    let out = match op.opcode {
        Opcode::Constant => match op.attr("value") {
            Some(Attr::Float(v)) => TensorValue::splat(rt, *v),
            Some(Attr::Int(v)) => TensorValue::splat(rt, *v as f64),
            Some(Attr::Dense(v)) => TensorValue::from_f64(rt, v)?,
            _ => return Err(bad(op, "missing value")),
        },
        Opcode::Add | Opcode::Subtract | Opcode::Multiply | Opcode::Divide | Opcode::Maximum => {
            binary(op, args[0], args[1])?
        }
        Opcode::Negate => match args[0].data() {
            Buffer::Float(a) => TensorValue::from_parts(rt, Buffer::Float(a.iter().map(|&x| -x).collect())),
            Buffer::Int(a) => TensorValue::from_parts(rt, Buffer::Int(a.iter().map(|x| x.wrapping_neg()).collect())),
            Buffer::Bool(_) => return Err(bad(op, "negate of i1")),
        },
        Opcode::Exponential => {
            TensorValue::from_parts(rt, Buffer::Float(floats(op, args[0])?.iter().map(|x| x.exp()).collect()))
        }
        Opcode::Log => TensorValue::from_parts(rt, Buffer::Float(floats(op, args[0])?.iter().map(|x| x.ln()).collect())),
        Opcode::Dot => dot(op, args[0], args[1])?,
        Opcode::Transpose => {
            let perm = op.attr_usizes("perm").ok_or_else(|| bad(op, "perm"))?;
            let st = strides(args[0].shape());
            let step: Vec<usize> = perm.iter().map(|&p| st[p]).collect();
            let idx = strided_offsets(&rt.shape, &step, 0);
            TensorValue::from_parts(rt, args[0].data().gather(&idx))
        }
        Opcode::Reshape => {
            if args[0].ty().num_elements() != rt.num_elements() {
                return Err(bad(op, "element count"));
            }
            args[0].clone().retype(rt)
        }
        Opcode::BroadcastInDim => {
            let dims = op.attr_usizes("dims").ok_or_else(|| bad(op, "dims"))?;
            let src = args[0].shape();
            let st = strides(src);
            let mut step = vec![0usize; rt.rank()];
            for (i, &d) in dims.iter().enumerate() {
                if src[i] != 1 {
                    step[d] = st[i];
                }
            }
            let idx = strided_offsets(&rt.shape, &step, 0);
            TensorValue::from_parts(rt, args[0].data().gather(&idx))
        }
        Opcode::Reduce => reduce(op, args[0])?,
        Opcode::Pad => pad(op, args[0], args[1])?,
        Opcode::Slice => {
            let start = op.attr_usizes("start").ok_or_else(|| bad(op, "start"))?;
            let st = strides(args[0].shape());
            let base = start.iter().zip(&st).map(|(s, k)| s * k).sum();
            let idx = strided_offsets(&rt.shape, &st, base);
            TensorValue::from_parts(rt, args[0].data().gather(&idx))
        }
        Opcode::Compare => compare(op, args[0], args[1])?,
        Opcode::Select => {
            let pred = args[0].as_bools().ok_or_else(|| bad(op, "predicate"))?;
            let pick = |i: usize| if pred[i] { 0 } else { 1 };
            let data = match (args[1].data(), args[2].data()) {
                (Buffer::Float(t), Buffer::Float(f)) => {
                    Buffer::Float((0..pred.len()).map(|i| [t[i], f[i]][pick(i)]).collect())
                }
                (Buffer::Int(t), Buffer::Int(f)) => Buffer::Int((0..pred.len()).map(|i| [t[i], f[i]][pick(i)]).collect()),
                (Buffer::Bool(t), Buffer::Bool(f)) => {
                    Buffer::Bool((0..pred.len()).map(|i| [t[i], f[i]][pick(i)]).collect())
                }
                _ => return Err(bad(op, "branch kinds differ")),
            };
            TensorValue::from_parts(rt, data)
        }
        Opcode::Iota => {
            let dim = op.attr_int("dim").and_then(|d| usize::try_from(d).ok()).ok_or_else(|| bad(op, "dim"))?;
            if dim >= rt.rank() {
                return Err(bad(op, "dim out of range"));
            }
            let st = strides(&rt.shape);
            let vals: Vec<f64> = (0..rt.num_elements()).map(|i| ((i / st[dim]) % rt.shape[dim]) as f64).collect();
            TensorValue::from_f64(rt, &vals)?
        }
        Opcode::Convert => convert(args[0], rt),
    };
    if out.ty() != &op.result_type {
        return Err(bad(op, "result type"));
    }
    Ok(out)
}

fn nan_max<T: Scalar>(a: T, b: T) -> T {
    if a.is_nan() || b.is_nan() {
        T::nan()
    } else if a >= b {
        a
    } else {
        b
    }
}

fn binary<T: Scalar>(op: &Operation, a: &TensorValue<T>, b: &TensorValue<T>) -> Result<TensorValue<T>, InterpError> {
    let rt = op.result_type.clone();
    let data = match (a.data(), b.data()) {
        (Buffer::Float(x), Buffer::Float(y)) => {
            let f: fn(T, T) -> T = match op.opcode {
                Opcode::Add => |p, q| p + q,
                Opcode::Subtract => |p, q| p - q,
                Opcode::Multiply => |p, q| p * q,
                Opcode::Divide => |p, q| p / q,
                _ => nan_max,
            };
            Buffer::Float(x.iter().zip(y).map(|(&p, &q)| f(p, q)).collect())
        }
        (Buffer::Int(x), Buffer::Int(y)) => {
            let f: fn(i32, i32) -> i32 = match op.opcode {
                Opcode::Add => i32::wrapping_add,
                Opcode::Subtract => i32::wrapping_sub,
                Opcode::Multiply => i32::wrapping_mul,
                Opcode::Divide => |p, q| if q == 0 { 0 } else { p.wrapping_div(q) },
                _ => |p: i32, q: i32| p.max(q),
            };
            Buffer::Int(x.iter().zip(y).map(|(&p, &q)| f(p, q)).collect())
        }
        _ => return Err(bad(op, "operand kinds")),
    };
    if data.len() != rt.num_elements() {
        return Err(bad(op, "operand shapes"));
    }
    Ok(TensorValue::from_parts(rt, data))
}

fn dot<T: Scalar>(op: &Operation, a: &TensorValue<T>, b: &TensorValue<T>) -> Result<TensorValue<T>, InterpError> {
    let (sa, sb) = (a.shape(), b.shape());
    if sa.len() != 2 || sb.len() != 2 || sa[1] != sb[0] {
        return Err(bad(op, "dot shapes"));
    }
    let (m, k, n) = (sa[0], sa[1], sb[1]);
    let rt = op.result_type.clone();
    let data = match (a.data(), b.data()) {
        (Buffer::Float(x), Buffer::Float(y)) => {
            let mut out = vec![T::zero(); m * n];
            for i in 0..m {
                let row = &mut out[i * n..(i + 1) * n];
                for kk in 0..k {
                    let s = x[i * k + kk];
                    for (o, &w) in row.iter_mut().zip(&y[kk * n..(kk + 1) * n]) {
                        *o += s * w;
                    }
                }
            }
            Buffer::Float(out)
        }
        (Buffer::Int(x), Buffer::Int(y)) => {
            let mut out = vec![0i32; m * n];
            for i in 0..m {
                for kk in 0..k {
                    let s = x[i * k + kk];
                    for j in 0..n {
                        out[i * n + j] = out[i * n + j].wrapping_add(s.wrapping_mul(y[kk * n + j]));
                    }
                }
            }
            Buffer::Int(out)
        }
        _ => return Err(bad(op, "operand kinds")),
    };
    Ok(TensorValue::from_parts(rt, data))
}

fn reduce<T: Scalar>(op: &Operation, a: &TensorValue<T>) -> Result<TensorValue<T>, InterpError> {
    let axis = op.attr_int("axis").and_then(|d| usize::try_from(d).ok()).ok_or_else(|| bad(op, "axis"))?;
    let kind = op.reduce_kind().ok_or_else(|| bad(op, "kind"))?;
    let shape = a.shape();
    if axis >= shape.len() {
        return Err(bad(op, "axis out of range"));
    }
    let outer: usize = shape[..axis].iter().product();
    let len = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let rt = op.result_type.clone();
    let data = match a.data() {
        Buffer::Float(x) => {
            let init = match kind {
                ReduceKind::Sum => T::zero(),
                ReduceKind::Max => T::neg_infinity(),
            };
            let mut out = vec![init; outer * inner];
            for o in 0..outer {
                for kk in 0..len {
                    let src = &x[(o * len + kk) * inner..(o * len + kk + 1) * inner];
                    let dst = &mut out[o * inner..(o + 1) * inner];
                    for (d, &s) in dst.iter_mut().zip(src) {
                        *d = match kind {
                            ReduceKind::Sum => *d + s,
                            ReduceKind::Max => nan_max(*d, s),
                        };
                    }
                }
            }
            Buffer::Float(out)
        }
        Buffer::Int(x) => {
            let init = match kind {
                ReduceKind::Sum => 0,
                ReduceKind::Max => i32::MIN,
            };
            let mut out = vec![init; outer * inner];
            for o in 0..outer {
                for kk in 0..len {
                    for i in 0..inner {
                        let s = x[(o * len + kk) * inner + i];
                        let d = &mut out[o * inner + i];
                        *d = match kind {
                            ReduceKind::Sum => d.wrapping_add(s),
                            ReduceKind::Max => (*d).max(s),
                        };
                    }
                }
            }
            Buffer::Int(out)
        }
        Buffer::Bool(_) => return Err(bad(op, "reduce of i1")),
    };
    Ok(TensorValue::from_parts(rt, data))
}

fn pad<T: Scalar>(op: &Operation, a: &TensorValue<T>, v: &TensorValue<T>) -> Result<TensorValue<T>, InterpError> {
    let low = op.attr_usizes("low").ok_or_else(|| bad(op, "low"))?;
    let rt = op.result_type.clone();
    let out_strides = strides(&rt.shape);
    let base = low.iter().zip(&out_strides).map(|(l, s)| l * s).sum();
    let dst = strided_offsets(a.shape(), &out_strides, base);
    let n = rt.num_elements();
    let data = match (a.data(), v.data()) {
        (Buffer::Float(x), Buffer::Float(p)) => {
            let mut out = vec![p[0]; n];
            for (&d, &s) in dst.iter().zip(x) {
                out[d] = s;
            }
            Buffer::Float(out)
        }
        (Buffer::Int(x), Buffer::Int(p)) => {
            let mut out = vec![p[0]; n];
            for (&d, &s) in dst.iter().zip(x) {
                out[d] = s;
            }
            Buffer::Int(out)
        }
        (Buffer::Bool(x), Buffer::Bool(p)) => {
            let mut out = vec![p[0]; n];
            for (&d, &s) in dst.iter().zip(x) {
                out[d] = s;
            }
            Buffer::Bool(out)
        }
        _ => return Err(bad(op, "pad value kind")),
    };
    Ok(TensorValue::from_parts(rt, data))
}

fn cmp<P: PartialOrd>(kind: CompareKind, a: P, b: P) -> bool {
    match kind {
        CompareKind::Eq => a == b,
        CompareKind::Ne => a != b,
        CompareKind::Lt => a < b,
        CompareKind::Le => a <= b,
        CompareKind::Gt => a > b,
        CompareKind::Ge => a >= b,
    }
}

fn compare<T: Scalar>(op: &Operation, a: &TensorValue<T>, b: &TensorValue<T>) -> Result<TensorValue<T>, InterpError> {
    let kind = op.compare_kind().ok_or_else(|| bad(op, "kind"))?;
    let data: Vec<bool> = match (a.data(), b.data()) {
        (Buffer::Float(x), Buffer::Float(y)) => x.iter().zip(y).map(|(&p, &q)| cmp(kind, p, q)).collect(),
        (Buffer::Int(x), Buffer::Int(y)) => x.iter().zip(y).map(|(&p, &q)| cmp(kind, p, q)).collect(),
        (Buffer::Bool(x), Buffer::Bool(y)) => x.iter().zip(y).map(|(&p, &q)| cmp(kind, p, q)).collect(),
        _ => return Err(bad(op, "operand kinds")),
    };
    Ok(TensorValue::from_parts(op.result_type.clone(), Buffer::Bool(data)))
}

fn convert<T: Scalar>(a: &TensorValue<T>, rt: TensorType) -> TensorValue<T> {
    let data = match (a.data(), rt.element) {
        (Buffer::Float(x), ElementKind::F32) => Buffer::Float(x.clone()),
        (Buffer::Float(x), ElementKind::I32) => Buffer::Int(x.iter().map(|v| v.to_f64_lossy() as i32).collect()),
        (Buffer::Float(x), ElementKind::I1) => Buffer::Bool(x.iter().map(|v| !v.is_zero()).collect()),
        (Buffer::Int(x), ElementKind::F32) => Buffer::Float(x.iter().map(|&v| T::from_f64_lossy(v as f64)).collect()),
        (Buffer::Int(x), ElementKind::I32) => Buffer::Int(x.clone()),
        (Buffer::Int(x), ElementKind::I1) => Buffer::Bool(x.iter().map(|&v| v != 0).collect()),
        (Buffer::Bool(x), ElementKind::F32) => {
            Buffer::Float(x.iter().map(|&v| if v { T::one() } else { T::zero() }).collect())
        }
        (Buffer::Bool(x), ElementKind::I32) => Buffer::Int(x.iter().map(|&v| i32::from(v)).collect()),
        (Buffer::Bool(x), ElementKind::I1) => Buffer::Bool(x.clone()),
    };
    TensorValue::from_parts(rt, data)
}
