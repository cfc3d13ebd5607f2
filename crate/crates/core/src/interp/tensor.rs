use crate::ir::{ElementKind, TensorType};
use crate::scalar::Scalar;

use super::InterpError;

/// Flat row-major storage; the variant always matches the element kind.
#[derive(Clone, Debug, PartialEq)]
pub enum Buffer<T> {
    Float(Vec<T>),
    Int(Vec<i32>),
    Bool(Vec<bool>),
}

impl<T: Scalar> Buffer<T> {
    pub fn len(&self) -> usize {
        match self {
            Buffer::Float(v) => v.len(),
            Buffer::Int(v) => v.len(),
            Buffer::Bool(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> ElementKind {
        match self {
            Buffer::Float(_) => ElementKind::F32,
            Buffer::Int(_) => ElementKind::I32,
            Buffer::Bool(_) => ElementKind::I1,
        }
    }

    pub(crate) fn gather(&self, idx: &[usize]) -> Buffer<T> {
        match self {
            Buffer::Float(v) => Buffer::Float(idx.iter().map(|&i| v[i]).collect()),
            Buffer::Int(v) => Buffer::Int(idx.iter().map(|&i| v[i]).collect()),
            Buffer::Bool(v) => Buffer::Bool(idx.iter().map(|&i| v[i]).collect()),
        }
    }

    fn get_f64(&self, i: usize) -> f64 {
        match self {
            Buffer::Float(v) => v[i].to_f64_lossy(),
            Buffer::Int(v) => v[i] as f64,
            Buffer::Bool(v) => f64::from(u8::from(v[i])),
        }
    }
}

/// A runtime tensor: its static type plus data in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorValue<T> {
    ty: TensorType,
    data: Buffer<T>,
}

impl<T: Scalar> TensorValue<T> {
    pub fn new(ty: TensorType, data: Buffer<T>) -> Result<Self, InterpError> {
        if data.kind() != ty.element {
            return Err(InterpError::BadData(format!("{:?} buffer for {ty}", data.kind())));
        }
        if data.len() != ty.num_elements() {
            return Err(InterpError::BadData(format!("{} values for {ty}", data.len())));
        }
        Ok(TensorValue { ty, data })
    }

    pub fn floats(shape: impl Into<Vec<usize>>, data: Vec<T>) -> Result<Self, InterpError> {
        Self::new(TensorType::f32(shape), Buffer::Float(data))
    }

    pub fn ints(shape: impl Into<Vec<usize>>, data: Vec<i32>) -> Result<Self, InterpError> {
        Self::new(TensorType::new(shape, ElementKind::I32), Buffer::Int(data))
    }

    pub fn bools(shape: impl Into<Vec<usize>>, data: Vec<bool>) -> Result<Self, InterpError> {
        Self::new(TensorType::new(shape, ElementKind::I1), Buffer::Bool(data))
    }

    /// Build from `f64` values, converting to the element kind of `ty`
    /// (ints truncate toward zero, booleans test for non-zero).
    pub fn from_f64(ty: TensorType, values: &[f64]) -> Result<Self, InterpError> {
        let data = match ty.element {
            ElementKind::F32 => Buffer::Float(values.iter().map(|&v| T::from_f64_lossy(v)).collect()),
            ElementKind::I32 => Buffer::Int(values.iter().map(|&v| v as i32).collect()),
            ElementKind::I1 => Buffer::Bool(values.iter().map(|&v| v != 0.0).collect()),
        };
        Self::new(ty, data)
    }

    pub fn splat(ty: TensorType, value: f64) -> Self {
        let n = ty.num_elements();
        Self::from_f64(ty, &vec![value; n]).expect("splat length matches")
    }

    pub(crate) fn from_parts(ty: TensorType, data: Buffer<T>) -> Self {
        debug_assert_eq!(data.len(), ty.num_elements());
        debug_assert_eq!(data.kind(), ty.element);
        TensorValue { ty, data }
    }

    pub fn ty(&self) -> &TensorType {
        &self.ty
    }

    pub fn shape(&self) -> &[usize] {
        &self.ty.shape
    }

    pub fn data(&self) -> &Buffer<T> {
        &self.data
    }

    pub fn into_data(self) -> Buffer<T> {
        self.data
    }

    pub fn as_floats(&self) -> Option<&[T]> {
        match &self.data {
            Buffer::Float(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_floats_mut(&mut self) -> Option<&mut [T]> {
        match &mut self.data {
            Buffer::Float(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_ints(&self) -> Option<&[i32]> {
        match &self.data {
            Buffer::Int(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_bools(&self) -> Option<&[bool]> {
        match &self.data {
            Buffer::Bool(v) => Some(v),
            _ => None,
        }
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        (0..self.data.len()).map(|i| self.data.get_f64(i)).collect()
    }

    /// Same type with the data reshaped (element count must match).
    pub(crate) fn retype(self, ty: TensorType) -> Self {
        Self::from_parts(ty, self.data)
    }

    pub fn all_finite(&self) -> bool {
        match &self.data {
            Buffer::Float(v) => v.iter().all(|x| x.is_finite()),
            _ => true,
        }
    }

    /// Exact equality including NaN payload positions.
    pub fn bit_eq(&self, other: &Self) -> bool {
        if self.ty != other.ty {
            return false;
        }
        match (&self.data, &other.data) {
            (Buffer::Float(a), Buffer::Float(b)) => a
                .iter()
                .zip(b)
                .all(|(x, y)| x.to_f64_lossy().to_bits() == y.to_f64_lossy().to_bits()),
            (a, b) => a == b,
        }
    }

    /// Convert float storage to another precision.
    pub fn cast<U: Scalar>(&self) -> TensorValue<U> {
        let data = match &self.data {
            Buffer::Float(v) => Buffer::Float(v.iter().map(|x| U::from_f64_lossy(x.to_f64_lossy())).collect()),
            Buffer::Int(v) => Buffer::Int(v.clone()),
            Buffer::Bool(v) => Buffer::Bool(v.clone()),
        };
        TensorValue { ty: self.ty.clone(), data }
    }
}

pub(crate) fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

/// Offsets `base + Σ coord[d] * step[d]` for every coordinate of `shape`,
/// in row-major order.
pub(crate) fn strided_offsets(shape: &[usize], step: &[usize], base: usize) -> Vec<usize> {
    let total: usize = shape.iter().product();
    let mut out = Vec::with_capacity(total);
    if shape.is_empty() {
        out.push(base);
        return out;
    }
    let rank = shape.len();
    let mut coord = vec![0usize; rank];
    let mut offset = base;
    let inner = shape[rank - 1];
    let inner_step = step[rank - 1];
    for _ in 0..total / inner {
        let mut o = offset;
        for _ in 0..inner {
            out.push(o);
            o += inner_step;
        }
        // advance the odometer over the outer dimensions
        let mut d = rank - 1;
        while d > 0 {
            d -= 1;
            coord[d] += 1;
            offset += step[d];
            if coord[d] < shape[d] {
                break;
            }
            offset -= step[d] * shape[d];
            coord[d] = 0;
        }
    }
    out
}
