use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    F32,
    I32,
    I1,
}

impl ElementKind {
    pub fn suffix(self) -> &'static str {
        match self {
            ElementKind::F32 => "f32",
            ElementKind::I32 => "i32",
            ElementKind::I1 => "i1",
        }
    }

    pub fn from_suffix(s: &str) -> Option<Self> {
        match s {
            "f32" => Some(ElementKind::F32),
            "i32" => Some(ElementKind::I32),
            "i1" => Some(ElementKind::I1),
            _ => None,
        }
    }

    /// Kinds that support arithmetic (everything except booleans).
    pub fn is_numeric(self) -> bool {
        !matches!(self, ElementKind::I1)
    }
}

/// Static type of a tensor value. Tensors with different extents are
/// different types even when the element kind agrees.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TensorType {
    pub shape: Vec<usize>,
    pub element: ElementKind,
}

impl TensorType {
    pub fn new(shape: impl Into<Vec<usize>>, element: ElementKind) -> Self {
        TensorType { shape: shape.into(), element }
    }

    pub fn f32(shape: impl Into<Vec<usize>>) -> Self {
        Self::new(shape, ElementKind::F32)
    }

    pub fn scalar(element: ElementKind) -> Self {
        Self::new(Vec::new(), element)
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn num_elements(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn has_zero_extent(&self) -> bool {
        self.shape.contains(&0)
    }

    pub fn with_shape(&self, shape: Vec<usize>) -> Self {
        TensorType { shape, element: self.element }
    }

    pub fn with_element(&self, element: ElementKind) -> Self {
        TensorType { shape: self.shape.clone(), element }
    }
}

impl fmt::Display for TensorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("tensor<")?;
        for d in &self.shape {
            write!(f, "{d}x")?;
        }
        write!(f, "{}>", self.element.suffix())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid tensor type `{text}`: {reason}")]
pub struct TypeParseError {
    pub text: String,
    pub reason: String,
}

impl FromStr for TensorType {
    type Err = TypeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| TypeParseError { text: s.to_string(), reason: reason.to_string() };
        let inner = s
            .trim()
            .strip_prefix("tensor<")
            .and_then(|r| r.strip_suffix('>'))
            .ok_or_else(|| err("expected tensor<...>"))?;
        let mut parts: Vec<&str> = inner.split('x').collect();
        let elem = parts.pop().ok_or_else(|| err("missing element kind"))?;
        let element = ElementKind::from_suffix(elem).ok_or_else(|| err("unknown element kind"))?;
        let mut shape = Vec::with_capacity(parts.len());
        for p in parts {
            let d: usize = p.parse().map_err(|_| err("bad dimension"))?;
            if d == 0 {
                return Err(err("zero-extent dimension"));
            }
            shape.push(d);
        }
        Ok(TensorType { shape, element })
    }
}

impl TryFrom<String> for TensorType {
    type Error = TypeParseError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<TensorType> for String {
    fn from(t: TensorType) -> Self {
        t.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_parse() {
        let t = TensorType::f32(vec![2, 3]);
        assert_eq!(t.to_string(), "tensor<2x3xf32>");
        assert_eq!("tensor<2x3xf32>".parse::<TensorType>().unwrap(), t);
        let s = TensorType::scalar(ElementKind::I1);
        assert_eq!(s.to_string(), "tensor<i1>");
        assert_eq!(s.num_elements(), 1);
        assert_eq!("tensor<i1>".parse::<TensorType>().unwrap(), s);
    }

    #[test]
    fn rejects_zero_extent() {
        assert!("tensor<0x3xf32>".parse::<TensorType>().is_err());
        assert!("tensor<3xf64>".parse::<TensorType>().is_err());
    }

    #[test]
    fn sizes_are_distinct_types() {
        assert_ne!(TensorType::f32(vec![32]), TensorType::f32(vec![32, 1]));
    }
}
