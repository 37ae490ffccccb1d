//! Named parameter vectors with box bounds.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Ordered vector of uncertain physical parameters with per-component box
/// bounds. The order is fixed at construction and is the order used by every
/// optimizer, objective and report in the workspace.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamVec {
    names: Vec<String>,
    values: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParamError {
    /// A bound pair is inverted or a value escapes its box.
    BadBounds { name: String },
    /// Non-finite value or bound.
    NonFinite { name: String },
    /// Value slice length does not match the vector dimension.
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamError::BadBounds { name } => write!(f, "parameter {name}: bounds violated"),
            ParamError::NonFinite { name } => write!(f, "parameter {name}: non-finite"),
            ParamError::DimensionMismatch { expected, got } => {
                write!(f, "expected {expected} parameter values, got {got}")
            }
        }
    }
}

impl core::error::Error for ParamError {}

impl ParamVec {
    /// Builds a vector from `(name, value, lo, hi)` entries.
    pub fn new(entries: &[(&str, f64, f64, f64)]) -> Result<Self, ParamError> {
        let mut p = ParamVec {
            names: Vec::with_capacity(entries.len()),
            values: Vec::with_capacity(entries.len()),
            lo: Vec::with_capacity(entries.len()),
            hi: Vec::with_capacity(entries.len()),
        };
        for &(name, v, lo, hi) in entries {
            if !(v.is_finite() && lo.is_finite() && hi.is_finite()) {
                return Err(ParamError::NonFinite { name: name.to_string() });
            }
            if !(lo < hi && v >= lo && v <= hi) {
                return Err(ParamError::BadBounds { name: name.to_string() });
            }
            p.names.push(name.to_string());
            p.values.push(v);
            p.lo.push(lo);
            p.hi.push(hi);
        }
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(|s| s.as_str())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    /// Per-component `(lo, hi)` pairs in vector order.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.lo.iter().zip(&self.hi).map(|(&l, &h)| (l, h)).collect()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    /// Same names and bounds, new values. Values are checked against bounds.
    pub fn with_values(&self, values: &[f64]) -> Result<Self, ParamError> {
        if values.len() != self.values.len() {
            return Err(ParamError::DimensionMismatch {
                expected: self.values.len(),
                got: values.len(),
            });
        }
        let mut out = self.clone();
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(ParamError::NonFinite { name: self.names[i].clone() });
            }
            if v < self.lo[i] || v > self.hi[i] {
                return Err(ParamError::BadBounds { name: self.names[i].clone() });
            }
            out.values[i] = v;
        }
        Ok(out)
    }
}
