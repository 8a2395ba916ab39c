//! Finite-dimensional elements: plain vectors and functions sampled on a
//! uniform grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite real vector with dimension >= 1. Every entry is finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty("vector"));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("vector entry"));
        }
        Ok(Vector(entries))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Vector::new(vec![0.0; dim])
    }

    pub fn ones(dim: usize) -> Result<Self> {
        Vector::new(vec![1.0; dim])
    }

    /// Standard basis vector `e_k` (zero-based index).
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::param(
                "basis index",
                format!("index {k} out of range for dimension {dim}"),
            ));
        }
        let mut entries = vec![0.0; dim];
        entries[k] = 1.0;
        Vector::new(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().copied()
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Result<Vector> {
        if !c.is_finite() {
            return Err(Error::NonFinite("scale factor"));
        }
        Vector::new(self.iter().map(|v| c * v).collect())
    }

    fn zip_with(&self, other: &Vector, f: impl Fn(f64, f64) -> f64) -> Result<Vector> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Vector::new(
            self.iter()
                .zip(other.iter())
                .map(|(a, b)| f(a, b))
                .collect(),
        )
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(entries: Vec<f64>) -> Result<Self> {
        Vector::new(entries)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Vec<f64> {
        v.0
    }
}

/// Function sampled at `n >= 2` equispaced nodes of `[a, b]`, endpoints
/// included. Node `i` sits at `a + i * spacing()`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    a: f64,
    b: f64,
    values: Vector,
}

impl GridFunction {
    pub fn new(a: f64, b: f64, values: Vector) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::NonFinite("grid endpoint"));
        }
        if a >= b {
            return Err(Error::param(
                "grid interval",
                format!("need a < b, got [{a}, {b}]"),
            ));
        }
        if values.dim() < 2 {
            return Err(Error::param(
                "grid nodes",
                format!("need at least 2 nodes, got {}", values.dim()),
            ));
        }
        Ok(GridFunction { a, b, values })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.values.dim()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / (self.len() - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.a + i as f64 * self.spacing()
    }

    pub fn values(&self) -> &Vector {
        &self.values
    }

    /// Same grid geometry, different sample values.
    pub fn with_values(&self, values: Vector) -> Result<GridFunction> {
        if values.dim() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: values.dim(),
            });
        }
        GridFunction::new(self.a, self.b, values)
    }
}

/// Either kind of element a norm or solver can act on.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Element {
    Vector(Vector),
    Grid(GridFunction),
}

impl Element {
    /// The sample values regardless of geometry.
    pub fn values(&self) -> &Vector {
        match self {
            Element::Vector(v) => v,
            Element::Grid(g) => g.values(),
        }
    }

    pub fn dim(&self) -> usize {
        self.values().dim()
    }

    pub fn as_grid(&self) -> Option<&GridFunction> {
        match self {
            Element::Grid(g) => Some(g),
            Element::Vector(_) => None,
        }
    }

    /// Same shape, new sample values.
    pub fn with_values(&self, values: Vector) -> Result<Element> {
        match self {
            Element::Vector(_) => Ok(Element::Vector(values)),
            Element::Grid(g) => Ok(Element::Grid(g.with_values(values)?)),
        }
    }
}

impl From<Vector> for Element {
    fn from(v: Vector) -> Element {
        Element::Vector(v)
    }
}

impl From<GridFunction> for Element {
    fn from(g: GridFunction) -> Element {
        Element::Grid(g)
    }
}
