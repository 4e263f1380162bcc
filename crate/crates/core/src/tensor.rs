//! Dense real third-order tensors and observation masks.
//!
//! Storage is slice-major: the frontal slice index `k` is outermost and each
//! `n1 x n2` frontal slice is stored column-major, so entry `(i, j, k)` lives
//! at `i + n1 * (j + n2 * k)`. The on-disk formats depend on this order.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Dimensions `(n1, n2, n3)` of a third-order tensor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Shape {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
}

impl Shape {
    pub fn new(n1: usize, n2: usize, n3: usize) -> Self {
        Shape { n1, n2, n3 }
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2 * self.n3
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn slice_len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn min_side(&self) -> usize {
        self.n1.min(self.n2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 == 0 || self.n2 == 0 || self.n3 == 0 {
            return Err(Error::DimensionMismatch(format!(
                "all dimensions must be positive, got {self}"
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.n1 && j < self.n2 && k < self.n3);
        i + self.n1 * (j + self.n2 * k)
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.n1, self.n2, self.n3)
    }
}

/// A dense real `n1 x n2 x n3` tensor with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    shape: Shape,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(shape: Shape) -> Self {
        Tensor3 {
            shape,
            data: vec![0.0; shape.len()],
        }
    }

    /// Wraps `data` laid out in slice-major, column-major-within-slice order.
    pub fn from_vec(shape: Shape, data: Vec<f64>) -> Result<Self> {
        shape.validate()?;
        if data.len() != shape.len() {
            return Err(Error::DimensionMismatch(format!(
                "shape {shape} needs {} values, got {}",
                shape.len(),
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("tensor data"));
        }
        Ok(Tensor3 { shape, data })
    }

    pub fn from_fn(shape: Shape, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(shape.len());
        for k in 0..shape.n3 {
            for j in 0..shape.n2 {
                for i in 0..shape.n1 {
                    data.push(f(i, j, k));
                }
            }
        }
        Tensor3 { shape, data }
    }

    /// Stacks real `n1 x n2` matrices as frontal slices.
    pub fn from_slices(slices: &[DMatrix<f64>]) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::DimensionMismatch("no frontal slices".into()))?;
        let shape = Shape::new(first.nrows(), first.ncols(), slices.len());
        let mut data = Vec::with_capacity(shape.len());
        for s in slices {
            if s.shape() != (shape.n1, shape.n2) {
                return Err(Error::DimensionMismatch(format!(
                    "frontal slice {:?} does not match {}x{}",
                    s.shape(),
                    shape.n1,
                    shape.n2
                )));
            }
            data.extend_from_slice(s.as_slice());
        }
        Tensor3::from_vec(shape, data)
    }

    /// The identity tensor: first frontal slice is `I_n`, the rest are zero.
    pub fn identity(n: usize, n3: usize) -> Self {
        let shape = Shape::new(n, n, n3);
        Tensor3::from_fn(shape, |i, j, k| if k == 0 && i == j { 1.0 } else { 0.0 })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.shape.n1, self.shape.n2, self.shape.n3)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn frontal_slice(&self, k: usize) -> DMatrix<f64> {
        let n = self.shape.slice_len();
        DMatrix::from_column_slice(self.shape.n1, self.shape.n2, &self.data[k * n..(k + 1) * n])
    }

    pub fn tube(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.shape.n3).map(|k| self[(i, j, k)]).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor3 {
        Tensor3 {
            shape: self.shape,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Tensor3 {
        self.map(|v| v * s)
    }

    /// Entrywise `f(self, other)`; shapes must agree.
    pub fn zip_with(&self, other: &Tensor3, f: impl Fn(f64, f64) -> f64) -> Result<Tensor3> {
        self.expect_same_shape(other)?;
        Ok(Tensor3 {
            shape: self.shape,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Tensor3) -> Result<Tensor3> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Tensor3) -> Result<Tensor3> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `‖self − other‖_∞`.
    pub fn max_abs_diff(&self, other: &Tensor3) -> Result<f64> {
        self.expect_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub(crate) fn expect_same_shape(&self, other: &Tensor3) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.shape, other.shape
            )));
        }
        Ok(())
    }
}

impl Index<(usize, usize, usize)> for Tensor3 {
    type Output = f64;

    fn index(&self, (i, j, k): (usize, usize, usize)) -> &f64 {
        &self.data[self.shape.offset(i, j, k)]
    }
}

impl IndexMut<(usize, usize, usize)> for Tensor3 {
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut f64 {
        let off = self.shape.offset(i, j, k);
        &mut self.data[off]
    }
}

/// Boolean membership tensor for the observed index set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask3 {
    shape: Shape,
    data: Vec<bool>,
}

impl Mask3 {
    pub fn new(shape: Shape, value: bool) -> Self {
        Mask3 {
            shape,
            data: vec![value; shape.len()],
        }
    }

    pub fn from_vec(shape: Shape, data: Vec<bool>) -> Result<Self> {
        shape.validate()?;
        if data.len() != shape.len() {
            return Err(Error::DimensionMismatch(format!(
                "mask shape {shape} needs {} entries, got {}",
                shape.len(),
                data.len()
            )));
        }
        Ok(Mask3 { shape, data })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        self.data[self.shape.offset(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: bool) {
        let off = self.shape.offset(i, j, k);
        self.data[off] = v;
    }

    /// `P_Ω(t)`: keeps observed entries, zeros the rest.
    pub fn project(&self, t: &Tensor3) -> Result<Tensor3> {
        self.expect_shape(t)?;
        let data = t
            .as_slice()
            .iter()
            .zip(&self.data)
            .map(|(&v, &m)| if m { v } else { 0.0 })
            .collect();
        Ok(Tensor3 {
            shape: self.shape,
            data,
        })
    }

    /// `P_Ω^⊥(t)`: keeps unobserved entries, zeros the rest.
    pub fn project_complement(&self, t: &Tensor3) -> Result<Tensor3> {
        self.expect_shape(t)?;
        let data = t
            .as_slice()
            .iter()
            .zip(&self.data)
            .map(|(&v, &m)| if m { 0.0 } else { v })
            .collect();
        Ok(Tensor3 {
            shape: self.shape,
            data,
        })
    }

    pub(crate) fn expect_shape(&self, t: &Tensor3) -> Result<()> {
        if self.shape != t.shape() {
            return Err(Error::DimensionMismatch(format!(
                "mask {} vs tensor {}",
                self.shape,
                t.shape()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_slice_major_column_major() {
        let t = Tensor3::from_fn(Shape::new(2, 3, 2), |i, j, k| (100 * k + 10 * j + i) as f64);
        assert_eq!(t.as_slice()[0], 0.0);
        assert_eq!(t.as_slice()[1], 1.0);
        assert_eq!(t.as_slice()[2], 10.0);
        assert_eq!(t.as_slice()[6], 100.0);
        assert_eq!(t[(1, 2, 1)], 121.0);
        assert_eq!(t.frontal_slice(1)[(1, 2)], 121.0);
    }

    #[test]
    fn rejects_bad_payloads() {
        assert!(Tensor3::from_vec(Shape::new(2, 2, 2), vec![0.0; 7]).is_err());
        assert!(Tensor3::from_vec(Shape::new(1, 1, 1), vec![f64::NAN]).is_err());
        assert!(Tensor3::from_vec(Shape::new(0, 1, 1), vec![]).is_err());
    }

    #[test]
    fn projections_partition_the_tensor() {
        let shape = Shape::new(3, 2, 2);
        let t = Tensor3::from_fn(shape, |i, j, k| (i + 2 * j + 5 * k) as f64 + 1.0);
        let mut m = Mask3::new(shape, false);
        m.set(0, 0, 0, true);
        m.set(2, 1, 1, true);
        let a = m.project(&t).unwrap();
        let b = m.project_complement(&t).unwrap();
        assert_eq!(a.add(&b).unwrap(), t);
        assert_eq!(m.count(), 2);
        assert_eq!(a[(1, 0, 0)], 0.0);
        assert_eq!(b[(0, 0, 0)], 0.0);
    }
}
