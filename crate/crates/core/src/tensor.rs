//! Small dense vectors and matrices (dimensions 1 to 3).
//!
//! Deformation gradients, disarrangement tensors, jump vectors and normals all
//! live here. Storage is a fixed `3 x 3` array so every value is `Copy`; the
//! logical shape is carried alongside and checked by the fallible operations.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

fn check_dim(n: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}

/// A vector in `R^n`, `n <= 3`.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector {
    dim: usize,
    data: [f64; MAX_DIM],
}

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "unsupported dimension {dim}");
        Vector { dim, data: [0.0; MAX_DIM] }
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        check_dim(values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("vector entries must be finite"));
        }
        let mut v = Vector::zeros(values.len());
        v.data[..values.len()].copy_from_slice(values);
        Ok(v)
    }

    /// Panicking constructor for literals in tests and examples.
    pub fn new(values: &[f64]) -> Self {
        Self::from_slice(values).expect("invalid vector literal")
    }

    /// Canonical basis vector `e_i` (zero based).
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Vector::zeros(dim);
        v.data[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data[..self.dim]
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        (0..self.dim).map(|i| self.data[i] * other.data[i]).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Vector {
        let mut v = *self;
        for x in &mut v.data[..self.dim] {
            *x *= s;
        }
        v
    }

    pub fn normalized(&self) -> Result<Vector> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::invalid("cannot normalize a zero vector"));
        }
        Ok(self.scale(1.0 / n))
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn max_abs(&self) -> f64 {
        self.as_slice().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Outer product `self ⊗ other`, shape `self.dim x other.dim`.
    pub fn outer(&self, other: &Vector) -> Mat {
        let mut m = Mat::zeros(self.dim, other.dim);
        for i in 0..self.dim {
            for j in 0..other.dim {
                m.data[i][j] = self.data[i] * other.data[j];
            }
        }
        m
    }

    /// Cross product; both operands must be 3-vectors.
    pub fn cross(&self, other: &Vector) -> Vector {
        debug_assert!(self.dim == 3 && other.dim == 3);
        let a = &self.data;
        let b = &other.data;
        Vector {
            dim: 3,
            data: [
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ],
        }
    }

    /// Zero-padded coordinates, used by the geometry kernels.
    pub(crate) fn padded(&self) -> [f64; MAX_DIM] {
        self.data
    }

    pub(crate) fn from_padded(dim: usize, data: [f64; MAX_DIM]) -> Vector {
        let mut v = Vector::zeros(dim);
        v.data[..dim].copy_from_slice(&data[..dim]);
        v
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Vector::from_slice(&v)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.as_slice().to_vec()
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_slice())
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        assert!(i < self.dim);
        &self.data[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        assert!(i < self.dim);
        &mut self.data[i]
    }
}

impl Add for Vector {
    type Output = Vector;
    fn add(mut self, rhs: Vector) -> Vector {
        debug_assert_eq!(self.dim, rhs.dim);
        for i in 0..self.dim {
            self.data[i] += rhs.data[i];
        }
        self
    }
}

impl Sub for Vector {
    type Output = Vector;
    fn sub(mut self, rhs: Vector) -> Vector {
        debug_assert_eq!(self.dim, rhs.dim);
        for i in 0..self.dim {
            self.data[i] -= rhs.data[i];
        }
        self
    }
}

impl Neg for Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scale(-1.0)
    }
}

/// A `rows x cols` matrix with `rows, cols <= 3`.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: [[f64; MAX_DIM]; MAX_DIM],
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&rows) && (1..=MAX_DIM).contains(&cols));
        Mat { rows, cols, data: [[0.0; MAX_DIM]; MAX_DIM] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i][i] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Mat::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m.data[i][i] = *v;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        check_dim(rows.len())?;
        let cols = rows[0].len();
        check_dim(cols)?;
        let mut m = Mat::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::dims("ragged matrix rows"));
            }
            for (j, v) in r.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::invalid("matrix entries must be finite"));
                }
                m.data[i][j] = *v;
            }
        }
        Ok(m)
    }

    /// Panicking constructor for literals.
    pub fn new<const C: usize>(rows: &[[f64; C]]) -> Self {
        let v: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        Mat::from_rows(&v).expect("invalid matrix literal")
    }

    pub fn from_columns(cols: &[Vector]) -> Result<Self> {
        check_dim(cols.len())?;
        let rows = cols[0].dim();
        let mut m = Mat::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            if c.dim() != rows {
                return Err(Error::dims("columns of different length"));
            }
            for i in 0..rows {
                m.data[i][j] = c[i];
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn column(&self, j: usize) -> Vector {
        let mut v = Vector::zeros(self.rows);
        for i in 0..self.rows {
            v[i] = self.data[i][j];
        }
        v
    }

    pub fn row(&self, i: usize) -> Vector {
        Vector::from_padded(self.cols, self.data[i])
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j][i] = self.data[i][j];
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &Vector) -> Vector {
        debug_assert_eq!(self.cols, v.dim());
        let mut out = Vector::zeros(self.rows);
        for i in 0..self.rows {
            out[i] = (0..self.cols).map(|j| self.data[i][j] * v[j]).sum();
        }
        out
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        debug_assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                out.data[i][j] = (0..self.cols).map(|k| self.data[i][k] * other.data[k][j]).sum();
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Mat {
        let mut m = *self;
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.data[i][j] *= s;
            }
        }
        m
    }

    pub fn try_sub(&self, other: &Mat) -> Result<Mat> {
        if self.shape() != other.shape() {
            return Err(Error::dims(format!("{:?} vs {:?}", self.shape(), other.shape())));
        }
        Ok(*self - *other)
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.data[i][i]).sum()
    }

    /// Determinant of a square matrix.
    pub fn det(&self) -> f64 {
        debug_assert!(self.is_square());
        let a = &self.data;
        match self.rows {
            1 => a[0][0],
            2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
            _ => {
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                    - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            }
        }
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn entries(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.rows).flat_map(move |i| (0..self.cols).map(move |j| self.data[i][j]))
    }

    pub fn is_finite(&self) -> bool {
        self.entries().all(f64::is_finite)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.data[i][..self.cols].to_vec()).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Mat {
    type Error = Error;
    fn try_from(v: Vec<Vec<f64>>) -> Result<Self> {
        Mat::from_rows(&v)
    }
}

impl From<Mat> for Vec<Vec<f64>> {
    fn from(m: Mat) -> Self {
        m.to_rows()
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_rows())
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(i < self.rows && j < self.cols);
        &self.data[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        assert!(i < self.rows && j < self.cols);
        &mut self.data[i][j]
    }
}

impl Add for Mat {
    type Output = Mat;
    fn add(mut self, rhs: Mat) -> Mat {
        debug_assert_eq!(self.shape(), rhs.shape());
        for i in 0..self.rows {
            for j in 0..self.cols {
                self.data[i][j] += rhs.data[i][j];
            }
        }
        self
    }
}

impl Sub for Mat {
    type Output = Mat;
    fn sub(mut self, rhs: Mat) -> Mat {
        debug_assert_eq!(self.shape(), rhs.shape());
        for i in 0..self.rows {
            for j in 0..self.cols {
                self.data[i][j] -= rhs.data[i][j];
            }
        }
        self
    }
}

impl Mul<Vector> for Mat {
    type Output = Vector;
    fn mul(self, rhs: Vector) -> Vector {
        self.mul_vec(&rhs)
    }
}

impl Mul for Mat {
    type Output = Mat;
    fn mul(self, rhs: Mat) -> Mat {
        self.matmul(&rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_and_trace() {
        let m = Mat::new(&[[2.0, 1.0, 0.0], [0.0, 3.0, 0.0], [1.0, 0.0, 1.0]]);
        assert_eq!(m.trace(), 6.0);
        assert!((m.det() - 6.0).abs() < 1e-14);
        assert_eq!(Mat::diag(&[2.0]).det(), 2.0);
    }

    #[test]
    fn outer_product_shape() {
        let a = Vector::new(&[1.0, 2.0]);
        let b = Vector::new(&[0.0, 1.0, 3.0]);
        let m = a.outer(&b);
        assert_eq!(m.shape(), (2, 3));
        assert_eq!(m[(1, 2)], 6.0);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Vector::from_slice(&[]).is_err());
        assert!(Vector::from_slice(&[1.0; 4]).is_err());
        assert!(Mat::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(Vector::from_slice(&[f64::NAN]).is_err());
    }

    #[test]
    fn serde_as_nested_lists() {
        let m = Mat::new(&[[1.0, 2.0], [3.0, 4.0]]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[1.0,2.0],[3.0,4.0]]");
        let back: Mat = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
