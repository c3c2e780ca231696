//! Uniform box meshes, optionally rotated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Patch, Point, Solid};
use crate::tensor::{Mat, Vector};

const DOMAIN_TOL: f64 = 1e-12;

/// A box `[lo, hi]` split into `resolution[k]` equal cells along axis `k`.
///
/// With an `orientation` `R` the box lives in local coordinates `y` and the
/// physical point is `x = R y`; this is how rotated cubes `Q_nu` are stored.
/// Cells are numbered lexicographically with axis 0 fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMesh {
    pub dim: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub resolution: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<Mat>,
}

impl GridMesh {
    pub fn new(dim: usize, lo: Vec<f64>, hi: Vec<f64>, resolution: Vec<usize>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if lo.len() != dim || hi.len() != dim || resolution.len() != dim {
            return Err(Error::dims("box bounds and resolution must have one entry per axis"));
        }
        if resolution.iter().any(|&r| r == 0) {
            return Err(Error::invalid("resolution must be at least 1"));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && b > a)) {
            return Err(Error::invalid("domain must have positive volume"));
        }
        Ok(GridMesh { dim, lo, hi, resolution, orientation: None })
    }

    /// `(-1/2, 1/2)^N` with `r` cells per axis.
    pub fn unit_cube(dim: usize, r: usize) -> Result<Self> {
        Self::new(dim, vec![-0.5; dim], vec![0.5; dim], vec![r; dim])
    }

    /// `(0, 1)^N` with `r` cells per axis.
    pub fn unit_box(dim: usize, r: usize) -> Result<Self> {
        Self::new(dim, vec![0.0; dim], vec![1.0; dim], vec![r; dim])
    }

    /// The unit cube rotated so that its last axis is `nu`.
    pub fn rotated_cube(nu: &Vector, r: usize) -> Result<Self> {
        let rot = crate::frame::frame_with_normal(nu)?;
        let mut m = Self::unit_cube(nu.dim(), r)?;
        m.orientation = Some(rot);
        Ok(m)
    }

    pub fn with_orientation(mut self, rot: Mat) -> Result<Self> {
        if rot.shape() != (self.dim, self.dim) {
            return Err(Error::dims("orientation must be N x N"));
        }
        let gap = (rot.transpose().matmul(&rot) - Mat::identity(self.dim)).max_abs();
        if gap > 1e-10 || rot.det() < 0.0 {
            return Err(Error::invalid("orientation must be a rotation"));
        }
        self.orientation = Some(rot);
        Ok(self)
    }

    pub fn cell_count(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.cell_count() as f64
    }

    pub fn width(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.resolution[axis] as f64
    }

    pub fn same_domain(&self, other: &GridMesh) -> bool {
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12);
        let rot = match (&self.orientation, &other.orientation) {
            (None, None) => true,
            (Some(a), Some(b)) => (*a - *b).max_abs() <= 1e-12,
            (Some(r), None) | (None, Some(r)) => (*r - Mat::identity(self.dim)).max_abs() <= 1e-12,
        };
        self.dim == other.dim && close(&self.lo, &other.lo) && close(&self.hi, &other.hi) && rot
    }

    pub fn multi_index(&self, cell: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        let mut rest = cell;
        for k in 0..self.dim {
            idx[k] = rest % self.resolution[k];
            rest /= self.resolution[k];
        }
        idx
    }

    pub fn linear_index(&self, idx: &[usize; 3]) -> usize {
        let mut cell = 0;
        for k in (0..self.dim).rev() {
            cell = cell * self.resolution[k] + idx[k];
        }
        cell
    }

    pub fn cell_bounds(&self, cell: usize) -> (Vec<f64>, Vec<f64>) {
        let idx = self.multi_index(cell);
        let lo: Vec<f64> = (0..self.dim).map(|k| self.lo[k] + idx[k] as f64 * self.width(k)).collect();
        let hi: Vec<f64> = (0..self.dim).map(|k| lo[k] + self.width(k)).collect();
        (lo, hi)
    }

    pub(crate) fn rotation_rows(&self) -> [[f64; 3]; 3] {
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        if let Some(rot) = &self.orientation {
            for (i, row) in r.iter_mut().enumerate().take(self.dim) {
                for (j, v) in row.iter_mut().enumerate().take(self.dim) {
                    *v = rot[(i, j)];
                }
            }
        }
        r
    }

    /// Physical coordinates of a local point.
    pub(crate) fn to_global(&self, y: &Point) -> Point {
        let r = self.rotation_rows();
        let mut x = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                x[i] += r[i][j] * y[j];
            }
        }
        x
    }

    pub(crate) fn to_local(&self, x: &Point) -> Point {
        let r = self.rotation_rows();
        let mut y = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                y[i] += r[j][i] * x[j];
            }
        }
        y
    }

    /// Unit normal of the local axis `k` in physical coordinates.
    pub(crate) fn axis_normal(&self, k: usize) -> Point {
        let mut e = [0.0; 3];
        e[k] = 1.0;
        self.to_global(&e)
    }

    pub fn cell_solid(&self, cell: usize) -> Solid {
        let (lo, hi) = self.cell_bounds(cell);
        Solid::from_box(self.dim, &lo, &hi, &self.rotation_rows())
    }

    pub fn domain_solid(&self) -> Solid {
        Solid::from_box(self.dim, &self.lo, &self.hi, &self.rotation_rows())
    }

    pub fn contains(&self, x: &Point) -> bool {
        let y = self.to_local(x);
        (0..self.dim).all(|k| y[k] >= self.lo[k] - DOMAIN_TOL && y[k] <= self.hi[k] + DOMAIN_TOL)
    }

    /// The cell containing `x`; points on shared faces go to the upper cell.
    pub fn locate(&self, x: &Point) -> Result<usize> {
        if !self.contains(x) {
            return Err(Error::OutsideDomain(x[..self.dim].to_vec()));
        }
        let y = self.to_local(x);
        let mut idx = [0; 3];
        for k in 0..self.dim {
            let t = ((y[k] - self.lo[k]) / self.width(k)).floor();
            idx[k] = (t.max(0.0) as usize).min(self.resolution[k] - 1);
        }
        Ok(self.linear_index(&idx))
    }

    /// The face of `cell` orthogonal to axis `k` on the `upper` or lower side.
    pub(crate) fn face_patch(&self, cell: usize, k: usize, upper: bool) -> Patch {
        let (lo, hi) = self.cell_bounds(cell);
        let fixed = if upper { hi[k] } else { lo[k] };
        let mut corners: Vec<Point> = Vec::new();
        let others: Vec<usize> = (0..self.dim).filter(|&j| j != k).collect();
        let mut push = |choice: &[bool]| {
            let mut y = [0.0; 3];
            y[k] = fixed;
            for (j, &up) in others.iter().zip(choice) {
                y[*j] = if up { hi[*j] } else { lo[*j] };
            }
            corners.push(self.to_global(&y));
        };
        match others.len() {
            0 => push(&[]),
            1 => {
                push(&[false]);
                push(&[true]);
            }
            _ => {
                for c in [[false, false], [true, false], [true, true], [false, true]] {
                    push(&c);
                }
            }
        }
        Patch::new(self.dim, corners)
    }

    /// Neighbour of `cell` across its face on axis `k`.
    pub fn neighbour(&self, cell: usize, k: usize, upper: bool) -> Option<usize> {
        let mut idx = self.multi_index(cell);
        if upper {
            if idx[k] + 1 >= self.resolution[k] {
                return None;
            }
            idx[k] += 1;
        } else {
            if idx[k] == 0 {
                return None;
            }
            idx[k] -= 1;
        }
        Some(self.linear_index(&idx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_round_trips() {
        let m = GridMesh::new(3, vec![0.0; 3], vec![1.0; 3], vec![2, 3, 4]).unwrap();
        assert_eq!(m.cell_count(), 24);
        for c in 0..24 {
            assert_eq!(m.linear_index(&m.multi_index(c)), c);
        }
        assert_eq!(m.locate(&[0.9, 0.1, 0.99]).unwrap(), 1 + 2 * (0 + 3 * 3));
        assert!(m.locate(&[1.5, 0.0, 0.0]).is_err());
    }

    #[test]
    fn rejects_bad_meshes() {
        assert!(GridMesh::new(2, vec![0.0, 0.0], vec![1.0, 0.0], vec![1, 1]).is_err());
        assert!(GridMesh::new(2, vec![0.0, 0.0], vec![1.0, 1.0], vec![0, 1]).is_err());
        assert!(GridMesh::unit_cube(4, 1).is_err());
    }

    #[test]
    fn rotated_cube_keeps_volume() {
        let nu = Vector::new(&[0.6, 0.0, 0.8]);
        let m = GridMesh::rotated_cube(&nu, 1).unwrap();
        assert!((m.domain_solid().volume() - 1.0).abs() < 1e-13);
        let top = m.face_patch(0, 2, true);
        let c = top.centroid();
        assert!((c[0] * 0.6 + c[2] * 0.8 - 0.5).abs() < 1e-14);
    }
}
