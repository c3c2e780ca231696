//! Staircase approximations of structured deformations, jump competitors
//! for the surface cell problem, and the two classical examples.

use serde::{Deserialize, Serialize};

use crate::energy::{self, DensitySet};
use crate::error::{Error, Result};
use crate::frame::{decompose_by_frame, Frame};
use crate::tensor::{Mat, Vector};

use super::field::{BoundaryDatum, CellMap, JumpPlane, PiecewiseField};
use super::mesh::GridMesh;

/// Planes closer than this to a cell face are not placed inside the cell.
const FACE_MARGIN: f64 = 1e-9;

/// A pair `(g, G)`: a piecewise-affine `g` and a per-cell tensor `G`.
#[derive(Clone, Debug)]
pub struct StructuredDeformation {
    pub g: PiecewiseField,
    pub big_g: Vec<Mat>,
}

impl StructuredDeformation {
    pub fn new(g: PiecewiseField, big_g: Vec<Mat>) -> Result<Self> {
        if big_g.len() != g.cells().len() {
            return Err(Error::dims("G needs one matrix per cell of g"));
        }
        let shape = (g.value_dim(), g.dim());
        if big_g.iter().any(|m| m.shape() != shape) {
            return Err(Error::dims("G must have the shape of grad g"));
        }
        if big_g.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid("G must be finite"));
        }
        Ok(StructuredDeformation { g, big_g })
    }

    /// `g` and a constant `G` on every cell.
    pub fn uniform(g: PiecewiseField, big_g: Mat) -> Result<Self> {
        let n = g.cells().len();
        Self::new(g, vec![big_g; n])
    }

    /// `M = grad g - G` on each cell.
    pub fn disarrangement(&self) -> Vec<Mat> {
        self.g.cells().iter().zip(&self.big_g).map(|(c, g)| c.gradient - *g).collect()
    }

    /// `g(x) = 2x`, `G = 1` on `(0, 1)`.
    pub fn broken_ramp() -> Self {
        let g = PiecewiseField::affine(GridMesh::unit_box(1, 1).unwrap(), Mat::diag(&[2.0]), Vector::zeros(1))
            .unwrap();
        Self::uniform(g, Mat::identity(1)).unwrap()
    }

    /// `g(x) = (x1 + x3, x2, x3)`, `G = I` on `(0, 1)^3`.
    pub fn deck_of_cards() -> Self {
        let shear = Mat::identity(3) + Vector::unit(3, 0).outer(&Vector::unit(3, 2));
        let g = PiecewiseField::affine(GridMesh::unit_box(3, 1).unwrap(), shear, Vector::zeros(3)).unwrap();
        Self::uniform(g, Mat::identity(3)).unwrap()
    }
}

/// Staircase approximation on an arbitrary mesh.
///
/// On each cell the target `x -> A x + b` (taken from `target`) is replaced
/// by `G x + b'` plus the jump planes `x . nu_i = k/n` with jumps `a_i / n`,
/// where `A - G = sum_i a_i ⊗ nu_i` over the frame. Only planes strictly
/// inside a cell are placed; `b'` is chosen so the field meets the target
/// just above every plane.
pub fn staircase_on(
    mesh: GridMesh,
    target: &[CellMap],
    big_g: &[Mat],
    frame: &Frame,
    n: usize,
    boundary: Option<BoundaryDatum>,
) -> Result<PiecewiseField> {
    if n == 0 {
        return Err(Error::invalid("refinement index n must be at least 1"));
    }
    if target.len() != mesh.cell_count() || big_g.len() != target.len() {
        return Err(Error::dims("one target map and one G per cell are required"));
    }
    if frame.dim != mesh.dim {
        return Err(Error::dims("frame dimension differs from the mesh dimension"));
    }
    let nf = n as f64;
    let mut cells = Vec::with_capacity(target.len());
    let mut planes = Vec::new();
    for (c, (t, g)) in target.iter().zip(big_g).enumerate() {
        let m = t.gradient.try_sub(g)?;
        let verts = mesh.cell_solid(c).vertices();
        let mut offset = t.offset;
        for (a, nu) in decompose_by_frame(&m, frame)?.terms {
            if a.max_abs() <= 1e-14 {
                continue;
            }
            let s: Vec<f64> = verts.iter().map(|v| crate::geometry::dot(&nu.padded(), v)).collect();
            let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
            let smax = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let k_lo = (nf * smin + FACE_MARGIN).ceil() as i64;
            let k_hi = (nf * smax - FACE_MARGIN).floor() as i64;
            offset = offset + a.scale((k_lo - 1) as f64 / nf);
            for k in k_lo..=k_hi {
                planes.push(JumpPlane { cell: c, normal: nu, offset: k as f64 / nf, jump: a.scale(1.0 / nf) });
            }
        }
        cells.push(CellMap::new(*g, offset));
    }
    PiecewiseField::new(mesh, cells, planes, boundary)
}

/// The cell-problem competitor `u_n` for `(A, B)` on `Q = (-1/2, 1/2)^N`:
/// gradient `B` everywhere, staircase jumps along the frame, and clamp
/// facets enforcing the trace `A x` on the boundary.
pub fn staircase_sequence(a: &Mat, b: &Mat, frame: &Frame, n: usize) -> Result<PiecewiseField> {
    if a.shape() != b.shape() {
        return Err(Error::dims("A and B must have the same shape"));
    }
    let mesh = GridMesh::unit_cube(a.cols(), 1)?;
    let target = [CellMap::new(*a, Vector::zeros(a.rows()))];
    let datum = BoundaryDatum::Affine { gradient: *a, offset: Vector::zeros(a.rows()) };
    staircase_on(mesh, &target, &[*b], frame, n, Some(datum))
}

/// `f_n(x) = x + k/n` on `[k/n, (k+1)/n)`, approximating `g(x) = 2x`.
pub fn broken_ramp(n: usize) -> Result<PiecewiseField> {
    let sd = StructuredDeformation::broken_ramp();
    staircase_on(sd.g.mesh().clone(), sd.g.cells(), &sd.big_g, &Frame::identity(1), n, None)
}

/// `f_n(x) = (x1 + k/n, x2, x3)` on `k/n <= x3 < (k+1)/n`.
pub fn deck_of_cards(n: usize) -> Result<PiecewiseField> {
    let sd = StructuredDeformation::deck_of_cards();
    staircase_on(sd.g.mesh().clone(), sd.g.cells(), &sd.big_g, &Frame::identity(3), n, None)
}

/// Piecewise-constant competitor on `Q_nu` with boundary datum `u_{lambda,nu}`
/// (`0` below the midplane, `lambda` above). Each split `(fraction, offset)`
/// places a jump `fraction * lambda` on the plane `x . nu = offset`.
pub fn jump_competitor(lambda: &Vector, nu: &Vector, splits: &[(f64, f64)]) -> Result<PiecewiseField> {
    let planes: Vec<(Vector, f64, f64)> = splits.iter().map(|&(f, t)| (*nu, t, f)).collect();
    oblique_competitor(lambda, nu, &planes)
}

/// As [`jump_competitor`], with an individual normal per plane:
/// `(normal, offset, fraction)`. Mismatches with the datum on `∂Q_nu` are
/// carried by clamp facets.
pub fn oblique_competitor(lambda: &Vector, nu: &Vector, planes: &[(Vector, f64, f64)]) -> Result<PiecewiseField> {
    if !nu.is_unit(1e-12) {
        return Err(Error::NonUnitNormal(nu.norm()));
    }
    if planes.is_empty() {
        return Err(Error::invalid("at least one jump plane is required"));
    }
    let total: f64 = planes.iter().map(|p| p.2).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("jump fractions must sum to 1, got {total}")));
    }
    let mesh = GridMesh::rotated_cube(nu, 1)?;
    let d = lambda.dim();
    let mut jumps = Vec::with_capacity(planes.len());
    for (normal, offset, fraction) in planes {
        if normal.dim() != nu.dim() {
            return Err(Error::dims("plane normal has the wrong dimension"));
        }
        jumps.push(JumpPlane { cell: 0, normal: *normal, offset: *offset, jump: lambda.scale(*fraction) });
    }
    let cell = CellMap::new(Mat::zeros(d, nu.dim()), Vector::zeros(d));
    let datum = BoundaryDatum::Step { normal: *nu, below: Vector::zeros(d), above: *lambda };
    PiecewiseField::new(mesh, vec![cell], jumps, Some(datum))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpoCell {
    pub cell: usize,
    pub det_big_g: f64,
    pub det_grad_g: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpoReport {
    pub constant: f64,
    pub cells: Vec<DpoCell>,
}

impl DpoReport {
    pub fn pass(&self) -> bool {
        self.cells.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &DpoCell> {
        self.cells.iter().filter(|c| !c.pass)
    }
}

/// Checks `C < det G <= det grad g` cell by cell.
pub fn validate_dpo(sd: &StructuredDeformation, constant: f64) -> Result<DpoReport> {
    if sd.g.value_dim() != sd.g.dim() {
        return Err(Error::dims("the determinant condition needs d = N"));
    }
    if !(constant > 0.0) {
        return Err(Error::invalid("the constant C must be positive"));
    }
    let cells = sd
        .g
        .cells()
        .iter()
        .zip(&sd.big_g)
        .enumerate()
        .map(|(cell, (c, g))| {
            let det_big_g = g.det();
            let det_grad_g = c.gradient.det();
            let pass = constant < det_big_g && det_big_g <= det_grad_g + 1e-12;
            DpoCell { cell, det_big_g, det_grad_g, pass }
        })
        .collect();
    Ok(DpoReport { constant, cells })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub n: usize,
    pub l1_error: f64,
    pub avg_gradient_gap: f64,
    pub singular_tv: f64,
    pub energy: f64,
}

/// Diagnostics of the staircase approximations of `sd` along `n_list`.
///
/// `avg_gradient_gap` is the largest Frobenius distance, over the cells of
/// `g`, between the cell average of `grad u_n` and `G`.
pub fn sequence_report(
    sd: &StructuredDeformation,
    frame: &Frame,
    n_list: &[usize],
    ds: &DensitySet,
) -> Result<Vec<SequenceReport>> {
    if !sd.g.jump_planes().is_empty() {
        return Err(Error::invalid("g must be affine on each cell"));
    }
    n_list
        .iter()
        .map(|&n| {
            let u = staircase_on(sd.g.mesh().clone(), sd.g.cells(), &sd.big_g, frame, n, None)?;
            let avg_gradient_gap = u
                .cells()
                .iter()
                .zip(&sd.big_g)
                .map(|(c, g)| (c.gradient - *g).norm())
                .fold(0.0, f64::max);
            Ok(SequenceReport {
                n,
                l1_error: u.l1_distance(&sd.g)?,
                avg_gradient_gap,
                singular_tv: u.singular_total_variation(),
                energy: energy::energy(&u, ds),
            })
        })
        .collect()
}
