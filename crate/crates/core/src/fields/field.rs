//! Piecewise-affine fields with planar jump sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Patch, Plane, Point, Solid, PLANE_EPS};
use crate::tensor::{Mat, Vector};

use super::mesh::GridMesh;

/// Jumps smaller than this (sup over the facet) are not stored.
pub const JUMP_TOL: f64 = 1e-12;

/// `u(x) = gradient x + offset` on one cell, before interior jumps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellMap {
    pub gradient: Mat,
    pub offset: Vector,
}

impl CellMap {
    pub fn new(gradient: Mat, offset: Vector) -> Self {
        CellMap { gradient, offset }
    }

    pub fn eval(&self, x: &Point) -> Vector {
        let n = self.gradient.cols();
        let mut v = self.offset;
        for i in 0..self.gradient.rows() {
            for j in 0..n {
                v[i] += self.gradient[(i, j)] * x[j];
            }
        }
        v
    }
}

/// A jump plane `{x . normal = offset}` inside one cell. Points with
/// `x . normal >= offset` receive `jump` on top of the cell map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpPlane {
    pub cell: usize,
    pub normal: Vector,
    pub offset: f64,
    pub jump: Vector,
}

/// Prescribed boundary trace used to close a field with clamp facets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryDatum {
    /// `x -> gradient x + offset`.
    Affine { gradient: Mat, offset: Vector },
    /// `above` where `x . normal > 0`, `below` elsewhere.
    Step { normal: Vector, below: Vector, above: Vector },
}

impl BoundaryDatum {
    pub fn eval(&self, x: &Point) -> Vector {
        match self {
            BoundaryDatum::Affine { gradient, offset } => CellMap::new(*gradient, *offset).eval(x),
            BoundaryDatum::Step { normal, below, above } => {
                if geometry::dot(&normal.padded(), x) > 0.0 {
                    *above
                } else {
                    *below
                }
            }
        }
    }

    fn value_dim(&self) -> usize {
        match self {
            BoundaryDatum::Affine { offset, .. } => offset.dim(),
            BoundaryDatum::Step { below, .. } => below.dim(),
        }
    }

    fn gradient(&self, d: usize, n: usize) -> Mat {
        match self {
            BoundaryDatum::Affine { gradient, .. } => *gradient,
            BoundaryDatum::Step { .. } => Mat::zeros(d, n),
        }
    }

    fn planes(&self) -> Vec<Plane> {
        match self {
            BoundaryDatum::Affine { .. } => vec![],
            BoundaryDatum::Step { normal, .. } => vec![Plane::new(normal.padded(), 0.0)],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FacetKind {
    /// A jump plane crossing a cell.
    Interior { cell: usize },
    /// Part of a shared cell face where the two traces differ.
    Face { minus: usize, plus: usize },
    /// Part of the domain boundary where the trace differs from the datum.
    Clamp { cell: usize },
}

/// Planar facet with an affine jump `jump + jump_gradient (x - centroid)`.
/// The jump is the trace on the side `normal` points to minus the other.
#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    pub kind: FacetKind,
    pub normal: Vector,
    pub offset_c: f64,
    pub patch: Patch,
    pub jump: Vector,
    pub jump_gradient: Mat,
    centroid: Point,
}

impl Facet {
    fn new(kind: FacetKind, normal: Vector, patch: Patch, jump: Vector, jump_gradient: Mat) -> Self {
        let centroid = patch.centroid();
        let offset_c = geometry::dot(&normal.padded(), &centroid);
        Facet { kind, normal, offset_c, patch, jump, jump_gradient, centroid }
    }

    pub fn measure(&self) -> f64 {
        self.patch.measure()
    }

    pub fn centroid(&self) -> Point {
        self.centroid
    }

    pub fn is_clamp(&self) -> bool {
        matches!(self.kind, FacetKind::Clamp { .. })
    }

    pub fn has_constant_jump(&self) -> bool {
        self.jump_gradient.max_abs() == 0.0
    }

    pub fn jump_at(&self, x: &Point) -> Vector {
        let mut j = self.jump;
        let d = geometry::sub(x, &self.centroid);
        for i in 0..self.jump_gradient.rows() {
            for k in 0..self.jump_gradient.cols() {
                j[i] += self.jump_gradient[(i, k)] * d[k];
            }
        }
        j
    }

    fn sup_jump(&self) -> f64 {
        self.patch.verts.iter().map(|v| self.jump_at(v).max_abs()).fold(0.0, f64::max)
    }

    /// `int_facet f(jump(x), normal) dH^{N-1}`. Non-constant jumps are
    /// integrated piecewise between the zero sets of their components and of
    /// their normal component, so densities built from `|.|` and `(.)^±` of
    /// those quantities are integrated exactly.
    pub fn integrate(&self, f: impl Fn(&Vector, &Vector) -> f64) -> f64 {
        if self.has_constant_jump() {
            return self.measure() * f(&self.jump, &self.normal);
        }
        self.patch.integrate(&self.kinks(), |x| f(&self.jump_at(&x), &self.normal))
    }

    /// Like [`Facet::integrate`], with the integration point passed first.
    pub(crate) fn integrate_with_point(&self, f: impl Fn(&Point, &Vector, &Vector) -> f64) -> f64 {
        self.patch.integrate(&self.kinks(), |x| f(&x, &self.jump_at(&x), &self.normal))
    }

    /// Zero sets of the jump components and of the normal component.
    fn kinks(&self) -> Vec<Plane> {
        let g = &self.jump_gradient;
        let mut kinks = Vec::new();
        for i in 0..g.rows() {
            kinks.extend(Plane::zero_set(g.row(i).padded(), self.centroid, self.jump[i]));
        }
        if g.rows() == self.normal.dim() {
            let gn = g.transpose().mul_vec(&self.normal);
            kinks.extend(Plane::zero_set(gn.padded(), self.centroid, self.jump.dot(&self.normal)));
        }
        kinks
    }
}

/// A piecewise-affine field on a [`GridMesh`]: one affine map per cell, jump
/// planes crossing cells, and the facets derived from them.
///
/// Face facets (trace mismatches between neighbouring cells) are computed at
/// construction. With a [`BoundaryDatum`] the mismatch between the boundary
/// trace and the datum is stored as clamp facets, which closes the field as a
/// competitor with prescribed boundary values.
#[derive(Clone, Debug)]
pub struct PiecewiseField {
    mesh: GridMesh,
    value_dim: usize,
    cells: Vec<CellMap>,
    planes: Vec<JumpPlane>,
    cell_planes: Vec<Vec<usize>>,
    facets: Vec<Facet>,
    boundary: Option<BoundaryDatum>,
}

fn plane_of(p: &JumpPlane) -> Plane {
    Plane::new(p.normal.padded(), p.offset)
}

impl PiecewiseField {
    pub fn new(
        mesh: GridMesh,
        cells: Vec<CellMap>,
        planes: Vec<JumpPlane>,
        boundary: Option<BoundaryDatum>,
    ) -> Result<Self> {
        if cells.len() != mesh.cell_count() {
            return Err(Error::dims(format!(
                "{} cell maps for a mesh of {} cells",
                cells.len(),
                mesh.cell_count()
            )));
        }
        let value_dim = cells[0].offset.dim();
        for c in &cells {
            if c.gradient.shape() != (value_dim, mesh.dim) || c.offset.dim() != value_dim {
                return Err(Error::dims("cell gradients must be d x N with d-vector offsets"));
            }
            if !c.gradient.is_finite() {
                return Err(Error::invalid("cell gradients must be finite"));
            }
        }
        if let Some(b) = &boundary {
            if b.value_dim() != value_dim {
                return Err(Error::dims("boundary datum has the wrong value dimension"));
            }
        }

        let mut merged: Vec<JumpPlane> = Vec::new();
        for p in planes {
            if p.cell >= cells.len() {
                return Err(Error::invalid(format!("jump plane refers to missing cell {}", p.cell)));
            }
            if p.normal.dim() != mesh.dim || p.jump.dim() != value_dim {
                return Err(Error::dims("jump plane normal or jump has the wrong length"));
            }
            if !p.normal.is_unit(1e-12) {
                return Err(Error::NonUnitNormal(p.normal.norm()));
            }
            if !p.offset.is_finite() {
                return Err(Error::invalid("jump plane offset must be finite"));
            }
            if let Some(q) = merged.iter_mut().find(|q| {
                q.cell == p.cell && (q.normal - p.normal).max_abs() <= 1e-12 && (q.offset - p.offset).abs() <= 1e-12
            }) {
                q.jump = q.jump + p.jump;
            } else {
                merged.push(p);
            }
        }
        merged.retain(|p| p.jump.max_abs() > 0.0);

        let mut field = PiecewiseField {
            cell_planes: vec![Vec::new(); cells.len()],
            mesh,
            value_dim,
            cells,
            planes: Vec::new(),
            facets: Vec::new(),
            boundary,
        };
        for p in merged {
            let solid = field.mesh.cell_solid(p.cell);
            let patch = Patch::plane_section(&plane_of(&p), &solid).ok_or_else(|| {
                Error::invalid(format!("jump plane x.nu = {} does not cross cell {}", p.offset, p.cell))
            })?;
            let zero = Mat::zeros(value_dim, field.mesh.dim);
            field.facets.push(Facet::new(FacetKind::Interior { cell: p.cell }, p.normal, patch, p.jump, zero));
            field.cell_planes[p.cell].push(field.planes.len());
            field.planes.push(p);
        }
        field.build_face_facets();
        field.build_clamp_facets();
        Ok(field)
    }

    /// A single affine map on the whole mesh.
    pub fn affine(mesh: GridMesh, gradient: Mat, offset: Vector) -> Result<Self> {
        let cells = vec![CellMap::new(gradient, offset); mesh.cell_count()];
        Self::new(mesh, cells, vec![], None)
    }

    fn planes_of(&self, cell: usize) -> impl Iterator<Item = Plane> + '_ {
        self.cell_planes[cell].iter().map(|&i| plane_of(&self.planes[i]))
    }

    /// Value of the restriction to `cell`, extended to all of space.
    pub(crate) fn eval_cell(&self, cell: usize, x: &Point) -> Vector {
        let mut v = self.cells[cell].eval(x);
        for &i in &self.cell_planes[cell] {
            let p = &self.planes[i];
            if geometry::dot(&p.normal.padded(), x) - p.offset >= -PLANE_EPS {
                v = v + p.jump;
            }
        }
        v
    }

    fn build_face_facets(&mut self) {
        let n = self.mesh.dim;
        let mut out = Vec::new();
        for c in 0..self.cells.len() {
            for k in 0..n {
                let Some(p) = self.mesh.neighbour(c, k, true) else { continue };
                let face = self.mesh.face_patch(c, k, true);
                let cuts: Vec<Plane> = self.planes_of(c).chain(self.planes_of(p)).collect();
                let normal = Vector::from_padded(n, self.mesh.axis_normal(k));
                let jg = self.cells[p].gradient - self.cells[c].gradient;
                for piece in face.split_all(&cuts) {
                    let x = piece.centroid();
                    let jump = self.eval_cell(p, &x) - self.eval_cell(c, &x);
                    let f = Facet::new(FacetKind::Face { minus: c, plus: p }, normal, piece, jump, jg);
                    if f.sup_jump() > JUMP_TOL {
                        out.push(f);
                    }
                }
            }
        }
        self.facets.extend(out);
    }

    fn build_clamp_facets(&mut self) {
        let Some(datum) = self.boundary.clone() else { return };
        let n = self.mesh.dim;
        let dg = datum.gradient(self.value_dim, n);
        let mut out = Vec::new();
        for c in 0..self.cells.len() {
            for k in 0..n {
                for upper in [false, true] {
                    if self.mesh.neighbour(c, k, upper).is_some() {
                        continue;
                    }
                    let face = self.mesh.face_patch(c, k, upper);
                    let cuts: Vec<Plane> = self.planes_of(c).chain(datum.planes()).collect();
                    let sign = if upper { 1.0 } else { -1.0 };
                    let normal = Vector::from_padded(n, self.mesh.axis_normal(k)).scale(sign);
                    let jg = dg - self.cells[c].gradient;
                    for piece in face.split_all(&cuts) {
                        let x = piece.centroid();
                        let jump = datum.eval(&x) - self.eval_cell(c, &x);
                        let f = Facet::new(FacetKind::Clamp { cell: c }, normal, piece, jump, jg);
                        if f.sup_jump() > JUMP_TOL {
                            out.push(f);
                        }
                    }
                }
            }
        }
        self.facets.extend(out);
    }

    pub fn mesh(&self) -> &GridMesh {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim
    }

    pub fn value_dim(&self) -> usize {
        self.value_dim
    }

    pub fn cells(&self) -> &[CellMap] {
        &self.cells
    }

    pub fn jump_planes(&self) -> &[JumpPlane] {
        &self.planes
    }

    pub fn boundary(&self) -> Option<&BoundaryDatum> {
        self.boundary.as_ref()
    }

    /// All facets, including clamp facets.
    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Facets of the jump set inside the domain.
    pub fn jump_facets(&self) -> impl Iterator<Item = &Facet> {
        self.facets.iter().filter(|f| !f.is_clamp())
    }

    pub fn clamp_facets(&self) -> impl Iterator<Item = &Facet> {
        self.facets.iter().filter(|f| f.is_clamp())
    }

    /// The same field with a different (or no) boundary datum.
    pub fn with_boundary(&self, boundary: Option<BoundaryDatum>) -> Result<Self> {
        Self::new(self.mesh.clone(), self.cells.clone(), self.planes.clone(), boundary)
    }

    /// Point value; on a jump plane the side the normal points to is taken,
    /// on a shared cell face the upper cell.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vector> {
        if x.len() != self.mesh.dim {
            return Err(Error::dims("point has the wrong number of coordinates"));
        }
        let mut p = [0.0; 3];
        p[..x.len()].copy_from_slice(x);
        let c = self.mesh.locate(&p)?;
        Ok(self.eval_cell(c, &p))
    }

    /// Volume average of the absolutely continuous gradient.
    pub fn average_gradient(&self) -> Mat {
        let mut sum = Mat::zeros(self.value_dim, self.mesh.dim);
        for c in &self.cells {
            sum = sum + c.gradient;
        }
        sum.scale(1.0 / self.cells.len() as f64)
    }

    /// `sum_facets int |[u]|` over the jump set inside the domain.
    pub fn singular_total_variation(&self) -> f64 {
        self.jump_facets().map(|f| f.integrate(|j, _| j.norm())).sum()
    }

    /// `int_{S(u)} psi([u], nu)` over the jump set inside the domain.
    pub fn jump_measure(&self, psi: impl Fn(&Vector, &Vector) -> f64) -> f64 {
        self.jump_facets().map(|f| f.integrate(&psi)).sum()
    }

    /// The same integral over the clamp facets on the boundary.
    pub fn clamp_measure(&self, psi: impl Fn(&Vector, &Vector) -> f64) -> f64 {
        self.clamp_facets().map(|f| f.integrate(&psi)).sum()
    }

    /// `int f(u^+, u^-)` over the face between `cell` and its upper
    /// neighbour along axis `k`, with `u^+` the neighbour's trace. With
    /// `jumps_only` the parts of the face where the traces agree are skipped.
    pub(crate) fn integrate_face(
        &self,
        cell: usize,
        k: usize,
        jumps_only: bool,
        f: impl Fn(&Vector, &Vector) -> f64,
    ) -> f64 {
        let Some(p) = self.mesh.neighbour(cell, k, true) else { return 0.0 };
        let face = self.mesh.face_patch(cell, k, true);
        let cuts: Vec<Plane> = self.planes_of(cell).chain(self.planes_of(p)).collect();
        let normal = Vector::from_padded(self.mesh.dim, self.mesh.axis_normal(k));
        let jg = self.cells[p].gradient - self.cells[cell].gradient;
        let mut total = 0.0;
        for piece in face.split_all(&cuts) {
            let x = piece.centroid();
            let jump = self.eval_cell(p, &x) - self.eval_cell(cell, &x);
            let facet = Facet::new(FacetKind::Face { minus: cell, plus: p }, normal, piece, jump, jg);
            if jumps_only && facet.sup_jump() <= JUMP_TOL {
                continue;
            }
            let kinks = facet.kinks();
            total += facet.patch.integrate(&kinks, |y| f(&self.eval_cell(p, &y), &self.eval_cell(cell, &y)));
        }
        total
    }

    /// Splits `cell`'s solid into the pieces on which the field is affine.
    fn affine_pieces(&self, cell: usize, solid: Solid) -> Vec<Solid> {
        let cuts: Vec<Plane> = self.planes_of(cell).collect();
        solid.split_all(&cuts)
    }

    /// The local grid planes of the mesh inside the domain.
    fn grid_planes(&self) -> Vec<Plane> {
        let mut out = Vec::new();
        for k in 0..self.mesh.dim {
            let normal = self.mesh.axis_normal(k);
            for j in 1..self.mesh.resolution[k] {
                out.push(Plane::new(normal, self.mesh.lo[k] + j as f64 * self.mesh.width(k)));
            }
        }
        out
    }

    /// Two fields on the two halves of the mesh cut along grid plane `index`
    /// of `axis`; facets on the cut belong to neither half.
    pub fn split(&self, axis: usize, index: usize) -> Result<(PiecewiseField, PiecewiseField)> {
        let m = &self.mesh;
        if axis >= m.dim || index == 0 || index >= m.resolution[axis] {
            return Err(Error::invalid("cut must be an interior grid plane"));
        }
        let cut = m.lo[axis] + index as f64 * m.width(axis);
        let half = |upper: bool| -> Result<PiecewiseField> {
            let mut lo = m.lo.clone();
            let mut hi = m.hi.clone();
            let mut res = m.resolution.clone();
            if upper {
                lo[axis] = cut;
                res[axis] -= index;
            } else {
                hi[axis] = cut;
                res[axis] = index;
            }
            let mut sub = GridMesh::new(m.dim, lo, hi, res)?;
            sub.orientation = m.orientation;
            let mut map = vec![usize::MAX; m.cell_count()];
            let mut cells = Vec::new();
            for c in 0..m.cell_count() {
                let mut idx = m.multi_index(c);
                let inside = (idx[axis] >= index) == upper;
                if inside {
                    if upper {
                        idx[axis] -= index;
                    }
                    map[c] = sub.linear_index(&idx);
                }
            }
            let mut order: Vec<(usize, usize)> =
                map.iter().enumerate().filter(|(_, s)| **s != usize::MAX).map(|(c, s)| (*s, c)).collect();
            order.sort();
            for (_, c) in &order {
                cells.push(self.cells[*c]);
            }
            let planes = self
                .planes
                .iter()
                .filter(|p| map[p.cell] != usize::MAX)
                .map(|p| JumpPlane { cell: map[p.cell], ..p.clone() })
                .collect();
            PiecewiseField::new(sub, cells, planes, None)
        };
        Ok((half(false)?, half(true)?))
    }

    /// Sum of `f(piece, affine map)` over the pieces on which both fields are
    /// affine; `f` receives the difference map `u - v`.
    fn common_pieces(&self, other: &PiecewiseField, mut f: impl FnMut(&Solid, &CellMap)) {
        let grid = other.grid_planes();
        for c in 0..self.cells.len() {
            for piece in self.mesh.cell_solid(c).split_all(&grid) {
                let Ok(oc) = other.mesh.locate(&piece.centroid()) else { continue };
                for p in self.affine_pieces(c, piece) {
                    for q in other.affine_pieces(oc, p) {
                        let x = q.centroid();
                        let g = self.cells[c].gradient - other.cells[oc].gradient;
                        let v = self.eval_cell(c, &x) - other.eval_cell(oc, &x);
                        let offset = v - CellMap::new(g, Vector::zeros(v.dim())).eval(&x);
                        f(&q, &CellMap::new(g, offset));
                    }
                }
            }
        }
    }

    /// `int_Omega |u - v| dx` (Euclidean norm of the difference).
    pub fn l1_distance(&self, other: &PiecewiseField) -> Result<f64> {
        if !self.mesh.same_domain(&other.mesh) {
            return Err(Error::invalid("fields live on different domains"));
        }
        if self.value_dim != other.value_dim {
            return Err(Error::dims("fields have different value dimensions"));
        }
        let mut total = 0.0;
        self.common_pieces(other, |piece, diff| {
            let kinks: Vec<Plane> = (0..diff.gradient.rows())
                .filter_map(|i| Plane::zero_set(diff.gradient.row(i).padded(), [0.0; 3], diff.offset[i]))
                .collect();
            total += piece.integrate(&kinks, |x| diff.eval(&x).norm());
        });
        Ok(total)
    }
}

/// Versioned JSON document of a field.
#[derive(Serialize, Deserialize)]
struct FieldDoc {
    version: u32,
    dim: usize,
    domain: DomainDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    orientation: Option<Mat>,
    resolution: Vec<usize>,
    cells: Vec<CellMap>,
    planes: Vec<JumpPlane>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    boundary: Option<BoundaryDatum>,
    /// Derived; written for consumers and ignored on input.
    #[serde(default)]
    facets: Vec<FacetDoc>,
}

#[derive(Serialize, Deserialize)]
struct DomainDoc {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct FacetDoc {
    #[serde(flatten)]
    kind: FacetKind,
    normal: Vector,
    offset_c: f64,
    polygon: Vec<Vec<f64>>,
    jump: Vector,
    jump_gradient: Mat,
}

pub const FIELD_FORMAT_VERSION: u32 = 1;

impl PiecewiseField {
    pub fn to_json(&self) -> Result<String> {
        let n = self.mesh.dim;
        let doc = FieldDoc {
            version: FIELD_FORMAT_VERSION,
            dim: n,
            domain: DomainDoc { lo: self.mesh.lo.clone(), hi: self.mesh.hi.clone() },
            orientation: self.mesh.orientation,
            resolution: self.mesh.resolution.clone(),
            cells: self.cells.clone(),
            planes: self.planes.clone(),
            boundary: self.boundary.clone(),
            facets: self
                .facets
                .iter()
                .map(|f| FacetDoc {
                    kind: f.kind,
                    normal: f.normal,
                    offset_c: f.offset_c,
                    polygon: f.patch.verts.iter().map(|v| v[..n].to_vec()).collect(),
                    jump: f.jump,
                    jump_gradient: f.jump_gradient,
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: FieldDoc = serde_json::from_str(text)?;
        if doc.version != FIELD_FORMAT_VERSION {
            return Err(Error::invalid(format!("unsupported field format version {}", doc.version)));
        }
        let mut mesh = GridMesh::new(doc.dim, doc.domain.lo, doc.domain.hi, doc.resolution)?;
        if let Some(r) = doc.orientation {
            mesh = mesh.with_orientation(r)?;
        }
        Self::new(mesh, doc.cells, doc.planes, doc.boundary)
    }
}
