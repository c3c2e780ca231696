//! Two-phase optimal design on fractured media.
//!
//! A phase field `chi` takes the value 0 or 1 on each mesh cell. The energy
//! of a pair `(chi, u)` charges phase-dependent bulk and surface densities,
//! an interface density `Psi_2(chi^+, chi^-, u^+, u^-, nu)` where `u` jumps
//! across a phase interface, and the perimeter of the phase set.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cell::{estimate_h_bulk, BoundKind, CellSolution, OptimizerBudget};
use crate::energy::DesignDensities;
use crate::error::{Error, Result};
use crate::fields::{FacetKind, GridMesh, PiecewiseField, StructuredDeformation};
use crate::frame::frame_with_normal;
use crate::optim::{multistart, starts};
use crate::tensor::{Mat, Vector};

/// Per-cell characteristic function of phase 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseField {
    mesh: GridMesh,
    values: Vec<u8>,
}

/// A mesh face separating the two phases. `plus` is the upper neighbour of
/// `minus` along `axis`, and `normal` points into it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseFacet {
    pub minus: usize,
    pub plus: usize,
    pub axis: usize,
    pub normal: Vector,
    pub area: f64,
}

impl PhaseField {
    pub fn new(mesh: GridMesh, values: Vec<u8>) -> Result<Self> {
        if values.len() != mesh.cell_count() {
            return Err(Error::dims(format!("{} phase values for {} cells", values.len(), mesh.cell_count())));
        }
        if values.iter().any(|&v| v > 1) {
            return Err(Error::invalid("phase values must be 0 or 1"));
        }
        Ok(PhaseField { mesh, values })
    }

    pub fn constant(mesh: GridMesh, value: u8) -> Result<Self> {
        let n = mesh.cell_count();
        Self::new(mesh, vec![value; n])
    }

    /// Phase chosen per cell from its centroid.
    pub fn from_fn(mesh: GridMesh, f: impl Fn(&[f64]) -> u8) -> Result<Self> {
        let values = (0..mesh.cell_count()).map(|c| f(&mesh.cell_solid(c).centroid()[..mesh.dim])).collect();
        Self::new(mesh, values)
    }

    pub fn mesh(&self) -> &GridMesh {
        &self.mesh
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn value(&self, cell: usize) -> u8 {
        self.values[cell]
    }

    pub fn phase_facets(&self) -> Vec<PhaseFacet> {
        let mut out = Vec::new();
        for c in 0..self.values.len() {
            for k in 0..self.mesh.dim {
                let Some(p) = self.mesh.neighbour(c, k, true) else { continue };
                if self.values[c] != self.values[p] {
                    out.push(PhaseFacet {
                        minus: c,
                        plus: p,
                        axis: k,
                        normal: Vector::from_padded(self.mesh.dim, self.mesh.axis_normal(k)),
                        area: self.mesh.face_patch(c, k, true).measure(),
                    });
                }
            }
        }
        out
    }

    /// `|D chi|(Omega)`: total area of the phase interfaces inside the domain.
    pub fn perimeter(&self) -> f64 {
        self.phase_facets().iter().map(|f| f.area).sum()
    }

    fn check_mesh(&self, other: &GridMesh) -> Result<()> {
        if &self.mesh != other {
            return Err(Error::dims("phase field and deformation live on different meshes"));
        }
        Ok(())
    }
}

/// `E(chi, u)`: phase-selected bulk and surface energies, `Psi_2` on the
/// part of the jump set of `u` lying on phase interfaces, and the perimeter.
pub fn design_energy(chi: &PhaseField, u: &PiecewiseField, dd: &DesignDensities) -> Result<f64> {
    chi.check_mesh(u.mesh())?;
    let vol = u.mesh().cell_volume();
    let bulk: f64 = u
        .cells()
        .iter()
        .enumerate()
        .filter(|(c, _)| !dd.bulk[chi.value(*c) as usize].is_zero())
        .map(|(c, m)| dd.bulk[chi.value(c) as usize].eval(&m.gradient) * vol)
        .sum();
    let mut surface = 0.0;
    for f in u.jump_facets() {
        let phase = match f.kind {
            FacetKind::Interior { cell } => chi.value(cell),
            FacetKind::Face { minus, plus } if chi.value(minus) == chi.value(plus) => chi.value(minus),
            _ => continue,
        };
        let psi = &dd.surface[phase as usize];
        surface += f.integrate(|l, n| psi.eval(l, n));
    }
    for pf in chi.phase_facets() {
        let (hi, lo) = (chi.value(pf.plus), chi.value(pf.minus));
        surface += u.integrate_face(pf.minus, pf.axis, true, |up, um| dd.pair.eval(hi, lo, up, um, &pf.normal));
    }
    Ok(bulk + surface + chi.perimeter())
}

/// Boundary data of the surface cell problem: `chi = a`, `u = c` where
/// `x . nu > 0` and `chi = b`, `u = d` elsewhere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignBoundaryData {
    pub a: u8,
    pub b: u8,
    pub c: Vector,
    pub d: Vector,
    pub nu: Vector,
}

impl DesignBoundaryData {
    pub fn new(a: u8, b: u8, c: Vector, d: Vector, nu: Vector) -> Result<Self> {
        if a > 1 || b > 1 {
            return Err(Error::invalid("phase values must be 0 or 1"));
        }
        if c.dim() != d.dim() {
            return Err(Error::dims("c and d must have the same length"));
        }
        if !nu.is_unit(1e-12) {
            return Err(Error::NonUnitNormal(nu.norm()));
        }
        Ok(DesignBoundaryData { a, b, c, d, nu })
    }

    /// The same problem seen from the other side: `(b, a, d, c, -nu)`.
    pub fn mirrored(&self) -> Self {
        DesignBoundaryData { a: self.b, b: self.a, c: self.d, d: self.c, nu: -self.nu }
    }
}

/// Upper bound for the phase-`i` bulk cell problem; the cell solver with the
/// densities of phase `i`.
pub fn estimate_h_bulk_design(
    i: u8,
    a: &Mat,
    b: &Mat,
    dd: &DesignDensities,
    budget: &OptimizerBudget,
) -> Result<CellSolution> {
    if i > 1 {
        return Err(Error::invalid("phase index must be 0 or 1"));
    }
    estimate_h_bulk(a, b, &dd.phase(i), budget)
}

/// Layered competitor in `Q_nu`: along `s = x . nu`, `chi` is `b`, then
/// `mid_phase`, then `a` with switches at `chi_at`; `u` is `d`, then `mid_u`,
/// then `c` with switches at `u_at`.
#[derive(Clone, Debug)]
struct Layers {
    chi_at: [f64; 2],
    mid_phase: u8,
    u_at: [f64; 2],
    mid_u: Vector,
}

impl Layers {
    fn coincident(data: &DesignBoundaryData) -> Self {
        Layers { chi_at: [0.0; 2], mid_phase: data.a, u_at: [0.0; 2], mid_u: data.c }
    }

    fn chi(&self, data: &DesignBoundaryData, s: f64, above: bool) -> u8 {
        let past = |t: f64| if above { s >= t } else { s > t };
        if past(self.chi_at[1]) {
            data.a
        } else if past(self.chi_at[0]) {
            self.mid_phase
        } else {
            data.b
        }
    }

    fn u(&self, data: &DesignBoundaryData, s: f64, above: bool) -> Vector {
        let past = |t: f64| if above { s >= t } else { s > t };
        if past(self.u_at[1]) {
            data.c
        } else if past(self.u_at[0]) {
            self.mid_u
        } else {
            data.d
        }
    }

    fn describe(&self) -> String {
        format!(
            "layered: chi switches at {:?} (middle phase {}), u switches at {:?} (middle value {:?})",
            self.chi_at,
            self.mid_phase,
            self.u_at,
            self.mid_u.as_slice()
        )
    }
}

fn differs(x: &Vector, y: &Vector) -> bool {
    (*x - *y).max_abs() > 0.0
}

/// Energy of a layered competitor. Interfaces inside `Q_nu` have unit area;
/// on the lateral faces the mismatch with the boundary data is charged like
/// an interface with the outward normal.
fn layered_energy(data: &DesignBoundaryData, dd: &DesignDensities, tangents: &[Vector], l: &Layers) -> f64 {
    let interface = |chi_hi: u8, chi_lo: u8, u_hi: &Vector, u_lo: &Vector, n: &Vector| -> f64 {
        match (chi_hi != chi_lo, differs(u_hi, u_lo)) {
            (true, true) => dd.pair.eval(chi_hi, chi_lo, u_hi, u_lo, n) + 1.0,
            (true, false) => 1.0,
            (false, true) => dd.surface[chi_hi as usize].eval(&(*u_hi - *u_lo), n),
            (false, false) => 0.0,
        }
    };
    let mut cuts: Vec<f64> = l.chi_at.iter().chain(&l.u_at).map(|t| t.clamp(-0.5, 0.5)).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = 0.0;
    for &s in &cuts {
        total += interface(
            l.chi(data, s, true),
            l.chi(data, s, false),
            &l.u(data, s, true),
            &l.u(data, s, false),
            &data.nu,
        );
    }
    if !tangents.is_empty() {
        let mut marks = cuts;
        marks.extend([-0.5, 0.0, 0.5]);
        marks.sort_by(f64::total_cmp);
        marks.dedup();
        for w in marks.windows(2) {
            let (p, q) = (w[0], w[1]);
            let mid = 0.5 * (p + q);
            let (chi_in, u_in) = (l.chi(data, mid, true), l.u(data, mid, true));
            let (chi_out, u_out) = if mid > 0.0 { (data.a, &data.c) } else { (data.b, &data.d) };
            let density: f64 = tangents
                .iter()
                .flat_map(|t| [*t, -*t])
                .map(|m| interface(chi_out, chi_in, u_out, &u_in, &m))
                .sum();
            total += density * (q - p);
        }
    }
    total
}

/// Upper bound for the surface cell problem of the two-phase energy.
///
/// Candidates are the pair with both interfaces on the midplane and layered
/// competitors with up to three layers in each of `chi` and `u`, with the
/// layer positions and the middle value of `u` optimized for every choice
/// of middle phase and of which `chi` and `u` switches coincide.
pub fn estimate_h_surface_design(
    data: &DesignBoundaryData,
    dd: &DesignDensities,
    budget: &OptimizerBudget,
) -> Result<CellSolution> {
    budget.validate()?;
    let dim = data.nu.dim();
    let rot = frame_with_normal(&data.nu)?;
    let tangents: Vec<Vector> = (0..dim - 1).map(|k| rot.column(k)).collect();

    let mut best = Layers::coincident(data);
    let mut value = layered_energy(data, dd, &tangents, &best);
    let vd = data.c.dim();
    if value > 0.0 {
        for mid_phase in [0u8, 1] {
            for tie in 0..4usize {
                let build = |x: &[f64]| {
                    let pos = |s: f64| 0.5 * s.tanh();
                    let mut chi_at = [pos(x[0]), pos(x[1])];
                    chi_at.sort_by(f64::total_cmp);
                    let mut u_at = [pos(x[2]), pos(x[3])];
                    u_at.sort_by(f64::total_cmp);
                    if tie & 1 != 0 {
                        u_at[0] = chi_at[0];
                    }
                    if tie & 2 != 0 {
                        u_at[1] = chi_at[1];
                    }
                    if u_at[0] > u_at[1] {
                        u_at.swap(0, 1);
                    }
                    Layers { chi_at, mid_phase, u_at, mid_u: Vector::new(&x[4..]) }
                };
                let mut x0 = vec![-0.4, 0.4, -0.4, 0.4];
                x0.extend((data.c + data.d).scale(0.5).as_slice());
                let bounds: Vec<(f64, f64)> = (0..4)
                    .map(|_| (-2.0, 2.0))
                    .chain((0..vd).map(|j| {
                        let (p, q) = (data.c[j].min(data.d[j]), data.c[j].max(data.d[j]));
                        (p - 1.0, q + 1.0)
                    }))
                    .collect();
                let mut f = |x: &[f64]| layered_energy(data, dd, &tangents, &build(x));
                let runs = multistart(
                    &mut f,
                    &starts(&x0, &bounds, budget.restarts, 0xd5 ^ (tie as u64) << 1 ^ mid_phase as u64),
                    0.5,
                    budget.max_iterations,
                    budget.simplex_tolerance,
                );
                for r in runs {
                    if r.value < value - 1e-12 {
                        value = r.value;
                        best = build(&r.x);
                    }
                }
            }
        }
    }
    if !value.is_finite() {
        return Err(Error::NonFiniteEnergy { value, competitor: best.describe() });
    }
    Ok(CellSolution {
        value,
        frame: None,
        splits: vec![],
        refinement_n: None,
        realized: vec![],
        family: "layered".into(),
        competitor: best.describe(),
        bound_kind: BoundKind::Upper,
    })
}

type PhaseBulkFn = Arc<dyn Fn(u8, &Mat, &Mat) -> f64 + Send + Sync>;
type PhaseSurfaceFn = Arc<dyn Fn(u8, u8, &Vector, &Vector, &Vector) -> f64 + Send + Sync>;

/// Relaxed densities `H(i, A, B)` and `h(a, b, c, d, nu)` of the two-phase
/// energy.
#[derive(Clone)]
pub struct DesignRelaxedDensities {
    bulk: PhaseBulkFn,
    surface: PhaseSurfaceFn,
}

impl fmt::Debug for DesignRelaxedDensities {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("DesignRelaxedDensities")
    }
}

impl DesignRelaxedDensities {
    pub fn new(
        bulk: impl Fn(u8, &Mat, &Mat) -> f64 + Send + Sync + 'static,
        surface: impl Fn(u8, u8, &Vector, &Vector, &Vector) -> f64 + Send + Sync + 'static,
    ) -> Self {
        DesignRelaxedDensities { bulk: Arc::new(bulk), surface: Arc::new(surface) }
    }

    /// Densities from the cell solvers; every evaluation runs an optimization.
    pub fn estimated(dd: DesignDensities, budget: OptimizerBudget) -> Self {
        let (dd2, budget2) = (dd.clone(), budget.clone());
        Self::new(
            move |i, a, b| estimate_h_bulk_design(i, a, b, &dd, &budget).map_or(f64::INFINITY, |s| s.value),
            move |a, b, c, d, nu| {
                DesignBoundaryData::new(a, b, *c, *d, *nu)
                    .and_then(|data| estimate_h_surface_design(&data, &dd2, &budget2))
                    .map_or(f64::INFINITY, |s| s.value)
            },
        )
    }

    pub fn bulk(&self, i: u8, a: &Mat, b: &Mat) -> f64 {
        (self.bulk)(i, a, b)
    }

    pub fn surface(&self, a: u8, b: u8, c: &Vector, d: &Vector, nu: &Vector) -> f64 {
        (self.surface)(a, b, c, d, nu)
    }
}

/// `I(chi, g, G)`: phase-selected `H` on the cells, and `h` on the union of
/// the phase interfaces and the jump set of `g`, with one-sided traces of
/// both fields (equal traces where only one of them jumps).
pub fn relaxed_design_energy(
    chi: &PhaseField,
    sd: &StructuredDeformation,
    tables: &DesignRelaxedDensities,
) -> Result<f64> {
    let g = &sd.g;
    chi.check_mesh(g.mesh())?;
    let vol = g.mesh().cell_volume();
    let mut total: f64 = g
        .cells()
        .iter()
        .zip(&sd.big_g)
        .enumerate()
        .map(|(c, (m, big))| tables.bulk(chi.value(c), &m.gradient, big) * vol)
        .sum();
    for f in g.jump_facets() {
        if let FacetKind::Interior { cell } = f.kind {
            let phase = chi.value(cell);
            total += f.integrate_with_point(|x, l, n| {
                let up = g.eval_cell(cell, x);
                tables.surface(phase, phase, &up, &(up - *l), n)
            });
        }
    }
    for c in 0..g.cells().len() {
        for k in 0..g.dim() {
            let Some(p) = g.mesh().neighbour(c, k, true) else { continue };
            let (hi, lo) = (chi.value(p), chi.value(c));
            let normal = Vector::from_padded(g.dim(), g.mesh().axis_normal(k));
            total += g.integrate_face(c, k, hi == lo, |up, um| tables.surface(hi, lo, up, um, &normal));
        }
    }
    Ok(total)
}
