//! The relaxed energy `I(g, G) = int H(grad g, G) dx + int_{S(g)} h([g], nu)`
//! of a structured deformation, and the identity relating the signed
//! energies `V^±` to `V^{|.|}`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cell::{estimate_h_bulk, estimate_h_surface, OptimizerBudget};
use crate::energy::DensitySet;
use crate::error::{Error, Result};
use crate::exact;
use crate::fields::{CellMap, GridMesh, PiecewiseField, StructuredDeformation};
use crate::tensor::{Mat, Vector};

/// Relative tolerance of [`verify_vpm_identity`].
pub const IDENTITY_TOL: f64 = 1e-9;

type BulkFn = Arc<dyn Fn(&Mat, &Mat) -> f64 + Send + Sync>;
type SurfaceFn = Arc<dyn Fn(&Vector, &Vector) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ExactExpl,
    CellEstimated,
}

/// Relaxed bulk density `H(A, B)` and surface density `h(lambda, nu)`.
#[derive(Clone)]
pub struct RelaxedDensityPair {
    bulk: BulkFn,
    surface: SurfaceFn,
    pub provenance: Provenance,
}

impl fmt::Debug for RelaxedDensityPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RelaxedDensityPair({:?})", self.provenance)
    }
}

impl RelaxedDensityPair {
    pub fn new(
        bulk: impl Fn(&Mat, &Mat) -> f64 + Send + Sync + 'static,
        surface: impl Fn(&Vector, &Vector) -> f64 + Send + Sync + 'static,
        provenance: Provenance,
    ) -> Self {
        RelaxedDensityPair { bulk: Arc::new(bulk), surface: Arc::new(surface), provenance }
    }

    /// `H = |tr(A - B)|`, `h = |lambda . nu|`.
    pub fn exact_abs() -> Self {
        Self::new(|a, b| (*a - *b).trace().abs(), |l, n| l.dot(n).abs(), Provenance::ExactExpl)
    }

    pub fn exact_plus() -> Self {
        Self::new(
            |a, b| exact::positive_part((*a - *b).trace()),
            |l, n| exact::positive_part(l.dot(n)),
            Provenance::ExactExpl,
        )
    }

    pub fn exact_minus() -> Self {
        Self::new(
            |a, b| exact::negative_part((*a - *b).trace()),
            |l, n| exact::negative_part(l.dot(n)),
            Provenance::ExactExpl,
        )
    }

    /// Both densities computed by the cell solvers. Each evaluation runs an
    /// optimization, so this is only meant for small fields.
    pub fn cell_estimated(ds: DensitySet, budget: OptimizerBudget) -> Self {
        let (ds2, budget2) = (ds.clone(), budget.clone());
        Self::new(
            move |a, b| estimate_h_bulk(a, b, &ds, &budget).map_or(f64::INFINITY, |s| s.value),
            move |l, n| estimate_h_surface(l, n, &ds2.surface, &budget2).map_or(f64::INFINITY, |s| s.value),
            Provenance::CellEstimated,
        )
    }

    pub fn bulk(&self, a: &Mat, b: &Mat) -> f64 {
        (self.bulk)(a, b)
    }

    pub fn surface(&self, lambda: &Vector, nu: &Vector) -> f64 {
        (self.surface)(lambda, nu)
    }
}

/// Bulk part of [`relaxed_energy`].
pub fn relaxed_bulk_energy(sd: &StructuredDeformation, pair: &RelaxedDensityPair) -> f64 {
    let vol = sd.g.mesh().cell_volume();
    sd.g.cells().iter().zip(&sd.big_g).map(|(c, g)| pair.bulk(&c.gradient, g) * vol).sum()
}

/// Surface part of [`relaxed_energy`]: `h` integrated over the jump set of
/// `g` only.
pub fn relaxed_surface_energy(sd: &StructuredDeformation, pair: &RelaxedDensityPair) -> f64 {
    sd.g.jump_facets().map(|f| f.integrate(|l, n| pair.surface(l, n))).sum()
}

pub fn relaxed_energy(sd: &StructuredDeformation, pair: &RelaxedDensityPair) -> f64 {
    relaxed_bulk_energy(sd, pair) + relaxed_surface_energy(sd, pair)
}

/// `int tr M dx`.
pub fn tr_m_integral(sd: &StructuredDeformation) -> f64 {
    let vol = sd.g.mesh().cell_volume();
    sd.disarrangement().iter().map(|m| m.trace() * vol).sum()
}

/// `int_{S(g)} [g] . nu dH^{N-1}`; zero when `g` has no jumps.
pub fn jump_trace_integral(sd: &StructuredDeformation) -> f64 {
    if sd.g.value_dim() != sd.g.dim() {
        return 0.0;
    }
    sd.g.jump_facets().map(|f| f.integrate(|l, n| l.dot(n))).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VpmReport {
    pub v_abs: f64,
    pub v_plus: f64,
    pub v_minus: f64,
    pub tr_m_integral: f64,
    /// `int_{S(g)} [g] . nu`, which joins `int tr M` when `g` jumps.
    pub jump_trace_integral: f64,
    /// Largest relative residual of the two signed identities.
    pub residual: f64,
    /// `|V^+ + V^- - V^{|.|}|`.
    pub sum_residual: f64,
}

/// Checks `V^± = 1/2 V^{|.|} ± 1/2 T` with `T = int tr M dx + int_{S(g)} [g] . nu`.
///
/// For `g` without jumps `T` is the integral of `tr M`.
pub fn verify_vpm_identity(sd: &StructuredDeformation) -> Result<VpmReport> {
    if sd.g.value_dim() != sd.g.dim() {
        return Err(Error::dims("the identity needs square gradients"));
    }
    let v_abs = relaxed_energy(sd, &RelaxedDensityPair::exact_abs());
    let v_plus = relaxed_energy(sd, &RelaxedDensityPair::exact_plus());
    let v_minus = relaxed_energy(sd, &RelaxedDensityPair::exact_minus());
    let tr = tr_m_integral(sd);
    let jt = jump_trace_integral(sd);
    let t = tr + jt;
    let scale = v_abs.abs().max(t.abs());
    let rel = |x: f64| if scale > 0.0 { x / scale } else { x };
    let residual = rel((v_plus - 0.5 * (v_abs + t)).abs()).max(rel((v_minus - 0.5 * (v_abs - t)).abs()));
    let report = VpmReport {
        v_abs,
        v_plus,
        v_minus,
        tr_m_integral: tr,
        jump_trace_integral: jt,
        residual,
        sum_residual: (v_plus + v_minus - v_abs).abs(),
    };
    if !(residual <= IDENTITY_TOL) {
        return Err(Error::IdentityViolation(format!("relative residual {residual:e}")));
    }
    Ok(report)
}

/// A random piecewise-affine `g` on `(0, 1)^N` with `resolution` cells per
/// axis and a random `G` per cell, entries uniform in `[-1, 1]`. Neighbouring
/// cells disagree, so `g` jumps across every interior face.
pub fn random_structured_deformation(dim: usize, resolution: usize, seed: u64) -> Result<StructuredDeformation> {
    let mesh = GridMesh::unit_box(dim, resolution)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect() };
    let mat = |e: Vec<f64>| Mat::from_rows(&e.chunks(dim).map(|r| r.to_vec()).collect::<Vec<_>>());
    let count = mesh.cell_count();
    let mut cells = Vec::with_capacity(count);
    let mut big_g = Vec::with_capacity(count);
    for _ in 0..count {
        cells.push(CellMap::new(mat(entries(dim * dim))?, Vector::from_slice(&entries(dim))?));
        big_g.push(mat(entries(dim * dim))?);
    }
    let g = PiecewiseField::new(mesh, cells, vec![], None)?;
    StructuredDeformation::new(g, big_g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relaxed_energy_examples() {
        let abs = RelaxedDensityPair::exact_abs();
        assert!((relaxed_energy(&StructuredDeformation::broken_ramp(), &abs) - 1.0).abs() < 1e-15);
        assert_eq!(relaxed_energy(&StructuredDeformation::deck_of_cards(), &abs), 0.0);
        let a = Mat::new(&[[1.0, 2.0], [0.5, -1.0]]);
        let g = PiecewiseField::affine(GridMesh::unit_box(2, 3).unwrap(), a, Vector::zeros(2)).unwrap();
        let sd = StructuredDeformation::uniform(g, a).unwrap();
        assert_eq!(relaxed_energy(&sd, &abs), 0.0);
        assert_eq!(tr_m_integral(&sd), 0.0);
    }

    #[test]
    fn identity_on_examples() {
        let r = verify_vpm_identity(&StructuredDeformation::broken_ramp()).unwrap();
        assert_eq!((r.v_abs, r.v_plus, r.v_minus, r.tr_m_integral), (1.0, 1.0, 0.0, 1.0));
        let r = verify_vpm_identity(&StructuredDeformation::deck_of_cards()).unwrap();
        assert_eq!(r.tr_m_integral, 0.0);
        for seed in 0..3 {
            let sd = random_structured_deformation(2, 4, seed).unwrap();
            let r = verify_vpm_identity(&sd).unwrap();
            assert!(r.sum_residual < 1e-12);
            assert!(r.jump_trace_integral != 0.0);
        }
    }

    #[test]
    fn identity_without_jump_term_fails_on_jumps() {
        let sd = random_structured_deformation(2, 4, 11).unwrap();
        let r = verify_vpm_identity(&sd).unwrap();
        let naive = 0.5 * r.v_abs + 0.5 * r.tr_m_integral;
        assert!((r.v_plus - naive).abs() > 1e-6);
    }

    #[test]
    fn cell_estimated_pair_matches_exact() {
        let budget = OptimizerBudget { restarts: 2, max_iterations: 300, n_schedule: vec![4], ..Default::default() };
        let est = RelaxedDensityPair::cell_estimated(
            DensitySet::interfacial(crate::energy::SurfaceDensity::abs_normal_jump()),
            budget,
        );
        let sd = StructuredDeformation::broken_ramp();
        assert!((relaxed_energy(&sd, &est) - 1.0).abs() < 1e-9);
    }
}
