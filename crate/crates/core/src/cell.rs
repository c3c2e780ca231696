//! Upper bounds for the relaxation cell formulas.
//!
//! The bulk cell problem `H(A, B)` is attacked with staircase competitors
//! built on an orthonormal frame: gradient `B` everywhere, parallel jump
//! planes along every frame normal, and clamp facets enforcing `u = A x` on
//! `∂Q`. Their energy tends to `sum_i Psi(M nu_i, nu_i) + W(B)` with
//! `M = A - B`, so the frame is chosen by minimizing that limit over the
//! Givens angles. The surface cell problem `h(lambda, nu)` is attacked with
//! piecewise-constant competitors with one to four jump planes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::energy::{cell_energy, BulkDensity, DensitySet, SurfaceDensity};
use crate::error::{Error, Result};
use crate::exact;
use crate::fields::{jump_competitor, oblique_competitor, staircase_sequence};
use crate::frame::{angle_count, frame_cost, frame_with_normal, Frame};
use crate::optim::{multistart, starts, Minimum};
use crate::tensor::{Mat, Vector};

/// Seed of the restart schedule; fixed so that results depend only on the
/// budget.
const RESTART_SEED: u64 = 0x5eed_cafe;

/// Values within this distance of the best are ties.
pub const TIE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerBudget {
    pub restarts: usize,
    /// Iterations per Nelder–Mead run.
    pub max_iterations: usize,
    pub simplex_tolerance: f64,
    /// Refinement indices at which staircase competitors are realized.
    pub n_schedule: Vec<usize>,
}

impl Default for OptimizerBudget {
    fn default() -> Self {
        OptimizerBudget { restarts: 8, max_iterations: 1200, simplex_tolerance: 1e-12, n_schedule: vec![4, 8, 16, 32] }
    }
}

impl OptimizerBudget {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iterations == 0 || !(self.simplex_tolerance > 0.0) {
            return Err(Error::invalid("budget entries must be positive"));
        }
        if self.n_schedule.iter().any(|&n| n == 0) {
            return Err(Error::invalid("refinement indices must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Upper,
}

/// One jump plane of a surface-cell competitor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub normal: Vector,
    pub offset: f64,
    pub fraction: f64,
}

/// Best competitor found for a cell problem, with enough data to rebuild it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSolution {
    pub value: f64,
    pub frame: Option<Frame>,
    pub splits: Vec<Split>,
    /// Refinement index of the realized competitor attaining `value`; `None`
    /// when `value` is the `n -> infinity` limit of the staircase energies.
    pub refinement_n: Option<usize>,
    /// `(n, energy)` of the realized staircase competitors.
    pub realized: Vec<(usize, f64)>,
    pub family: String,
    pub competitor: String,
    pub bound_kind: BoundKind,
}

fn laminate_direction(dim: usize, angles: &[f64]) -> Vector {
    match dim {
        1 => Vector::new(&[1.0]),
        2 => Vector::new(&[angles[0].cos(), angles[0].sin()]),
        _ => {
            let (a, b) = (angles[0], angles[1]);
            Vector::new(&[b.sin() * a.cos(), b.sin() * a.sin(), b.cos()])
        }
    }
}

/// Among near-optimal runs, the one with the lexicographically smallest
/// canonical angles.
fn pick_frame(dim: usize, runs: &[Minimum]) -> Frame {
    let best = runs.iter().map(|m| m.value).fold(f64::INFINITY, f64::min);
    let mut chosen: Option<Frame> = None;
    for m in runs.iter().filter(|m| m.value <= best + TIE_TOL) {
        let f = Frame { dim, angles: m.x.clone() }.canonical();
        let better = match &chosen {
            None => true,
            Some(c) => f.angles.iter().zip(&c.angles).find(|(a, b)| a != b).map_or(false, |(a, b)| a < b),
        };
        if better {
            chosen = Some(f);
        }
    }
    chosen.unwrap_or_else(|| Frame::identity(dim))
}

/// Minimizes `frame_cost(M, ., psi)` over frames with restarted Nelder–Mead.
pub fn optimize_frame(m: &Mat, psi: &SurfaceDensity, budget: &OptimizerBudget) -> Result<(Frame, f64)> {
    let dim = m.cols();
    let k = angle_count(dim);
    if k == 0 {
        return Ok((Frame::identity(dim), frame_cost(m, &Frame::identity(dim), psi)?));
    }
    let bounds = vec![(-PI, PI); k];
    let x0 = vec![0.0; k];
    let mut f = |x: &[f64]| frame_cost(m, &Frame { dim, angles: x.to_vec() }, psi).unwrap_or(f64::INFINITY);
    let runs = multistart(
        &mut f,
        &starts(&x0, &bounds, budget.restarts, RESTART_SEED),
        PI / 8.0,
        budget.max_iterations,
        budget.simplex_tolerance,
    );
    let frame = pick_frame(dim, &runs);
    // re-evaluated so the value matches the returned frame exactly
    let value = frame_cost(m, &frame, psi)?;
    Ok((frame, value))
}

/// `min 1/2 W(B + a⊗mu) + 1/2 W(B - a⊗mu)` over simple laminates, started
/// from `a = 0`, so the result never exceeds `W(B)`.
fn best_laminate(w: &BulkDensity, b: &Mat, budget: &OptimizerBudget) -> (f64, Vector, Vector) {
    let (d, n) = b.shape();
    let dir_params = match n {
        1 => 0,
        2 => 1,
        _ => 2,
    };
    let x0 = vec![0.0; d + dir_params];
    let bounds: Vec<(f64, f64)> = (0..d).map(|_| (-1.0, 1.0)).chain((0..dir_params).map(|_| (0.0, PI))).collect();
    let split = |x: &[f64]| (Vector::new(&x[..d]), laminate_direction(n, &x[d..]));
    let mut f = |x: &[f64]| {
        let (a, mu) = split(x);
        let r = a.outer(&mu);
        0.5 * w.eval(&(*b + r)) + 0.5 * w.eval(&(*b - r))
    };
    let runs = multistart(
        &mut f,
        &starts(&x0, &bounds, budget.restarts, RESTART_SEED ^ 1),
        0.25,
        budget.max_iterations,
        budget.simplex_tolerance,
    );
    let best = runs.iter().min_by(|p, q| p.value.total_cmp(&q.value)).unwrap();
    let (a, mu) = split(&best.x);
    (best.value.min(w.eval(b)), a, mu)
}

/// Upper bound for `H(A, B)` over staircase competitors (with a simple
/// laminate of the bulk gradient when `W` is not zero).
///
/// The returned value is the smaller of the limit energy of the optimal
/// frame and the energies of the competitors realized along
/// `budget.n_schedule`.
pub fn estimate_h_bulk(a: &Mat, b: &Mat, ds: &DensitySet, budget: &OptimizerBudget) -> Result<CellSolution> {
    budget.validate()?;
    if a.shape() != b.shape() {
        return Err(Error::dims("A and B must have the same shape"));
    }
    let m = a.try_sub(b)?;
    let (frame, surface) = optimize_frame(&m, &ds.surface, budget)?;
    let (bulk, lam_a, lam_mu) = if ds.bulk.is_zero() {
        (0.0, Vector::zeros(a.rows()), Vector::unit(a.cols(), 0))
    } else {
        best_laminate(&ds.bulk, b, budget)
    };
    let limit = surface + bulk;
    let mut realized = Vec::with_capacity(budget.n_schedule.len());
    for &n in &budget.n_schedule {
        let u = staircase_sequence(a, b, &frame, n)?;
        let e = cell_energy(&u, ds);
        if !e.is_finite() {
            return Err(Error::NonFiniteEnergy { value: e, competitor: u.to_json()? });
        }
        realized.push((n, e));
    }
    let mut value = limit;
    let mut refinement_n = None;
    for &(n, e) in &realized {
        if e < value {
            value = e;
            refinement_n = Some(n);
        }
    }
    if !value.is_finite() {
        return Err(Error::NonFiniteEnergy {
            value,
            competitor: format!("staircase on frame {:?}", frame.angles),
        });
    }
    let laminate = lam_a.max_abs() > 0.0;
    let family = if laminate { "staircase+laminate" } else { "staircase" };
    let mut competitor = format!("staircase on frame angles {:?}", frame.angles);
    if laminate {
        competitor.push_str(&format!(
            " with gradients B ± a⊗mu, a = {:?}, mu = {:?}",
            lam_a.as_slice(),
            lam_mu.as_slice()
        ));
    }
    Ok(CellSolution {
        value,
        frame: Some(frame),
        splits: vec![],
        refinement_n,
        realized,
        family: family.into(),
        competitor,
        bound_kind: BoundKind::Upper,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub value: f64,
    pub frame: Frame,
}

fn grid_axis(lo: f64, hi: f64, count: usize, closed: bool) -> Vec<f64> {
    let steps = if closed { count.max(2) - 1 } else { count.max(1) };
    (0..count.max(1)).map(|j| lo + (hi - lo) * j as f64 / steps as f64).collect()
}

fn grid_search(axes: &[Vec<f64>], mut f: impl FnMut(&[f64]) -> f64) -> (Vec<f64>, f64) {
    let mut best = (vec![], f64::INFINITY);
    let mut x = vec![0.0; axes.len()];
    let mut idx = vec![0usize; axes.len()];
    loop {
        for (k, &i) in idx.iter().enumerate() {
            x[k] = axes[k][i];
        }
        let v = f(&x);
        if v < best.1 {
            best = (x.clone(), v);
        }
        let mut k = 0;
        loop {
            if k == axes.len() {
                return best;
            }
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Brute-force minimum of `frame_cost(M, ., psi)` over a uniform grid of
/// Givens angles with `resolution` points per angle, followed by a second
/// grid of the same size spanning one coarse step around the best point.
pub fn frame_oracle(m: &Mat, psi: &SurfaceDensity, resolution: usize) -> Result<OracleResult> {
    let dim = m.cols();
    if resolution == 0 {
        return Err(Error::invalid("grid resolution must be positive"));
    }
    let cost = |x: &[f64]| frame_cost(m, &Frame { dim, angles: x.to_vec() }, psi).unwrap_or(f64::INFINITY);
    let (coarse, steps): (Vec<Vec<f64>>, Vec<f64>) = match dim {
        1 => {
            let frame = Frame::identity(1);
            return Ok(OracleResult { value: frame_cost(m, &frame, psi)?, frame });
        }
        2 => (vec![grid_axis(0.0, 2.0 * PI, resolution, false)], vec![2.0 * PI / resolution as f64]),
        _ => {
            let full = grid_axis(0.0, 2.0 * PI, resolution, false);
            let half = grid_axis(-PI / 2.0, PI / 2.0, resolution, true);
            let s = 2.0 * PI / resolution as f64;
            (vec![full.clone(), half, full], vec![s, PI / (resolution.max(2) - 1) as f64, s])
        }
    };
    let (x1, v1) = grid_search(&coarse, cost);
    let fine: Vec<Vec<f64>> =
        x1.iter().zip(&steps).map(|(c, h)| grid_axis(c - h, c + h, resolution, true)).collect();
    let (x2, v2) = grid_search(&fine, cost);
    let (x, value) = if v2 < v1 { (x2, v2) } else { (x1, v1) };
    Ok(OracleResult { value, frame: Frame { dim, angles: x } })
}

fn competitor_energy(lambda: &Vector, nu: &Vector, planes: &[(Vector, f64, f64)], ds: &DensitySet) -> f64 {
    match oblique_competitor(lambda, nu, planes) {
        Ok(u) => cell_energy(&u, ds),
        Err(_) => f64::INFINITY,
    }
}

fn softmax(x: &[f64]) -> Vec<f64> {
    let m = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = x.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

/// Plane offsets stay strictly inside the cube.
fn offset_of(s: f64) -> f64 {
    0.49 * s.tanh()
}

fn parallel_planes(nu: &Vector, x: &[f64]) -> Vec<(Vector, f64, f64)> {
    let k = x.len() / 2;
    let fr = softmax(&x[..k]);
    (0..k).map(|j| (*nu, offset_of(x[k + j]), fr[j])).collect()
}

fn oblique_planes(nu: &Vector, tangent: &Vector, x: &[f64]) -> Vec<(Vector, f64, f64)> {
    let sigma = 1.0 / (1.0 + (-x[4]).exp());
    let normal = |phi: f64| (nu.scale(phi.cos()) + tangent.scale(phi.sin())).normalized().unwrap_or(*nu);
    vec![(normal(x[0]), offset_of(x[2]), sigma), (normal(x[1]), offset_of(x[3]), 1.0 - sigma)]
}

/// Upper bound for `h(lambda, nu)`: the single midplane jump, two to four
/// parallel jumps with optimized fractions and offsets, and two oblique
/// planes with optimized tilts. Clamp facets charge any boundary mismatch.
pub fn estimate_h_surface(
    lambda: &Vector,
    nu: &Vector,
    psi: &SurfaceDensity,
    budget: &OptimizerBudget,
) -> Result<CellSolution> {
    budget.validate()?;
    if !nu.is_unit(1e-12) {
        return Err(Error::NonUnitNormal(nu.norm()));
    }
    let ds = DensitySet::interfacial(psi.clone());
    let single = jump_competitor(lambda, nu, &[(1.0, 0.0)])?;
    let single_value = cell_energy(&single, &ds);
    let mut candidates: Vec<(f64, Vec<(Vector, f64, f64)>, String)> = vec![];
    if single_value > 0.0 {
        for k in 2..=4 {
            let mut x0 = vec![0.0; 2 * k];
            for j in 0..k {
                let t = -0.25 + 0.5 * j as f64 / (k - 1) as f64;
                x0[k + j] = (t / 0.49).atanh();
            }
            let bounds = vec![(-2.0, 2.0); 2 * k];
            let mut f = |x: &[f64]| competitor_energy(lambda, nu, &parallel_planes(nu, x), &ds);
            let runs = multistart(
                &mut f,
                &starts(&x0, &bounds, budget.restarts, RESTART_SEED ^ k as u64),
                0.5,
                budget.max_iterations,
                budget.simplex_tolerance,
            );
            let best = runs.iter().min_by(|p, q| p.value.total_cmp(&q.value)).unwrap();
            candidates.push((best.value, parallel_planes(nu, &best.x), format!("parallel-{k}")));
        }
        if nu.dim() >= 2 {
            let rot = frame_with_normal(nu)?;
            let tangential = *lambda - nu.scale(lambda.dot(nu));
            let tangent = if lambda.dim() == nu.dim() && tangential.norm() > 1e-12 {
                tangential.normalized()?
            } else {
                rot.column(0)
            };
            let x0 = [0.2, -0.2, 0.0, 0.0, 0.0];
            let bounds = [(-1.0, 1.0), (-1.0, 1.0), (-2.0, 2.0), (-2.0, 2.0), (-2.0, 2.0)];
            let mut f = |x: &[f64]| competitor_energy(lambda, nu, &oblique_planes(nu, &tangent, x), &ds);
            let runs = multistart(
                &mut f,
                &starts(&x0, &bounds, budget.restarts, RESTART_SEED ^ 7),
                0.25,
                budget.max_iterations,
                budget.simplex_tolerance,
            );
            let best = runs.iter().min_by(|p, q| p.value.total_cmp(&q.value)).unwrap();
            candidates.push((best.value, oblique_planes(nu, &tangent, &best.x), "oblique-pair".into()));
        }
    }
    let (mut value, mut planes, mut family) = (single_value, vec![(*nu, 0.0, 1.0)], "single".to_string());
    for (v, p, name) in candidates {
        if v < value - 1e-12 {
            value = v;
            planes = p;
            family = name;
        }
    }
    let splits: Vec<Split> =
        planes.into_iter().map(|(normal, offset, fraction)| Split { normal, offset, fraction }).collect();
    let competitor = splits
        .iter()
        .map(|s| format!("{:.6} lambda on x.{:?} = {:.6}", s.fraction, s.normal.as_slice(), s.offset))
        .collect::<Vec<_>>()
        .join("; ");
    Ok(CellSolution {
        value,
        frame: None,
        splits,
        refinement_n: None,
        realized: vec![],
        family,
        competitor,
        bound_kind: BoundKind::Upper,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Abs,
    Plus,
    Minus,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Abs, Variant::Plus, Variant::Minus];

    pub fn density(self) -> SurfaceDensity {
        match self {
            Variant::Abs => SurfaceDensity::abs_normal_jump(),
            Variant::Plus => SurfaceDensity::positive_normal_jump(),
            Variant::Minus => SurfaceDensity::negative_normal_jump(),
        }
    }

    pub fn exact(self, a: &Mat, b: &Mat) -> Result<f64> {
        match self {
            Variant::Abs => exact::relaxed_bulk_abs(a, b),
            Variant::Plus => exact::relaxed_bulk_plus(a, b),
            Variant::Minus => exact::relaxed_bulk_minus(a, b),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Abs => "abs",
            Variant::Plus => "plus",
            Variant::Minus => "minus",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichRow {
    pub variant: Variant,
    pub lower: f64,
    pub mid: f64,
    pub upper: f64,
    pub mid_gap: f64,
    pub upper_gap: f64,
    pub oracle_angles: Vec<f64>,
    pub frame_angles: Vec<f64>,
    pub refinement_n: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplOptions {
    pub grid_resolution: usize,
    pub tolerance: f64,
}

impl ExplOptions {
    pub fn for_dim(dim: usize) -> Self {
        ExplOptions { grid_resolution: if dim >= 3 { 60 } else { 720 }, tolerance: 1e-6 }
    }
}

/// Exact value, frame-grid oracle and optimizer estimate of the purely
/// interfacial bulk density, for `|.|` and both signed parts. Fails when an
/// estimate falls below the exact value by more than the tolerance.
pub fn verify_expl(a: &Mat, b: &Mat, budget: &OptimizerBudget, opts: &ExplOptions) -> Result<Vec<SandwichRow>> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(Error::dims("A and B must be square of the same size"));
    }
    let m = a.try_sub(b)?;
    Variant::ALL
        .iter()
        .map(|&variant| {
            let psi = variant.density();
            let lower = variant.exact(a, b)?;
            let oracle = frame_oracle(&m, &psi, opts.grid_resolution)?;
            let est = estimate_h_bulk(a, b, &DensitySet::interfacial(psi), budget)?;
            let row = SandwichRow {
                variant,
                lower,
                mid: oracle.value,
                upper: est.value,
                mid_gap: oracle.value - lower,
                upper_gap: est.value - lower,
                oracle_angles: oracle.frame.angles,
                frame_angles: est.frame.map(|f| f.angles).unwrap_or_default(),
                refinement_n: est.refinement_n,
            };
            if row.mid_gap < -opts.tolerance || row.upper_gap < -opts.tolerance {
                return Err(Error::SandwichViolation(format!(
                    "{}: lower {} mid {} upper {}",
                    variant.name(),
                    row.lower,
                    row.mid,
                    row.upper
                )));
            }
            Ok(row)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> OptimizerBudget {
        OptimizerBudget { restarts: 3, max_iterations: 400, simplex_tolerance: 1e-12, n_schedule: vec![4, 8] }
    }

    #[test]
    fn bulk_cell_examples() {
        let abs = DensitySet::interfacial(SurfaceDensity::abs_normal_jump());
        let a = Mat::new(&[[1.0, 0.4], [-0.3, 2.0]]);
        let s = estimate_h_bulk(&a, &a, &abs, &quick()).unwrap();
        assert_eq!(s.value, 0.0);

        let b = Mat::new(&[[0.2, 1.0], [0.5, -0.7]]);
        let s = estimate_h_bulk(&a, &b, &abs, &quick()).unwrap();
        assert!((s.value - (a - b).trace().abs()).abs() < 1e-9, "{}", s.value);
        assert_eq!(s.bound_kind, BoundKind::Upper);

        let norm = DensitySet::interfacial(SurfaceDensity::jump_norm());
        let s = estimate_h_bulk(&Mat::diag(&[2.0]), &Mat::diag(&[1.0]), &norm, &quick()).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
        // realized competitors: (n - 1)/n inside plus the clamp 1/n
        for (n, e) in &s.realized {
            assert!((e - 1.0).abs() < 1e-12, "n = {n}: {e}");
        }
    }

    #[test]
    fn oracle_examples() {
        let abs = SurfaceDensity::abs_normal_jump();
        let r = frame_oracle(&Mat::diag(&[1.0, -1.0]), &abs, 720).unwrap();
        assert!(r.value < 1e-12);
        let r = frame_oracle(&Mat::identity(2), &abs, 720).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        let shear = Vector::unit(3, 0).outer(&Vector::unit(3, 2));
        assert!(frame_oracle(&shear, &abs, 60).unwrap().value < 1e-12);
        let r = frame_oracle(&Mat::diag(&[3.0]), &abs, 10).unwrap();
        assert_eq!(r.value, 3.0);
    }

    #[test]
    fn surface_cell_examples() {
        let abs = SurfaceDensity::abs_normal_jump();
        let nu = Vector::new(&[0.6, 0.8]);
        let s = estimate_h_surface(&Vector::zeros(2), &nu, &abs, &quick()).unwrap();
        assert_eq!(s.value, 0.0);
        let lambda = Vector::new(&[1.5, -0.4]);
        let s = estimate_h_surface(&lambda, &nu, &abs, &quick()).unwrap();
        assert!((s.value - lambda.dot(&nu).abs()).abs() < 1e-9);
        let s = estimate_h_surface(&lambda, &nu, &SurfaceDensity::jump_norm(), &quick()).unwrap();
        assert!((s.value - lambda.norm()).abs() < 1e-9);
        assert_eq!(s.family, "single");
    }

    #[test]
    fn sandwich_on_pure_shear() {
        let b = Mat::identity(2);
        let a = b + Mat::diag(&[1.0, -1.0]);
        let rows = verify_expl(&a, &b, &quick(), &ExplOptions::for_dim(2)).unwrap();
        assert!(rows.iter().all(|r| r.mid_gap <= 1e-6 && r.upper_gap <= 1e-6));
    }
}
