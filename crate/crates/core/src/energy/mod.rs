//! Energy densities, the energy of a piecewise-affine field, and sampling
//! validators for the structural hypotheses on the densities.

mod densities;
mod hypotheses;

pub use densities::{BulkDensity, DensitySet, DesignDensities, InterfacePairDensity, SurfaceDensity};
pub use hypotheses::{
    check_h1, check_h2_h3_h4, check_h5_to_h8, Check, HypothesisReport, SamplingOptions, Verdict,
};

use crate::fields::PiecewiseField;

/// `int W(grad u) dx + int_{S(u)} psi([u], nu) dH^{N-1}` over the domain.
/// Clamp facets on the boundary are not part of `S(u)`; see [`cell_energy`].
pub fn energy(u: &PiecewiseField, ds: &DensitySet) -> f64 {
    bulk_energy(u, ds) + u.jump_measure(|j, n| ds.surface.eval(j, n))
}

pub fn bulk_energy(u: &PiecewiseField, ds: &DensitySet) -> f64 {
    if ds.bulk.is_zero() {
        return 0.0;
    }
    let vol = u.mesh().cell_volume();
    u.cells().iter().map(|c| ds.bulk.eval(&c.gradient) * vol).sum()
}

/// Surface energy of the boundary mismatch with the prescribed datum.
pub fn clamp_energy(u: &PiecewiseField, ds: &DensitySet) -> f64 {
    u.clamp_measure(|j, n| ds.surface.eval(j, n))
}

/// Energy of a cell-problem competitor: [`energy`] plus [`clamp_energy`].
pub fn cell_energy(u: &PiecewiseField, ds: &DensitySet) -> f64 {
    energy(u, ds) + clamp_energy(u, ds)
}
