//! Piecewise-affine fields with explicit jump sets, and the sequences built
//! from them.

mod field;
mod mesh;
mod sequences;

pub use field::{BoundaryDatum, CellMap, Facet, FacetKind, JumpPlane, PiecewiseField, FIELD_FORMAT_VERSION, JUMP_TOL};
pub use mesh::GridMesh;
pub use sequences::{
    broken_ramp, deck_of_cards, jump_competitor, oblique_competitor, sequence_report, staircase_on,
    staircase_sequence, validate_dpo, DpoCell, DpoReport, SequenceReport, StructuredDeformation,
};
