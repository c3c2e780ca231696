//! Staircase approximations of g(x) = 2x with G = 1 on (0, 1).
//!
//! Prints the table of the `sequence` command: the L1 error halves with n,
//! and the jump energy under |lambda| approaches |tr(2 - 1)| = 1.

use sdrelax::energy::{DensitySet, SurfaceDensity};
use sdrelax::fields::{sequence_report, StructuredDeformation};
use sdrelax::Frame;

fn main() -> sdrelax::Result<()> {
    let sd = StructuredDeformation::broken_ramp();
    let ds = DensitySet::interfacial(SurfaceDensity::jump_norm());
    println!("{:>4} {:>12} {:>12} {:>12}", "n", "l1_error", "singular_tv", "energy");
    for r in sequence_report(&sd, &Frame::identity(1), &[1, 2, 4, 8, 16, 32], &ds)? {
        println!("{:>4} {:>12.6} {:>12.6} {:>12.6}", r.n, r.l1_error, r.singular_tv, r.energy);
    }
    Ok(())
}
