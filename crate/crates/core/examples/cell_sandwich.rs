//! Exact value, grid oracle and optimized staircase bound for the bulk cell
//! problem of |lambda . nu| and its signed parts.

use sdrelax::cell::{verify_expl, ExplOptions, OptimizerBudget};
use sdrelax::Mat;

fn main() -> sdrelax::Result<()> {
    let a = Mat::new(&[[1.2, -0.4], [0.3, 0.1]]);
    let b = Mat::new(&[[0.2, 0.5], [-0.6, 0.9]]);
    let rows = verify_expl(&a, &b, &OptimizerBudget::default(), &ExplOptions::for_dim(2))?;
    for r in rows {
        println!(
            "{:<5} lower {:.9}  oracle {:.9}  optimizer {:.9}  frame {:?}",
            r.variant.name(),
            r.lower,
            r.mid,
            r.upper,
            r.frame_angles
        );
    }
    Ok(())
}
