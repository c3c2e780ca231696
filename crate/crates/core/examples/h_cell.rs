//! Surface cell problem: a jump lambda across the plane x . nu = 0.
//!
//! For |lambda . nu| and |lambda| the single midplane jump is optimal; for
//! the non-homogeneous |lambda|^2 splitting the jump pays off.

use sdrelax::cell::{estimate_h_surface, OptimizerBudget};
use sdrelax::energy::SurfaceDensity;
use sdrelax::Vector;

fn main() -> sdrelax::Result<()> {
    let lambda = Vector::new(&[1.0, 2.0]);
    let nu = Vector::new(&[0.6, 0.8]);
    let budget = OptimizerBudget { restarts: 3, max_iterations: 400, ..Default::default() };
    for psi in [SurfaceDensity::abs_normal_jump(), SurfaceDensity::jump_norm(), SurfaceDensity::squared_jump_norm()] {
        let s = estimate_h_surface(&lambda, &nu, &psi, &budget)?;
        println!("{:<20} psi = {:.6}  h <= {:.6}  ({})", psi.name(), psi.eval(&lambda, &nu), s.value, s.family);
    }
    Ok(())
}
