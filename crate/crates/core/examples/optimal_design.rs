//! Two-phase energies on a 2 x 2 mesh and the surface cell problem of the
//! phase/deformation interface.

use sdrelax::cell::OptimizerBudget;
use sdrelax::energy::{DensitySet, DesignDensities, InterfacePairDensity, SurfaceDensity};
use sdrelax::fields::{CellMap, GridMesh, PiecewiseField};
use sdrelax::optdesign::{design_energy, estimate_h_surface_design, DesignBoundaryData, PhaseField};
use sdrelax::{Mat, Vector};

fn main() -> sdrelax::Result<()> {
    let dd = DesignDensities::uniform(
        &DensitySet::interfacial(SurfaceDensity::abs_normal_jump()),
        InterfacePairDensity::phase_normal_jump(),
    );
    let mesh = GridMesh::unit_cube(2, 2)?;
    let chi = PhaseField::from_fn(mesh.clone(), |x| (x[0] > 0.0) as u8)?;
    let cells = (0..4)
        .map(|c| CellMap::new(Mat::zeros(2, 2), if c % 2 == 1 { Vector::new(&[0.5, 0.0]) } else { Vector::zeros(2) }))
        .collect();
    let u = PiecewiseField::new(mesh, cells, vec![], None)?;
    println!("perimeter {}, E(chi, u) = {}", chi.perimeter(), design_energy(&chi, &u, &dd)?);

    let budget = OptimizerBudget { restarts: 3, ..Default::default() };
    let nu = Vector::new(&[0.0, 1.0]);
    let c = Vector::new(&[0.3, 0.4]);
    for (a, b, d) in [(1, 1, c), (1, 0, c), (1, 0, Vector::zeros(2))] {
        let data = DesignBoundaryData::new(a, b, c, d, nu)?;
        let s = estimate_h_surface_design(&data, &dd, &budget)?;
        println!("h({a}, {b}, c, {:?}) <= {:.6}  {}", d.as_slice(), s.value, s.competitor);
    }
    Ok(())
}
