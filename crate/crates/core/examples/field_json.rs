//! Builds a field with an oblique jump plane, writes it as JSON and reads it
//! back.

use sdrelax::energy::{energy, DensitySet, SurfaceDensity};
use sdrelax::fields::{CellMap, GridMesh, JumpPlane, PiecewiseField};
use sdrelax::{Mat, Vector};

fn main() -> sdrelax::Result<()> {
    let mesh = GridMesh::unit_box(2, 2)?;
    let cell = CellMap::new(Mat::new(&[[1.0, 0.0], [0.0, 1.0]]), Vector::zeros(2));
    let plane = JumpPlane { cell: 0, normal: Vector::new(&[0.6, 0.8]), offset: 0.3, jump: Vector::new(&[0.1, 0.2]) };
    let u = PiecewiseField::new(mesh, vec![cell; 4], vec![plane], None)?;
    let text = u.to_json()?;
    println!("{text}");
    let back = PiecewiseField::from_json(&text)?;
    let ds = DensitySet::interfacial(SurfaceDensity::jump_norm());
    println!("energy before {} after {}", energy(&u, &ds), energy(&back, &ds));
    Ok(())
}
