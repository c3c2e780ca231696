//! Slipping a deck of cards: g(x) = (x1 + x3, x2, x3), G = I on (0, 1)^3.
//!
//! The layers slide tangentially, so |[u] . nu| vanishes on every facet even
//! though |[u]| does not.

use sdrelax::energy::{energy, DensitySet, SurfaceDensity};
use sdrelax::fields::{deck_of_cards, StructuredDeformation};
use sdrelax::relaxed::tr_m_integral;

fn main() -> sdrelax::Result<()> {
    let sd = StructuredDeformation::deck_of_cards();
    println!("M = {:?}", sd.disarrangement()[0].to_rows());
    println!("int tr M = {}", tr_m_integral(&sd));
    let abs = DensitySet::interfacial(SurfaceDensity::abs_normal_jump());
    let norm = DensitySet::interfacial(SurfaceDensity::jump_norm());
    for n in [1, 2, 4, 8] {
        let u = deck_of_cards(n)?;
        println!("n = {n}: |[u].nu| energy {}, |[u]| energy {:.4}", energy(&u, &abs), energy(&u, &norm));
    }
    Ok(())
}
