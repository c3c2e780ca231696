//! V^± = V/2 ± T/2 for the relaxed energies of |.| and its signed parts.

use sdrelax::fields::StructuredDeformation;
use sdrelax::relaxed::{random_structured_deformation, verify_vpm_identity};

fn main() -> sdrelax::Result<()> {
    let mut cases = vec![
        ("broken ramp".to_string(), StructuredDeformation::broken_ramp()),
        ("deck of cards".to_string(), StructuredDeformation::deck_of_cards()),
    ];
    for seed in 0..3 {
        cases.push((format!("random 4x4x4 #{seed}"), random_structured_deformation(3, 4, seed)?));
    }
    for (name, sd) in cases {
        let r = verify_vpm_identity(&sd)?;
        println!(
            "{name:<18} V {:>10.6}  V+ {:>10.6}  V- {:>10.6}  int tr M {:>10.6}  residual {:.1e}",
            r.v_abs, r.v_plus, r.v_minus, r.tr_m_integral, r.residual
        );
    }
    Ok(())
}
