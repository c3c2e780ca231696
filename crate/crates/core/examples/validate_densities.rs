//! Sampling checks of the structural hypotheses on the built-in densities.

use sdrelax::energy::{
    check_h1, check_h2_h3_h4, check_h5_to_h8, BulkDensity, InterfacePairDensity, SamplingOptions, SurfaceDensity,
};

fn main() {
    let opts = SamplingOptions::default();
    let mut reports = vec![check_h1(&BulkDensity::power_norm(2.0), &opts)];
    for psi in [SurfaceDensity::abs_normal_jump(), SurfaceDensity::jump_norm(), SurfaceDensity::squared_jump_norm()] {
        reports.push(check_h2_h3_h4(&psi, &opts));
    }
    for pair in [InterfacePairDensity::phase_normal_jump(), InterfacePairDensity::signed_normal_jump()] {
        reports.push(check_h5_to_h8(&pair, &opts));
    }
    for r in reports {
        let verdicts: Vec<String> = r.checks.iter().map(|c| format!("{} {:?}", c.hypothesis, c.verdict)).collect();
        println!("{:<22} {}", r.density, verdicts.join(", "));
    }
}
