//! Acceptance suite: one line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test --test acceptance`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use sdrelax::cell::{estimate_h_bulk, estimate_h_surface, frame_oracle, OptimizerBudget};
use sdrelax::cli::{run, ExperimentConfig};
use sdrelax::energy::{
    cell_energy, check_h2_h3_h4, check_h5_to_h8, energy, BulkDensity, DensitySet, DesignDensities,
    InterfacePairDensity, SamplingOptions, SurfaceDensity, Verdict,
};
use sdrelax::exact;
use sdrelax::fields::{
    deck_of_cards, jump_competitor, oblique_competitor, staircase_sequence, StructuredDeformation,
};
use sdrelax::frame::frame_cost;
use sdrelax::optdesign::{design_energy, estimate_h_bulk_design, estimate_h_surface_design, DesignBoundaryData, PhaseField};
use sdrelax::relaxed::{random_structured_deformation, tr_m_integral, verify_vpm_identity};
use sdrelax::{Mat, Vector};

const JOBS: usize = 4;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn pool() -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(JOBS).build().unwrap()
}

fn config(v: serde_json::Value) -> ExperimentConfig {
    serde_json::from_value(v).unwrap()
}

/// Data rows of a CSV artifact as numbers (first column is an index).
fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(2).map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect()).collect()
}

fn random_mat(rng: &mut ChaCha8Rng, dim: usize) -> Mat {
    let rows: Vec<Vec<f64>> = (0..dim).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    Mat::from_rows(&rows).unwrap()
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    loop {
        let v = Vector::new(&(0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>());
        if v.norm() > 1e-2 {
            return v.normalized().unwrap();
        }
    }
}

fn broken_ramp() -> Outcome {
    let cfg = config(json!({"command": "sequence", "example": "broken-ramp", "n": [1, 2, 4, 8, 16, 32]}));
    let rows = csv_rows(&run(&cfg, 1).unwrap().text);
    let mut worst: f64 = 0.0;
    for r in &rows {
        let n = r[0];
        worst = worst
            .max((r[1] - 1.0 / (2.0 * n)).abs())
            .max((r[2] - (n - 1.0) / n).abs())
            .max((r[3] - (n - 1.0) / n).abs());
    }
    // energies (n - 1)/n = 1 - 1/n: the limit from the last two terms
    let (e16, e32) = (rows[4][3], rows[5][3]);
    let limit = 2.0 * e32 - e16;
    let exact = exact::relaxed_bulk_abs(&Mat::diag(&[2.0]), &Mat::diag(&[1.0])).unwrap();
    let pass = rows.len() == 6 && worst <= 1e-10 && (limit - exact).abs() <= 1e-10;
    outcome(pass, format!("max deviation {worst:.1e}, extrapolated limit {limit}, exact {exact}"))
}

fn deck_of_cards_case() -> Outcome {
    let abs = DensitySet::interfacial(SurfaceDensity::abs_normal_jump());
    let energies: Vec<f64> = [1, 2, 4, 8, 16, 32].iter().map(|&n| energy(&deck_of_cards(n).unwrap(), &abs)).collect();
    let sd = StructuredDeformation::deck_of_cards();
    let m = sd.disarrangement()[0];
    let shear = Vector::unit(3, 0).outer(&Vector::unit(3, 2));
    let tr = tr_m_integral(&sd);
    let pass = energies.iter().all(|&e| e == 0.0) && m == shear && tr.abs() <= 1e-12;
    outcome(pass, format!("energies {energies:?}, tr M integral {tr}"))
}

fn sandwich_pairs(seed: u64, dim: usize, count: usize) -> Vec<(Mat, Mat)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (random_mat(&mut rng, dim), random_mat(&mut rng, dim))).collect()
}

fn sandwich() -> Outcome {
    let psi = SurfaceDensity::abs_normal_jump();
    let ds = DensitySet::interfacial(psi.clone());
    let budget = OptimizerBudget { n_schedule: vec![4, 8], ..Default::default() };
    let mut details = Vec::new();
    let mut pass = true;
    for (dim, count, grid, oracle_tol, nm_tol) in [(2, 100, 720, 1e-6, 1e-5), (3, 25, 60, 5e-3, 1e-3)] {
        let pairs = sandwich_pairs(2024 + dim as u64, dim, count);
        let rows: Vec<(f64, f64, f64)> = pool().install(|| {
            pairs
                .par_iter()
                .map(|(a, b)| {
                    let lower = exact::relaxed_bulk_abs(a, b).unwrap();
                    let mid = frame_oracle(&(*a - *b), &psi, grid).unwrap().value;
                    let upper = estimate_h_bulk(a, b, &ds, &budget).unwrap().value;
                    (lower, mid, upper)
                })
                .collect()
        });
        let below = rows.iter().map(|r| r.0 - r.1).fold(f64::NEG_INFINITY, f64::max);
        let oracle_gap = rows.iter().map(|r| r.1 - r.0).fold(0.0, f64::max);
        let nm_gap = rows.iter().map(|r| (r.2 - r.1).abs()).fold(0.0, f64::max);
        pass &= below <= 1e-6 && oracle_gap <= oracle_tol && nm_gap <= nm_tol;
        details.push(format!("N={dim}: oracle gap {oracle_gap:.1e}, optimizer vs oracle {nm_gap:.1e}"));
    }
    outcome(pass, details.join("; "))
}

fn convergence() -> Outcome {
    let psi = SurfaceDensity::abs_normal_jump();
    let ds = DensitySet::interfacial(psi.clone());
    let budget = OptimizerBudget { n_schedule: vec![4], ..Default::default() };
    let pairs = sandwich_pairs(77, 2, 10);
    let ratios: Vec<Vec<f64>> = pool().install(|| {
        pairs
            .par_iter()
            .map(|(a, b)| {
                let frame = estimate_h_bulk(a, b, &ds, &budget).unwrap().frame.unwrap();
                let limit = frame_cost(&(*a - *b), &frame, &psi).unwrap();
                let gaps: Vec<f64> = [4, 8, 16, 32]
                    .iter()
                    .map(|&n| cell_energy(&staircase_sequence(a, b, &frame, n).unwrap(), &ds) - limit)
                    .collect();
                gaps.windows(2).map(|w| w[0] / w[1]).collect()
            })
            .collect()
    });
    let flat: Vec<f64> = ratios.iter().flatten().cloned().collect();
    let lo = flat.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = flat.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    outcome(lo >= 1.5 && hi <= 2.5, format!("gap ratios in [{lo:.3}, {hi:.3}]"))
}

fn vpm() -> Outcome {
    let mut cases = vec![StructuredDeformation::broken_ramp(), StructuredDeformation::deck_of_cards()];
    for i in 0..20u64 {
        let dim = 2 + (i % 2) as usize;
        cases.push(random_structured_deformation(dim, 4, 500 + i).unwrap());
    }
    let mut worst: f64 = 0.0;
    let mut worst_sum: f64 = 0.0;
    for sd in &cases {
        match verify_vpm_identity(sd) {
            Ok(r) => {
                worst = worst.max(r.residual);
                worst_sum = worst_sum.max(r.sum_residual);
            }
            Err(e) => return outcome(false, e.to_string()),
        }
    }
    outcome(
        worst <= 1e-9 && worst_sum <= 1e-12,
        format!("{} cases, relative residual {worst:.1e}, V+ + V- - V {worst_sum:.1e}", cases.len()),
    )
}

fn h_cell() -> Outcome {
    let psi = SurfaceDensity::abs_normal_jump();
    let ds = DensitySet::interfacial(psi.clone());
    let budget = OptimizerBudget { restarts: 1, max_iterations: 60, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let cases: Vec<(Vector, Vector, u64)> = (0..100)
        .map(|i| {
            let dim = 2 + i % 2;
            let lambda = Vector::new(&(0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<_>>());
            (lambda, random_unit(&mut rng, dim), rng.gen())
        })
        .collect();
    let results: Vec<(f64, f64)> = pool().install(|| {
        cases
            .par_iter()
            .map(|(lambda, nu, seed)| {
                let est = estimate_h_surface(lambda, nu, &psi, &budget).unwrap().value;
                let exact = lambda.dot(nu).abs();
                // random multi-plane competitors never beat the single jump
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut best_split = f64::INFINITY;
                for _ in 0..10 {
                    let k = rng.gen_range(2..=4);
                    let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
                    let s: f64 = w.iter().sum();
                    let planes: Vec<(Vector, f64, f64)> = w
                        .iter()
                        .map(|wi| {
                            let tilt = if rng.gen_bool(0.5) { random_unit(&mut rng, nu.dim()) } else { *nu };
                            let normal = (*nu + tilt.scale(0.3)).normalized().unwrap();
                            (normal, rng.gen_range(-0.3..0.3), wi / s)
                        })
                        .collect();
                    if let Ok(u) = oblique_competitor(lambda, nu, &planes) {
                        best_split = best_split.min(cell_energy(&u, &ds));
                    }
                }
                let single = cell_energy(&jump_competitor(lambda, nu, &[(1.0, 0.0)]).unwrap(), &ds);
                ((est - exact).abs(), single - best_split)
            })
            .collect()
    });
    let err = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let beat = results.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    outcome(err <= 1e-9 && beat <= 1e-9, format!("max |estimate - |lambda.nu|| {err:.1e}, max single - split {beat:.1e}"))
}

fn validators() -> Outcome {
    let opts = SamplingOptions::default();
    let mut pass = true;
    let mut notes = Vec::new();
    for psi in [SurfaceDensity::abs_normal_jump(), SurfaceDensity::positive_normal_jump(), SurfaceDensity::negative_normal_jump()] {
        let r = check_h2_h3_h4(&psi, &opts);
        let ok = r.verdict("H3") == Some(Verdict::Pass)
            && r.verdict("H4") == Some(Verdict::Pass)
            && r.verdict("H2-lower") == Some(Verdict::Warn);
        pass &= ok;
        notes.push(format!("{} {}", psi.name(), if ok { "ok" } else { "wrong" }));
    }
    let sq = check_h2_h3_h4(&SurfaceDensity::squared_jump_norm(), &opts);
    pass &= sq.verdict("H3") == Some(Verdict::Fail);
    let pair = check_h5_to_h8(&InterfacePairDensity::phase_normal_jump(), &opts);
    let pair_ok = ["H5", "H6", "H7", "H8"].iter().all(|h| pair.verdict(h) == Some(Verdict::Pass));
    pass &= pair_ok && pair.samples == 10_000;
    notes.push(format!("squared H3 {:?}, pair H5-H8 {}", sq.verdict("H3"), if pair_ok { "pass" } else { "fail" }));
    outcome(pass, notes.join(", "))
}

fn design() -> Outcome {
    let abs = DensitySet::interfacial(SurfaceDensity::abs_normal_jump());
    let dd = DesignDensities::uniform(&abs, InterfacePairDensity::phase_normal_jump());
    let budget = OptimizerBudget { restarts: 2, max_iterations: 300, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut zero_ok = true;
    let mut one_err: f64 = 0.0;
    for i in 0..20 {
        let dim = 2 + i % 2;
        let nu = random_unit(&mut rng, dim);
        let c = Vector::new(&(0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>());
        let a = rng.gen_range(0..2u8);
        let same = DesignBoundaryData::new(a, a, c, c, nu).unwrap();
        zero_ok &= estimate_h_surface_design(&same, &dd, &budget).unwrap().value == 0.0;
        let phase = DesignBoundaryData::new(1, 0, c, c, nu).unwrap();
        one_err = one_err.max((estimate_h_surface_design(&phase, &dd, &budget).unwrap().value - 1.0).abs());
    }

    let mut reduce: f64 = 0.0;
    let mixed = DesignDensities::uniform(
        &DensitySet::new(BulkDensity::power_norm(2.0), SurfaceDensity::jump_norm()),
        InterfacePairDensity::phase_normal_jump(),
    );
    for i in 0..20u64 {
        let sd = random_structured_deformation(2 + (i % 2) as usize, 3, 900 + i).unwrap();
        let chi = PhaseField::constant(sd.g.mesh().clone(), (i % 2) as u8).unwrap();
        let ds = mixed.phase(0);
        reduce = reduce.max((design_energy(&chi, &sd.g, &mixed).unwrap() - energy(&sd.g, &ds)).abs());
    }

    let budget = OptimizerBudget { n_schedule: vec![4, 8], ..Default::default() };
    let psi = SurfaceDensity::abs_normal_jump();
    let pairs = sandwich_pairs(2026, 2, 100);
    let phase_dd = DesignDensities {
        bulk: [BulkDensity::zero(), BulkDensity::zero()],
        surface: [SurfaceDensity::jump_norm(), psi.clone()],
        pair: InterfacePairDensity::zero(),
    };
    let gaps: Vec<f64> = pool().install(|| {
        pairs
            .par_iter()
            .map(|(a, b)| {
                let h = estimate_h_bulk_design(1, a, b, &phase_dd, &budget).unwrap().value;
                let mid = frame_oracle(&(*a - *b), &psi, 720).unwrap().value;
                (h - mid).abs()
            })
            .collect()
    });
    let design_gap = gaps.iter().cloned().fold(0.0, f64::max);
    outcome(
        zero_ok && one_err <= 1e-9 && reduce <= 1e-12 && design_gap <= 1e-5,
        format!("h(a,a,c,c) zero: {zero_ok}, |h(1,0,c,c) - 1| {one_err:.1e}, constant-phase reduction {reduce:.1e}, H_design vs oracle {design_gap:.1e}"),
    )
}

fn determinism() -> Outcome {
    let configs = [
        json!({"command": "sequence", "example": "broken-ramp", "n": [1, 2, 4, 8, 16, 32]}),
        json!({"command": "verify-expl", "dim": 2, "samples": 8, "seed": 7}),
        json!({"command": "h-cell", "dim": 2, "samples": 6, "seed": 3, "budget": {"restarts": 1, "max_iterations": 60}}),
        json!({"command": "vpm", "examples": ["broken-ramp", "deck-of-cards"], "dim": 3, "samples": 4, "seed": 5}),
        json!({"command": "design", "dim": 2, "samples": 4, "seed": 9, "budget": {"restarts": 2, "max_iterations": 200}}),
        json!({"command": "validate-densities", "density": "abs_normal_jump", "seed": 1}),
    ];
    for c in configs {
        let cfg = config(c.clone());
        let first = run(&cfg, JOBS).unwrap().text;
        let second = run(&cfg, 1).unwrap().text;
        if first != second {
            return outcome(false, format!("{} differs between runs", c["command"]));
        }
    }
    outcome(true, "six commands, byte-identical output at 4 and 1 jobs")
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 9] = [
        ("broken ramp", broken_ramp, Duration::from_secs(1)),
        ("deck of cards", deck_of_cards_case, Duration::from_secs(1)),
        ("sandwich", sandwich, Duration::from_secs(60)),
        ("competitor convergence", convergence, Duration::from_secs(30)),
        ("V± identity", vpm, Duration::from_secs(10)),
        ("h-cell exactness", h_cell, Duration::from_secs(5)),
        ("hypothesis validators", validators, Duration::from_secs(5)),
        ("optimal design", design, Duration::from_secs(30)),
        ("determinism", determinism, Duration::from_secs(120)),
    ];
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let t = start.elapsed();
        let ok = o.pass && t <= *limit;
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {} {:<24} {}  {:.2}s (limit {}s)  {}",
            i + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            t.as_secs_f64(),
            limit.as_secs(),
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
