//! Randomized falsification tests for the growth, homogeneity and
//! subadditivity hypotheses on the densities.
//!
//! A pass means no counterexample was found in the sampled region; these are
//! certificates of the sampling, not proofs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::tensor::{Mat, Vector};

use super::densities::{BulkDensity, InterfacePairDensity, SurfaceDensity};

/// Relative tolerance for identities and inequalities.
const REL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingOptions {
    pub samples: usize,
    /// Entries are drawn from `[-radius, radius]`.
    pub radius: f64,
    pub dim: usize,
    pub seed: u64,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions { samples: 10_000, radius: 10.0, dim: 3, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    /// Violated, but the theory tolerates the violation (non-coercive
    /// surface densities).
    Warn,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub hypothesis: String,
    pub verdict: Verdict,
    /// Worst observed value of the checked quantity; its meaning is given in
    /// `detail`.
    pub worst: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub density: String,
    pub samples: usize,
    pub radius: f64,
    pub checks: Vec<Check>,
}

impl HypothesisReport {
    pub fn get(&self, hypothesis: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.hypothesis == hypothesis)
    }

    pub fn verdict(&self, hypothesis: &str) -> Option<Verdict> {
        self.get(hypothesis).map(|c| c.verdict)
    }

    /// No check failed; warnings are allowed.
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Verdict::Fail)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.verdict == Verdict::Warn)
    }
}

fn check(hypothesis: &str, ok: bool, worst: f64, detail: String) -> Check {
    let verdict = if ok { Verdict::Pass } else { Verdict::Fail };
    Check { hypothesis: hypothesis.into(), verdict, worst, detail }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale.max(1.0)
    }
}

struct Sampler {
    rng: ChaCha8Rng,
    radius: f64,
    dim: usize,
}

impl Sampler {
    fn new(opts: &SamplingOptions) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(opts.seed), radius: opts.radius, dim: opts.dim }
    }

    fn scalar(&mut self) -> f64 {
        self.rng.gen_range(-self.radius..=self.radius)
    }

    fn vector(&mut self) -> Vector {
        let v: Vec<f64> = (0..self.dim).map(|_| self.scalar()).collect();
        Vector::new(&v)
    }

    fn matrix(&mut self) -> Mat {
        let rows: Vec<Vec<f64>> = (0..self.dim).map(|_| (0..self.dim).map(|_| self.scalar()).collect()).collect();
        Mat::from_rows(&rows).unwrap()
    }

    fn unit(&mut self) -> Vector {
        loop {
            let v: Vec<f64> = (0..self.dim).map(|_| self.rng.gen_range(-1.0..=1.0)).collect();
            let v = Vector::new(&v);
            let n = v.norm();
            if n > 1e-3 && n <= 1.0 {
                return v.scale(1.0 / n);
            }
        }
    }

    fn phase(&mut self) -> u8 {
        self.rng.gen_range(0..=1)
    }
}

/// `|W(A) - W(B)| <= C |A - B| (1 + |A|^{p-1} + |B|^{p-1})` with the declared
/// `C` and `p`; reports the largest observed ratio.
pub fn check_h1(w: &BulkDensity, opts: &SamplingOptions) -> HypothesisReport {
    let mut s = Sampler::new(opts);
    let p = w.growth_p;
    let mut worst: f64 = 0.0;
    let mut negative = false;
    for _ in 0..opts.samples.max(1) {
        let a = s.matrix();
        let b = if s.rng.gen_bool(0.5) { s.matrix() } else { a + s.matrix().scale(1e-3) };
        let (wa, wb) = (w.eval(&a), w.eval(&b));
        negative |= wa < 0.0 || wb < 0.0 || !wa.is_finite();
        let d = (a - b).norm();
        if d == 0.0 {
            continue;
        }
        let ratio = (wa - wb).abs() / (d * (1.0 + a.norm().powf(p - 1.0) + b.norm().powf(p - 1.0)));
        worst = worst.max(if ratio.is_nan() { f64::INFINITY } else { ratio });
    }
    let ok = !negative && worst <= w.lipschitz_c * (1.0 + REL_TOL);
    let detail = format!(
        "max |W(A)-W(B)| / (|A-B|(1+|A|^(p-1)+|B|^(p-1))) = {worst:.6e} against declared C = {}{}",
        w.lipschitz_c,
        if negative { "; W took negative or non-finite values" } else { "" }
    );
    HypothesisReport {
        density: w.name().into(),
        samples: opts.samples,
        radius: opts.radius,
        checks: vec![check("H1", ok, worst, detail)],
    }
}

/// Growth bounds, positive one-homogeneity in `lambda`, and subadditivity in
/// `lambda`. A failing lower growth bound is reported as a warning.
pub fn check_h2_h3_h4(psi: &SurfaceDensity, opts: &SamplingOptions) -> HypothesisReport {
    let mut s = Sampler::new(opts);
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio: f64 = 0.0;
    let mut homog: f64 = 0.0;
    let mut subadd: f64 = 0.0;
    let mut ratio = |psi_val: f64, lambda: &Vector| {
        let n = lambda.norm();
        if n > 0.0 {
            min_ratio = min_ratio.min(psi_val / n);
            max_ratio = max_ratio.max(psi_val / n);
        }
    };
    // a jump tangent to the facet is the natural probe for the lower bound
    if opts.dim >= 2 {
        let nu = Vector::unit(opts.dim, opts.dim - 1);
        let lambda = Vector::unit(opts.dim, 0);
        ratio(psi.eval(&lambda, &nu), &lambda);
    }
    for _ in 0..opts.samples.max(1) {
        let nu = s.unit();
        let l1 = s.vector();
        let l2 = s.vector();
        let p1 = psi.eval(&l1, &nu);
        ratio(p1, &l1);
        let t = s.rng.gen_range(0.0..=opts.radius);
        homog = homog.max(rel_gap(psi.eval(&l1.scale(t), &nu), t * p1));
        let lhs = psi.eval(&(l1 + l2), &nu);
        let rhs = p1 + psi.eval(&l2, &nu);
        subadd = subadd.max((lhs - rhs) / rhs.abs().max(1.0));
    }
    let lower_ok = min_ratio >= psi.lower_c * (1.0 - REL_TOL) && min_ratio > 0.0;
    let lower = Check {
        hypothesis: "H2-lower".into(),
        verdict: if lower_ok { Verdict::Pass } else { Verdict::Warn },
        worst: min_ratio,
        detail: format!("min Psi/|lambda| = {min_ratio:.6e}; coercivity needs a positive c1 (declared {})", psi.lower_c),
    };
    let upper = check(
        "H2-upper",
        max_ratio <= psi.upper_c * (1.0 + REL_TOL),
        max_ratio,
        format!("max Psi/|lambda| = {max_ratio:.6e} against declared C1 = {}", psi.upper_c),
    );
    let h3 = check(
        "H3",
        homog <= REL_TOL,
        homog,
        format!("max relative gap |Psi(t lambda) - t Psi(lambda)| = {homog:.3e}"),
    );
    let h4 = check(
        "H4",
        subadd <= REL_TOL,
        subadd.max(0.0),
        format!("max relative excess of Psi(l1 + l2) over Psi(l1) + Psi(l2) = {:.3e}", subadd.max(0.0)),
    );
    HypothesisReport {
        density: psi.name().into(),
        samples: opts.samples,
        radius: opts.radius,
        checks: vec![lower, upper, h3, h4],
    }
}

/// Growth, mirror symmetry, Lipschitz continuity in the jump, and vanishing
/// on the diagonals for the interface-pair density.
pub fn check_h5_to_h8(psi2: &InterfacePairDensity, opts: &SamplingOptions) -> HypothesisReport {
    let mut s = Sampler::new(opts);
    let mut min_value = f64::INFINITY;
    let mut growth: f64 = 0.0;
    let mut mirror: f64 = 0.0;
    let mut lipschitz: f64 = 0.0;
    let mut diagonal: f64 = 0.0;
    for _ in 0..opts.samples.max(1) {
        let (a, b) = (s.phase(), s.phase());
        let (c, d) = (s.vector(), s.vector());
        let nu = s.unit();
        let v = psi2.eval(a, b, &c, &d, &nu);
        min_value = min_value.min(v);
        growth = growth.max(v / (1.0 + (a as f64 - b as f64).abs() + (c - d).norm()));
        mirror = mirror.max(rel_gap(v, psi2.eval(b, a, &d, &c, &(-nu))));

        let (c2, d2) = (s.vector(), s.vector());
        let gap = ((c - d) - (c2 - d2)).norm();
        if gap > 0.0 {
            lipschitz = lipschitz.max((v - psi2.eval(a, b, &c2, &d2, &nu)).abs() / gap);
        }
        diagonal = diagonal.max(psi2.eval(a, b, &c, &c, &nu).abs());
        diagonal = diagonal.max(psi2.eval(a, a, &c, &d, &nu).abs());
    }
    let h5 = check(
        "H5",
        min_value >= 0.0 && growth <= psi2.growth_c * (1.0 + REL_TOL),
        growth,
        format!(
            "min Psi2 = {min_value:.6e}; max Psi2/(1+|a-b|+|c-d|) = {growth:.6e} against declared C = {}",
            psi2.growth_c
        ),
    );
    let h6 = check("H6", mirror <= REL_TOL, mirror, format!("max relative mirror asymmetry = {mirror:.3e}"));
    let h7 = check(
        "H7",
        lipschitz <= psi2.lipschitz_c * (1.0 + REL_TOL),
        lipschitz,
        format!("max Lipschitz ratio in the jump = {lipschitz:.6e} against declared C = {}", psi2.lipschitz_c),
    );
    let h8 = check("H8", diagonal <= 1e-12, diagonal, format!("max |Psi2| on c = d or a = b: {diagonal:.3e}"));
    HypothesisReport {
        density: psi2.name().into(),
        samples: opts.samples,
        radius: opts.radius,
        checks: vec![h5, h6, h7, h8],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SamplingOptions {
        SamplingOptions { samples: 2000, ..Default::default() }
    }

    #[test]
    fn h1_examples() {
        assert_eq!(check_h1(&BulkDensity::zero(), &small()).checks[0].worst, 0.0);
        let sq = check_h1(&BulkDensity::power_norm(2.0), &small());
        assert!(sq.pass());
        assert!(sq.checks[0].worst <= 1.0);
        let exp = BulkDensity::custom("exp_norm", 2.0, 1.0, |a| a.norm().exp());
        assert!(!check_h1(&exp, &small()).pass());
    }

    #[test]
    fn h2_to_h4_examples() {
        for psi in [
            SurfaceDensity::abs_normal_jump(),
            SurfaceDensity::positive_normal_jump(),
            SurfaceDensity::negative_normal_jump(),
        ] {
            let r = check_h2_h3_h4(&psi, &small());
            assert_eq!(r.verdict("H3"), Some(Verdict::Pass));
            assert_eq!(r.verdict("H4"), Some(Verdict::Pass));
            assert_eq!(r.verdict("H2-lower"), Some(Verdict::Warn));
            assert!(r.pass());
        }
        let r = check_h2_h3_h4(&SurfaceDensity::jump_norm(), &small());
        assert!(r.checks.iter().all(|c| c.verdict == Verdict::Pass));
        let r = check_h2_h3_h4(&SurfaceDensity::squared_jump_norm(), &small());
        assert_eq!(r.verdict("H3"), Some(Verdict::Fail));
    }

    #[test]
    fn h5_to_h8_examples() {
        let r = check_h5_to_h8(&InterfacePairDensity::zero(), &small());
        assert!(r.checks.iter().all(|c| c.verdict == Verdict::Pass));
        let r = check_h5_to_h8(&InterfacePairDensity::phase_normal_jump(), &small());
        assert!(r.checks.iter().all(|c| c.verdict == Verdict::Pass), "{r:?}");
        let r = check_h5_to_h8(&InterfacePairDensity::signed_normal_jump(), &small());
        assert_eq!(r.verdict("H5"), Some(Verdict::Fail));
        assert_eq!(r.verdict("H6"), Some(Verdict::Pass));
    }
}
