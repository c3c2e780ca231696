//! Grundmann–Möller rules on simplices of dimension 0 to 3.

use std::sync::OnceLock;

/// Polynomial degree integrated exactly by the default rules.
pub const DEGREE: usize = 5;

/// A rule in barycentric coordinates; weights sum to one.
#[derive(Debug, Clone)]
pub struct SimplexRule {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// All multi-indices of length `len` summing to `total`.
fn compositions(total: usize, len: usize) -> Vec<Vec<usize>> {
    if len == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, len - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Grundmann–Möller rule of degree `2s + 1` on the `m`-simplex.
pub fn grundmann_moeller(m: usize, s: usize) -> SimplexRule {
    if m == 0 {
        return SimplexRule { points: vec![vec![1.0]], weights: vec![1.0] };
    }
    let d = 2 * s + 1;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for i in 0..=s {
        let denom = (d + m - 2 * i) as f64;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let w = sign * 2f64.powi(-(2 * s as i32)) * denom.powi(d as i32)
            / (factorial(i) * factorial(d + m - i));
        for beta in compositions(s - i, m + 1) {
            points.push(beta.iter().map(|&b| (2 * b + 1) as f64 / denom).collect());
            // reference simplex has volume 1/m!
            weights.push(w * factorial(m));
        }
    }
    SimplexRule { points, weights }
}

/// Cached default rule for simplices of dimension `m`.
pub fn rule(m: usize) -> &'static SimplexRule {
    static RULES: OnceLock<Vec<SimplexRule>> = OnceLock::new();
    let rules = RULES.get_or_init(|| (0..=3).map(|m| grundmann_moeller(m, (DEGREE - 1) / 2)).collect());
    &rules[m]
}

/// Integrate `f` over the simplex with the given vertices and measure.
pub fn integrate_simplex(verts: &[[f64; 3]], measure: f64, f: &impl Fn([f64; 3]) -> f64) -> f64 {
    let r = rule(verts.len() - 1);
    let mut acc = 0.0;
    for (bary, w) in r.points.iter().zip(&r.weights) {
        let mut x = [0.0; 3];
        for (b, v) in bary.iter().zip(verts) {
            for k in 0..3 {
                x[k] += b * v[k];
            }
        }
        acc += w * f(x);
    }
    acc * measure
}
