//! Bulk, surface and interface-pair energy densities.
//!
//! Each density is a pure evaluator plus the constants it declares for the
//! structural hypotheses. Built-ins are looked up by registry name; custom
//! closures can be wrapped for experiments.

use std::fmt;
use std::sync::Arc;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::tensor::{Mat, Vector};

type BulkFn = Arc<dyn Fn(&Mat) -> f64 + Send + Sync>;
type SurfaceFn = Arc<dyn Fn(&Vector, &Vector) -> f64 + Send + Sync>;
type PairFn = Arc<dyn Fn(u8, u8, &Vector, &Vector, &Vector) -> f64 + Send + Sync>;

#[derive(Clone)]
enum BulkKind {
    Zero,
    PowerNorm { p: f64 },
    Quadratic { reference: Mat, modulus: f64 },
    Custom(BulkFn),
}

/// Bulk density `W` with its declared growth exponent and Lipschitz-type
/// constant.
#[derive(Clone)]
pub struct BulkDensity {
    name: String,
    kind: BulkKind,
    pub growth_p: f64,
    pub lipschitz_c: f64,
}

impl BulkDensity {
    pub fn zero() -> Self {
        BulkDensity { name: "zero".into(), kind: BulkKind::Zero, growth_p: 2.0, lipschitz_c: 0.0 }
    }

    /// `W(A) = |A|^p` (Frobenius norm).
    pub fn power_norm(p: f64) -> Self {
        BulkDensity {
            name: "power_norm".into(),
            kind: BulkKind::PowerNorm { p },
            growth_p: p,
            lipschitz_c: p.max(1.0),
        }
    }

    /// `W(A) = modulus * |A - reference|^2`.
    pub fn quadratic(reference: Mat, modulus: f64) -> Self {
        BulkDensity {
            name: "quadratic".into(),
            kind: BulkKind::Quadratic { reference, modulus },
            growth_p: 2.0,
            lipschitz_c: modulus * (2.0 * reference.norm()).max(1.0),
        }
    }

    pub fn custom(
        name: &str,
        growth_p: f64,
        lipschitz_c: f64,
        f: impl Fn(&Mat) -> f64 + Send + Sync + 'static,
    ) -> Self {
        BulkDensity { name: name.into(), kind: BulkKind::Custom(Arc::new(f)), growth_p, lipschitz_c }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, BulkKind::Zero)
    }

    pub fn eval(&self, a: &Mat) -> f64 {
        match &self.kind {
            BulkKind::Zero => 0.0,
            BulkKind::PowerNorm { p } => a.norm().powf(*p),
            BulkKind::Quadratic { reference, modulus } => {
                let r = if reference.shape() == a.shape() { *reference } else { Mat::identity(a.rows()) };
                modulus * (*a - r).norm().powi(2)
            }
            BulkKind::Custom(f) => f(a),
        }
    }

    /// Registry lookup: `"zero"`, `{"name": "power_norm", "p": 2}`,
    /// `{"name": "quadratic", "reference": [[..]], "modulus": 1}`.
    /// A quadratic without a reference is centred at the identity of
    /// dimension `dim`.
    pub fn from_spec(spec: &Value, dim: usize) -> Result<Self> {
        let (name, params) = split_spec(spec)?;
        match name.as_str() {
            "zero" => Ok(Self::zero()),
            "power_norm" => Ok(Self::power_norm(num_param(params, "p", 2.0)?)),
            "quadratic" => {
                let reference = match params.and_then(|p| p.get("reference")) {
                    Some(r) => serde_json::from_value(r.clone())?,
                    None => Mat::identity(dim),
                };
                Ok(Self::quadratic(reference, num_param(params, "modulus", 1.0)?))
            }
            other => Err(Error::UnknownDensity(other.into())),
        }
    }
}

impl fmt::Debug for BulkDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BulkDensity({}, p = {}, C = {})", self.name, self.growth_p, self.lipschitz_c)
    }
}

#[derive(Clone)]
enum SurfaceKind {
    AbsNormalJump,
    PositiveNormalJump,
    NegativeNormalJump,
    JumpNorm,
    SquaredJumpNorm,
    Custom(SurfaceFn),
}

/// Surface density `Psi(lambda, nu)` with declared bounds
/// `lower_c |lambda| <= Psi <= upper_c |lambda|`. A zero `lower_c` declares a
/// non-coercive density.
///
/// Every density is expected to satisfy `Psi(-lambda, -nu) = Psi(lambda, nu)`:
/// flipping the orientation of a facet flips its jump as well.
#[derive(Clone)]
pub struct SurfaceDensity {
    name: String,
    kind: SurfaceKind,
    pub lower_c: f64,
    pub upper_c: f64,
}

impl SurfaceDensity {
    /// `|lambda . nu|`.
    pub fn abs_normal_jump() -> Self {
        Self::builtin("abs_normal_jump", SurfaceKind::AbsNormalJump, 0.0, 1.0)
    }

    /// `(lambda . nu)^+`.
    pub fn positive_normal_jump() -> Self {
        Self::builtin("positive_normal_jump", SurfaceKind::PositiveNormalJump, 0.0, 1.0)
    }

    /// `(lambda . nu)^-`.
    pub fn negative_normal_jump() -> Self {
        Self::builtin("negative_normal_jump", SurfaceKind::NegativeNormalJump, 0.0, 1.0)
    }

    /// `|lambda|`.
    pub fn jump_norm() -> Self {
        Self::builtin("jump_norm", SurfaceKind::JumpNorm, 1.0, 1.0)
    }

    /// `|lambda|^2`; not positively one-homogeneous.
    pub fn squared_jump_norm() -> Self {
        Self::builtin("squared_jump_norm", SurfaceKind::SquaredJumpNorm, 1.0, 1.0)
    }

    fn builtin(name: &str, kind: SurfaceKind, lower_c: f64, upper_c: f64) -> Self {
        SurfaceDensity { name: name.into(), kind, lower_c, upper_c }
    }

    pub fn custom(
        name: &str,
        lower_c: f64,
        upper_c: f64,
        f: impl Fn(&Vector, &Vector) -> f64 + Send + Sync + 'static,
    ) -> Self {
        SurfaceDensity { name: name.into(), kind: SurfaceKind::Custom(Arc::new(f)), lower_c, upper_c }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, lambda: &Vector, nu: &Vector) -> f64 {
        match &self.kind {
            SurfaceKind::AbsNormalJump => lambda.dot(nu).abs(),
            SurfaceKind::PositiveNormalJump => lambda.dot(nu).max(0.0),
            SurfaceKind::NegativeNormalJump => (-lambda.dot(nu)).max(0.0),
            SurfaceKind::JumpNorm => lambda.norm(),
            SurfaceKind::SquaredJumpNorm => lambda.dot(lambda),
            SurfaceKind::Custom(f) => f(lambda, nu),
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "abs_normal_jump" => Ok(Self::abs_normal_jump()),
            "positive_normal_jump" => Ok(Self::positive_normal_jump()),
            "negative_normal_jump" => Ok(Self::negative_normal_jump()),
            "jump_norm" => Ok(Self::jump_norm()),
            "squared_jump_norm" => Ok(Self::squared_jump_norm()),
            other => Err(Error::UnknownDensity(other.into())),
        }
    }

    pub fn from_spec(spec: &Value) -> Result<Self> {
        let (name, _) = split_spec(spec)?;
        Self::by_name(&name)
    }
}

impl fmt::Debug for SurfaceDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SurfaceDensity({})", self.name)
    }
}

#[derive(Clone)]
enum PairKind {
    Zero,
    PhaseNormalJump,
    NormalJump,
    SignedNormalJump,
    Custom(PairFn),
}

/// Interface density `Psi_2(a, b, c, d, nu)` on the overlap of phase and
/// deformation jump sets, with declared growth and Lipschitz constants.
#[derive(Clone)]
pub struct InterfacePairDensity {
    name: String,
    kind: PairKind,
    pub growth_c: f64,
    pub lipschitz_c: f64,
}

impl InterfacePairDensity {
    pub fn zero() -> Self {
        Self::builtin("zero", PairKind::Zero)
    }

    /// `|a - b| |(c - d) . nu|`.
    pub fn phase_normal_jump() -> Self {
        Self::builtin("phase_normal_jump", PairKind::PhaseNormalJump)
    }

    /// `|(c - d) . nu|`.
    pub fn normal_jump() -> Self {
        Self::builtin("normal_jump", PairKind::NormalJump)
    }

    /// `(c - d) . nu`, signed; violates nonnegativity.
    pub fn signed_normal_jump() -> Self {
        Self::builtin("signed_normal_jump", PairKind::SignedNormalJump)
    }

    fn builtin(name: &str, kind: PairKind) -> Self {
        InterfacePairDensity { name: name.into(), kind, growth_c: 1.0, lipschitz_c: 1.0 }
    }

    pub fn custom(
        name: &str,
        growth_c: f64,
        lipschitz_c: f64,
        f: impl Fn(u8, u8, &Vector, &Vector, &Vector) -> f64 + Send + Sync + 'static,
    ) -> Self {
        InterfacePairDensity { name: name.into(), kind: PairKind::Custom(Arc::new(f)), growth_c, lipschitz_c }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, a: u8, b: u8, c: &Vector, d: &Vector, nu: &Vector) -> f64 {
        let normal = || (*c - *d).dot(nu);
        match &self.kind {
            PairKind::Zero => 0.0,
            PairKind::PhaseNormalJump => (a as f64 - b as f64).abs() * normal().abs(),
            PairKind::NormalJump => normal().abs(),
            PairKind::SignedNormalJump => normal(),
            PairKind::Custom(f) => f(a, b, c, d, nu),
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "zero" => Ok(Self::zero()),
            "phase_normal_jump" => Ok(Self::phase_normal_jump()),
            "normal_jump" => Ok(Self::normal_jump()),
            "signed_normal_jump" => Ok(Self::signed_normal_jump()),
            other => Err(Error::UnknownDensity(other.into())),
        }
    }

    pub fn from_spec(spec: &Value) -> Result<Self> {
        let (name, _) = split_spec(spec)?;
        Self::by_name(&name)
    }
}

impl fmt::Debug for InterfacePairDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InterfacePairDensity({})", self.name)
    }
}

/// Densities of the single-material energy.
#[derive(Clone, Debug)]
pub struct DensitySet {
    pub bulk: BulkDensity,
    pub surface: SurfaceDensity,
}

impl DensitySet {
    pub fn new(bulk: BulkDensity, surface: SurfaceDensity) -> Self {
        DensitySet { bulk, surface }
    }

    /// `W = 0` with the given surface density.
    pub fn interfacial(surface: SurfaceDensity) -> Self {
        DensitySet { bulk: BulkDensity::zero(), surface }
    }
}

/// Densities of the two-phase energy; index 0 and 1 select the phase.
#[derive(Clone, Debug)]
pub struct DesignDensities {
    pub bulk: [BulkDensity; 2],
    pub surface: [SurfaceDensity; 2],
    pub pair: InterfacePairDensity,
}

impl DesignDensities {
    pub fn phase(&self, i: u8) -> DensitySet {
        DensitySet::new(self.bulk[i as usize].clone(), self.surface[i as usize].clone())
    }

    /// Same densities in both phases.
    pub fn uniform(ds: &DensitySet, pair: InterfacePairDensity) -> Self {
        DesignDensities {
            bulk: [ds.bulk.clone(), ds.bulk.clone()],
            surface: [ds.surface.clone(), ds.surface.clone()],
            pair,
        }
    }
}

fn split_spec(spec: &Value) -> Result<(String, Option<&serde_json::Map<String, Value>>)> {
    match spec {
        Value::String(s) => Ok((s.clone(), None)),
        Value::Object(map) => {
            let name = map
                .get("name")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::invalid("density spec needs a `name`"))?;
            Ok((name.to_string(), Some(map)))
        }
        _ => Err(Error::invalid("density spec must be a string or an object")),
    }
}

fn num_param(params: Option<&serde_json::Map<String, Value>>, key: &str, default: f64) -> Result<f64> {
    match params.and_then(|p| p.get(key)) {
        None => Ok(default),
        Some(v) => v.as_f64().ok_or_else(|| Error::invalid(format!("`{key}` must be a number"))),
    }
}
