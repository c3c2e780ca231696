//! Orthonormal frames parametrized by Givens angles and the rank-one
//! decompositions they induce.
//!
//! For an orthonormal basis `{nu_i}` (the columns of a rotation `R`) every
//! matrix splits as `M = sum_i (M nu_i) ⊗ nu_i`. Each term is one family of
//! parallel jump planes with normal `nu_i` in a staircase competitor, so the
//! interfacial cost of the whole construction is `sum_i Psi(M nu_i, nu_i)`.

use serde::{Deserialize, Serialize};

use crate::energy::SurfaceDensity;
use crate::error::{Error, Result};
use crate::tensor::{Mat, Vector};

/// A rotation in `SO(N)` given by its Givens angles.
///
/// `N = 1` has no angles, `N = 2` one angle, `N = 3` three angles applied as
/// `G_01(a) G_02(b) G_12(c)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub dim: usize,
    pub angles: Vec<f64>,
}

pub fn angle_count(dim: usize) -> usize {
    match dim {
        1 => 0,
        2 => 1,
        _ => 3,
    }
}

fn givens(dim: usize, i: usize, j: usize, theta: f64) -> Mat {
    let mut g = Mat::identity(dim);
    let (s, c) = theta.sin_cos();
    g[(i, i)] = c;
    g[(j, j)] = c;
    g[(i, j)] = -s;
    g[(j, i)] = s;
    g
}

impl Frame {
    pub fn new(dim: usize, angles: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if angles.len() != angle_count(dim) {
            return Err(Error::invalid(format!(
                "a frame in dimension {dim} needs {} angles, got {}",
                angle_count(dim),
                angles.len()
            )));
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("frame angles must be finite"));
        }
        Ok(Frame { dim, angles })
    }

    pub fn identity(dim: usize) -> Self {
        Frame { dim, angles: vec![0.0; angle_count(dim)] }
    }

    /// Product of the Givens rotations; orthogonal with determinant +1.
    pub fn matrix(&self) -> Mat {
        match self.dim {
            1 => Mat::identity(1),
            2 => givens(2, 0, 1, self.angles[0]),
            _ => givens(3, 0, 1, self.angles[0])
                .matmul(&givens(3, 0, 2, self.angles[1]))
                .matmul(&givens(3, 1, 2, self.angles[2])),
        }
    }

    /// The normals `nu_i`, i.e. the columns of [`Frame::matrix`].
    pub fn normals(&self) -> Vec<Vector> {
        let r = self.matrix();
        (0..self.dim).map(|j| r.column(j)).collect()
    }

    /// Angles wrapped into `[-pi, pi)`, used for deterministic tie-breaking.
    pub fn canonical(&self) -> Frame {
        use std::f64::consts::PI;
        let angles = self
            .angles
            .iter()
            .map(|a| {
                let w = (a + PI).rem_euclid(2.0 * PI) - PI;
                if w.abs() < 1e-15 { 0.0 } else { w }
            })
            .collect();
        Frame { dim: self.dim, angles }
    }
}

pub fn frame_matrix(frame: &Frame) -> Mat {
    frame.matrix()
}

/// A rotation whose last column is `nu`; the columns before it span the
/// tangent plane. Used to build the rotated cube `Q_nu`.
pub fn frame_with_normal(nu: &Vector) -> Result<Mat> {
    if !nu.is_unit(1e-12) {
        return Err(Error::NonUnitNormal(nu.norm()));
    }
    match nu.dim() {
        1 => Ok(Mat::identity(1)),
        2 => {
            let t = Vector::new(&[nu[1], -nu[0]]);
            Mat::from_columns(&[t, *nu])
        }
        _ => {
            // pick the axis least aligned with nu to seed the tangent
            let axis = (0..3)
                .min_by(|&a, &b| nu[a].abs().partial_cmp(&nu[b].abs()).unwrap())
                .unwrap();
            let t1 = Vector::unit(3, axis).cross(nu).normalized()?;
            let t2 = nu.cross(&t1);
            Mat::from_columns(&[t1, t2, *nu])
        }
    }
}

/// `M = sum_i a_i ⊗ nu_i` with `a_i = M nu_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankOneDecomposition {
    pub terms: Vec<(Vector, Vector)>,
}

impl RankOneDecomposition {
    pub fn reconstruct(&self) -> Option<Mat> {
        let (a0, n0) = self.terms.first()?;
        let mut m = Mat::zeros(a0.dim(), n0.dim());
        for (a, n) in &self.terms {
            m = m + a.outer(n);
        }
        Some(m)
    }

    /// `sum_i a_i . nu_i`; equals `tr M` for a square `M`.
    pub fn normal_sum(&self) -> f64 {
        self.terms.iter().map(|(a, n)| a.dot(n)).sum()
    }
}

pub fn decompose_by_frame(m: &Mat, frame: &Frame) -> Result<RankOneDecomposition> {
    if m.cols() != frame.dim {
        return Err(Error::dims(format!(
            "matrix has {} columns but the frame lives in dimension {}",
            m.cols(),
            frame.dim
        )));
    }
    let terms = frame.normals().into_iter().map(|nu| (m.mul_vec(&nu), nu)).collect();
    Ok(RankOneDecomposition { terms })
}

/// Interfacial cost `sum_i Psi(M nu_i, nu_i)` of the laminate families of a
/// frame. This is the limit energy of the staircase competitors built on it.
pub fn frame_cost(m: &Mat, frame: &Frame, psi: &SurfaceDensity) -> Result<f64> {
    let d = decompose_by_frame(m, frame)?;
    Ok(d.terms.iter().map(|(a, nu)| psi.eval(a, nu)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::SurfaceDensity;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn close(a: &Mat, b: &Mat, tol: f64) -> bool {
        a.shape() == b.shape() && (*a - *b).max_abs() <= tol
    }

    #[test]
    fn frame_matrix_examples() {
        assert_eq!(Frame::new(1, vec![]).unwrap().matrix(), Mat::identity(1));
        assert!(close(&Frame::new(2, vec![0.0]).unwrap().matrix(), &Mat::identity(2), 0.0));
        let r = Frame::new(2, vec![PI / 2.0]).unwrap().matrix();
        assert!((r.column(0) - Vector::new(&[0.0, 1.0])).max_abs() < 1e-15);
        assert!((r.column(1) - Vector::new(&[-1.0, 0.0])).max_abs() < 1e-15);
    }

    #[test]
    fn wrong_angle_count_is_rejected() {
        assert!(Frame::new(3, vec![0.0]).is_err());
        assert!(Frame::new(2, vec![]).is_err());
        assert!(Frame::new(4, vec![]).is_err());
    }

    #[test]
    fn decomposition_examples() {
        let zero = Mat::zeros(2, 2);
        let d = decompose_by_frame(&zero, &Frame::new(2, vec![0.3]).unwrap()).unwrap();
        assert!(d.terms.iter().all(|(a, _)| a.max_abs() == 0.0));

        let shear = Vector::unit(3, 0).outer(&Vector::unit(3, 2));
        let d = decompose_by_frame(&shear, &Frame::identity(3)).unwrap();
        assert_eq!(d.terms[2].0, Vector::unit(3, 0));
        assert_eq!(d.terms[0].0.max_abs(), 0.0);
        assert_eq!(d.terms[1].0.max_abs(), 0.0);

        // nu^T M nu at theta = pi/4 for M = diag(1,-1) is cos(2 theta) = 0
        let d = decompose_by_frame(&Mat::diag(&[1.0, -1.0]), &Frame::new(2, vec![PI / 4.0]).unwrap())
            .unwrap();
        for (a, nu) in &d.terms {
            assert!(a.dot(nu).abs() < 1e-15);
        }
    }

    #[test]
    fn frame_cost_examples() {
        let abs = SurfaceDensity::abs_normal_jump();
        let f = Frame::new(2, vec![PI / 4.0]).unwrap();
        assert!(frame_cost(&Mat::diag(&[1.0, -1.0]), &f, &abs).unwrap() < 1e-15);
        assert_eq!(frame_cost(&Mat::zeros(2, 2), &f, &abs).unwrap(), 0.0);
        // broken ramp: A - B = 2 - 1
        let m = Mat::diag(&[2.0]) - Mat::diag(&[1.0]);
        assert_eq!(frame_cost(&m, &Frame::identity(1), &abs).unwrap(), 1.0);
    }

    #[test]
    fn frame_with_normal_has_normal_last() {
        for nu in [
            Vector::new(&[0.6, 0.8]),
            Vector::new(&[0.0, 0.0, 1.0]),
            Vector::new(&[1.0, 2.0, -2.0]).scale(1.0 / 3.0),
        ] {
            let r = frame_with_normal(&nu).unwrap();
            let n = nu.dim();
            assert!((r.column(n - 1) - nu).max_abs() < 1e-15);
            assert!(close(&r.transpose().matmul(&r), &Mat::identity(n), 1e-14));
            assert!((r.det() - 1.0).abs() < 1e-14);
        }
        assert!(frame_with_normal(&Vector::new(&[1.0, 1.0])).is_err());
    }

    fn mat_strategy(n: usize) -> impl Strategy<Value = Mat> {
        prop::collection::vec(-5.0..5.0f64, n * n).prop_map(move |v| {
            let rows: Vec<Vec<f64>> = v.chunks(n).map(|c| c.to_vec()).collect();
            Mat::from_rows(&rows).unwrap()
        })
    }

    fn frame_strategy(n: usize) -> impl Strategy<Value = Frame> {
        prop::collection::vec(-7.0..7.0f64, angle_count(n))
            .prop_map(move |a| Frame::new(n, a).unwrap())
    }

    proptest! {
        #[test]
        fn frames_are_rotations(n in 1usize..=3, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let f = Frame::new(n, (0..angle_count(n)).map(|_| rng.gen_range(-7.0..7.0)).collect()).unwrap();
            let r = f.matrix();
            prop_assert!(close(&r.transpose().matmul(&r), &Mat::identity(n), 1e-12));
            prop_assert!((r.det() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn reconstruction_and_trace(m in mat_strategy(3), f in frame_strategy(3)) {
            let d = decompose_by_frame(&m, &f).unwrap();
            prop_assert!(close(&d.reconstruct().unwrap(), &m, 1e-10));
            prop_assert!((d.normal_sum() - m.trace()).abs() < 1e-10);
            let cost = frame_cost(&m, &f, &SurfaceDensity::abs_normal_jump()).unwrap();
            prop_assert!(cost >= m.trace().abs() - 1e-10);
        }

        #[test]
        fn reconstruction_in_plane(m in mat_strategy(2), f in frame_strategy(2)) {
            let d = decompose_by_frame(&m, &f).unwrap();
            prop_assert!(close(&d.reconstruct().unwrap(), &m, 1e-10));
            prop_assert!((d.normal_sum() - m.trace()).abs() < 1e-10);
        }
    }
}
