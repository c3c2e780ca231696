//! Closed-form relaxed densities for the purely interfacial energies
//! `Psi(lambda, nu) = |lambda . nu|` and `(lambda . nu)^±`.
//!
//! The bulk densities only see the trace of the disarrangement `A - B`; the
//! surface densities coincide with the initial ones.

use crate::error::{Error, Result};
use crate::tensor::{Mat, Vector};

/// `M = grad g - G`.
pub fn disarrangement_tensor(grad_g: &Mat, g: &Mat) -> Result<Mat> {
    grad_g.try_sub(g)
}

fn trace_gap(a: &Mat, b: &Mat) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::dims("relaxed bulk densities need square matrices"));
    }
    Ok(a.try_sub(b)?.trace())
}

pub fn positive_part(x: f64) -> f64 {
    x.max(0.0)
}

pub fn negative_part(x: f64) -> f64 {
    (-x).max(0.0)
}

/// `|tr(A - B)|`.
pub fn relaxed_bulk_abs(a: &Mat, b: &Mat) -> Result<f64> {
    Ok(trace_gap(a, b)?.abs())
}

/// `(tr(A - B))^+`.
pub fn relaxed_bulk_plus(a: &Mat, b: &Mat) -> Result<f64> {
    Ok(positive_part(trace_gap(a, b)?))
}

/// `(tr(A - B))^-`.
pub fn relaxed_bulk_minus(a: &Mat, b: &Mat) -> Result<f64> {
    Ok(negative_part(trace_gap(a, b)?))
}

fn normal_jump(lambda: &Vector, nu: &Vector) -> Result<f64> {
    if !nu.is_unit(1e-12) {
        return Err(Error::NonUnitNormal(nu.norm()));
    }
    if lambda.dim() != nu.dim() {
        return Err(Error::dims("jump and normal must have the same length"));
    }
    Ok(lambda.dot(nu))
}

/// `|lambda . nu|`.
pub fn relaxed_surface_abs(lambda: &Vector, nu: &Vector) -> Result<f64> {
    Ok(normal_jump(lambda, nu)?.abs())
}

pub fn relaxed_surface_plus(lambda: &Vector, nu: &Vector) -> Result<f64> {
    Ok(positive_part(normal_jump(lambda, nu)?))
}

pub fn relaxed_surface_minus(lambda: &Vector, nu: &Vector) -> Result<f64> {
    Ok(negative_part(normal_jump(lambda, nu)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn deck_of_cards_gradient() -> Mat {
        // g(x) = (x1 + x3, x2, x3)
        Mat::new(&[[1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    #[test]
    fn disarrangement_examples() {
        let id = Mat::identity(3);
        assert_eq!(disarrangement_tensor(&id, &id).unwrap().max_abs(), 0.0);
        let m = disarrangement_tensor(&deck_of_cards_gradient(), &id).unwrap();
        assert_eq!(m, Vector::unit(3, 0).outer(&Vector::unit(3, 2)));
        let m = disarrangement_tensor(&Mat::diag(&[2.0]), &Mat::diag(&[1.0])).unwrap();
        assert_eq!(m, Mat::diag(&[1.0]));
        assert!(disarrangement_tensor(&Mat::identity(2), &id).is_err());
    }

    #[test]
    fn relaxed_bulk_examples() {
        let a = Mat::new(&[[0.3, 1.0], [-2.0, 0.5]]);
        assert_eq!(relaxed_bulk_abs(&a, &a).unwrap(), 0.0);
        let id = Mat::identity(3);
        assert_eq!(relaxed_bulk_abs(&deck_of_cards_gradient(), &id).unwrap(), 0.0);
        assert_eq!(relaxed_bulk_abs(&Mat::diag(&[2.0]), &Mat::diag(&[1.0])).unwrap(), 1.0);
        assert!(relaxed_bulk_abs(&Mat::identity(2), &id).is_err());
    }

    #[test]
    fn relaxed_surface_examples() {
        let e1 = Vector::unit(3, 0);
        let e3 = Vector::unit(3, 2);
        assert_eq!(relaxed_surface_abs(&Vector::zeros(3), &e3).unwrap(), 0.0);
        assert_eq!(relaxed_surface_abs(&e1, &e3).unwrap(), 0.0);
        assert_eq!(relaxed_surface_abs(&e3.scale(2.0), &e3).unwrap(), 2.0);
        assert!(matches!(
            relaxed_surface_abs(&e1, &e3.scale(2.0)),
            Err(Error::NonUnitNormal(_))
        ));
    }

    proptest! {
        #[test]
        fn plus_minus_split(v in prop::collection::vec(-3.0..3.0f64, 8)) {
            let a = Mat::new(&[[v[0], v[1]], [v[2], v[3]]]);
            let b = Mat::new(&[[v[4], v[5]], [v[6], v[7]]]);
            let p = relaxed_bulk_plus(&a, &b).unwrap();
            let m = relaxed_bulk_minus(&a, &b).unwrap();
            prop_assert!((p - m - (a - b).trace()).abs() < 1e-12);
            prop_assert!((p + m - relaxed_bulk_abs(&a, &b).unwrap()).abs() < 1e-12);
        }
    }
}
