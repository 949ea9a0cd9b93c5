//! Real 2x2 matrices and the constructors for the transfer matrices, the
//! basis change that diagonalizes the free dynamics, rotations and the
//! nilpotent impurity perturbation.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::EnergyPoint;

/// Row-major real 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);
    pub const ZERO: Mat2 = Mat2::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a11, self.a21, self.a12, self.a22)
    }

    /// Adjugate; equals the inverse when `det == 1`.
    pub fn adjugate(&self) -> Self {
        Self::new(self.a22, -self.a12, -self.a21, self.a11)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(s * self.a11, s * self.a12, s * self.a21, s * self.a22)
    }

    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        [
            self.a11 * x[0] + self.a12 * x[1],
            self.a21 * x[0] + self.a22 * x[1],
        ]
    }

    pub fn frobenius(&self) -> f64 {
        (self.a11 * self.a11 + self.a12 * self.a12 + self.a21 * self.a21 + self.a22 * self.a22)
            .sqrt()
    }

    /// Entrywise maximum of `|self - other|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.a11 - other.a11)
            .abs()
            .max((self.a12 - other.a12).abs())
            .max((self.a21 - other.a21).abs())
            .max((self.a22 - other.a22).abs())
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, r: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * r.a11 + self.a12 * r.a21,
            self.a11 * r.a12 + self.a12 * r.a22,
            self.a21 * r.a11 + self.a22 * r.a21,
            self.a21 * r.a12 + self.a22 * r.a22,
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;

    fn add(self, r: Mat2) -> Mat2 {
        Mat2::new(self.a11 + r.a11, self.a12 + r.a12, self.a21 + r.a21, self.a22 + r.a22)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;

    fn sub(self, r: Mat2) -> Mat2 {
        Mat2::new(self.a11 - r.a11, self.a12 - r.a12, self.a21 - r.a21, self.a22 - r.a22)
    }
}

/// Unit vector `(cos theta, sin theta)`.
pub fn unit(theta: f64) -> [f64; 2] {
    let (s, c) = theta.sin_cos();
    [c, s]
}

/// Transfer matrix `[[v - E, -1], [1, 0]]` of one lattice site.
pub fn transfer(e: &EnergyPoint, v: f64) -> Mat2 {
    Mat2::new(v - e.energy(), -1.0, 1.0, 0.0)
}

/// Basis change `M = sin(k)^{-1/2} [[sin k, 0], [-cos k, 1]]`.
pub fn basis_change(e: &EnergyPoint) -> Mat2 {
    let (s, c) = e.k().sin_cos();
    Mat2::new(s, 0.0, -c, 1.0).scale(s.sqrt().recip())
}

/// Closed-form inverse of [`basis_change`] (its adjugate, `det M = 1`).
pub fn basis_change_inverse(e: &EnergyPoint) -> Mat2 {
    basis_change(e).adjugate()
}

pub fn rotation(angle: f64) -> Mat2 {
    let (s, c) = angle.sin_cos();
    Mat2::new(c, -s, s, c)
}

/// Nilpotent impurity perturbation `P = -(v / sin k) [[0, 0], [1, 0]]`.
pub fn perturbation(e: &EnergyPoint, v: f64) -> Mat2 {
    Mat2::new(0.0, 0.0, -v / e.sin_k(), 0.0)
}

/// Entrywise tolerance between the two evaluations of `M T M^{-1}`.
pub const CONJUGATION_TOLERANCE: f64 = 1e-11;

/// `M T M^{-1}` by explicit conjugation.
pub fn conjugated_transfer_explicit(e: &EnergyPoint, v: f64) -> Mat2 {
    basis_change(e) * transfer(e, v) * basis_change_inverse(e)
}

/// `R_k (1 + P)`: the factorized form of `M T M^{-1}`.
pub fn conjugated_transfer_factorized(e: &EnergyPoint, v: f64) -> Mat2 {
    rotation(e.k()) * (Mat2::IDENTITY + perturbation(e, v))
}

/// `M T^E_v M^{-1}`, checked against the factorization `R_k (1 + P)`.
/// Returns the factorized form.
pub fn conjugated_transfer(e: &EnergyPoint, v: f64) -> Result<Mat2> {
    let factorized = conjugated_transfer_factorized(e, v);
    let explicit = conjugated_transfer_explicit(e, v);
    // Entries of both forms grow like |v| / sin k; compare relative to that scale.
    let scale = 1.0f64.max(factorized.frobenius());
    let diff = factorized.max_abs_diff(&explicit);
    if diff > CONJUGATION_TOLERANCE * scale {
        return Err(Error::Consistency(format!(
            "M T M^-1 and R_k(1+P) differ by {diff:e} at k = {}, v = {v}",
            e.k()
        )));
    }
    Ok(factorized)
}

/// `R_psi M T^E_v M^{-1}`.
pub fn hat_transfer(e: &EnergyPoint, psi: f64, v: f64) -> Result<Mat2> {
    Ok(rotation(psi) * conjugated_transfer(e, v)?)
}

/// Larger eigenvalue `lambda_v = 1 + a/2 + sqrt(a + a^2/4)`, `a = v^2 / sin^2 k`,
/// of `|1 + P|^2`.
pub fn expansion_eigenvalue(e: &EnergyPoint, v: f64) -> f64 {
    let c = v / e.sin_k();
    let a = c * c;
    1.0 + 0.5 * a + (a + 0.25 * a * a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn point(k: f64) -> EnergyPoint {
        EnergyPoint::from_k(k).unwrap()
    }

    fn close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
        a.max_abs_diff(b) <= tol
    }

    #[test]
    fn transfer_examples() {
        let e0 = point(PI / 2.0);
        assert!(close(&transfer(&e0, 0.0), &Mat2::new(0.0, -1.0, 1.0, 0.0), 1e-15));
        assert!(close(&transfer(&e0, 1.0), &Mat2::new(1.0, -1.0, 1.0, 0.0), 1e-15));
        let e1 = EnergyPoint::from_energy(-1.0).unwrap();
        assert_eq!(transfer(&e1, 2.0), Mat2::new(3.0, -1.0, 1.0, 0.0));
    }

    #[test]
    fn basis_change_examples() {
        assert!(close(&basis_change(&point(PI / 2.0)), &Mat2::IDENTITY, 1e-15));
        // Direct evaluation at k = pi/3: sin = sqrt(3)/2, cos = 1/2.
        let s = 3f64.sqrt() / 2.0;
        let expected = Mat2::new(s, 0.0, -0.5, 1.0).scale(1.0 / s.sqrt());
        assert!(close(&basis_change(&point(PI / 3.0)), &expected, 1e-15));
    }

    #[test]
    fn rotation_examples() {
        assert!(close(&rotation(0.0), &Mat2::IDENTITY, 0.0));
        assert!(close(&rotation(PI / 2.0), &Mat2::new(0.0, -1.0, 1.0, 0.0), 1e-16));
        let (a, b) = (0.37, -2.1);
        assert!(close(&(rotation(a) * rotation(b)), &rotation(a + b), 1e-12));
    }

    #[test]
    fn perturbation_examples() {
        let e = point(PI / 2.0);
        assert_eq!(perturbation(&e, 0.0), Mat2::new(0.0, 0.0, -0.0, 0.0));
        assert!(close(&perturbation(&e, 2.0), &Mat2::new(0.0, 0.0, -2.0, 0.0), 1e-15));
        let p = perturbation(&point(1.1), -3.7);
        assert_eq!(p * p, Mat2::ZERO);
    }

    #[test]
    fn conjugated_transfer_examples() {
        for k in [0.3, 1.0, 2.5] {
            let e = point(k);
            assert!(close(&conjugated_transfer(&e, 0.0).unwrap(), &rotation(k), 1e-15));
        }
        // R_{pi/2} (1 + P) with P = [[0,0],[-2,0]]: [[0,-1],[1,0]] * [[1,0],[-2,1]].
        // At k = pi/2, M is the identity, so this is T itself.
        let m = conjugated_transfer(&point(PI / 2.0), 2.0).unwrap();
        assert!(close(&m, &Mat2::new(2.0, -1.0, 1.0, 0.0), 1e-15));
    }

    #[test]
    fn hat_transfer_examples() {
        let e = point(0.8);
        assert_eq!(
            hat_transfer(&e, 0.0, 1.3).unwrap(),
            rotation(0.0) * conjugated_transfer(&e, 1.3).unwrap()
        );
        assert!(close(&hat_transfer(&e, 0.4, 0.0).unwrap(), &rotation(1.2), 1e-15));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(10_000))]

        #[test]
        fn determinants_are_one(k in 1e-3f64..(PI - 1e-3), v in -10.0f64..10.0, psi in -PI..PI) {
            let e = point(k);
            proptest::prop_assert!((transfer(&e, v).det() - 1.0).abs() <= 1e-12);
            proptest::prop_assert!((basis_change(&e).det() - 1.0).abs() <= 1e-12);
            proptest::prop_assert!((rotation(psi).det() - 1.0).abs() <= 1e-12);
            let h = hat_transfer(&e, psi, v).unwrap();
            proptest::prop_assert!((h.det() - 1.0).abs() <= 1e-11 * h.frobenius().powi(2).max(1.0));
        }

        #[test]
        fn conjugation_identity(k in 1e-3f64..(PI - 1e-3), v in -10.0f64..10.0) {
            let e = point(k);
            let lhs = conjugated_transfer_explicit(&e, v);
            let rhs = conjugated_transfer_factorized(&e, v);
            proptest::prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-11);
        }

        #[test]
        fn spectrum_of_gram_matrix(k in 1e-3f64..(PI - 1e-3), v in -10.0f64..10.0) {
            let e = point(k);
            let m = conjugated_transfer(&e, v).unwrap();
            let g = m.transpose() * m;
            // Direct symmetric 2x2 eigensolve.
            let half_tr = 0.5 * g.trace();
            let disc = (0.25 * (g.a11 - g.a22).powi(2) + g.a12 * g.a21).sqrt();
            let top = half_tr + disc;
            let bottom = half_tr - disc;
            let lambda = expansion_eigenvalue(&e, v);
            proptest::prop_assert!((top - lambda).abs() <= 1e-10 * lambda);
            // The small eigenvalue carries absolute error of order eps * lambda.
            proptest::prop_assert!((bottom - lambda.recip()).abs() <= 1e-10 * lambda);
            let a = (v / e.sin_k()).powi(2);
            proptest::prop_assert!((lambda + lambda.recip() - (2.0 + a)).abs() <= 1e-10 * lambda);
        }
    }
}
