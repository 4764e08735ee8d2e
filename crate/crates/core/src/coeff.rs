//! The linear diffusion family `A_ij(u) = α_ij + β_ij u1 + γ_ij u2` and the
//! Shigesada–Kawasaki–Teramoto parametrization.

use serde::{Deserialize, Serialize};

use crate::entropy::StatePoint;
use crate::error::{Error, Result};
use crate::linalg::Mat2;

/// Twelve coefficients of a linearly density-dependent 2×2 diffusion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CoeffSet {
    pub alpha: Mat2,
    pub beta: Mat2,
    pub gamma: Mat2,
}

impl CoeffSet {
    pub fn new(alpha: Mat2, beta: Mat2, gamma: Mat2) -> Result<Self> {
        let c = Self { alpha, beta, gamma };
        if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) {
            return Err(Error::InvalidState("coefficient set has non-finite entries".into()));
        }
        Ok(c)
    }

    /// Member of the symmetric family fixed by its five free parameters
    /// `(α11, α22, β11, β12, γ22)`; the other seven entries follow from
    /// requiring `D²h(u)·A(u)` to be symmetric.
    pub fn from_free(a11: f64, a22: f64, b11: f64, b12: f64, g22: f64) -> Self {
        let g21 = a22 - a11 + b12;
        let b22 = b11 - g21;
        let g11 = g22 - b12;
        Self {
            alpha: Mat2::diag(a11, a22),
            beta: Mat2::new(b11, b12, 0.0, b22),
            gamma: Mat2::new(g11, 0.0, g21, g22),
        }
    }

    /// `A(u) = I - diag(u)·𝟙𝟙ᵀ`, the segregation matrix with `D²h · A = diag(1/u1, 1/u2)`.
    pub fn segregation() -> Self {
        Self {
            alpha: Mat2::IDENTITY,
            beta: Mat2::new(-1.0, -1.0, 0.0, 0.0),
            gamma: Mat2::new(0.0, 0.0, -1.0, -1.0),
        }
    }

    /// `(α11, α22, β11, β12, γ22)`.
    pub fn free_params(&self) -> FreeParams {
        FreeParams {
            a11: self.alpha.get(0, 0),
            a22: self.alpha.get(1, 1),
            b11: self.beta.get(0, 0),
            b12: self.beta.get(0, 1),
            g22: self.gamma.get(1, 1),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.is_finite() && self.beta.is_finite() && self.gamma.is_finite()
    }

    /// `∂A/∂u1 = β`, `∂A/∂u2 = γ`.
    pub fn slope(&self, k: usize) -> Mat2 {
        if k == 0 {
            self.beta
        } else {
            self.gamma
        }
    }
}

/// The five parameters left after imposing symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeParams {
    pub a11: f64,
    pub a22: f64,
    pub b11: f64,
    pub b12: f64,
    pub g22: f64,
}

impl FreeParams {
    pub fn complete(&self) -> CoeffSet {
        CoeffSet::from_free(self.a11, self.a22, self.b11, self.b12, self.g22)
    }

    /// Parameters of `A - ε·P` where `P` is the segregation matrix.
    pub fn shifted(&self, eps: f64) -> FreeParams {
        FreeParams {
            a11: self.a11 - eps,
            a22: self.a22 - eps,
            b11: self.b11 + eps,
            b12: self.b12 + eps,
            g22: self.g22 + eps,
        }
    }
}

/// Evaluate `A(u)` entrywise.
pub fn eval_diffusion_matrix(c: &CoeffSet, u: &StatePoint) -> Mat2 {
    c.alpha + c.beta.scale(u.u1) + c.gamma.scale(u.u2)
}

/// SKT diffusion constants `a_ij` and Lotka–Volterra constants `b_ij`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SktParams {
    pub a10: f64,
    pub a20: f64,
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
    #[serde(default)]
    pub b10: f64,
    #[serde(default)]
    pub b11: f64,
    #[serde(default)]
    pub b12: f64,
    #[serde(default)]
    pub b20: f64,
    #[serde(default)]
    pub b21: f64,
    #[serde(default)]
    pub b22: f64,
}

impl SktParams {
    pub fn diffusion(a10: f64, a20: f64, a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self { a10, a20, a11, a12, a21, a22, ..Default::default() }
    }

    pub fn with_lv(mut self, b1: [f64; 3], b2: [f64; 3]) -> Self {
        [self.b10, self.b11, self.b12] = b1;
        [self.b20, self.b21, self.b22] = b2;
        self
    }

    pub fn named(&self) -> [(&'static str, f64); 12] {
        [
            ("a10", self.a10),
            ("a20", self.a20),
            ("a11", self.a11),
            ("a12", self.a12),
            ("a21", self.a21),
            ("a22", self.a22),
            ("b10", self.b10),
            ("b11", self.b11),
            ("b12", self.b12),
            ("b20", self.b20),
            ("b21", self.b21),
            ("b22", self.b22),
        ]
    }

    /// All constants must be finite and nonnegative.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.named() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::config(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Match the SKT matrix against the linear family.
pub fn from_skt(s: &SktParams) -> CoeffSet {
    CoeffSet {
        alpha: Mat2::diag(s.a10, s.a20),
        beta: Mat2::new(2.0 * s.a11, s.a12, 0.0, s.a21),
        gamma: Mat2::new(s.a12, 0.0, s.a21, 2.0 * s.a22),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Mat2, b: Mat2, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    #[test]
    fn eval_examples() {
        let c = CoeffSet::from_free(0.7, 1.3, -0.2, 0.4, 2.0);
        assert_eq!(eval_diffusion_matrix(&c, &StatePoint::new(0.0, 0.0)), c.alpha);

        let skt = from_skt(&SktParams::diffusion(1.0, 1.0, 0.5, 0.5, 0.5, 0.5));
        let a = eval_diffusion_matrix(&skt, &StatePoint::BARYCENTER);
        assert!(close(a, Mat2::new(1.5, 1.0 / 6.0, 1.0 / 6.0, 1.5), 1e-15));

        let p = eval_diffusion_matrix(&CoeffSet::segregation(), &StatePoint::new(0.25, 0.25));
        assert_eq!(p, Mat2::new(0.75, -0.25, -0.25, 0.75));
    }

    #[test]
    fn from_skt_examples() {
        let c = from_skt(&SktParams::diffusion(1.0, 1.0, 0.5, 0.5, 0.5, 0.5));
        assert_eq!(c.alpha, Mat2::IDENTITY);
        assert_eq!(c.beta, Mat2::new(1.0, 0.5, 0.0, 0.5));
        assert_eq!(c.gamma, Mat2::new(0.5, 0.0, 0.5, 1.0));

        assert_eq!(from_skt(&SktParams::default()), CoeffSet::default());

        let c = from_skt(&SktParams::diffusion(1.0, 2.0, 1.0, 0.0, 1.0, 0.0));
        assert_eq!(c.alpha, Mat2::diag(1.0, 2.0));
        assert_eq!(c.beta, Mat2::new(2.0, 0.0, 0.0, 1.0));
        assert_eq!(c.gamma, Mat2::new(0.0, 0.0, 1.0, 0.0));
    }

    #[test]
    fn skt_matrix_matches_family_evaluation() {
        let s = SktParams::diffusion(0.3, 1.1, 0.7, 0.2, 0.9, 0.4);
        let u = StatePoint::new(0.21, 0.43);
        let direct = Mat2::new(
            s.a10 + 2.0 * s.a11 * u.u1 + s.a12 * u.u2,
            s.a12 * u.u1,
            s.a21 * u.u2,
            s.a20 + s.a21 * u.u1 + 2.0 * s.a22 * u.u2,
        );
        assert!(close(eval_diffusion_matrix(&from_skt(&s), &u), direct, 1e-15));
    }

    #[test]
    fn segregation_is_a_symmetric_family_member() {
        assert_eq!(CoeffSet::segregation().free_params().complete(), CoeffSet::segregation());
    }

    #[test]
    fn validate_rejects_negative_and_nan() {
        assert!(SktParams::diffusion(1.0, 1.0, 0.5, 0.5, 0.5, 0.5).validate().is_ok());
        let err = SktParams::diffusion(1.0, -1.0, 0.5, 0.5, 0.5, 0.5).validate().unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "a20"));
        assert!(SktParams::diffusion(f64::NAN, 1.0, 0.0, 0.0, 0.0, 0.0).validate().is_err());
    }
}
