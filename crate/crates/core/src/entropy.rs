//! The triangle `D = {u1 > 0, u2 > 0, u1 + u2 < 1}`, the entropy density
//! `h(u) = Σ u_i (log u_i - 1)` over the three fractions `u1, u2, u3 = 1 - u1 - u2`,
//! and the change of variables `w = Dh(u)` with its inverse.
//!
//! The inverse map sends every finite `w` into the open triangle, which is
//! what keeps densities reconstructed from entropy variables bounded.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat2;

/// Default tolerance separating boundary contact from round-off.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// `1 + log 3`: the offset that makes the entropy nonnegative on the closure.
pub const ENTROPY_OFFSET: f64 = 1.0 + 1.098_612_288_668_109_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Interior,
    Boundary,
    Outside,
}

/// A density pair together with the remaining capacity `u3`.
///
/// `u3` is stored rather than recomputed: points produced by
/// [`entropy_gradient_inverse`] carry a `u3` that stays positive even when
/// `1 - u1 - u2` would round to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatePoint {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
}

impl StatePoint {
    pub fn new(u1: f64, u2: f64) -> Self {
        Self { u1, u2, u3: 1.0 - u1 - u2 }
    }

    pub const BARYCENTER: StatePoint = StatePoint { u1: 1.0 / 3.0, u2: 1.0 / 3.0, u3: 1.0 / 3.0 };

    pub fn as_array(&self) -> [f64; 2] {
        [self.u1, self.u2]
    }

    pub fn is_finite(&self) -> bool {
        self.u1.is_finite() && self.u2.is_finite() && self.u3.is_finite()
    }

    /// Smallest of the three barycentric coordinates.
    pub fn margin(&self) -> f64 {
        self.u1.min(self.u2).min(self.u3)
    }

    pub fn membership(&self, tol: f64) -> Membership {
        let m = self.margin();
        if m > tol {
            Membership::Interior
        } else if m >= -tol {
            Membership::Boundary
        } else {
            Membership::Outside
        }
    }

    pub fn is_interior(&self) -> bool {
        self.u1 > 0.0 && self.u2 > 0.0 && self.u3 > 0.0
    }

    /// Componentwise mean; the triangle is convex so means of members stay inside.
    pub fn midpoint(&self, other: &StatePoint) -> StatePoint {
        StatePoint {
            u1: 0.5 * (self.u1 + other.u1),
            u2: 0.5 * (self.u2 + other.u2),
            u3: 0.5 * (self.u3 + other.u3),
        }
    }

    fn require(&self, operation: &'static str, interior: bool) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::InvalidState(format!(
                "{operation}: non-finite point ({}, {})",
                self.u1, self.u2
            )));
        }
        let membership = self.membership(0.0);
        let ok = match membership {
            Membership::Interior => true,
            Membership::Boundary => !interior,
            Membership::Outside => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain {
                operation,
                required: if interior { "an interior point" } else { "a point of the closed triangle" },
                membership,
                u1: self.u1,
                u2: self.u2,
            })
        }
    }
}

/// Classify `(u1, u2)` against the triangle with boundary tolerance `tol`.
pub fn classify(u1: f64, u2: f64, tol: f64) -> Result<Membership> {
    if !(u1.is_finite() && u2.is_finite()) {
        return Err(Error::InvalidState(format!("non-finite point ({u1}, {u2})")));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidState(format!("membership tolerance must be >= 0, got {tol}")));
    }
    Ok(StatePoint::new(u1, u2).membership(tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyValue {
    pub raw: f64,
    pub normalized: f64,
}

impl EntropyValue {
    pub fn from_raw(raw: f64) -> Self {
        Self { raw, normalized: raw + ENTROPY_OFFSET }
    }
}

/// Entropy variable `w = Dh(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EntropyVariable {
    pub w1: f64,
    pub w2: f64,
}

impl EntropyVariable {
    pub fn new(w1: f64, w2: f64) -> Self {
        Self { w1, w2 }
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.w1, self.w2]
    }
}

#[inline]
fn xlogx_minus_x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (x.ln() - 1.0)
    }
}

/// `h(u)`, with `0 · log 0 = 0` on the boundary.
pub fn entropy_density(u: &StatePoint) -> Result<EntropyValue> {
    u.require("entropy_density", false)?;
    let raw = xlogx_minus_x(u.u1) + xlogx_minus_x(u.u2) + xlogx_minus_x(u.u3);
    Ok(EntropyValue::from_raw(raw))
}

/// `w_i = log(u_i / u3)`.
pub fn entropy_gradient(u: &StatePoint) -> Result<EntropyVariable> {
    u.require("entropy_gradient", true)?;
    let l3 = u.u3.ln();
    Ok(EntropyVariable { w1: u.u1.ln() - l3, w2: u.u2.ln() - l3 })
}

/// `D²h(u) = diag(1/u1, 1/u2) + (1/u3)·𝟙𝟙ᵀ`.
pub fn entropy_hessian(u: &StatePoint) -> Result<Mat2> {
    u.require("entropy_hessian", true)?;
    Ok(hessian_unchecked(u))
}

#[inline]
pub(crate) fn hessian_unchecked(u: &StatePoint) -> Mat2 {
    let r3 = 1.0 / u.u3;
    Mat2::new(1.0 / u.u1 + r3, r3, r3, 1.0 / u.u2 + r3)
}

/// `(D²h(u))⁻¹ = diag(u) - u uᵀ`, polynomial in `u` and defined on the closure.
#[inline]
pub fn inverse_hessian(u: &StatePoint) -> Mat2 {
    let (a, b) = (u.u1, u.u2);
    Mat2::new(a * (1.0 - a), -a * b, -a * b, b * (1.0 - b))
}

/// `u_i = exp(w_i) / (1 + exp(w1) + exp(w2))`, evaluated with the exponents
/// shifted by `max(0, w1, w2)` so that no term overflows.
pub fn entropy_gradient_inverse(w: &EntropyVariable) -> Result<StatePoint> {
    if !(w.w1.is_finite() && w.w2.is_finite()) {
        return Err(Error::InvalidState(format!("non-finite entropy variable ({}, {})", w.w1, w.w2)));
    }
    Ok(inverse_unchecked(w))
}

#[inline]
pub(crate) fn inverse_unchecked(w: &EntropyVariable) -> StatePoint {
    let shift = w.w1.max(w.w2).max(0.0);
    let e0 = (-shift).exp();
    let e1 = (w.w1 - shift).exp();
    let e2 = (w.w2 - shift).exp();
    let denom = e0 + e1 + e2;
    StatePoint { u1: e1 / denom, u2: e2 / denom, u3: e0 / denom }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    const LN3: f64 = 1.098_612_288_668_109_8;

    #[test]
    fn offset_is_one_plus_log_three() {
        assert_eq!(ENTROPY_OFFSET, 1.0 + 3f64.ln());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(1.0 / 3.0, 1.0 / 3.0, 0.0).unwrap(), Membership::Interior);
        assert_eq!(classify(0.5, 0.5, 0.0).unwrap(), Membership::Boundary);
        assert_eq!(classify(0.8, 0.3, 0.0).unwrap(), Membership::Outside);
        assert_eq!(classify(1e-13, 0.5, MEMBERSHIP_TOL).unwrap(), Membership::Boundary);
        assert_eq!(classify(-1e-13, 0.5, MEMBERSHIP_TOL).unwrap(), Membership::Boundary);
        assert_eq!(classify(-1e-11, 0.5, MEMBERSHIP_TOL).unwrap(), Membership::Outside);
        assert!(matches!(classify(f64::NAN, 0.1, 0.0), Err(Error::InvalidState(_))));
        assert!(matches!(classify(0.1, f64::INFINITY, 0.0), Err(Error::InvalidState(_))));
        assert!(classify(0.1, 0.1, -1.0).is_err());
    }

    #[test]
    fn entropy_density_examples() {
        let e = entropy_density(&StatePoint::new(1.0 / 3.0, 1.0 / 3.0)).unwrap();
        assert!((e.raw - (-1.0 - LN3)).abs() < 1e-15);
        assert!(e.normalized.abs() <= 1e-14);
        let e = entropy_density(&StatePoint::new(0.5, 0.25)).unwrap();
        assert!((e.raw - (-2.039_720_770_839_918)).abs() < 1e-12);
        assert!((e.raw - -2.039721).abs() < 1e-6);
        let e = entropy_density(&StatePoint::new(1.0, 0.0)).unwrap();
        assert_eq!(e.raw, -1.0);
        assert!(matches!(
            entropy_density(&StatePoint::new(0.8, 0.3)),
            Err(Error::Domain { membership: Membership::Outside, .. })
        ));
    }

    #[test]
    fn gradient_examples() {
        let w = entropy_gradient(&StatePoint::new(1.0 / 3.0, 1.0 / 3.0)).unwrap();
        assert!(w.w1.abs() < 1e-15 && w.w2.abs() < 1e-15);
        let w = entropy_gradient(&StatePoint::new(0.5, 0.25)).unwrap();
        assert!((w.w1 - std::f64::consts::LN_2).abs() < 1e-15 && w.w2.abs() < 1e-15);
        let w = entropy_gradient(&StatePoint::new(0.25, 0.5)).unwrap();
        assert!(w.w1.abs() < 1e-15 && (w.w2 - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(matches!(
            entropy_gradient(&StatePoint::new(0.5, 0.5)),
            Err(Error::Domain { membership: Membership::Boundary, .. })
        ));
        assert!(entropy_gradient(&StatePoint::new(0.0, 0.5)).is_err());
        assert!(entropy_gradient(&StatePoint::new(0.9, 0.3)).is_err());
    }

    #[test]
    fn hessian_examples() {
        let h = entropy_hessian(&StatePoint::new(1.0 / 3.0, 1.0 / 3.0)).unwrap();
        assert!((h - Mat2::new(6.0, 3.0, 3.0, 6.0)).max_abs() < 1e-13);
        let h = entropy_hessian(&StatePoint::new(0.5, 0.25)).unwrap();
        assert_eq!(h, Mat2::new(6.0, 4.0, 4.0, 8.0));
        assert!(entropy_hessian(&StatePoint::new(0.0, 0.2)).is_err());
    }

    #[test]
    fn hessian_determinant_is_reciprocal_product() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let (a, b): (f64, f64) = (rng.gen_range(1e-3..1.0), rng.gen_range(1e-3..1.0));
            if a + b >= 0.999 {
                continue;
            }
            let u = StatePoint::new(a, b);
            let h = entropy_hessian(&u).unwrap();
            let expect = 1.0 / (u.u1 * u.u2 * u.u3);
            assert!((h.det() - expect).abs() <= 1e-9 * expect);
            assert!(h.sym_min_eigenvalue() > 0.0);
            let p = h * inverse_hessian(&u);
            assert!((p - Mat2::IDENTITY).max_abs() < 1e-9);
        }
    }

    #[test]
    fn inverse_examples() {
        let u = entropy_gradient_inverse(&EntropyVariable::new(0.0, 0.0)).unwrap();
        assert!((u.u1 - 1.0 / 3.0).abs() < 1e-15 && (u.u2 - 1.0 / 3.0).abs() < 1e-15);
        let u = entropy_gradient_inverse(&EntropyVariable::new(std::f64::consts::LN_2, 0.0)).unwrap();
        assert!((u.u1 - 0.5).abs() < 1e-15 && (u.u2 - 0.25).abs() < 1e-15);
        let u = entropy_gradient_inverse(&EntropyVariable::new(700.0, 0.0)).unwrap();
        assert!((u.u1 - 1.0).abs() < 1e-12);
        assert!(u.is_finite() && u.u2 > 0.0 && u.u3 > 0.0);
        assert!(entropy_gradient_inverse(&EntropyVariable::new(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn hessian_matches_finite_differences_of_gradient() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let step = 1e-6;
        let mut checked = 0;
        while checked < 100 {
            let u = StatePoint::new(rng.gen_range(0.01..0.98), rng.gen_range(0.01..0.98));
            if u.margin() < 1e-2 {
                continue;
            }
            checked += 1;
            let h = entropy_hessian(&u).unwrap();
            for j in 0..2 {
                let mut up = u.as_array();
                let mut dn = u.as_array();
                up[j] += step;
                dn[j] -= step;
                let wp = entropy_gradient(&StatePoint::new(up[0], up[1])).unwrap().as_array();
                let wm = entropy_gradient(&StatePoint::new(dn[0], dn[1])).unwrap().as_array();
                for i in 0..2 {
                    let fd = (wp[i] - wm[i]) / (2.0 * step);
                    let exact = h.get(i, j);
                    assert!((fd - exact).abs() <= 1e-5 * exact.abs(), "H[{i}][{j}] {exact} vs {fd}");
                }
            }
        }
    }

    #[test]
    fn normalized_entropy_nonnegative_on_closure() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for k in 0..10_000 {
            let (mut a, mut b): (f64, f64) = (rng.gen(), rng.gen());
            if a + b > 1.0 {
                a = 1.0 - a;
                b = 1.0 - b;
            }
            // Put every tenth sample on an edge.
            let u = match k % 30 {
                0 => StatePoint::new(0.0, b),
                10 => StatePoint::new(a, 0.0),
                20 => StatePoint::new(a, 1.0 - a),
                _ => StatePoint::new(a, b),
            };
            if u.membership(0.0) == Membership::Outside {
                continue;
            }
            let e = entropy_density(&u).unwrap();
            assert!(e.normalized >= -1e-15, "{u:?} -> {e:?}");
            assert_eq!(e.normalized - e.raw, ENTROPY_OFFSET);
        }
    }

    #[test]
    fn confinement_where_exponentials_are_representable() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1_000_000 {
            let w = EntropyVariable::new(rng.gen_range(-350.0..350.0), rng.gen_range(-350.0..350.0));
            let u = entropy_gradient_inverse(&w).unwrap();
            assert!(u.is_interior(), "{w:?} -> {u:?}");
            // u1 itself may round to 1; the gap to the hypotenuse is carried by u3.
            assert!(u.u1 + u.u2 <= 1.0 + f64::EPSILON);
        }
    }

    #[test]
    fn inverse_stays_in_closure_for_huge_arguments() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(19);
        for _ in 0..1_000_000 {
            let w = EntropyVariable::new(rng.gen_range(-1e6..1e6), rng.gen_range(-1e6..1e6));
            let u = entropy_gradient_inverse(&w).unwrap();
            assert!(u.is_finite());
            assert!(u.u1 >= 0.0 && u.u2 >= 0.0 && u.u3 >= 0.0);
            assert!(((u.u1 + u.u2 + u.u3) - 1.0).abs() <= 4.0 * f64::EPSILON);
        }
    }

    proptest! {
        #[test]
        fn gradient_roundtrip(a in 1e-9f64..1.0, b in 1e-9f64..1.0) {
            let u = StatePoint::new(a, b);
            prop_assume!(u.margin() >= 1e-9);
            let back = entropy_gradient_inverse(&entropy_gradient(&u).unwrap()).unwrap();
            prop_assert!((back.u1 - u.u1).abs() <= 1e-10 * u.u1);
            prop_assert!((back.u2 - u.u2).abs() <= 1e-10 * u.u2);
        }
    }
}
