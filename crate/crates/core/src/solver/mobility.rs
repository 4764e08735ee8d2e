use crate::coeff::{eval_diffusion_matrix, CoeffSet};
use crate::entropy::{inverse_hessian, StatePoint};
use crate::error::{Error, Result};
use crate::linalg::Mat2;

/// `B = A(u) (D²h(u))⁻¹`, the mobility of the entropy-variable formulation.
pub fn assemble_mobility(c: &CoeffSet, u: &StatePoint) -> Result<Mat2> {
    if !u.is_finite() || !u.is_interior() {
        return Err(Error::Domain {
            operation: "assemble_mobility",
            required: "an interior point",
            membership: u.membership(0.0),
            u1: u.u1,
            u2: u.u2,
        });
    }
    Ok(mobility_unchecked(c, u))
}

#[inline]
pub(crate) fn mobility_unchecked(c: &CoeffSet, u: &StatePoint) -> Mat2 {
    eval_diffusion_matrix(c, u) * inverse_hessian(u)
}

/// `∂B/∂u_k` for `k = 0, 1`.
pub fn mobility_derivative(c: &CoeffSet, u: &StatePoint, k: usize) -> Mat2 {
    let d_inv_h = if k == 0 {
        Mat2::new(1.0 - 2.0 * u.u1, -u.u2, -u.u2, 0.0)
    } else {
        Mat2::new(0.0, -u.u1, -u.u1, 1.0 - 2.0 * u.u2)
    };
    c.slope(k) * inverse_hessian(u) + eval_diffusion_matrix(c, u) * d_inv_h
}
