//! Closed-form certificates behind the positive-semidefiniteness criterion:
//! vertex limits of `s·D²h·A`, the two diagonal polynomials whose boundary
//! values control the sign of `(D²h A)_ii`, and the determinant of `A` with
//! its constant Hessian.

use serde::{Deserialize, Serialize};

use crate::coeff::{eval_diffusion_matrix, CoeffSet};
use crate::entropy::{entropy_hessian, StatePoint};
use crate::error::Result;
use crate::linalg::Mat2;

/// `D²h(u)·A(u)` at an interior point.
pub fn hessian_times_diffusion(c: &CoeffSet, u: &StatePoint) -> Result<Mat2> {
    Ok(entropy_hessian(u)? * eval_diffusion_matrix(c, u))
}

/// The three curves approaching the vertices of the triangle as `s → 0+`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexPath {
    /// `(s, s)`, towards `(0, 0)`.
    Origin,
    /// `(1 - 2s, s)`, towards `(1, 0)`.
    FirstSpecies,
    /// `(s, 1 - 2s)`, towards `(0, 1)`.
    SecondSpecies,
}

impl VertexPath {
    pub const ALL: [VertexPath; 3] = [VertexPath::Origin, VertexPath::FirstSpecies, VertexPath::SecondSpecies];

    /// Point on the path with `u3` set exactly, `s ∈ (0, 1/2)`.
    pub fn point(self, s: f64) -> StatePoint {
        match self {
            VertexPath::Origin => StatePoint { u1: s, u2: s, u3: 1.0 - 2.0 * s },
            VertexPath::FirstSpecies => StatePoint { u1: 1.0 - 2.0 * s, u2: s, u3: s },
            VertexPath::SecondSpecies => StatePoint { u1: s, u2: 1.0 - 2.0 * s, u3: s },
        }
    }

    /// `s · D²h · A` along the path.
    pub fn scaled_matrix(self, c: &CoeffSet, s: f64) -> Result<Mat2> {
        Ok(hessian_times_diffusion(c, &self.point(s))?.scale(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VertexLimits {
    pub f1: Mat2,
    pub f2: Mat2,
    pub f3: Mat2,
}

impl VertexLimits {
    pub fn get(&self, path: VertexPath) -> Mat2 {
        match path {
            VertexPath::Origin => self.f1,
            VertexPath::FirstSpecies => self.f2,
            VertexPath::SecondSpecies => self.f3,
        }
    }
}

/// Limits of `s·D²h·A` along the three vertex paths, for the symmetric family.
pub fn vertex_limits(c: &CoeffSet) -> VertexLimits {
    let p = c.free_params();
    let s1 = p.a11 + p.b11;
    let s2 = p.a22 + p.g22;
    VertexLimits {
        f1: Mat2::diag(p.a11, p.a22),
        f2: Mat2::new(s1, s1, s1, 2.0 * s1 - p.b12),
        f3: Mat2::new(p.a11 + p.a22 + 2.0 * p.g22 - p.b12, s2, s2, s2),
    }
}

pub fn det_a(c: &CoeffSet, u: &StatePoint) -> f64 {
    eval_diffusion_matrix(c, u).det()
}

/// Edges of the triangle, each parametrized by one coordinate in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    /// `u1 = 0`, parameter `u2`.
    U1Zero,
    /// `u2 = 0`, parameter `u1`.
    U2Zero,
    /// `u1 + u2 = 1`, parameter `u1`.
    Hypotenuse,
}

impl Edge {
    pub const ALL: [Edge; 3] = [Edge::U1Zero, Edge::U2Zero, Edge::Hypotenuse];

    pub fn point(self, t: f64) -> StatePoint {
        match self {
            Edge::U1Zero => StatePoint { u1: 0.0, u2: t, u3: 1.0 - t },
            Edge::U2Zero => StatePoint { u1: t, u2: 0.0, u3: 1.0 - t },
            Edge::Hypotenuse => StatePoint { u1: t, u2: 1.0 - t, u3: 0.0 },
        }
    }
}

/// Factored form of `det A` restricted to an edge (symmetric family).
pub fn det_a_on_edge(c: &CoeffSet, edge: Edge, t: f64) -> f64 {
    let p = c.free_params();
    match edge {
        Edge::U1Zero => (p.a22 + p.g22 * t) * (p.a11 + (p.g22 - p.b12) * t),
        Edge::U2Zero => (p.a11 + p.b11 * t) * (p.a22 * (1.0 - t) + (p.a11 + p.b11 - p.b12) * t),
        Edge::Hypotenuse => {
            ((p.a22 + p.g22) * (1.0 - t) + (p.a11 + p.b11) * t)
                * (p.a11 - p.b12 + p.g22 + (p.b11 - p.g22) * t)
        }
    }
}

/// Hessian of the quadratic `u ↦ det A(u)`, assembled from the gradients of
/// the (affine) entries of `A`.
pub fn det_a_hessian(c: &CoeffSet) -> Mat2 {
    let grad = |i: usize, j: usize| [c.beta.get(i, j), c.gamma.get(i, j)];
    let (g11, g22, g12, g21) = (grad(0, 0), grad(1, 1), grad(0, 1), grad(1, 0));
    let mut h = [[0.0; 2]; 2];
    for (k, row) in h.iter_mut().enumerate() {
        for (l, x) in row.iter_mut().enumerate() {
            *x = g11[k] * g22[l] + g22[k] * g11[l] - g12[k] * g21[l] - g21[k] * g12[l];
        }
    }
    Mat2(h)
}

/// `det D²(det A) = -(β11 β12 + γ22 (α11 - α22 - β12))²`, never positive.
pub fn det_hessian_certificate(c: &CoeffSet) -> f64 {
    let p = c.free_params();
    let q = p.b11 * p.b12 + p.g22 * (p.a11 - p.a22 - p.b12);
    -(q * q)
}

/// `f1(u2, u3) = u1 u3 (D²h A)_11` with `u1 = 1 - u2 - u3`, in its polynomial form.
pub fn diag_poly_f1(c: &CoeffSet, u2: f64, u3: f64) -> f64 {
    let u = StatePoint { u1: 1.0 - u2 - u3, u2, u3 };
    let a = eval_diffusion_matrix(c, &u);
    (u.u1 + u.u3) * a.get(0, 0) + u.u1 * a.get(1, 0)
}

/// `f2(u1, u3) = u2 u3 (D²h A)_22` with `u2 = 1 - u1 - u3`, in its polynomial form.
pub fn diag_poly_f2(c: &CoeffSet, u1: f64, u3: f64) -> f64 {
    let u = StatePoint { u1, u2: 1.0 - u1 - u3, u3 };
    let a = eval_diffusion_matrix(c, &u);
    u.u2 * a.get(0, 1) + (u.u2 + u.u3) * a.get(1, 1)
}

/// Edges of the `(u2, u3)` / `(u1, u3)` triangles on which `f1`, `f2` live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolyEdge {
    /// `f1` on `u3 = 1 - u2` (i.e. `u1 = 0`), parameter `u2`.
    F1U1Zero,
    /// `f1` on `u2 = 0`, parameter `u3`.
    F1U2Zero,
    /// `f1` on `u3 = 0`, parameter `u2`.
    F1U3Zero,
    /// `f2` on `u1 = 0`, parameter `u3`.
    F2U1Zero,
    /// `f2` on `u3 = 1 - u1` (i.e. `u2 = 0`), parameter `u1`.
    F2U2Zero,
    /// `f2` on `u3 = 0`, parameter `u1`.
    F2U3Zero,
}

impl PolyEdge {
    pub const ALL: [PolyEdge; 6] = [
        PolyEdge::F1U1Zero,
        PolyEdge::F1U2Zero,
        PolyEdge::F1U3Zero,
        PolyEdge::F2U1Zero,
        PolyEdge::F2U2Zero,
        PolyEdge::F2U3Zero,
    ];

    /// Direct evaluation of the restricted polynomial.
    pub fn evaluate(self, c: &CoeffSet, t: f64) -> f64 {
        match self {
            PolyEdge::F1U1Zero => diag_poly_f1(c, t, 1.0 - t),
            PolyEdge::F1U2Zero => diag_poly_f1(c, 0.0, t),
            PolyEdge::F1U3Zero => diag_poly_f1(c, t, 0.0),
            PolyEdge::F2U1Zero => diag_poly_f2(c, 0.0, t),
            PolyEdge::F2U2Zero => diag_poly_f2(c, t, 1.0 - t),
            PolyEdge::F2U3Zero => diag_poly_f2(c, t, 0.0),
        }
    }

    /// Factored closed form of the restriction.
    pub fn closed_form(self, c: &CoeffSet, t: f64) -> f64 {
        let p = c.free_params();
        match self {
            PolyEdge::F1U1Zero => (1.0 - t) * (p.a11 + (p.g22 - p.b12) * t),
            PolyEdge::F1U2Zero => p.a11 + p.b11 * (1.0 - t),
            PolyEdge::F1U3Zero => (1.0 - t) * ((p.a11 + p.b11) * (1.0 - t) + (p.a22 + p.g22) * t),
            PolyEdge::F2U1Zero => p.a22 + p.g22 * (1.0 - t),
            PolyEdge::F2U2Zero => (1.0 - t) * (p.a22 * (1.0 - t) + (p.a11 + p.b11 - p.b12) * t),
            PolyEdge::F2U3Zero => (1.0 - t) * ((p.a22 + p.g22) * (1.0 - t) + (p.a11 + p.b11) * t),
        }
    }
}

/// `Δf1 = -Δf2 = 2(α11 - α22 + β11 - γ22)`, constant on the triangle.
pub fn diag_poly_laplacian(c: &CoeffSet) -> f64 {
    let p = c.free_params();
    2.0 * (p.a11 - p.a22 + p.b11 - p.g22)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::from_skt;
    use crate::coeff::SktParams;

    fn sample() -> CoeffSet {
        CoeffSet::from_free(1.0, 1.0, 1.0, 0.5, 1.0)
    }

    #[test]
    fn vertex_limit_examples() {
        let v = vertex_limits(&sample());
        assert_eq!(v.f1, Mat2::diag(1.0, 1.0));
        assert_eq!(v.f2, Mat2::new(2.0, 2.0, 2.0, 3.5));
        assert_eq!(v.f3, Mat2::new(3.5, 2.0, 2.0, 2.0));

        let v = vertex_limits(&CoeffSet::default());
        assert_eq!((v.f1, v.f2, v.f3), (Mat2::ZERO, Mat2::ZERO, Mat2::ZERO));

        let v = vertex_limits(&CoeffSet::segregation());
        assert_eq!(v.f1, Mat2::IDENTITY);
        assert_eq!(v.f2, Mat2::new(0.0, 0.0, 0.0, 1.0));
        assert_eq!(v.f3, Mat2::new(1.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn det_a_examples() {
        let c = CoeffSet::from_free(0.7, 1.9, 0.3, -0.2, 0.8);
        assert!((det_a(&c, &StatePoint::new(0.0, 0.0)) - 0.7 * 1.9).abs() < 1e-15);
        let d = det_a(&sample(), &StatePoint::new(0.0, 0.5));
        assert!((d - 1.875).abs() < 1e-15);
        assert!((det_a_on_edge(&sample(), Edge::U1Zero, 0.5) - 1.875).abs() < 1e-15);
        assert!((det_a(&CoeffSet::segregation(), &StatePoint::new(0.25, 0.25)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn det_certificate_examples() {
        assert_eq!(det_hessian_certificate(&CoeffSet::from_free(0.0, 0.0, 1.0, 1.0, 0.0)), -1.0);
        assert_eq!(det_hessian_certificate(&CoeffSet::from_free(0.4, 2.0, 0.0, 0.0, 0.0)), 0.0);
        assert_eq!(det_hessian_certificate(&sample()), 0.0);
        let c = CoeffSet::from_free(0.4, 2.0, 0.7, -0.3, 1.1);
        let h = det_a_hessian(&c);
        assert!((h.det() - det_hessian_certificate(&c)).abs() <= 1e-12);
    }

    #[test]
    fn skt_diagonal_polynomial_is_u1_u3_times_ha() {
        let c = from_skt(&SktParams::diffusion(0.4, 0.9, 0.8, 0.3, 0.8, 0.3));
        for &(u2, u3) in &[(0.2, 0.3), (0.05, 0.9), (0.6, 0.1)] {
            let u = StatePoint { u1: 1.0 - u2 - u3, u2, u3 };
            let ha = hessian_times_diffusion(&c, &u).unwrap();
            assert!((diag_poly_f1(&c, u2, u3) - u.u1 * u.u3 * ha.get(0, 0)).abs() < 1e-13);
            assert!((diag_poly_f2(&c, u.u1, u3) - u.u2 * u.u3 * ha.get(1, 1)).abs() < 1e-13);
        }
    }

    #[test]
    fn poly_edges_share_vertex_values() {
        let c = CoeffSet::from_free(0.3, 1.7, -0.2, 0.9, 0.4);
        // f1 at (u2, u3) = (0, 0) is reached from the u2 = 0 and u3 = 0 edges.
        let a = PolyEdge::F1U2Zero.closed_form(&c, 0.0);
        let b = PolyEdge::F1U3Zero.closed_form(&c, 0.0);
        assert!((a - b).abs() < 1e-15);
    }
}
