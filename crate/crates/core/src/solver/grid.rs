use serde::{Deserialize, Serialize};

use crate::coeff::CoeffSet;
use crate::entropy::{entropy_density, entropy_gradient, inverse_unchecked, EntropyVariable, StatePoint};
use crate::error::{Error, Result};
use crate::solver::mobility::mobility_unchecked;

/// Uniform grid of `n_cells` cells on `[0, length]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub n_cells: usize,
    pub length: f64,
}

impl Grid1D {
    pub fn new(n_cells: usize, length: f64) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::config("grid.n_cells", format!("must be >= 2, got {n_cells}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::config("grid.length", format!("must be positive, got {length}")));
        }
        Ok(Self { n_cells, length })
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_cells as f64
    }

    pub fn center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|j| self.center(j)).collect()
    }
}

/// Per-cell entropy variables at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridState {
    pub w: Vec<EntropyVariable>,
    pub t: f64,
}

impl GridState {
    /// Build from interior densities.
    pub fn from_densities(u: &[StatePoint], t: f64) -> Result<Self> {
        let w = u.iter().map(entropy_gradient).collect::<Result<Vec<_>>>()?;
        Ok(Self { w, t })
    }

    pub fn densities(&self) -> Vec<StatePoint> {
        self.w.iter().map(inverse_unchecked).collect()
    }

    pub fn n_cells(&self) -> usize {
        self.w.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub step: usize,
    pub t: f64,
    /// `Σ_j h(u_j) dx` with the raw entropy density.
    pub entropy_raw: f64,
    pub entropy_normalized: f64,
    pub mass1: f64,
    pub mass2: f64,
    pub min_u3: f64,
    /// `Σ_faces Δwᵀ B Δw / dx`.
    pub dissipation: f64,
    pub newton_iters: usize,
    pub tau: f64,
}

/// Discrete entropy, masses and entropy dissipation of a state.
pub fn diagnostics(state: &GridState, grid: &Grid1D, c: &CoeffSet) -> StepDiagnostics {
    let dx = grid.dx();
    let u = state.densities();
    let mut d = StepDiagnostics {
        step: 0,
        t: state.t,
        entropy_raw: 0.0,
        entropy_normalized: 0.0,
        mass1: 0.0,
        mass2: 0.0,
        min_u3: f64::INFINITY,
        dissipation: 0.0,
        newton_iters: 0,
        tau: 0.0,
    };
    for p in &u {
        let h = entropy_density(p).expect("reconstructed densities lie in the triangle");
        d.entropy_raw += h.raw * dx;
        d.entropy_normalized += h.normalized * dx;
        d.mass1 += p.u1 * dx;
        d.mass2 += p.u2 * dx;
        d.min_u3 = d.min_u3.min(p.u3);
    }
    for j in 0..u.len().saturating_sub(1) {
        let b = mobility_unchecked(c, &u[j].midpoint(&u[j + 1]));
        let dw = [state.w[j + 1].w1 - state.w[j].w1, state.w[j + 1].w2 - state.w[j].w2];
        let bdw = b.mul_vec(dw);
        d.dissipation += (dw[0] * bdw[0] + dw[1] * bdw[1]) / dx;
    }
    d
}
