use serde::{Deserialize, Serialize};

use crate::coeff::CoeffSet;
use crate::conditions::{check_remark_case, check_symmetry, check_theorem_conditions, CHECK_TOL};
use crate::entropy::{inverse_hessian, inverse_unchecked, EntropyVariable, StatePoint};
use crate::error::{Error, Result};
use crate::linalg::{BandedMatrix, Mat2, Vec2};
use crate::reactions::ReactionSpec;
use crate::solver::grid::{diagnostics, Grid1D, GridState, StepDiagnostics};
use crate::solver::mobility::{mobility_derivative, mobility_unchecked};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Max-norm tolerance on the `tau`-scaled residual.
    pub tol: f64,
    pub max_iters: usize,
    /// Residual level below which post-convergence polishing stops.
    pub polish_tol: f64,
    /// Maximum number of step halvings in a damped update.
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iters: 50, polish_tol: 1e-14, max_halvings: 30 }
    }
}

/// Discretized problem: grid, diffusion coefficients, reactions, and an
/// optional cell-wise source used for manufactured solutions.
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: Grid1D,
    pub coeffs: CoeffSet,
    pub reaction: ReactionSpec,
    pub newton: NewtonOptions,
    source: Option<Vec<Vec2>>,
}

impl Problem {
    /// Checks that the coefficients satisfy the strict admissibility
    /// conditions (or the degenerate remark case) and that the reaction
    /// terms satisfy their band condition.
    pub fn new(grid: Grid1D, coeffs: CoeffSet, reaction: ReactionSpec) -> Result<Self> {
        let sym = check_symmetry(&coeffs, CHECK_TOL);
        if !sym.passed {
            return Err(sym.into_error());
        }
        let strict = check_theorem_conditions(&coeffs, CHECK_TOL)?;
        if !strict.passed {
            let remark = check_remark_case(&coeffs, CHECK_TOL)?;
            if !remark.passed {
                return Err(strict.into_error());
            }
        }
        let band = reaction.admissibility();
        if !band.passed {
            return Err(band.into_error());
        }
        Ok(Self { grid, coeffs, reaction, newton: NewtonOptions::default(), source: None })
    }

    /// Adds a fixed per-cell source term to the right-hand side.
    pub fn with_source(mut self, source: Vec<Vec2>) -> Result<Self> {
        if source.len() != self.grid.n_cells {
            return Err(Error::InvalidState(format!(
                "source has {} cells, grid has {}",
                source.len(),
                self.grid.n_cells
            )));
        }
        self.source = Some(source);
        Ok(self)
    }

    pub fn with_newton(mut self, newton: NewtonOptions) -> Self {
        self.newton = newton;
        self
    }

    fn face_flux(&self, ul: &StatePoint, ur: &StatePoint, wl: &EntropyVariable, wr: &EntropyVariable) -> Vec2 {
        let b = mobility_unchecked(&self.coeffs, &ul.midpoint(ur));
        b.mul_vec([wr.w1 - wl.w1, wr.w2 - wl.w2])
    }

    /// Backward Euler residual, scaled by `tau`:
    /// `u(w_j) - u_j^old - tau/dx² (F_{j+1/2} - F_{j-1/2}) - tau (f(u(w_j)) + s_j)`,
    /// interleaved as `[R_0^1, R_0^2, R_1^1, …]`.
    pub fn residual(&self, w: &[EntropyVariable], u_old: &[StatePoint], tau: f64) -> Vec<f64> {
        let n = w.len();
        let u: Vec<StatePoint> = w.iter().map(inverse_unchecked).collect();
        let k = tau / (self.grid.dx() * self.grid.dx());
        let mut res = vec![0.0; 2 * n];
        for j in 0..n {
            let f = crate::reactions::eval_reaction(&self.reaction, &u[j]);
            let s = self.source.as_ref().map_or([0.0, 0.0], |s| s[j]);
            res[2 * j] = u[j].u1 - u_old[j].u1 - tau * (f[0] + s[0]);
            res[2 * j + 1] = u[j].u2 - u_old[j].u2 - tau * (f[1] + s[1]);
        }
        for j in 0..n.saturating_sub(1) {
            let flux = self.face_flux(&u[j], &u[j + 1], &w[j], &w[j + 1]);
            res[2 * j] -= k * flux[0];
            res[2 * j + 1] -= k * flux[1];
            res[2 * j + 2] += k * flux[0];
            res[2 * j + 3] += k * flux[1];
        }
        res
    }

    fn jacobian_blocks(&self, w: &[EntropyVariable], tau: f64) -> (Vec<Mat2>, Vec<Mat2>, Vec<Mat2>) {
        let n = w.len();
        let u: Vec<StatePoint> = w.iter().map(inverse_unchecked).collect();
        let du: Vec<Mat2> = u.iter().map(inverse_hessian).collect();
        let k = tau / (self.grid.dx() * self.grid.dx());
        let mut diag: Vec<Mat2> =
            (0..n).map(|j| du[j] - (self.reaction.jacobian(&u[j]) * du[j]).scale(tau)).collect();
        let mut upper = vec![Mat2::ZERO; n.saturating_sub(1)];
        let mut lower = vec![Mat2::ZERO; n.saturating_sub(1)];
        for j in 0..n.saturating_sub(1) {
            let m = u[j].midpoint(&u[j + 1]);
            let b = mobility_unchecked(&self.coeffs, &m);
            let d = [w[j + 1].w1 - w[j].w1, w[j + 1].w2 - w[j].w2];
            let g0 = mobility_derivative(&self.coeffs, &m, 0).mul_vec(d);
            let g1 = mobility_derivative(&self.coeffs, &m, 1).mul_vec(d);
            let g = Mat2::new(g0[0], g1[0], g0[1], g1[1]);
            let d_left = g * du[j].scale(0.5) - b;
            let d_right = g * du[j + 1].scale(0.5) + b;
            diag[j] = diag[j] - d_left.scale(k);
            upper[j] = d_right.scale(-k);
            lower[j] = d_left.scale(k);
            diag[j + 1] = diag[j + 1] + d_right.scale(k);
        }
        (lower, diag, upper)
    }

    /// Dense Newton Jacobian `∂R/∂w`, for inspection and testing.
    pub fn jacobian_dense(&self, w: &[EntropyVariable], tau: f64) -> Vec<Vec<f64>> {
        let n = w.len();
        let (lower, diag, upper) = self.jacobian_blocks(w, tau);
        let mut out = vec![vec![0.0; 2 * n]; 2 * n];
        let mut put = |bi: usize, bj: usize, m: &Mat2| {
            for a in 0..2 {
                for b in 0..2 {
                    out[2 * bi + a][2 * bj + b] += m.get(a, b);
                }
            }
        };
        for j in 0..n {
            put(j, j, &diag[j]);
            if j + 1 < n {
                put(j, j + 1, &upper[j]);
                put(j + 1, j, &lower[j]);
            }
        }
        out
    }

    fn jacobian_banded(&self, w: &[EntropyVariable], tau: f64) -> BandedMatrix {
        let n = w.len();
        let (lower, diag, upper) = self.jacobian_blocks(w, tau);
        let mut m = BandedMatrix::zeros(2 * n, 3, 3);
        for j in 0..n {
            m.add_block(2 * j, 2 * j, &diag[j]);
            if j + 1 < n {
                m.add_block(2 * j, 2 * j + 2, &upper[j]);
                m.add_block(2 * j + 2, 2 * j, &lower[j]);
            }
        }
        m
    }

    /// One backward Euler step of size `tau` solved by damped Newton iteration.
    pub fn step_implicit(&self, state: &GridState, tau: f64) -> Result<(GridState, StepDiagnostics)> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidState(format!("time step must be positive, got {tau}")));
        }
        if state.n_cells() != self.grid.n_cells {
            return Err(Error::InvalidState(format!(
                "state has {} cells, grid has {}",
                state.n_cells(),
                self.grid.n_cells
            )));
        }
        let opts = self.newton;
        let u_old = state.densities();
        let mut w = state.w.clone();
        let mut res = self.residual(&w, &u_old, tau);
        let mut norm = max_norm(&res);
        let mut iters = 0;
        let mut polish = 0;
        loop {
            let converged = norm <= opts.tol;
            if converged && (norm <= opts.polish_tol || polish >= 2) {
                break;
            }
            if !converged && iters >= opts.max_iters {
                return Err(Error::NewtonFailure { iterations: iters, residual: norm, iterate: w });
            }
            let jac = self.jacobian_banded(&w, tau);
            let mut delta: Vec<f64> = res.iter().map(|r| -r).collect();
            if jac.solve(&mut delta).is_err() || delta.iter().any(|d| !d.is_finite()) {
                if converged {
                    break;
                }
                return Err(Error::NewtonFailure { iterations: iters, residual: norm, iterate: w });
            }
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..=opts.max_halvings {
                let trial: Vec<EntropyVariable> = w
                    .iter()
                    .enumerate()
                    .map(|(j, x)| EntropyVariable::new(x.w1 + lambda * delta[2 * j], x.w2 + lambda * delta[2 * j + 1]))
                    .collect();
                let r = self.residual(&trial, &u_old, tau);
                let nr = max_norm(&r);
                if nr.is_finite() && nr < norm {
                    accepted = Some((trial, r, nr));
                    break;
                }
                if converged {
                    // Polishing only takes full steps that help.
                    break;
                }
                lambda *= 0.5;
            }
            match accepted {
                Some((trial, r, nr)) => {
                    w = trial;
                    res = r;
                    norm = nr;
                }
                None if converged => break,
                None => {
                    return Err(Error::NewtonFailure { iterations: iters + 1, residual: norm, iterate: w });
                }
            }
            if converged {
                polish += 1;
            } else {
                iters += 1;
            }
        }
        let next = GridState { w, t: state.t + tau };
        let mut diag = diagnostics(&next, &self.grid, &self.coeffs);
        diag.newton_iters = iters;
        diag.tau = tau;
        Ok((next, diag))
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, &x| if x.is_nan() { f64::NAN } else { a.max(x.abs()) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{from_skt, SktParams};
    use crate::reactions::LotkaVolterra;

    fn skt() -> CoeffSet {
        from_skt(&SktParams::diffusion(1.0, 1.0, 0.5, 0.5, 0.5, 0.5))
    }

    fn cosine_state(grid: &Grid1D) -> GridState {
        let u: Vec<StatePoint> = grid
            .centers()
            .iter()
            .map(|&x| StatePoint::new(0.2 + 0.1 * (std::f64::consts::PI * x / grid.length).cos(), 0.3))
            .collect();
        GridState::from_densities(&u, 0.0).unwrap()
    }

    #[test]
    fn constant_state_is_steady() {
        let grid = Grid1D::new(10, 1.0).unwrap();
        let p = Problem::new(grid, skt(), ReactionSpec::None).unwrap();
        let s = GridState::from_densities(&vec![StatePoint::new(0.2, 0.45); 10], 0.0).unwrap();
        let (next, d) = p.step_implicit(&s, 0.1).unwrap();
        for (a, b) in next.densities().iter().zip(s.densities()) {
            assert!((a.u1 - b.u1).abs() <= 1e-12 && (a.u2 - b.u2).abs() <= 1e-12);
        }
        assert_eq!(d.dissipation, 0.0);
        assert!((next.t - 0.1).abs() < 1e-15);
    }

    #[test]
    fn mirror_symmetry_is_preserved() {
        let grid = Grid1D::new(12, 2.0).unwrap();
        let c = CoeffSet::from_free(1.0, 1.0, 0.5, 0.2, 0.5);
        let p = Problem::new(grid, c, ReactionSpec::LotkaVolterra(LotkaVolterra::new([1.0, 2.0, 2.0], [0.5, 1.0, 1.0])))
            .unwrap();
        let u: Vec<StatePoint> = grid
            .centers()
            .iter()
            .map(|&x| {
                let bump = (-(x - 1.0) * (x - 1.0) * 8.0).exp();
                StatePoint::new(0.1 + 0.5 * bump, 0.3 - 0.2 * bump)
            })
            .collect();
        let mut s = GridState::from_densities(&u, 0.0).unwrap();
        for _ in 0..5 {
            s = p.step_implicit(&s, 0.01).unwrap().0;
        }
        let d = s.densities();
        for j in 0..d.len() {
            let k = d.len() - 1 - j;
            assert!((d[j].u1 - d[k].u1).abs() <= 1e-10 && (d[j].u2 - d[k].u2).abs() <= 1e-10);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        let grid = Grid1D::new(8, 1.0).unwrap();
        let lv = ReactionSpec::LotkaVolterra(LotkaVolterra::new([1.0, 2.0, 2.0], [1.0, 2.0, 2.0]));
        for c in [skt(), CoeffSet::from_free(1.5, 0.7, -0.5, 0.3, 0.8)] {
            let p = Problem::new(grid, c, lv.clone()).unwrap();
            let old = cosine_state(&grid).densities();
            for _ in 0..5 {
                let w: Vec<EntropyVariable> =
                    (0..8).map(|_| EntropyVariable::new(rng.gen_range(-3.0..2.0), rng.gen_range(-3.0..2.0))).collect();
                let tau = 0.05;
                let jac = p.jacobian_dense(&w, tau);
                let h = 1e-6;
                for col in 0..16 {
                    let (mut wp, mut wm) = (w.clone(), w.clone());
                    let bump = |v: &mut Vec<EntropyVariable>, s: f64| {
                        if col % 2 == 0 {
                            v[col / 2].w1 += s
                        } else {
                            v[col / 2].w2 += s
                        }
                    };
                    bump(&mut wp, h);
                    bump(&mut wm, -h);
                    let (rp, rm) = (p.residual(&wp, &old, tau), p.residual(&wm, &old, tau));
                    let scale = jac.iter().map(|r| r[col].abs()).fold(0.0, f64::max);
                    for row in 0..16 {
                        let fd = (rp[row] - rm[row]) / (2.0 * h);
                        let err = (fd - jac[row][col]).abs();
                        assert!(err <= 1e-5 * scale.max(1e-12), "J[{row}][{col}] = {} vs {fd}", jac[row][col]);
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_inadmissible_inputs() {
        let grid = Grid1D::new(4, 1.0).unwrap();
        let bad = from_skt(&SktParams::diffusion(1.0, 1.0, 1.0, 0.5, 0.3, 0.5));
        assert!(Problem::new(grid, bad, ReactionSpec::None).is_err());
        let lv = ReactionSpec::LotkaVolterra(LotkaVolterra::new([3.0, 1.0, 1.0], [1.0, 2.0, 2.0]));
        assert!(matches!(Problem::new(grid, skt(), lv), Err(Error::Admissibility { .. })));
        let remark = CoeffSet::from_free(0.0, 0.0, 1.0, 0.0, 1.0);
        assert!(Problem::new(grid, remark, ReactionSpec::None).is_ok());
        let p = Problem::new(grid, skt(), ReactionSpec::None).unwrap();
        let s = GridState::from_densities(&vec![StatePoint::new(0.2, 0.3); 4], 0.0).unwrap();
        assert!(p.step_implicit(&s, 0.0).is_err());
        assert!(p.step_implicit(&s, f64::NAN).is_err());
    }

    #[test]
    fn newton_failure_carries_iterate() {
        let grid = Grid1D::new(6, 1.0).unwrap();
        let p = Problem::new(grid, skt(), ReactionSpec::None)
            .unwrap()
            .with_newton(NewtonOptions { max_iters: 0, ..Default::default() });
        let s = cosine_state(&Grid1D::new(6, 1.0).unwrap());
        match p.step_implicit(&s, 0.1) {
            Err(Error::NewtonFailure { iterate, .. }) => assert_eq!(iterate.len(), 6),
            other => panic!("expected Newton failure, got {other:?}"),
        }
    }
}
