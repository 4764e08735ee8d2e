use crate::error::{Error, Result};
use crate::io::ParsedConfig;
use crate::solver::grid::{diagnostics, GridState, StepDiagnostics};
use crate::solver::step::{NewtonOptions, Problem};

/// Steps with at most this many Newton iterations count as easy.
const EASY_ITERS: usize = 3;
/// Consecutive easy steps before the step size is doubled.
const EASY_STREAK: usize = 5;

#[derive(Debug)]
pub struct RunOutput {
    pub initial_state: GridState,
    pub initial: StepDiagnostics,
    /// One record per accepted step.
    pub trajectory: Vec<StepDiagnostics>,
    pub final_state: GridState,
    /// Cells whose reconstructed density left the open triangle, summed over steps.
    pub interior_violations: usize,
    /// Adjustments applied to the initial data.
    pub notes: Vec<String>,
    /// Set when the run stopped before `t_end`; the trajectory up to that point is kept.
    pub failure: Option<Error>,
}

impl RunOutput {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Run a validated configuration to `t_end`.
pub fn run(config: &ParsedConfig) -> Result<RunOutput> {
    run_with_monitor(config, |_, _| {})
}

/// As [`run`], calling `monitor` after every accepted step.
///
/// A failed Newton solve halves the step and retries; after a streak of
/// cheap steps the step is doubled again, never beyond the configured `tau`.
pub fn run_with_monitor<F>(config: &ParsedConfig, monitor: F) -> Result<RunOutput>
where
    F: FnMut(&GridState, &StepDiagnostics),
{
    drive(config, NewtonOptions::default(), monitor)
}

fn drive<F>(config: &ParsedConfig, newton: NewtonOptions, mut monitor: F) -> Result<RunOutput>
where
    F: FnMut(&GridState, &StepDiagnostics),
{
    let problem = Problem::new(config.grid, config.coeffs, config.reaction.clone())?.with_newton(newton);
    let (u0, notes) = config.initial_densities_logged()?;
    let state0 = GridState::from_densities(&u0, 0.0)?;
    let initial = diagnostics(&state0, &config.grid, &config.coeffs);

    let t_end = config.config.time.t_end;
    let tau_max = config.config.time.tau;
    let tau_min = config.tau_min();
    let mut tau = tau_max;
    let mut state = state0.clone();
    let mut trajectory = Vec::new();
    let mut violations = 0;
    let mut streak = 0;
    let mut failure = None;

    while t_end - state.t > 1e-14 * t_end.max(1.0) {
        let h = tau.min(t_end - state.t);
        match problem.step_implicit(&state, h) {
            Ok((next, mut d)) => {
                violations += next.densities().iter().filter(|p| !p.is_interior()).count();
                d.step = trajectory.len() + 1;
                state = next;
                monitor(&state, &d);
                trajectory.push(d);
                if d.newton_iters <= EASY_ITERS {
                    streak += 1;
                    if streak >= EASY_STREAK && tau < tau_max {
                        tau = (2.0 * tau).min(tau_max);
                        streak = 0;
                    }
                } else {
                    streak = 0;
                }
            }
            Err(Error::NewtonFailure { iterations, residual, .. }) => {
                streak = 0;
                tau *= 0.5;
                log::debug!("t = {}: Newton failed ({iterations} its, residual {residual:.3e}), tau -> {tau:.3e}", state.t);
                if tau < tau_min {
                    failure = Some(Error::TauUnderflow { t: state.t, tau, tau_min });
                    break;
                }
            }
            Err(e) => return Err(e),
        }
    }

    Ok(RunOutput {
        initial_state: state0,
        initial,
        trajectory,
        final_state: state,
        interior_violations: violations,
        notes,
        failure,
    })
}
