//! Cell-centered finite volumes in one space dimension with implicit Euler
//! time stepping in the entropy variable `w`.
//!
//! Densities are never stored: each cell holds `w` and the density is the
//! image of `w` under the inverse entropy gradient, so every reconstructed
//! state lies strictly inside the triangle.

mod grid;
mod mobility;
mod run;
mod step;

pub use grid::{diagnostics, Grid1D, GridState, StepDiagnostics};
pub use mobility::{assemble_mobility, mobility_derivative};
pub use run::{run, run_with_monitor, RunOutput};
pub use step::{NewtonOptions, Problem};
