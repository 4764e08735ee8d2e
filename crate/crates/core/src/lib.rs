//! Entropy-structure certificates and bounded simulation for two-species
//! cross-diffusion systems whose diffusivities depend linearly on the densities.
//!
//! The crate is organized around four layers:
//!
//! - [`entropy`]: the triangle of admissible densities, the entropy density and
//!   the entropy-variable transform.
//! - [`coeff`], [`conditions`], [`certificates`], [`oracle`]: the diffusion
//!   family, its closed-form admissibility criteria and a brute-force
//!   spectral oracle.
//! - [`reactions`]: Lotka–Volterra and custom `u_i g_i(u)` reaction terms.
//! - [`solver`], [`io`]: a finite-volume implicit Euler scheme in entropy
//!   variables and the configuration/CSV layer used by the CLI.

pub mod certificates;
pub mod coeff;
pub mod conditions;
pub mod entropy;
pub mod error;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod reactions;
pub mod solver;

pub use coeff::{eval_diffusion_matrix, from_skt, CoeffSet, FreeParams, SktParams};
pub use conditions::{
    check_psd_iff, check_remark_case, check_skt_corollary, check_symmetry, check_theorem_conditions, epsilon_max,
    ConditionReport, Criterion, Margin, CHECK_TOL,
};
pub use entropy::{
    classify, entropy_density, entropy_gradient, entropy_gradient_inverse, entropy_hessian, EntropyValue,
    EntropyVariable, Membership, StatePoint,
};
pub use error::{Error, Result};
pub use linalg::Mat2;
pub use oracle::{spectral_oracle_scan, SpectralScan};
pub use reactions::ReactionSpec;
