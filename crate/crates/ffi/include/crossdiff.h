#ifndef CROSSDIFF_H
#define CROSSDIFF_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success.
 */
typedef enum CdStatus {
  CD_STATUS_OK = 0,
  CD_STATUS_NULL_POINTER = 1,
  CD_STATUS_INVALID_ARGUMENT = 2,
  CD_STATUS_DOMAIN = 3,
  CD_STATUS_PRECONDITION = 4,
  CD_STATUS_ADMISSIBILITY = 5,
  CD_STATUS_CONFIG = 6,
  CD_STATUS_INITIAL_DATA = 7,
  CD_STATUS_NEWTON_FAILURE = 8,
  CD_STATUS_TAU_UNDERFLOW = 9,
  CD_STATUS_IO = 10,
  CD_STATUS_PANIC = 11,
} CdStatus;

/**
 * Which closed-form check to run.
 */
typedef enum CdCheck {
  CD_CHECK_SYMMETRY = 0,
  CD_CHECK_PSD_IFF = 1,
  CD_CHECK_THEOREM_STRICT = 2,
} CdCheck;

/**
 * Opaque coefficient set `A(u) = α + β u1 + γ u2`.
 */
typedef struct CdCoeffSet CdCoeffSet;

/**
 * Opaque simulation: a validated configuration and its current state.
 */
typedef struct CdSimulation CdSimulation;

typedef struct CdSpectralScan {
  double unweighted_min;
  double unweighted_argmin_u1;
  double unweighted_argmin_u2;
  double weighted_min;
  double weighted_argmin_u1;
  double weighted_argmin_u2;
  size_t samples;
} CdSpectralScan;

typedef struct CdDiagnostics {
  size_t step;
  double t;
  double entropy_raw;
  double entropy_normalized;
  double mass1;
  double mass2;
  double min_u3;
  double dissipation;
  size_t newton_iters;
  double tau;
} CdDiagnostics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *crossdiff_last_error_message(void);

/**
 * `w = Dh(u)` for a point strictly inside the triangle.
 */
enum CdStatus crossdiff_entropy_gradient(double u1, double u2, double *w1, double *w2);

/**
 * `u = (Dh)⁻¹(w)`; the result lies in the closed triangle for every finite `w`.
 */
enum CdStatus crossdiff_entropy_gradient_inverse(double w1, double w2, double *u1, double *u2);

/**
 * Build from three row-major 2x2 matrices of four doubles each.
 */
enum CdStatus crossdiff_coeffs_new(const double *alpha,
                                   const double *beta,
                                   const double *gamma,
                                   struct CdCoeffSet **out_set);

/**
 * Symmetric set completed from its five free parameters.
 */
enum CdStatus crossdiff_coeffs_from_free(double a11,
                                         double a22,
                                         double b11,
                                         double b12,
                                         double g22,
                                         struct CdCoeffSet **out_set);

/**
 * Set derived from the SKT diffusion constants `a10, a20, a11, a12, a21, a22`.
 */
enum CdStatus crossdiff_coeffs_from_skt(const double *a, struct CdCoeffSet **out_set);

/**
 * Release a coefficient set. Null is ignored.
 */
void crossdiff_coeffs_free(struct CdCoeffSet *set);

/**
 * Run a closed-form check; `passed` receives the verdict and `min_margin`
 * (optional, may be null) the smallest reported margin.
 */
enum CdStatus crossdiff_check(const struct CdCoeffSet *set,
                              enum CdCheck check,
                              bool *passed,
                              double *min_margin);

/**
 * Largest weighted coercivity constant; fails with `PRECONDITION` when the
 * set is not positive semidefinite.
 */
enum CdStatus crossdiff_epsilon_max(const struct CdCoeffSet *set, double *eps);

/**
 * Brute-force spectral scan at grid resolution `n` (at least 8).
 */
enum CdStatus crossdiff_oracle_scan(const struct CdCoeffSet *set,
                                    size_t n,
                                    struct CdSpectralScan *result);

/**
 * Create a simulation from a TOML configuration document (UTF-8, NUL-terminated).
 */
enum CdStatus crossdiff_sim_from_config(const char *document, struct CdSimulation **out_sim);

/**
 * Release a simulation. Null is ignored.
 */
void crossdiff_sim_free(struct CdSimulation *sim);

/**
 * Advance by one implicit step of size `tau`; a non-positive or NaN `tau`
 * uses the configured step. On failure the state is unchanged. `diag` may be null.
 */
enum CdStatus crossdiff_sim_step(struct CdSimulation *sim, double tau, struct CdDiagnostics *diag);

/**
 * Diagnostics of the current state without stepping.
 */
enum CdStatus crossdiff_sim_diagnostics(struct CdSimulation *sim, struct CdDiagnostics *diag);

size_t crossdiff_sim_n_cells(const struct CdSimulation *sim);

double crossdiff_sim_time(const struct CdSimulation *sim);

/**
 * Copy the current densities into `u1` and `u2`, each of length `len`,
 * which must equal the number of cells.
 */
enum CdStatus crossdiff_sim_densities(const struct CdSimulation *sim,
                                      double *u1,
                                      double *u2,
                                      size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CROSSDIFF_H */
