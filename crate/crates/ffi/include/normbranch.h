#ifndef NORMBRANCH_H
#define NORMBRANCH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NbStatus {
  NB_STATUS_OK = 0,
  NB_STATUS_NULL_POINTER = 1,
  NB_STATUS_INVALID_UTF8 = 2,
  NB_STATUS_DOMAIN = 3,
  NB_STATUS_NUMERICAL = 4,
  NB_STATUS_SWEEP_DEGENERATE = 5,
  NB_STATUS_OUT_OF_RANGE = 6,
  NB_STATUS_PANIC = 7,
} NbStatus;

/**
 * Mass curve over a frequency grid.
 */
typedef struct NbCurve NbCurve;

/**
 * Solutions of the fixed-mass problem.
 */
typedef struct NbNormalized NbNormalized;

/**
 * Positive radial solution at one frequency.
 */
typedef struct NbProfile NbProfile;

/**
 * Parsed nonlinearity `g(s) = Σ μ_i s^{p_i}`.
 */
typedef struct NbSpec NbSpec;

/**
 * Scalar summary of one solution on the branch.
 */
typedef struct NbBranchPoint {
  double lambda;
  double mass;
  double kinetic;
  double sup;
  double potential;
  double action;
  double pohozaev_residual;
  double nehari_residual;
  double mp_gap;
} NbBranchPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *nb_last_error(void);

/**
 * Static name of a status code.
 */
const char *nb_status_name(enum NbStatus status);

/**
 * Parses a nonlinearity such as `"1*s^3 + 0.5*s^5"`.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum NbStatus nb_spec_parse(const char *text, struct NbSpec **out);

/**
 * # Safety
 * `spec` must come from [`nb_spec_parse`] or be NULL.
 */
void nb_spec_free(struct NbSpec *spec);

/**
 * Evaluates `g(s)` for `s >= 0`.
 *
 * # Safety
 * `spec` and `out` must be valid pointers.
 */
enum NbStatus nb_spec_eval_g(const struct NbSpec *spec, double s, double *out);

/**
 * Solves for the positive radial solution at frequency `lambda`.
 *
 * # Safety
 * `spec` and `out` must be valid pointers.
 */
enum NbStatus nb_shoot(const struct NbSpec *spec,
                       uint32_t n,
                       double lambda,
                       struct NbProfile **out);

/**
 * # Safety
 * `profile` must come from [`nb_shoot`] or be NULL.
 */
void nb_profile_free(struct NbProfile *profile);

/**
 * # Safety
 * `profile` and `out` must be valid pointers.
 */
enum NbStatus nb_profile_point(const struct NbProfile *profile, struct NbBranchPoint *out);

/**
 * `u(r)` and `u'(r)`, using the exponential tail beyond the last node.
 *
 * # Safety
 * `profile`, `u` and `du` must be valid pointers.
 */
enum NbStatus nb_profile_eval(const struct NbProfile *profile, double r, double *u, double *du);

/**
 * Sweeps the branch over `[lambda_min, lambda_max]`.
 *
 * A degenerate sweep still hands back the partial curve and returns
 * [`NbStatus::SweepDegenerate`].
 *
 * # Safety
 * `spec` and `out` must be valid pointers.
 */
enum NbStatus nb_branch_sweep(const struct NbSpec *spec,
                              uint32_t n,
                              double lambda_min,
                              double lambda_max,
                              uint32_t points_per_decade,
                              struct NbCurve **out);

/**
 * # Safety
 * `curve` must come from [`nb_branch_sweep`] or be NULL.
 */
void nb_curve_free(struct NbCurve *curve);

/**
 * Number of solved grid points.
 *
 * # Safety
 * `curve` must be a valid pointer or NULL.
 */
size_t nb_curve_len(const struct NbCurve *curve);

/**
 * Number of grid points that failed to solve.
 *
 * # Safety
 * `curve` must be a valid pointer or NULL.
 */
size_t nb_curve_failures(const struct NbCurve *curve);

/**
 * # Safety
 * `curve` and `out` must be valid pointers.
 */
enum NbStatus nb_curve_point(const struct NbCurve *curve, size_t index, struct NbBranchPoint *out);

/**
 * Fitted small and large frequency exponents; NaN when unavailable.
 *
 * # Safety
 * `curve`, `e0` and `einf` must be valid pointers.
 */
enum NbStatus nb_curve_exponents(const struct NbCurve *curve, double *e0, double *einf);

/**
 * Mass and central value of the pure-power ground state at `λ = 1`.
 *
 * # Safety
 * `mass` and `u0` must be valid pointers.
 */
enum NbStatus nb_ground_state(uint32_t n, double p, double mu, double *mass, double *u0);

/**
 * Finds the solutions with prescribed mass `a`.
 *
 * # Safety
 * `spec` and `out` must be valid pointers.
 */
enum NbStatus nb_normalize(const struct NbSpec *spec,
                           uint32_t n,
                           double a,
                           double lambda_min,
                           double lambda_max,
                           uint32_t points_per_decade,
                           struct NbNormalized **out);

/**
 * # Safety
 * `report` must come from [`nb_normalize`] or be NULL.
 */
void nb_normalized_free(struct NbNormalized *report);

/**
 * # Safety
 * `report` must be a valid pointer or NULL.
 */
size_t nb_normalized_root_count(const struct NbNormalized *report);

/**
 * # Safety
 * `report` and `out` must be valid pointers.
 */
enum NbStatus nb_normalized_root(const struct NbNormalized *report,
                                 size_t index,
                                 struct NbBranchPoint *out);

/**
 * Case label such as `"iii-1"`, static storage.
 *
 * # Safety
 * `report` must be a valid pointer or NULL.
 */
const char *nb_normalized_case(const struct NbNormalized *report);

/**
 * 1 when the observed root count agrees with the predicted one, else 0.
 *
 * # Safety
 * `report` must be a valid pointer or NULL.
 */
int32_t nb_normalized_prediction_met(const struct NbNormalized *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NORMBRANCH_H */
