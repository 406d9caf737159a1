/* C interface for the riskver risk verification library. */

#pragma once

/* Generated with cbindgen:0.26.0 */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Norm selector for ball predicates.
 */
typedef enum RvNorm {
  RV_NORM_L2 = 0,
  RV_NORM_LINF = 1,
} RvNorm;

/**
 * Status codes returned by every fallible call.
 */
typedef enum RvStatus {
  RV_STATUS_OK = 0,
  RV_STATUS_NULL_POINTER = 1,
  RV_STATUS_INVALID_UTF8 = 2,
  RV_STATUS_INVALID_ARGUMENT = 3,
  RV_STATUS_SYNTAX_ERROR = 4,
  RV_STATUS_UNKNOWN_PREDICATE = 5,
  RV_STATUS_TRACE_TOO_SHORT = 6,
  RV_STATUS_DIMENSION_MISMATCH = 7,
  RV_STATUS_INSUFFICIENT_SAMPLES = 8,
  RV_STATUS_MISSING_SUPPORT_BOUND = 9,
  RV_STATUS_NOT_CONTRACTIVE = 10,
  RV_STATUS_BUFFER_TOO_SMALL = 11,
} RvStatus;

/**
 * A parsed formula (opaque).
 */
typedef struct RvFormula RvFormula;

/**
 * Named predicates plus registered scalar callbacks (opaque).
 */
typedef struct RvPredicates RvPredicates;

/**
 * Robustness-cost samples with cached order statistics (opaque).
 */
typedef struct RvSamples RvSamples;

/**
 * A fixed-step state trace (opaque).
 */
typedef struct RvTrace RvTrace;

/**
 * Scalar predicate callback: receives the state vector and the user data
 * pointer given at registration. Must be safe to call from multiple threads.
 */
typedef double (*RvPredicateFn)(const double *state, uintptr_t dim, void *user_data);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *rv_version(void);

/**
 * Copies the last error message on this thread into `buf` (NUL-terminated,
 * truncating) and returns the full message length in bytes excluding the
 * terminator. Passing a null or empty buffer just queries the length.
 *
 * # Safety
 * `buf` must point at `cap` writable bytes when non-null.
 */
uintptr_t rv_last_error(char *buf, uintptr_t cap);

struct RvPredicates *rv_predicates_new(void);

/**
 * # Safety
 * `p` must come from [`rv_predicates_new`] and not have been freed.
 */
void rv_predicates_free(struct RvPredicates *p);

/**
 * Adds the halfspace predicate `a . x - b >= 0`.
 *
 * # Safety
 * Pointer arguments follow the module conventions.
 */
enum RvStatus rv_predicates_add_halfspace(struct RvPredicates *p,
                                          const char *name,
                                          const double *a,
                                          uintptr_t dim,
                                          double b,
                                          bool negated);

/**
 * Adds the box predicate `lo <= x <= hi` componentwise.
 *
 * # Safety
 * Pointer arguments follow the module conventions.
 */
enum RvStatus rv_predicates_add_axis_box(struct RvPredicates *p,
                                         const char *name,
                                         const double *lo,
                                         const double *hi,
                                         uintptr_t dim,
                                         bool negated);

/**
 * Adds the ball predicate `||x - center|| <= radius` in the given norm.
 *
 * # Safety
 * Pointer arguments follow the module conventions.
 */
enum RvStatus rv_predicates_add_norm_ball(struct RvPredicates *p,
                                          const char *name,
                                          const double *center,
                                          uintptr_t dim,
                                          double radius,
                                          enum RvNorm norm,
                                          bool negated);

/**
 * Registers a scalar callback under `handle` for use by functional
 * predicates (including those from a JSON table). Pass NaN as `lipschitz`
 * when no constant is declared.
 *
 * # Safety
 * `func` must be callable with any state of the advertised dimension from
 * any thread, for as long as the predicates handle lives; `user_data` must
 * remain valid likewise.
 */
enum RvStatus rv_predicates_register_function(struct RvPredicates *p,
                                              const char *handle,
                                              RvPredicateFn func,
                                              void *user_data,
                                              double lipschitz);

/**
 * Adds a functional predicate backed by a registered callback handle.
 *
 * # Safety
 * Pointer arguments follow the module conventions.
 */
enum RvStatus rv_predicates_add_functional(struct RvPredicates *p,
                                           const char *name,
                                           const char *handle,
                                           bool negated);

/**
 * Loads a predicate table from its JSON file format, merging over existing
 * entries. Functional handles resolve against previously registered
 * callbacks.
 *
 * # Safety
 * Pointer arguments follow the module conventions.
 */
enum RvStatus rv_predicates_load_json(struct RvPredicates *p, const char *json);

/**
 * Parses a formula against the predicate table.
 *
 * # Safety
 * Pointer arguments follow the module conventions; `out` receives an owned
 * handle to release with [`rv_formula_free`].
 */
enum RvStatus rv_formula_parse(const char *text,
                               const struct RvPredicates *p,
                               struct RvFormula **out);

/**
 * # Safety
 * `f` must come from this library and not have been freed.
 */
void rv_formula_free(struct RvFormula *f);

/**
 * Formula length in steps (bounded formulas only).
 *
 * # Safety
 * Pointer arguments follow the module conventions.
 */
enum RvStatus rv_formula_length(const struct RvFormula *f, uintptr_t *out);

/**
 * # Safety
 * Pointer arguments follow the module conventions.
 */
enum RvStatus rv_formula_is_bounded(const struct RvFormula *f, bool *out);

/**
 * Rewrites into positive normal form.
 *
 * # Safety
 * Pointer arguments follow the module conventions; `out` receives an owned
 * handle.
 */
enum RvStatus rv_formula_to_pnf(const struct RvFormula *f, struct RvFormula **out);

/**
 * Pretty-prints the formula in the parseable grammar. Writes at most
 * `cap - 1` bytes plus a NUL terminator and stores the full length in
 * `written`; returns BufferTooSmall when truncated.
 *
 * # Safety
 * Pointer arguments follow the module conventions.
 */
enum RvStatus rv_formula_print(const struct RvFormula *f,
                               char *buf,
                               uintptr_t cap,
                               uintptr_t *written);

/**
 * Builds a trace from row-major state data (`steps` rows of `dim` values)
 * sampled every `dt` seconds.
 *
 * # Safety
 * `data` must point at `steps * dim` readable doubles; `out` receives an
 * owned handle to release with [`rv_trace_free`].
 */
enum RvStatus rv_trace_new(double dt,
                           const double *data,
                           uintptr_t steps,
                           uintptr_t dim,
                           struct RvTrace **out);

/**
 * # Safety
 * `t` must come from this library and not have been freed.
 */
void rv_trace_free(struct RvTrace *t);

/**
 * Largest pointwise Euclidean distance between two traces of equal shape.
 *
 * # Safety
 * Pointer arguments follow the module conventions.
 */
enum RvStatus rv_trace_sup_distance(const struct RvTrace *a, const struct RvTrace *b, double *out);

/**
 * Quantitative robustness of the formula over the trace at step `t`.
 * `closed_until` selects the closed inner Until interval instead of the
 * default open one.
 *
 * # Safety
 * Pointer arguments follow the module conventions.
 */
enum RvStatus rv_robustness(const struct RvFormula *f,
                            const struct RvTrace *x,
                            uintptr_t t,
                            bool closed_until,
                            double *out);

/**
 * Boolean satisfaction of the formula over the trace at step `t`.
 *
 * # Safety
 * Pointer arguments follow the module conventions.
 */
enum RvStatus rv_boolean_sat(const struct RvFormula *f,
                             const struct RvTrace *x,
                             uintptr_t t,
                             bool closed_until,
                             bool *out);

/**
 * Builds a sample set from `n` cost values (rejects NaN and empty input).
 *
 * # Safety
 * `values` must point at `n` readable doubles; `out` receives an owned
 * handle to release with [`rv_samples_free`].
 */
enum RvStatus rv_samples_new(const double *values, uintptr_t n, struct RvSamples **out);

/**
 * Builds a sample set with a declared support bound `Z <= bound`.
 *
 * # Safety
 * As [`rv_samples_new`].
 */
enum RvStatus rv_samples_with_bound(const double *values,
                                    uintptr_t n,
                                    double bound,
                                    struct RvSamples **out);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void rv_samples_free(struct RvSamples *s);

/**
 * Sample mean.
 *
 * # Safety
 * Pointer arguments follow the module conventions.
 */
enum RvStatus rv_mean_risk(const struct RvSamples *s, double *out);

/**
 * Largest sample.
 *
 * # Safety
 * Pointer arguments follow the module conventions.
 */
enum RvStatus rv_worst_case_risk(const struct RvSamples *s, double *out);

/**
 * Empirical CDF at `alpha`.
 *
 * # Safety
 * Pointer arguments follow the module conventions.
 */
enum RvStatus rv_empirical_cdf(const struct RvSamples *s, double alpha, double *out);

/**
 * Empirical VaR at `level` in (0, 1].
 *
 * # Safety
 * Pointer arguments follow the module conventions.
 */
enum RvStatus rv_empirical_var(const struct RvSamples *s, double level, double *out);

/**
 * Empirical CVaR at `beta` in (0, 1).
 *
 * # Safety
 * Pointer arguments follow the module conventions.
 */
enum RvStatus rv_empirical_cvar(const struct RvSamples *s, double beta, double *out);

/**
 * Finite-sample quantile margin `c_N(delta)`.
 *
 * # Safety
 * Pointer arguments follow the module conventions.
 */
enum RvStatus rv_confidence_margin(uintptr_t n, double delta, double *out);

/**
 * High-confidence VaR upper bound; also reports the effective quantile
 * level actually read (pass null to skip it).
 *
 * # Safety
 * Pointer arguments follow the module conventions.
 */
enum RvStatus rv_var_upper_bound(const struct RvSamples *s,
                                 double beta,
                                 double delta,
                                 double *out_bound,
                                 double *out_effective_level);

/**
 * High-confidence CVaR upper bound; the sample set must carry a support
 * bound and `delta` must lie in (0, 0.5].
 *
 * # Safety
 * Pointer arguments follow the module conventions.
 */
enum RvStatus rv_cvar_upper_bound(const struct RvSamples *s,
                                  double beta,
                                  double delta,
                                  double *out_bound);

/**
 * First Wasserstein distance between two sample sets.
 *
 * # Safety
 * Pointer arguments follow the module conventions.
 */
enum RvStatus rv_wasserstein_1d(const struct RvSamples *a, const struct RvSamples *b, double *out);

/**
 * Fills `out_schedule` (length `horizon + 1`) with the worst-case
 * trajectory-error schedule from the Lipschitz recursion.
 *
 * # Safety
 * `out_schedule` must point at `horizon + 1` writable doubles.
 */
enum RvStatus rv_lipschitz_delta(double l_f1,
                                 double l_f2,
                                 double l_f3,
                                 double l_u,
                                 double l_g1,
                                 double l_g2,
                                 double v_star,
                                 double w_star,
                                 uintptr_t horizon,
                                 double *out_schedule);

/**
 * iISS gain slope for a stable linear closed loop given row-major `a`
 * (`n x n`): `k = 1 / (1 - ||A||)`. Fails with NotContractive when the
 * induced 2-norm is not below one.
 *
 * # Safety
 * `a` must point at `n * n` readable doubles.
 */
enum RvStatus rv_linear_iiss_gain(const double *a, uintptr_t n, double *out_k);

/**
 * One-directional controller comparison: writes 1 when the first controller
 * is certified no worse on the perturbed system, 2 for the second, 0 when
 * inconclusive.
 *
 * # Safety
 * Pointer arguments follow the module conventions.
 */
enum RvStatus rv_compare_controllers(double risk_1, double risk_2, double delta, int32_t *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus
