#ifndef STEINCLT_H
#define STEINCLT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum SteincltStatus {
  STEINCLT_STATUS_OK = 0,
  STEINCLT_STATUS_NULL_POINTER = 1,
  STEINCLT_STATUS_INVALID_ARGUMENT = 2,
  STEINCLT_STATUS_DIMENSION_MISMATCH = 3,
  STEINCLT_STATUS_UNKNOWN_FAMILY = 4,
  STEINCLT_STATUS_MISSING_MOMENT = 5,
  STEINCLT_STATUS_NUMERICAL = 6,
  STEINCLT_STATUS_PANIC = 7,
} SteincltStatus;

/**
 * Opaque standardized i.i.d. sum model.
 */
typedef struct SteincltModel SteincltModel;

/**
 * The three bound totals of a model.
 */
typedef struct SteincltBounds {
  double m1;
  double m2;
  double m3;
} SteincltBounds;

/**
 * A replicated `W1` estimate with its 95% bootstrap interval.
 */
typedef struct SteincltW1 {
  double value;
  double ci_lo;
  double ci_hi;
} SteincltW1;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *steinclt_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into the library from this thread.
 */
const char *steinclt_last_error_message(void);

/**
 * Builds the standardized sum of `n` i.i.d. copies of `family` in `R^d`.
 * `p` is the two-point probability (pass a NaN for the default).
 *
 * # Safety
 * `family` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SteincltStatus steinclt_model_new(const char *family,
                                       size_t d,
                                       size_t n,
                                       double p,
                                       struct SteincltModel **out);

/**
 * Releases a model; NULL is ignored.
 *
 * # Safety
 * `model` must come from [`steinclt_model_new`] and not be used afterwards.
 */
void steinclt_model_free(struct SteincltModel *model);

/**
 * # Safety
 * `model` and `out` must be valid pointers.
 */
enum SteincltStatus steinclt_model_dim(const struct SteincltModel *model, size_t *out);

/**
 * Evaluates the M1, M2 and M3 bound totals.
 *
 * # Safety
 * `model` and `out` must be valid pointers.
 */
enum SteincltStatus steinclt_model_bounds(const struct SteincltModel *model,
                                          struct SteincltBounds *out);

/**
 * Replicated empirical `W1` between the model and the standard normal.
 *
 * # Safety
 * `model` and `out` must be valid pointers.
 */
enum SteincltStatus steinclt_model_w1_estimate(const struct SteincltModel *model,
                                               size_t m,
                                               size_t replications,
                                               uint64_t seed,
                                               struct SteincltW1 *out);

/**
 * Exact `W1` between two clouds of `m` points in `R^d`, row-major.
 *
 * # Safety
 * `a` and `b` must point to `m * d` doubles each; `out` must be valid.
 */
enum SteincltStatus steinclt_w1_exact(const double *a,
                                      const double *b,
                                      size_t m,
                                      size_t d,
                                      double *out);

/**
 * The smoothing constant `c_s`, `0 <= s <= 3`.
 *
 * # Safety
 * `out` must be valid.
 */
enum SteincltStatus steinclt_constant_c(size_t s, double *out);

/**
 * Injective norm of a symmetric tensor given as a full `dim^order`
 * row-major array; asymmetric input is rejected.
 *
 * # Safety
 * `entries` must point to `dim^order` doubles; `out` must be valid.
 */
enum SteincltStatus steinclt_injective_norm(const double *entries,
                                            size_t order,
                                            size_t dim,
                                            double *out);

/**
 * Least-squares slope of `ln w` against `ln n` (at least 4 points, `n`
 * strictly increasing, all values positive).
 *
 * # Safety
 * `n` and `w` must point to `len` doubles; `out` must be valid.
 */
enum SteincltStatus steinclt_rate_fit(const double *n, const double *w, size_t len, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STEINCLT_H */
