#ifndef THETA_KUMMER_H
#define THETA_KUMMER_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. The library error kinds keep their names.
 */
typedef enum TkStatus {
  TK_STATUS_OK = 0,
  TK_STATUS_NULL_POINTER = 1,
  TK_STATUS_DIMENSION_MISMATCH = 2,
  TK_STATUS_NOT_POSITIVE_DEFINITE = 3,
  TK_STATUS_DEGENERATE_SYSTEM = 4,
  TK_STATUS_NO_CONVERGENCE = 5,
  TK_STATUS_DERIVATIVE_VANISHED = 6,
  TK_STATUS_RADIUS_OVERFLOW = 7,
  TK_STATUS_SINGULAR_POINT = 8,
  TK_STATUS_POLE_AT_ARGUMENT = 9,
  TK_STATUS_INDECOMPOSABILITY_CHECK_FAILED = 10,
  TK_STATUS_NON_FINITE = 11,
  TK_STATUS_INVALID_INPUT = 12,
  TK_STATUS_PANIC = 13,
} TkStatus;

/**
 * Opaque period matrix handle.
 */
typedef struct TkPeriodMatrix TkPeriodMatrix;

typedef struct TkComplex {
  double re;
  double im;
} TkComplex;

/**
 * A theta value with its truncation bound and term-magnitude scale.
 */
typedef struct TkThetaValue {
  struct TkComplex value;
  double tail_bound;
  double scale;
} TkThetaValue;

/**
 * Least-squares fit of `K(P) ≈ c K(0) + b ∂_U∂_V K(0)`.
 */
typedef struct TkFit {
  struct TkComplex c;
  struct TkComplex b;
  double rel_residual;
} TkFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a period matrix from `g * g` row-major entries.
 *
 * # Safety
 * `entries` must point to `g * g` values and `out_pm` must be writable.
 */
enum TkStatus tk_period_matrix_new(size_t g,
                                   const struct TkComplex *entries,
                                   struct TkPeriodMatrix **out_pm);

/**
 * Seeded random period matrix, as drawn by the CLI's `--sample g,seed,scale`.
 *
 * # Safety
 * `out_pm` must be writable.
 */
enum TkStatus tk_period_matrix_sample(size_t g,
                                      uint64_t seed,
                                      double offdiag_scale,
                                      struct TkPeriodMatrix **out_pm);

/**
 * Genus of `pm`, or 0 for a null handle.
 *
 * # Safety
 * `pm` must be null or a live handle.
 */
size_t tk_period_matrix_genus(const struct TkPeriodMatrix *pm);

/**
 * Copies the `g * g` row-major entries into `out_entries`.
 *
 * # Safety
 * `pm` must be a live handle and `out_entries` must hold `g * g` values.
 */
enum TkStatus tk_period_matrix_entries(const struct TkPeriodMatrix *pm,
                                       struct TkComplex *out_entries);

/**
 * # Safety
 * `pm` must be null or a handle not freed before.
 */
void tk_period_matrix_free(struct TkPeriodMatrix *pm);

/**
 * `∂_{d_1}…∂_{d_n} θ(z)` with `n = ndirs ≤ 3`; `dirs` holds the directions
 * back to back.
 *
 * # Safety
 * `z` holds `g` values, `dirs` holds `ndirs * g` values, `out_value` is writable.
 */
enum TkStatus tk_theta_eval(const struct TkPeriodMatrix *pm,
                            const struct TkComplex *z,
                            size_t ndirs,
                            const struct TkComplex *dirs,
                            double tol,
                            struct TkThetaValue *out_value);

/**
 * Second-order theta `Θ[ε](z)` with `g` characteristic bits in `eps`.
 *
 * # Safety
 * As [`tk_theta_eval`], and `eps` holds `g` bytes.
 */
enum TkStatus tk_theta_char_eval(const struct TkPeriodMatrix *pm,
                                 const uint8_t *eps,
                                 const struct TkComplex *z,
                                 size_t ndirs,
                                 const struct TkComplex *dirs,
                                 double tol,
                                 struct TkThetaValue *out_value);

/**
 * Kummer vector `(Θ[ε](z))_ε` in characteristic-index order; `out_comps`
 * must hold `2^g` values.
 *
 * # Safety
 * `z` holds `g` values and `out_comps` holds `2^g` values.
 */
enum TkStatus tk_kummer_map(const struct TkPeriodMatrix *pm,
                            const struct TkComplex *z,
                            double tol,
                            struct TkComplex *out_comps);

/**
 * Relative residual of the bilinear addition formula at `(z, Z)`.
 *
 * # Safety
 * `z` and `zz` hold `g` values; `out_residual` is writable.
 */
enum TkStatus tk_bilinear_residual(const struct TkPeriodMatrix *pm,
                                   const struct TkComplex *z,
                                   const struct TkComplex *zz,
                                   double tol,
                                   double *out_residual);

/**
 * `|K(P) − c K(0) − ∂_U∂_V K(0)| / |K(P)|`.
 *
 * # Safety
 * `p`, `u`, `v` hold `g` values; `out_residual` is writable.
 */
enum TkStatus tk_gamma00_residual(const struct TkPeriodMatrix *pm,
                                  const struct TkComplex *p,
                                  const struct TkComplex *u,
                                  const struct TkComplex *v,
                                  struct TkComplex c,
                                  double tol,
                                  double *out_residual);

/**
 * Fits `c` and `b` in `K(P) ≈ c K(0) + b ∂_U∂_V K(0)`.
 *
 * # Safety
 * `p`, `u`, `v` hold `g` values; `out_fit` is writable.
 */
enum TkStatus tk_gamma00_fit(const struct TkPeriodMatrix *pm,
                             const struct TkComplex *p,
                             const struct TkComplex *u,
                             const struct TkComplex *v,
                             double tol,
                             struct TkFit *out_fit);

/**
 * Collinearity ratio `σ3/σ1` of the trisecant triple built from `p, p1, p2, p3`.
 *
 * # Safety
 * Each point holds `g` values; `out_residual` is writable.
 */
enum TkStatus tk_trisecant_residual(const struct TkPeriodMatrix *pm,
                                    const struct TkComplex *p,
                                    const struct TkComplex *p1,
                                    const struct TkComplex *p2,
                                    const struct TkComplex *p3,
                                    double tol,
                                    double *out_residual);

/**
 * Collinearity ratio of the semidegenerate triple at `p, p1, q` with tangent `U`.
 *
 * # Safety
 * Each point holds `g` values; `out_residual` is writable.
 */
enum TkStatus tk_semidegenerate_residual(const struct TkPeriodMatrix *pm,
                                         const struct TkComplex *p,
                                         const struct TkComplex *p1,
                                         const struct TkComplex *q,
                                         const struct TkComplex *u,
                                         double tol,
                                         double *out_residual);

/**
 * Residual of the on-divisor identity at `z` for direction `U` and shift `P`.
 *
 * # Safety
 * Each point holds `g` values; `out_residual` is writable.
 */
enum TkStatus tk_divisor_identity_residual(const struct TkPeriodMatrix *pm,
                                           const struct TkComplex *z,
                                           const struct TkComplex *u,
                                           const struct TkComplex *p,
                                           double tol,
                                           double *out_residual);

/**
 * Runs the genus-2 pipeline and returns its report as JSON in `out_json`;
 * free it with [`tk_string_free`].
 *
 * # Safety
 * `out_json` must be writable.
 */
enum TkStatus tk_genus2_pipeline_json(const struct TkPeriodMatrix *pm,
                                      uint64_t seed,
                                      double tol,
                                      char **out_json);

/**
 * Exploratory random-start search for small `gamma00` residuals; JSON report
 * in `out_json`, freed with [`tk_string_free`].
 *
 * # Safety
 * `out_json` must be writable.
 */
enum TkStatus tk_scan_json(const struct TkPeriodMatrix *pm,
                           size_t iters,
                           uint64_t seed,
                           double tol,
                           char **out_json);

/**
 * Message of the last failure on this thread, or null if the last call
 * succeeded. Free it with [`tk_string_free`].
 */
char *tk_last_error_message(void);

/**
 * Static name of a status code, e.g. `"PoleAtArgument"`.
 */
const char *tk_status_name(enum TkStatus status);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not freed before.
 */
void tk_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* THETA_KUMMER_H */
