#ifndef CURVLAB_H
#define CURVLAB_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum CurvStatus {
  CURV_STATUS_OK = 0,
  CURV_STATUS_NULL_POINTER = 1,
  CURV_STATUS_INVALID_ARGUMENT = 2,
  CURV_STATUS_UNSUPPORTED_DIMENSION = 3,
  CURV_STATUS_NOT_POSITIVE_DEFINITE = 4,
  CURV_STATUS_PRECONDITION = 5,
  CURV_STATUS_DOMAIN = 6,
  CURV_STATUS_TOLERANCE = 7,
  CURV_STATUS_NUMERICAL = 8,
  CURV_STATUS_BUFFER_TOO_SMALL = 9,
  CURV_STATUS_PANIC = 10,
} CurvStatus;

/**
 * Values accepted by the `kind` argument of [`curv_model_new`].
 */
typedef enum CurvModelKind {
  CURV_MODEL_KIND_TORUS = 0,
  CURV_MODEL_KIND_SPHERE = 1,
  CURV_MODEL_KIND_POINCARE_BALL = 2,
  CURV_MODEL_KIND_EULER_S3 = 3,
} CurvModelKind;

/**
 * Values accepted by the `mode` argument of [`curv_classify`].
 */
typedef enum CurvMode {
  CURV_MODE_TT = 0,
  CURV_MODE_CONFORMAL = 1,
} CurvMode;

/**
 * Values written by [`curv_classify`].
 */
typedef enum CurvVerdict {
  CURV_VERDICT_LOCAL_MIN = 0,
  CURV_VERDICT_LOCAL_MAX = 1,
  CURV_VERDICT_BOUNDARY = 2,
  CURV_VERDICT_UNDETERMINED = 3,
} CurvVerdict;

/**
 * Opaque space-form base plus an eigen-direction for second-variation checks.
 */
typedef struct CurvCase CurvCase;

/**
 * Opaque tensor-product quadrature grid.
 */
typedef struct CurvGrid CurvGrid;

/**
 * Opaque metric on a coordinate chart.
 */
typedef struct CurvMetric CurvMetric;

/**
 * Pointwise curvature norms.
 */
typedef struct CurvCurvature {
  double scalar;
  double norm_rm2;
  double norm_ric2;
  double norm_weyl2;
} CurvCurvature;

/**
 * Integrated quadratic curvature quantities.
 */
typedef struct CurvFunctional {
  double weyl;
  double ricci;
  double scalar;
  double rm;
  double value;
  double volume;
} CurvFunctional;

typedef struct CurvVariation {
  double d1_numeric;
  double d1_analytic;
  double d2_numeric;
  double d2_predicted;
  double rel_err_d1;
  double rel_err_d2;
  double c_lagrange;
} CurvVariation;

typedef struct CurvRayleigh {
  double energy;
  double norm2;
  double quotient;
  double tt_defect_div;
  double tt_defect_tr;
} CurvRayleigh;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or `""` after a success.
 * The pointer stays valid until the next call into the library on this thread.
 */
const char *curv_last_error_message(void);

/**
 * Crate version as a static NUL-terminated string.
 */
const char *curv_version(void);

/**
 * Builds a constant-curvature model. `kind` is a [`CurvModelKind`] value and
 * `lambda` must carry the model's curvature sign (0 for the torus).
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum CurvStatus curv_model_new(int32_t kind,
                               size_t n,
                               double lambda,
                               double scale,
                               struct CurvMetric **out);

/**
 * Releases a metric handle. Null is ignored.
 *
 * # Safety
 * `metric` must come from this library and not be used afterwards.
 */
void curv_metric_free(struct CurvMetric *metric);

/**
 * Chart dimension, or 0 for a null handle.
 *
 * # Safety
 * `metric` must be null or a live handle.
 */
size_t curv_metric_dim(const struct CurvMetric *metric);

/**
 * Gauss–Legendre (or periodic trapezoid) grid on the metric's chart with
 * `resolution[i]` nodes along axis `i`.
 *
 * # Safety
 * `resolution` must point to `len` readable values and `out` to one writable handle.
 */
enum CurvStatus curv_grid_new(const struct CurvMetric *metric,
                              const size_t *resolution,
                              size_t len,
                              struct CurvGrid **out);

/**
 * Releases a grid handle. Null is ignored.
 *
 * # Safety
 * `grid` must come from this library and not be used afterwards.
 */
void curv_grid_free(struct CurvGrid *grid);

/**
 * Number of quadrature nodes, or 0 for a null handle.
 *
 * # Safety
 * `grid` must be null or a live handle.
 */
size_t curv_grid_len(const struct CurvGrid *grid);

/**
 * Riemannian volume by quadrature.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum CurvStatus curv_volume(const struct CurvMetric *metric,
                            const struct CurvGrid *grid,
                            double *out);

/**
 * New handle for the constant rescaling of `metric` to unit volume; the
 * factor `c` with `g̃ = c·g` goes to `out_scale` when it is non-null.
 *
 * # Safety
 * Handles must be live, `out` writable and `out_scale` null or writable.
 */
enum CurvStatus curv_metric_unit_volume(const struct CurvMetric *metric,
                                        const struct CurvGrid *grid,
                                        struct CurvMetric **out,
                                        double *out_scale);

/**
 * Curvature norms at the chart point `x[0..len]`.
 *
 * # Safety
 * `x` must point to `len` readable values and `out` be writable.
 */
enum CurvStatus curv_curvature_at(const struct CurvMetric *metric,
                                  const double *x,
                                  size_t len,
                                  struct CurvCurvature *out);

/**
 * Largest deviation over the grid of `Rm, Ric, R` from the constant-curvature
 * values `λ(g∧g), (n−1)λg, n(n−1)λ`.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum CurvStatus curv_space_form_defect(const struct CurvMetric *metric,
                                       const struct CurvGrid *grid,
                                       double lambda,
                                       double *out);

/**
 * `F_{s,τ} = ∫|Rm|² + s∫|Ric|² + τ∫R²` and its pieces.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum CurvStatus curv_functional(const struct CurvMetric *metric,
                                const struct CurvGrid *grid,
                                double s,
                                double tau,
                                struct CurvFunctional *out);

/**
 * Sup-norm of the volume-constrained Euler–Lagrange tensor and the averaged
 * Lagrange constant. The metric must have unit volume on the grid.
 *
 * # Safety
 * Handles must be live and both out-pointers writable.
 */
enum CurvStatus curv_el_residual(const struct CurvMetric *metric,
                                 const struct CurvGrid *grid,
                                 double s,
                                 double tau,
                                 double *out_residual,
                                 double *out_c);

/**
 * Invariant TT mode `Σ d_i e^i⊗e^i` (`d[0..3]`, trace-free) on the unit Euler-angle `S³`.
 *
 * # Safety
 * `d` must point to 3 readable values and `out` to one writable handle.
 */
enum CurvStatus curv_case_s3_invariant(const double *d, struct CurvCase **out);

/**
 * TT mode `A cos(2π k·x)` on the flat unit `T^n`; `a` is the row-major `n×n` amplitude.
 *
 * # Safety
 * `k` must point to `n` values, `a` to `n*n` values and `out` to one writable handle.
 */
enum CurvStatus curv_case_torus_tt(const int64_t *k,
                                   const double *a,
                                   size_t n,
                                   struct CurvCase **out);

/**
 * Conformal mode `cos(2π k·x)·g` on the flat unit `T^n`.
 *
 * # Safety
 * `k` must point to `n` values and `out` to one writable handle.
 */
enum CurvStatus curv_case_torus_conformal(const int64_t *k, size_t n, struct CurvCase **out);

/**
 * Releases a case handle. Null is ignored.
 *
 * # Safety
 * `case_` must come from this library and not be used afterwards.
 */
void curv_case_free(struct CurvCase *case_);

/**
 * Grid on the chart of the case's base metric.
 *
 * # Safety
 * `resolution` must point to `len` readable values and `out` to one writable handle.
 */
enum CurvStatus curv_case_grid_new(const struct CurvCase *case_,
                                   const size_t *resolution,
                                   size_t len,
                                   struct CurvGrid **out);

/**
 * Numeric first and second variations along the case, next to the closed forms.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum CurvStatus curv_case_verify(const struct CurvCase *case_,
                                 const struct CurvGrid *grid,
                                 double s,
                                 double tau,
                                 double t_step,
                                 struct CurvVariation *out);

/**
 * Rayleigh quotient `∫⟨−Δ_L h, h⟩ / ∫|h|²` of a TT case, with the spherical
 * bound `4nλ` enforced (status `CURV_STATUS_TOLERANCE` when violated).
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum CurvStatus curv_case_rayleigh(const struct CurvCase *case_,
                                   const struct CurvGrid *grid,
                                   struct CurvRayleigh *out);

/**
 * Closed-form second variation along a TT eigentensor with `−Δ_L h = λ_L h`.
 *
 * # Safety
 * `out` must be writable.
 */
enum CurvStatus curv_second_variation_tt(size_t n,
                                         double lambda,
                                         double lambda_l,
                                         double s,
                                         double tau,
                                         double h_norm2,
                                         double *out);

/**
 * Closed-form second variation along `f·g` with `−Δf = μf`.
 *
 * # Safety
 * `out` must be writable.
 */
enum CurvStatus curv_second_variation_conformal(size_t n,
                                                double lambda,
                                                double mu,
                                                double s,
                                                double tau,
                                                double f_norm2,
                                                double *out);

/**
 * Conformal polynomial on the unit sphere, `(n−1)(μ−n)(aμ+(n−4)Q)`.
 */
double curv_p1(size_t n, double s, double tau, double mu);

/**
 * Conformal polynomial on unit hyperbolic space, `(n−1)(μ+n)(aμ−(n−4)Q)`.
 */
double curv_p2(size_t n, double s, double tau, double mu);

/**
 * Classifies `(s, τ)` for the given dimension, curvature sign and mode.
 *
 * The verdict goes to `out_verdict` as a [`CurvVerdict`] value. The citation
 * (empty for `Undetermined`) is copied NUL-terminated into `citation`
 * when `citation_len` is large enough, and its length without the NUL goes to
 * `out_citation_len` when non-null. A short buffer yields
 * `CURV_STATUS_BUFFER_TOO_SMALL` with the verdict and length still written.
 *
 * # Safety
 * `out_verdict` must be writable; `citation` must be null or point to
 * `citation_len` writable bytes; `out_citation_len` must be null or writable.
 */
enum CurvStatus curv_classify(size_t n,
                              int32_t lambda,
                              int32_t mode,
                              double s,
                              double tau,
                              int32_t *out_verdict,
                              char *citation,
                              size_t citation_len,
                              size_t *out_citation_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CURVLAB_H */
