#ifndef FOBW_H
#define FOBW_H

/* Generated by cbindgen; edit the Rust sources instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FobwStatus {
  FOBW_STATUS_OK = 0,
  FOBW_STATUS_ERR_NULL = 1,
  FOBW_STATUS_ERR_ARGUMENT = 2,
  FOBW_STATUS_ERR_DOMAIN = 3,
  FOBW_STATUS_ERR_SYNTAX = 4,
  FOBW_STATUS_ERR_CONFIG = 5,
  FOBW_STATUS_ERR_SOLVER = 6,
  /**
   * Newton stopped short of tolerance; the handle still holds the last iterate.
   */
  FOBW_STATUS_ERR_NOT_CONVERGED = 7,
  FOBW_STATUS_ERR_ACCURACY = 8,
  FOBW_STATUS_ERR_PANIC = 9,
  FOBW_STATUS_ERR_OTHER = 10,
} FobwStatus;

typedef enum FobwForcing {
  FOBW_FORCING_FORCED = 0,
  FOBW_FORCING_FORCE_FREE = 1,
  /**
   * Use `forcing_expr`.
   */
  FOBW_FORCING_EXPRESSION = 2,
} FobwForcing;

/**
 * Opaque solution handle.
 */
typedef struct FobwSolution FobwSolution;

typedef struct FobwProblemParams {
  double mu;
  double a;
  double b;
  double f;
  double omega;
  enum FobwForcing forcing;
  /**
   * Expression in `t`, read only when `forcing` is `Expression`.
   */
  const char *forcing_expr;
  /**
   * Order as a number or an expression in `t`; null means 2.
   */
  const char *alpha;
  double init_value;
  double init_slope;
} FobwProblemParams;

typedef struct FobwReport {
  size_t iterations;
  double final_residual_norm;
  bool converged;
} FobwReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *fobw_last_error(void);

/**
 * Library version as a static string.
 */
const char *fobw_version(void);

enum FobwStatus fobw_gamma(double x, double *out);

/**
 * Solve on the basis `(k, m, gamma)`. `*out` receives a handle on `FOBW_STATUS_OK`
 * and on `FOBW_STATUS_ERR_NOT_CONVERGED`; it is left untouched otherwise.
 */
enum FobwStatus fobw_solve(const struct FobwProblemParams *params,
                           uint32_t k,
                           uint32_t m,
                           double gamma,
                           struct FobwSolution **out);

/**
 * As [`fobw_solve`] for a named preset; `alpha` may be null for order 2.
 */
enum FobwStatus fobw_solve_preset(const char *name,
                                  const char *alpha,
                                  uint32_t k,
                                  uint32_t m,
                                  double gamma,
                                  struct FobwSolution **out);

/**
 * Approximant value and first two derivatives at `t` in [0, 1].
 */
enum FobwStatus fobw_solution_eval(const struct FobwSolution *h,
                                   double t,
                                   double *y,
                                   double *dy,
                                   double *d2y);

/**
 * Caputo derivative of the problem's order at `t`.
 */
enum FobwStatus fobw_solution_caputo(const struct FobwSolution *h, double t, double *out);

/**
 * `|R(t)|` of the equation on the approximant.
 */
enum FobwStatus fobw_solution_residual(const struct FobwSolution *h, double t, double *out);

/**
 * Copy up to `cap` coefficients into `buf`; `*len` gets the full count.
 * Pass `buf = NULL, cap = 0` to query the length.
 */
enum FobwStatus fobw_solution_coefficients(const struct FobwSolution *h,
                                           double *buf,
                                           size_t cap,
                                           size_t *len);

enum FobwStatus fobw_solution_report(const struct FobwSolution *h, struct FobwReport *out);

/**
 * Release a handle; null is ignored.
 */
void fobw_solution_free(struct FobwSolution *h);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FOBW_H */
