/* C interface to the rlasso sparse recovery library. */

#ifndef RLASSO_H
#define RLASSO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum RlassoStatus {
  RlassoStatus_Ok = 0,
  RlassoStatus_NullPointer = 1,
  RlassoStatus_InvalidArgument = 2,
  RlassoStatus_NumericalFailure = 3,
} RlassoStatus;

/**
 * Opaque measurement matrix handle.
 */
typedef struct RlassoMatrix RlassoMatrix;

/**
 * Opaque solver result handle.
 */
typedef struct RlassoSolution RlassoSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the message of the most recent error on this thread into `buf`
 * (NUL-terminated, truncated to `cap`). Returns the full message length.
 *
 * # Safety
 * `buf` must point to at least `cap` writable bytes, or be null with cap 0.
 */
uintptr_t rlasso_last_error_message(char *buf, uintptr_t cap);

/**
 * Builds a matrix from `rows * cols` row-major entries.
 *
 * # Safety
 * `entries` must point to `rows * cols` doubles; `out` must be valid.
 */
enum RlassoStatus rlasso_matrix_new(uintptr_t rows,
                                    uintptr_t cols,
                                    const double *entries,
                                    struct RlassoMatrix **out);

/**
 * Draws a seeded M x N matrix with i.i.d. N(0, 1/M) entries.
 *
 * # Safety
 * `out` must be valid.
 */
enum RlassoStatus rlasso_matrix_gaussian(uintptr_t m,
                                         uintptr_t n,
                                         uint64_t seed,
                                         struct RlassoMatrix **out);

/**
 * Draws the seeded random-walk matrix of a D-left regular bipartite graph.
 *
 * # Safety
 * `out` must be valid.
 */
enum RlassoStatus rlasso_matrix_lrbg(uintptr_t m,
                                     uintptr_t n,
                                     uintptr_t d,
                                     uint64_t seed,
                                     struct RlassoMatrix **out);

/**
 * # Safety
 * `matrix` must come from a `rlasso_matrix_*` constructor or be null.
 */
void rlasso_matrix_free(struct RlassoMatrix *matrix);

/**
 * Solves min ||z||_1 + lambda ||y - A z||_q. Pass tol <= 0 or max_iter = 0
 * for the solver defaults.
 *
 * # Safety
 * `matrix` must be a live handle; `y` must hold `y_len` doubles; `out` must
 * be valid.
 */
enum RlassoStatus rlasso_solve(const struct RlassoMatrix *matrix,
                               const double *y,
                               uintptr_t y_len,
                               double lambda,
                               uint32_t q,
                               double tol,
                               uintptr_t max_iter,
                               struct RlassoSolution **out);

/**
 * Solves min ||z||_1 subject to A z = y (basis pursuit).
 *
 * # Safety
 * Same contract as `rlasso_solve`.
 */
enum RlassoStatus rlasso_solve_bp(const struct RlassoMatrix *matrix,
                                  const double *y,
                                  uintptr_t y_len,
                                  double tol,
                                  uintptr_t max_iter,
                                  struct RlassoSolution **out);

/**
 * Solves min ||z||_1 subject to ||A z - y||_q <= epsilon.
 *
 * # Safety
 * Same contract as `rlasso_solve`.
 */
enum RlassoStatus rlasso_solve_bpdn(const struct RlassoMatrix *matrix,
                                    const double *y,
                                    uintptr_t y_len,
                                    double epsilon,
                                    uint32_t q,
                                    double tol,
                                    uintptr_t max_iter,
                                    struct RlassoSolution **out);

/**
 * Solves min ||A z - y||_q subject to ||z||_1 <= tau_budget.
 *
 * # Safety
 * Same contract as `rlasso_solve`.
 */
enum RlassoStatus rlasso_solve_clr(const struct RlassoMatrix *matrix,
                                   const double *y,
                                   uintptr_t y_len,
                                   double tau_budget,
                                   uint32_t q,
                                   double tol,
                                   uintptr_t max_iter,
                                   struct RlassoSolution **out);

/**
 * Length of the estimate held by a solution handle.
 *
 * # Safety
 * `solution` must be a live handle.
 */
uintptr_t rlasso_solution_len(const struct RlassoSolution *solution);

/**
 * Copies the estimate into `buf`, which must hold at least
 * `rlasso_solution_len` doubles.
 *
 * # Safety
 * `solution` must be a live handle; `buf` must hold `cap` doubles.
 */
enum RlassoStatus rlasso_solution_copy(const struct RlassoSolution *solution,
                                       double *buf,
                                       uintptr_t cap);

/**
 * # Safety
 * `solution` must be a live handle.
 */
double rlasso_solution_objective(const struct RlassoSolution *solution);

/**
 * # Safety
 * `solution` must be a live handle.
 */
double rlasso_solution_residual(const struct RlassoSolution *solution);

/**
 * # Safety
 * `solution` must be a live handle.
 */
uintptr_t rlasso_solution_iterations(const struct RlassoSolution *solution);

/**
 * 1 if the solver converged, 0 if it stopped at the iteration limit.
 *
 * # Safety
 * `solution` must be a live handle.
 */
int32_t rlasso_solution_converged(const struct RlassoSolution *solution);

/**
 * # Safety
 * `solution` must come from a solve call or be null.
 */
void rlasso_solution_free(struct RlassoSolution *solution);

/**
 * Gordon's constant E_M.
 */
double rlasso_gordon_constant(uintptr_t m);

/**
 * The Gaussian-ensemble tuning rule; writes lambda and the robustness
 * constant tau on success.
 *
 * # Safety
 * `lambda_out` and `tau_out` must be valid.
 */
enum RlassoStatus rlasso_gaussian_lambda(uintptr_t m,
                                         uintptr_t n,
                                         uintptr_t s,
                                         double rho,
                                         double eta,
                                         double *lambda_out,
                                         double *tau_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RLASSO_H */
