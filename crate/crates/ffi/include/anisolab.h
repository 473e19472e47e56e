#ifndef ANISOLAB_H
#define ANISOLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Norm selector for [`al_field_norm`].
 */
typedef enum AlNorm {
  AL_NORM_L2 = 0,
  /**
   * Uses the `r` argument of `al_field_norm`.
   */
  AL_NORM_LR = 1,
  AL_NORM_H1 = 2,
  AL_NORM_GRAD_X1 = 3,
  AL_NORM_GRAD_X2 = 4,
  AL_NORM_W = 5,
} AlNorm;

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum AlStatus {
  AL_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  AL_STATUS_NULL = 1,
  /**
   * Input rejected for reasons other than configuration syntax.
   */
  AL_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Malformed configuration text.
   */
  AL_STATUS_CONFIG = 3,
  /**
   * CG or Picard iteration did not converge.
   */
  AL_STATUS_SOLVER = 4,
  /**
   * Output buffer shorter than the field.
   */
  AL_STATUS_BUFFER_TOO_SMALL = 5,
  /**
   * Internal panic caught at the boundary.
   */
  AL_STATUS_PANIC = 6,
} AlStatus;

/**
 * Opaque tensor grid.
 */
typedef struct AlGrid AlGrid;

/**
 * Opaque problem built from configuration text.
 */
typedef struct AlProblem AlProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *al_version(void);

/**
 * Copy the calling thread's last error message into `buf` (always
 * NUL-terminated when `len > 0`). Returns the buffer size needed for the
 * full message including the terminator.
 *
 * # Safety
 * `buf` must be null or valid for `len` writes.
 */
size_t al_last_error(char *buf, size_t len);

/**
 * Grid on `(omega1_lo, omega1_hi) × (omega2_lo, omega2_hi)` with `n1 × n2`
 * interior nodes.
 *
 * # Safety
 * `out` must be valid for one pointer write.
 */
enum AlStatus al_grid_new(double omega1_lo,
                          double omega1_hi,
                          double omega2_lo,
                          double omega2_hi,
                          size_t n1,
                          size_t n2,
                          struct AlGrid **out);

/**
 * # Safety
 * `grid` must be null or a pointer from `al_grid_new` not yet freed.
 */
void al_grid_free(struct AlGrid *grid);

/**
 * Number of interior nodes.
 *
 * # Safety
 * `grid` must be a live handle; `out_len` valid for one write.
 */
enum AlStatus al_grid_len(const struct AlGrid *grid, size_t *out_len);

/**
 * Build a problem from flat `key = value` configuration text (UTF-8,
 * NUL-terminated). Unspecified keys take the CLI defaults.
 *
 * # Safety
 * `config` must be a valid C string; `out` valid for one pointer write.
 */
enum AlStatus al_problem_from_config(const char *config, struct AlProblem **out);

/**
 * # Safety
 * `problem` must be null or a pointer from `al_problem_from_config` not yet
 * freed.
 */
void al_problem_free(struct AlProblem *problem);

/**
 * Number of interior nodes of the problem grid.
 *
 * # Safety
 * `problem` must be a live handle; `out_len` valid for one write.
 */
enum AlStatus al_problem_len(const struct AlProblem *problem, size_t *out_len);

/**
 * Solve the ε-problem at `epsilon ∈ (0, 1]` and write the nodal solution.
 * `out_iterations` may be null.
 *
 * # Safety
 * `problem` must be a live handle, `out` valid for `capacity` writes.
 */
enum AlStatus al_problem_solve(const struct AlProblem *problem,
                               double epsilon,
                               double *out,
                               size_t capacity,
                               size_t *out_iterations);

/**
 * Solve the limit problem and write the nodal solution. `out_iterations`
 * may be null.
 *
 * # Safety
 * `problem` must be a live handle, `out` valid for `capacity` writes.
 */
enum AlStatus al_problem_solve_limit(const struct AlProblem *problem,
                                     double *out,
                                     size_t capacity,
                                     size_t *out_iterations);

/**
 * Norm of the Q1 interpolant of `values` over the whole grid. `kind` is an
 * `AlNorm` value; `r` is read only for `AL_NORM_LR` and must exceed 2.
 *
 * # Safety
 * `grid` must be a live handle, `values` valid for `len` reads, `out` for
 * one write.
 */
enum AlStatus al_field_norm(const struct AlGrid *grid,
                            const double *values,
                            size_t len,
                            int32_t kind,
                            double r,
                            double *out);

/**
 * `(I − n⁻¹Δ)⁻¹ f` with homogeneous Dirichlet conditions, `n ≥ 1`.
 *
 * # Safety
 * `grid` must be a live handle, `f` valid for `len` reads and `out` for
 * `capacity` writes.
 */
enum AlStatus al_resolvent_apply(const struct AlGrid *grid,
                                 uint64_t n,
                                 const double *f,
                                 size_t len,
                                 double *out,
                                 size_t capacity);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANISOLAB_H */
