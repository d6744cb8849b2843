#ifndef PBOUNDS_H
#define PBOUNDS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum PbStatus {
  PB_STATUS_OK = 0,
  PB_STATUS_NULL_POINTER = 1,
  PB_STATUS_INVALID_INPUT = 2,
  PB_STATUS_DEGENERATE_SHAPE = 3,
  PB_STATUS_NUMERICAL = 4,
  PB_STATUS_INADMISSIBLE = 5,
  PB_STATUS_IO = 6,
  PB_STATUS_PANIC = 7,
} PbStatus;

typedef enum PbBasis {
  PB_BASIS_MONOMIAL = 0,
  PB_BASIS_COSINE = 1,
} PbBasis;

typedef enum PbConstantKind {
  PB_CONSTANT_KIND_CP_T = 0,
  PB_CONSTANT_KIND_CP_GAMMA = 1,
  PB_CONSTANT_KIND_CTR_GAMMA = 2,
} PbConstantKind;

typedef struct PbSolver PbSolver;

typedef struct PbTetrahedron PbTetrahedron;

typedef struct PbTriangle PbTriangle;

/**
 * Dimensionless analytic upper bounds on a triangle.
 */
typedef struct PbUpperBounds2D {
  double cp_gamma;
  double ctr_gamma;
  double cp_t;
} PbUpperBounds2D;

/**
 * Dimensionless analytic upper bounds on a tetrahedron.
 */
typedef struct PbUpperBounds3D {
  double cp_gamma;
  double ctr_gamma;
} PbUpperBounds3D;

/**
 * Guaranteed lower bound of one constant.
 */
typedef struct PbLowerBound {
  /**
   * Dimensionless lower bound of the constant.
   */
  double constant;
  /**
   * Largest eigenvalue of the pencil, the squared dimensional bound.
   */
  double lambda;
  double residual;
} PbLowerBound;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates the triangle `(0,0), (h,0), (h rho cos a, h rho sin a)`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one pointer.
 */
enum PbStatus pb_triangle_new(double h, double rho, double alpha, struct PbTriangle **out);

/**
 * # Safety
 * `t` must be null or a handle from [`pb_triangle_new`] not freed before.
 */
void pb_triangle_free(struct PbTriangle *t);

/**
 * Creates the tetrahedron with `D = h2 (sin t cos a, sin t sin a, cos t)`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one pointer.
 */
enum PbStatus pb_tetrahedron_new(double h1,
                                 double h2,
                                 double h3,
                                 double alpha,
                                 double theta,
                                 struct PbTetrahedron **out);

/**
 * # Safety
 * `t` must be null or a handle from [`pb_tetrahedron_new`] not freed before.
 */
void pb_tetrahedron_free(struct PbTetrahedron *t);

/**
 * # Safety
 * `t` must be a live triangle handle and `out` valid for writing.
 */
enum PbStatus pb_triangle_upper_bounds(const struct PbTriangle *t, struct PbUpperBounds2D *out);

/**
 * # Safety
 * `t` must be a live tetrahedron handle and `out` valid for writing.
 */
enum PbStatus pb_tetrahedron_upper_bounds(const struct PbTetrahedron *t,
                                          struct PbUpperBounds3D *out);

/**
 * Assembles the Rayleigh-Ritz system on a triangle with polynomial degree `n`.
 *
 * # Safety
 * `t` must be a live triangle handle and `out` valid for writing.
 */
enum PbStatus pb_solver_new_triangle(const struct PbTriangle *t,
                                     uint32_t n,
                                     enum PbBasis basis,
                                     struct PbSolver **out);

/**
 * Assembles the Rayleigh-Ritz system on a tetrahedron with degree `n`.
 *
 * # Safety
 * `t` must be a live tetrahedron handle and `out` valid for writing.
 */
enum PbStatus pb_solver_new_tetrahedron(const struct PbTetrahedron *t,
                                        uint32_t n,
                                        struct PbSolver **out);

/**
 * # Safety
 * `s` must be a live solver handle and `out` valid for writing.
 */
enum PbStatus pb_solver_lower_bound(const struct PbSolver *s,
                                    enum PbConstantKind kind,
                                    struct PbLowerBound *out);

/**
 * # Safety
 * `s` must be null or a handle from a `pb_solver_new_*` call not freed before.
 */
void pb_solver_free(struct PbSolver *s);

/**
 * Evaluates the error majorant for a mesh and fields given as JSON text
 * and writes the JSON report to `*out`, to be released with
 * [`pb_string_free`]. Inadmissible fields give [`PbStatus::Inadmissible`]
 * with the violated conditions in the error message.
 *
 * # Safety
 * `mesh_json` and `fields_json` must be NUL-terminated strings and `out`
 * valid for writing.
 */
enum PbStatus pb_majorant_json(const char *mesh_json, const char *fields_json, char **out);

/**
 * Message of the last failed call on this thread, or null. The returned
 * string is owned by the caller and released with [`pb_string_free`].
 */
char *pb_last_error_message(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not freed before.
 */
void pb_string_free(char *s);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pb_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PBOUNDS_H */
