#ifndef MAXGRAPH_H
#define MAXGRAPH_H

/* Generated from the Rust sources by cbindgen; edit those instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call. Zero is success; anything else is a failure and
 * leaves a message for `mg_last_error_message`.
 */
typedef enum MgStatus {
  MgStatus_Ok = 0,
  /**
   * An expression failed to parse.
   */
  MgStatus_Parse = 1,
  /**
   * The point or field left the domain of definition.
   */
  MgStatus_Domain = 2,
  /**
   * The graph is not spacelike where it needs to be.
   */
  MgStatus_NotSpacelike = 3,
  /**
   * An iteration or a linear solve failed to converge.
   */
  MgStatus_Diverged = 4,
  /**
   * A name, size or option was rejected.
   */
  MgStatus_InvalidArgument = 5,
  /**
   * A required pointer was null.
   */
  MgStatus_NullPointer = 6,
  /**
   * A string argument was not valid UTF-8.
   */
  MgStatus_Utf8 = 7,
  /**
   * An internal invariant was violated; the library state is still
   * usable but the call did nothing.
   */
  MgStatus_Panic = 8,
} MgStatus;

/**
 * A spacelike or minimal graph over a conformal base metric.
 */
typedef struct MgSurface MgSurface;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *mg_version(void);

/**
 * Message describing the most recent failure on the calling thread.
 * The pointer stays valid until the next failing call on this thread.
 */
const char *mg_last_error_message(void);

/**
 * Build a surface from a base metric name (`"euclidean"` or
 * `"hyperbolic-half-plane"`), a signature (`"riemannian"` or
 * `"lorentzian"`) and a height expression in the variables `x1`, `x2`.
 *
 * # Safety
 * The strings must be NUL-terminated; `out` must point to writable
 * storage for one pointer.
 */
enum MgStatus mg_surface_new(const char *metric,
                             const char *signature,
                             const char *expression,
                             struct MgSurface **out);

/**
 * Build one of the built-in surfaces by name. `mg_last_error_message`
 * lists the valid names after a failed lookup.
 *
 * # Safety
 * `name` must be NUL-terminated; `out` must point to writable storage
 * for one pointer.
 */
enum MgStatus mg_surface_catalog(const char *name,
                                 struct MgSurface **out);

/**
 * Release a surface. Null is accepted and ignored.
 *
 * # Safety
 * `handle` must be null or a pointer obtained from this library that has
 * not been freed before.
 */
void mg_surface_free(struct MgSurface *handle);

/**
 * Height of the graph at a point.
 *
 * # Safety
 * `handle` must be a live surface; `out` must be writable.
 */
enum MgStatus mg_surface_value(const struct MgSurface *handle,
                               double x1,
                               double x2,
                               double *out);

/**
 * Residual of the minimal or maximal graph equation at a point. Zero
 * means the surface satisfies its equation there.
 *
 * # Safety
 * `handle` must be a live surface; `out` must be writable.
 */
enum MgStatus mg_surface_residual(const struct MgSurface *handle,
                                  double x1,
                                  double x2,
                                  double *out);

/**
 * Mean curvature of the graph at a point.
 *
 * # Safety
 * `handle` must be a live surface; `out` must be writable.
 */
enum MgStatus mg_surface_mean_curvature(const struct MgSurface *handle,
                                        double x1,
                                        double x2,
                                        double *out);

/**
 * Vertical component of the unit normal at a point. In the Lorentzian
 * product it is at most -1, in the Riemannian one it lies in (0, 1].
 *
 * # Safety
 * `handle` must be a live surface; `out` must be writable.
 */
enum MgStatus mg_surface_theta(const struct MgSurface *handle,
                               double x1,
                               double x2,
                               double *out);

/**
 * Causal character at a point: the squared gradient norm `q` and whether
 * the tangent plane is spacelike. Unlike the other evaluators this does
 * not fail on a timelike point; it reports it.
 *
 * # Safety
 * `handle` must be a live surface; `q_out` and `spacelike_out` must be
 * writable.
 */
enum MgStatus mg_surface_causal_character(const struct MgSurface *handle,
                                          double x1,
                                          double x2,
                                          double *q_out,
                                          bool *spacelike_out);

/**
 * Reconstruct the dual graph on a uniform grid by path integration.
 * `values_out` receives `nx * ny` heights in row-major order with `x1`
 * varying fastest, anchored to zero at the basepoint. `certified_out`
 * reports whether the defining one-form was closed to within `tol`.
 * Pass `min_to_max = true` to go from a minimal graph to its maximal
 * conjugate and `false` for the way back.
 *
 * # Safety
 * `handle` must be a live surface; `values_out` must point to writable
 * storage for `nx * ny` doubles; the scalar out pointers must be
 * writable.
 */
enum MgStatus mg_surface_dualize(const struct MgSurface *handle,
                                 double x1_lo,
                                 double x1_hi,
                                 double x2_lo,
                                 double x2_hi,
                                 size_t nx,
                                 size_t ny,
                                 double basepoint_x1,
                                 double basepoint_x2,
                                 bool min_to_max,
                                 double tol,
                                 double *values_out,
                                 double *closedness_sup_out,
                                 bool *certified_out);

/**
 * Length of a parametrized curve in the induced metric of the graph.
 * The curve components are expressions in the parameter `s` on the
 * interval `[s_lo, s_hi]`, which may be infinite. `converged_out` tells
 * whether the improper integral settled; when it is false the length is
 * a lower bound. `capped_out` reports that the running total crossed the
 * built-in cutoff and the curve was classified as having infinite
 * length.
 *
 * # Safety
 * `handle` must be a live surface; the strings must be NUL-terminated;
 * the out pointers must be writable.
 */
enum MgStatus mg_surface_curve_length(const struct MgSurface *handle,
                                      const char *x1_expr,
                                      const char *x2_expr,
                                      double s_lo,
                                      double s_hi,
                                      double tol,
                                      double *length_out,
                                      bool *converged_out,
                                      bool *capped_out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* MAXGRAPH_H */
