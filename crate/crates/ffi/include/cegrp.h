#ifndef CEGRP_H
#define CEGRP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CegrpStatus {
  CEGRP_STATUS_OK = 0,
  CEGRP_STATUS_NULL_POINTER = 1,
  CEGRP_STATUS_INVALID_ARGUMENT = 2,
  CEGRP_STATUS_PARSE_ERROR = 3,
  CEGRP_STATUS_INFEASIBLE = 4,
  CEGRP_STATUS_VALIDATION_FAILED = 5,
  CEGRP_STATUS_PANIC = 6,
} CegrpStatus;

/**
 * Parsed problem instance.
 */
typedef struct CegrpInstance CegrpInstance;

/**
 * Outcome of one search run.
 */
typedef struct CegrpResult CegrpResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next call into this library from the same thread.
 */
const char *cegrp_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *cegrp_version(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void cegrp_string_free(char *s);

/**
 * Parses an instance document.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum CegrpStatus cegrp_instance_from_json(const char *json, struct CegrpInstance **out);

/**
 * Random instance. A negative `max_vehicles` leaves the fleet unbounded.
 *
 * # Safety
 * `out` must be writable.
 */
enum CegrpStatus cegrp_instance_generate(uint64_t seed,
                                         size_t n_nodes,
                                         size_t n_edges,
                                         double area,
                                         double radius,
                                         double flight_range,
                                         uint32_t node_capacity,
                                         int64_t max_vehicles,
                                         struct CegrpInstance **out);

/**
 * # Safety
 * `instance` must be NULL or a live handle; it is invalid afterwards.
 */
void cegrp_instance_free(struct CegrpInstance *instance);

/**
 * # Safety
 * `instance` must be a live handle; `out` must be writable.
 */
enum CegrpStatus cegrp_instance_to_json(const struct CegrpInstance *instance, char **out);

/**
 * Number of required nodes plus required edges.
 *
 * # Safety
 * `instance` must be a live handle; `out` must be writable.
 */
enum CegrpStatus cegrp_instance_task_count(const struct CegrpInstance *instance, size_t *out);

/**
 * Copy of `instance` with every node radius set to `radius`.
 *
 * # Safety
 * `instance` must be a live handle; `out` must be writable.
 */
enum CegrpStatus cegrp_instance_with_radius(const struct CegrpInstance *instance,
                                            double radius,
                                            struct CegrpInstance **out);

/**
 * Runs the search. `params_json` may be NULL for the defaults; otherwise it
 * is a JSON object with the same keys as the CLI parameter file.
 *
 * # Safety
 * `instance` must be a live handle, `params_json` NULL or a NUL-terminated
 * string, `out` writable.
 */
enum CegrpStatus cegrp_solve(const struct CegrpInstance *instance,
                             const char *params_json,
                             struct CegrpResult **out);

/**
 * # Safety
 * `result` must be NULL or a live handle; it is invalid afterwards.
 */
void cegrp_result_free(struct CegrpResult *result);

/**
 * Total distance over the optimized touring points.
 *
 * # Safety
 * `result` must be a live handle; `out` must be writable.
 */
enum CegrpStatus cegrp_result_objective(const struct CegrpResult *result, double *out);

/**
 * # Safety
 * `result` must be a live handle; `out` must be writable.
 */
enum CegrpStatus cegrp_result_route_count(const struct CegrpResult *result, size_t *out);

/**
 * Solution document including the touring points.
 *
 * # Safety
 * `result` must be a live handle; `out` must be writable.
 */
enum CegrpStatus cegrp_result_solution_json(const struct CegrpResult *result, char **out);

/**
 * Per-iteration log, one JSON object per line.
 *
 * # Safety
 * `result` must be a live handle; `out` must be writable.
 */
enum CegrpStatus cegrp_result_runlog_jsonl(const struct CegrpResult *result, char **out);

/**
 * Checks a solution document against `instance`. On success the recomputed
 * total distance is written to `total_out` (which may be NULL).
 *
 * # Safety
 * `instance` must be a live handle, `solution_json` a NUL-terminated string.
 */
enum CegrpStatus cegrp_validate_solution(const struct CegrpInstance *instance,
                                         const char *solution_json,
                                         double *total_out);

/**
 * Shortest closed chain through one point per disk, in the given order.
 *
 * `xy` holds `n` centers as interleaved x,y pairs and `radii` their radii.
 * The first and last disks must be the same zero-radius point. The chosen
 * points are written to `out_xy` (room for `2 * n` doubles) and the length to
 * `out_length`.
 *
 * # Safety
 * `xy` and `out_xy` must point to `2 * n` doubles, `radii` to `n` doubles,
 * `out_length` must be writable.
 */
enum CegrpStatus cegrp_optimize_points(const double *xy,
                                       const double *radii,
                                       size_t n,
                                       double tol,
                                       size_t max_iter,
                                       double *out_xy,
                                       double *out_length);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CEGRP_H */
