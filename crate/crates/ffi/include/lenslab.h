#ifndef LENSLAB_H
#define LENSLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum LlStatus {
  LL_STATUS_OK = 0,
  LL_STATUS_NULL_POINTER = 1,
  LL_STATUS_INVALID_UTF8 = 2,
  LL_STATUS_BAD_INPUT = 3,
  LL_STATUS_NUMERIC_FAILURE = 4,
  LL_STATUS_PANIC = 5,
} LlStatus;

/**
 * Outcome of a single orbit.
 */
typedef enum LlOrbit {
  LL_ORBIT_FREE = 0,
  LL_ORBIT_SCATTERED = 1,
  LL_ORBIT_TRAPPED = 2,
  LL_ORBIT_GLIDING_REJECTED = 3,
  LL_ORBIT_TANGENT_FLAGGED = 4,
  LL_ORBIT_FAILED = 5,
} LlOrbit;

/**
 * Opaque lens table handle.
 */
typedef struct LlLensTable LlLensTable;

/**
 * Opaque scene handle.
 */
typedef struct LlScene LlScene;

/**
 * One row of a lens table. `t` and `sojourn` are NaN when undefined.
 */
typedef struct LlSample {
  enum LlOrbit status;
  double t;
  uint64_t reflections;
  double sojourn;
} LlSample;

/**
 * Summary of a lens comparison.
 */
typedef struct LlComparison {
  bool indistinguishable;
  uint64_t samples;
  uint64_t matched;
  uint64_t status_mismatches;
  uint64_t exceed_count;
  double max_abs_dt;
  double mean_abs_dt;
  double tolerance;
} LlComparison;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string.
 */
const char *ll_version(void);

/**
 * Message of the last failed call on this thread. Valid until the next
 * failing call on the same thread; never NULL.
 */
const char *ll_last_error(void);

/**
 * Releases a string returned by the library.
 *
 * # Safety
 * `s` must be NULL or a string returned by this library that was not yet
 * freed.
 */
void ll_string_free(char *s);

/**
 * Parses a scene file.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LlStatus ll_scene_from_json(const char *json, struct LlScene **out);

/**
 * # Safety
 * `scene` must be NULL or a handle from [`ll_scene_from_json`] not yet freed.
 */
void ll_scene_free(struct LlScene *scene);

/**
 * Dimension of the scene (2 or 3), 0 for NULL.
 *
 * # Safety
 * `scene` must be NULL or a live handle.
 */
uint32_t ll_scene_dimension(const struct LlScene *scene);

/**
 * Radius of the reference ball, NaN for NULL.
 *
 * # Safety
 * `scene` must be NULL or a live handle.
 */
double ll_scene_ball_radius(const struct LlScene *scene);

/**
 * 64-bit hash of the canonical scene description.
 *
 * # Safety
 * `scene` must be a live handle and `out` a valid pointer.
 */
enum LlStatus ll_scene_hash(const struct LlScene *scene, uint64_t *out);

/**
 * Runs the scene checks. `passed` receives the verdict; the full report is
 * written as JSON to `report` unless it is NULL.
 *
 * # Safety
 * `scene` must be a live handle, `passed` a valid pointer and `report`
 * NULL or a valid pointer.
 */
enum LlStatus ll_scene_validate(const struct LlScene *scene, bool *passed, char **report);

/**
 * Travelling time of the ray entering at `q` (on the reference sphere)
 * with direction `v`; both arrays hold `dimension` values. A zero
 * `max_reflections` or non-positive `max_time` selects the default.
 * `time` is NaN unless the orbit left the ball.
 *
 * # Safety
 * `scene` must be a live handle, `q` and `v` must point to `dimension`
 * doubles and the outputs must be valid pointers.
 */
enum LlStatus ll_travelling_time(const struct LlScene *scene,
                                 const double *q,
                                 const double *v,
                                 uint64_t max_reflections,
                                 double max_time,
                                 double *time,
                                 enum LlOrbit *orbit);

/**
 * Traces an entry and returns the trajectory as JSONL.
 *
 * # Safety
 * As for [`ll_travelling_time`]; `out` must be a valid pointer.
 */
enum LlStatus ll_trace_jsonl(const struct LlScene *scene,
                             const double *q,
                             const double *v,
                             uint64_t max_reflections,
                             double max_time,
                             char **out);

/**
 * Builds a lens table for `spec` (`grid:PxD` or `mc:N`).
 *
 * # Safety
 * `scene` must be a live handle, `spec` a NUL-terminated string and `out`
 * a valid pointer.
 */
enum LlStatus ll_lens_table_build(const struct LlScene *scene,
                                  const char *spec,
                                  uint64_t seed,
                                  uint64_t max_reflections,
                                  double max_time,
                                  struct LlLensTable **out);

/**
 * Reads a lens table written by [`ll_lens_table_to_jsonl`] or the CLI.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LlStatus ll_lens_table_from_jsonl(const char *text, struct LlLensTable **out);

/**
 * # Safety
 * `table` must be a live handle and `out` a valid pointer.
 */
enum LlStatus ll_lens_table_to_jsonl(const struct LlLensTable *table, char **out);

/**
 * Number of samples, 0 for NULL.
 *
 * # Safety
 * `table` must be NULL or a live handle.
 */
size_t ll_lens_table_len(const struct LlLensTable *table);

/**
 * # Safety
 * `table` must be a live handle and `out` a valid pointer.
 */
enum LlStatus ll_lens_table_sample(const struct LlLensTable *table,
                                   size_t index,
                                   struct LlSample *out);

/**
 * # Safety
 * `table` must be NULL or a live handle not yet freed.
 */
void ll_lens_table_free(struct LlLensTable *table);

/**
 * Compares two tables built with the same spec. A non-positive
 * `tolerance` selects 1e−6 times the ball radius.
 *
 * # Safety
 * `k` and `l` must be live handles and `out` a valid pointer.
 */
enum LlStatus ll_compare_lens(const struct LlLensTable *k,
                              const struct LlLensTable *l,
                              double tolerance,
                              struct LlComparison *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LENSLAB_H */
