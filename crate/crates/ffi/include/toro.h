#ifndef TORO_H
#define TORO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum ToroStatus {
  TORO_STATUS_OK = 0,
  TORO_STATUS_NULL_ARGUMENT = 1,
  TORO_STATUS_INVALID_UTF8 = 2,
  TORO_STATUS_PARSE_ERROR = 3,
  // The instance breaks an invariant (overlapping starts, bad radius, ...).
  TORO_STATUS_INVALID_INSTANCE = 4,
  // The chosen method does not apply to this instance.
  TORO_STATUS_UNSUPPORTED = 5,
  // A report was produced but a solver budget ran out; it may be suboptimal.
  TORO_STATUS_BUDGET_EXHAUSTED = 6,
  TORO_STATUS_SOLVE_FAILED = 7,
  TORO_STATUS_OUT_OF_RANGE = 8,
  TORO_STATUS_PANIC = 99,
} ToroStatus;

typedef enum ToroMethod {
  // Tour pipeline without overlaps, single-FVS pipeline otherwise.
  TORO_METHOD_AUTO = 0,
  TORO_METHOD_TSP_EXACT = 1,
  TORO_METHOD_TSP_HEURISTIC = 2,
  TORO_METHOD_FVS_SINGLE = 3,
  TORO_METHOD_FVS_COMPLETE = 4,
  TORO_METHOD_GREEDY = 5,
  TORO_METHOD_RANDOM = 6,
} ToroMethod;

// FVS solver for [`ToroMethod::FvsSingle`].
typedef enum ToroFvsMethod {
  // Exact ILP with heuristic fallback.
  TORO_FVS_METHOD_DEFAULT = 0,
  TORO_FVS_METHOD_BRUTE_FORCE = 1,
  TORO_FVS_METHOD_ILP_CONSTRAINT = 2,
  TORO_FVS_METHOD_ILP_ENUMERATE = 3,
  TORO_FVS_METHOD_MSCH = 4,
  TORO_FVS_METHOD_MCH = 5,
  TORO_FVS_METHOD_MDH = 6,
} ToroFvsMethod;

typedef enum ToroLocationKind {
  TORO_LOCATION_KIND_START = 0,
  TORO_LOCATION_KIND_GOAL = 1,
  TORO_LOCATION_KIND_BUFFER = 2,
} ToroLocationKind;

// Opaque validated instance.
typedef struct ToroInstance ToroInstance;

// Opaque solve result.
typedef struct ToroReport ToroReport;

// One pick-and-place of a plan. `from_index`/`to_index` are object
// positions for start and goal slots, buffer positions otherwise.
typedef struct ToroAction {
  uint32_t object_id;
  size_t object_index;
  enum ToroLocationKind from_kind;
  size_t from_index;
  enum ToroLocationKind to_kind;
  size_t to_index;
  double pick_x;
  double pick_y;
  double place_x;
  double place_y;
  // Empty-handed travel before the pick.
  double d_e;
  // Loaded travel from pick to place.
  double d_l;
} ToroAction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null after a
// successful one. The pointer stays valid until the next library call on
// the same thread.
const char *toro_last_error(void);

// Library version as a static nul-terminated string.
const char *toro_version(void);

// Parses and validates an instance from nul-terminated JSON.
//
// # Safety
// `json` must be null or a valid nul-terminated string; `out` must be null
// or point to writable storage for one pointer.
enum ToroStatus toro_instance_from_json(const char *json, struct ToroInstance **out);

// # Safety
// `inst` must be null or a handle from [`toro_instance_from_json`] that has
// not been freed.
void toro_instance_free(struct ToroInstance *inst);

// Number of objects, 0 for null.
//
// # Safety
// `inst` must be null or a live instance handle.
size_t toro_instance_object_count(const struct ToroInstance *inst);

// Whether some start overlaps another object's goal, false for null.
//
// # Safety
// `inst` must be null or a live instance handle.
bool toro_instance_has_overlap(const struct ToroInstance *inst);

// Solves `inst` with `method`.
//
// `fvs` only matters for [`ToroMethod::FvsSingle`]. `time_limit_s` bounds
// each ILP solve; zero or negative selects the default budget. `seed`
// drives [`ToroMethod::Random`]. On [`ToroStatus::BudgetExhausted`] a
// usable report is still written to `out`.
//
// # Safety
// `inst` must be null or a live instance handle; `out` must be null or
// point to writable storage for one pointer.
enum ToroStatus toro_solve(const struct ToroInstance *inst,
                           enum ToroMethod method,
                           enum ToroFvsMethod fvs,
                           double time_limit_s,
                           uint64_t seed,
                           struct ToroReport **out);

// # Safety
// `report` must be null or a handle from [`toro_solve`] that has not been
// freed.
void toro_report_free(struct ToroReport *report);

// Number of pick-and-place actions, 0 for null.
//
// # Safety
// `report` must be null or a live report handle.
size_t toro_report_action_count(const struct ToroReport *report);

// Total travel distance, NaN for null.
//
// # Safety
// `report` must be null or a live report handle.
double toro_report_distance(const struct ToroReport *report);

// Weighted cost of the plan, NaN for null.
//
// # Safety
// `report` must be null or a live report handle.
double toro_report_total_cost(const struct ToroReport *report);

// Whether the plan is certified optimal for the method that produced it.
//
// # Safety
// `report` must be null or a live report handle.
bool toro_report_optimal(const struct ToroReport *report);

// Copies action `index` into `out`.
//
// # Safety
// `report` must be null or a live report handle; `out` must be null or
// point to a writable [`ToroAction`].
enum ToroStatus toro_report_action(const struct ToroReport *report,
                                   size_t index,
                                   struct ToroAction *out);

// The full report as JSON, or null for a null handle. Free with
// [`toro_string_free`].
//
// # Safety
// `report` must be null or a live report handle.
char *toro_report_to_json(const struct ToroReport *report);

// Buffered object indices of an FVS run as a JSON array, `null` otherwise.
// Free with [`toro_string_free`].
//
// # Safety
// `report` must be null or a live report handle.
char *toro_report_buffered_json(const struct ToroReport *report);

// # Safety
// `s` must be null or a string returned by this library that has not been
// freed.
void toro_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TORO_H */
