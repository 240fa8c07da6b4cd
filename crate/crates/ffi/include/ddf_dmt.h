#ifndef DDF_DMT_H
#define DDF_DMT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DdfStatus {
  DDF_STATUS_OK = 0,
  // An argument is outside the domain of a formula.
  DDF_STATUS_DOMAIN_ERROR = 1,
  DDF_STATUS_INVALID_ARGUMENT = 2,
  DDF_STATUS_NULL_POINTER = 3,
  // The region is empty; the infimum is reported as `+inf`.
  DDF_STATUS_INFEASIBLE = 4,
  DDF_STATUS_INTERNAL = 5,
} DdfStatus;

// A compiled outage region.
typedef struct DdfRegion DdfRegion;

// A Monte Carlo campaign and, after a run, its results.
typedef struct DdfSimulator DdfSimulator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or null. Valid until
// the next failing call on the same thread.
const char *ddf_last_error(void);

// Library version as a static string.
const char *ddf_version(void);

// Evaluates a named tradeoff curve with `rounds` ARQ rounds at `r`.
//
// # Safety
// `curve_id` must be a nul-terminated string and `out` a valid pointer.
enum DdfStatus ddf_curve_eval(const char *curve_id, uint32_t rounds, double r, double *out);

// Builds one of the built-in regions (`mar_type1`, `mar_type12`,
// `cvma_inferior`, `cvma_ji`, `cvma_js`, `cvma_s1`, `cvma_sji`, `cvma_sjs`,
// `cvma_sjs_full`) at rate `r`.
//
// # Safety
// `kind` must be a nul-terminated string and `out` a valid pointer.
enum DdfStatus ddf_region_new(const char *kind, double r, struct DdfRegion **out);

// Parses a region from its JSON form.
//
// # Safety
// `json` must be a nul-terminated string and `out` a valid pointer.
enum DdfStatus ddf_region_from_json(const char *json, struct DdfRegion **out);

// Serializes a region to JSON.
//
// # Safety
// `region` must come from this library; `out` must be a valid pointer.
enum DdfStatus ddf_region_to_json(const struct DdfRegion *region, char **out);

// Infimum of a weighted sum of exponential orders over the region.
//
// `weights` points at 5 values or is null for the plain sum. `argmin` (5
// values) and `fraction` are optional; `fraction` is NaN when the region
// has no listening rule. An empty region returns `INFEASIBLE` with
// `*value = +inf`.
//
// # Safety
// Non-null pointers must be valid for the sizes above.
enum DdfStatus ddf_region_infimum(const struct DdfRegion *region,
                                  const double *weights,
                                  double *value,
                                  double *argmin,
                                  double *fraction);

// # Safety
// `region` must come from this library (or be null) and not be used again.
void ddf_region_free(struct DdfRegion *region);

// Creates a simulator from a JSON campaign description, for example
// `{"scenario":"relay","L":2,"r1":0.5,"snr_db_list":[10,20],"n_trials":10000,"seed":1}`.
//
// # Safety
// `config_json` must be a nul-terminated string and `out` a valid pointer.
enum DdfStatus ddf_simulator_new(const char *config_json, struct DdfSimulator **out);

// Runs the campaign and writes the error probability of each SNR point to
// `pe` (capacity `capacity`); `*n_points` receives the number of points.
// `pe` may be null to query the count.
//
// # Safety
// `sim` must come from this library; `pe` must hold `capacity` values.
enum DdfStatus ddf_simulator_run(struct DdfSimulator *sim,
                                 double *pe,
                                 uintptr_t capacity,
                                 uintptr_t *n_points);

// Results of the last run as CSV (`snr_db,pe,pe_lo,pe_hi,eta,...`).
//
// # Safety
// `sim` must come from this library; `out` must be a valid pointer.
enum DdfStatus ddf_simulator_csv(const struct DdfSimulator *sim, char **out);

// # Safety
// `sim` must come from this library (or be null) and not be used again.
void ddf_simulator_free(struct DdfSimulator *sim);

// # Safety
// `s` must be a string returned by this library (or null).
void ddf_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DDF_DMT_H */
