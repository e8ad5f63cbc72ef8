/* C ABI for the cellcov coverage toolkit. */

#ifndef CELLCOV_H
#define CELLCOV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Occupancy distribution selector, mirroring the library's models.
typedef enum CcOccupancyModel {
  // Gamma-distributed cell sizes (shape 3.575); the accurate choice.
  CC_OCCUPANCY_MODEL_EXACT_GAMMA = 0,
  // Poisson approximation of the per-BS user count.
  CC_OCCUPANCY_MODEL_POISSON_APPROX = 1,
  // Normal approximation with continuity correction (CDF-only).
  CC_OCCUPANCY_MODEL_NORMAL_APPROX = 2,
} CcOccupancyModel;

// Status codes returned by every fallible entry point.
typedef enum CcStatus {
  CC_STATUS_OK = 0,
  // A required pointer argument was null.
  CC_STATUS_NULL_POINTER = -1,
  // An argument violated a documented precondition.
  CC_STATUS_INVALID_ARGUMENT = -2,
  // Numerical evaluation failed (quadrature or recurrence trouble).
  CC_STATUS_EVALUATION_FAILED = -3,
  // The Monte Carlo run aborted (too many discarded trials).
  CC_STATUS_SIMULATION_ABORTED = -4,
} CcStatus;

// Opaque scenario handle: tiers, user density, propagation, target SINR.
typedef struct CcScenario CcScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string; do not free.
const char *cc_version(void);

// Short static description of a status code; do not free.
const char *cc_status_message(enum CcStatus status);

// Create a scenario with no tiers yet. Densities are per m², powers in
// watts, the SINR target is linear, and `noise_power` 0 selects the
// interference-limited regime. Returns null if a value is not finite.
// Free with [`cc_scenario_free`].
struct CcScenario *cc_scenario_new(double user_density,
                                   double pathloss_exponent,
                                   double noise_power,
                                   double target_sinr);

// Destroy a scenario created by [`cc_scenario_new`].
//
// # Safety
// `scenario` must be a pointer from `cc_scenario_new` not yet freed, or
// null (a no-op).
void cc_scenario_free(struct CcScenario *scenario);

// Append one tier (BS density per m², transmit power in watts, and its
// user-count sleep threshold).
//
// # Safety
// `scenario` must be a valid handle with no concurrent access.
enum CcStatus cc_scenario_add_tier(struct CcScenario *scenario,
                                   double bs_density,
                                   double tx_power,
                                   uint32_t threshold);

// Set one tier's user-count threshold.
//
// # Safety
// `scenario` must be a valid handle with no concurrent access.
enum CcStatus cc_scenario_set_threshold(struct CcScenario *scenario,
                                        size_t tier_index,
                                        uint32_t threshold);

// Interference integral ρ(T, α).
//
// # Safety
// `out` must point to writable memory for one f64.
enum CcStatus cc_rho(double target_sinr, double pathloss_exponent, double *out);

// Overall interference-limited coverage probability of the scenario
// under its per-tier thresholds (single-tier scenarios use the same
// closed form).
//
// # Safety
// `scenario` must be a valid handle; `out` must point to one f64.
enum CcStatus cc_coverage_sir(const struct CcScenario *scenario,
                              enum CcOccupancyModel model,
                              double *out);

// Interference-limited coverage of the random on/off baseline operating
// each BS with probability `q`; single-tier scenarios only.
//
// # Safety
// `scenario` must be a valid handle; `out` must point to one f64.
enum CcStatus cc_coverage_random(const struct CcScenario *scenario,
                                 double q,
                                 enum CcOccupancyModel model,
                                 double *out);

// Closed-form coverage-maximizing thresholds: out[i] = ⌊γ̄ᵢ + 0.5⌋.
// `out_len` must equal the tier count.
//
// # Safety
// `scenario` must be a valid handle; `out` must point to `out_len` u32s.
enum CcStatus cc_optimal_thresholds_closed(const struct CcScenario *scenario,
                                           uint32_t *out,
                                           size_t out_len);

// Exhaustive coverage-maximizing thresholds by per-tier coordinate
// ascent over 0..=theta_max; also reports the achieved coverage.
//
// # Safety
// `scenario` must be a valid handle; `out` must point to `out_len` u32s
// and `out_coverage` to one f64.
enum CcStatus cc_optimal_thresholds_search(const struct CcScenario *scenario,
                                           uint32_t theta_max,
                                           enum CcOccupancyModel model,
                                           uint32_t *out,
                                           size_t out_len,
                                           double *out_coverage);

// Per-tier weighted mean loads γ̄ᵢ = λᵤ qᵢ/λᵢ — the quantities the
// closed-form threshold rule rounds. `out_len` must equal the tier count.
//
// # Safety
// `scenario` must be a valid handle; `out` must point to `out_len` f64s.
enum CcStatus cc_weighted_loads(const struct CcScenario *scenario, double *out, size_t out_len);

// Seeded Monte Carlo estimate of the interference-limited coverage on a
// `width` x `height` torus under the scenario's thresholds. Identical
// (seed, trials) inputs produce identical results for any worker count.
//
// # Safety
// `scenario` must be a valid handle; `out_mean` and `out_stderr` must
// each point to one f64.
enum CcStatus cc_estimate_sir(const struct CcScenario *scenario,
                              double width,
                              double height,
                              uint32_t trials,
                              uint64_t master_seed,
                              double *out_mean,
                              double *out_stderr);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CELLCOV_H */
