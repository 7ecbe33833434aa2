#ifndef RYDBERG_CZ_H
#define RYDBERG_CZ_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum RczStatus {
  RCZ_STATUS_OK = 0,
  RCZ_STATUS_NULL_POINTER = 1,
  RCZ_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Integration failed or a result did not converge.
   */
  RCZ_STATUS_NUMERICAL = 3,
  /**
   * No pulse met the feasibility threshold; outputs hold the best found.
   */
  RCZ_STATUS_INFEASIBLE = 4,
  /**
   * A Rust panic was caught at the boundary.
   */
  RCZ_STATUS_INTERNAL = 5,
} RczStatus;

typedef enum RczObjective {
  RCZ_OBJECTIVE_MIN_DURATION = 0,
  RCZ_OBJECTIVE_MIN_BELL_INFIDELITY = 1,
  RCZ_OBJECTIVE_MIN_RYDBERG_TIME = 2,
} RczObjective;

/**
 * Error source selector for [`rcz_mechanism_infidelity`].
 */
typedef enum RczMechanism {
  RCZ_MECHANISM_DECAY = 0,
  RCZ_MECHANISM_RECOIL = 1,
  RCZ_MECHANISM_VDW = 2,
} RczMechanism;

/**
 * Opaque error budget.
 */
typedef struct RczBudget RczBudget;

/**
 * Opaque pulse.
 */
typedef struct RczPulse RczPulse;

/**
 * Opaque physical setup.
 */
typedef struct RczSystem RczSystem;

/**
 * Gate figures of merit; times in units of `1/Omega0`.
 */
typedef struct RczGateSummary {
  double phi_01;
  double phi_10;
  double phi_11;
  /**
   * `T_r` for inputs 00, 01, 10, 11.
   */
  double rydberg_time[4];
  double mean_rydberg_time;
  double pair_time;
  double gate_error;
  double phase_condition_error;
  double max_leakage;
} RczGateSummary;

/**
 * One line of a budget; `entry` is 0 decay, 1 recoil, 2 vdw, 3 summed,
 * 4 full simulation. `analytic` is NaN where no estimate exists.
 */
typedef struct RczBudgetRow {
  int32_t entry;
  double temperature_k;
  double bell_infidelity;
  double avg_infidelity;
  double analytic;
  bool converged;
} RczBudgetRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; valid until the next
 * failing call. Never null.
 */
const char *rcz_last_error(void);

/**
 * Library version as a static string.
 */
const char *rcz_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void rcz_string_free(char *s);

/**
 * Constant detuning with a laser-phase jump `theta` at `tau / 2`.
 */
struct RczPulse *rcz_pulse_delta_jump(double tau, double delta0, double theta);

struct RczPulse *rcz_pulse_triangle(double tau, double delta0, double height, double base);

struct RczPulse *rcz_pulse_gaussian(double tau, double delta0, double amplitude, double width);

struct RczPulse *rcz_pulse_gaussian_ramped(double tau,
                                           double delta0,
                                           double amplitude,
                                           double width,
                                           double kappa);

/**
 * Pulse from its JSON form (as produced by [`rcz_pulse_to_json`]); null
 * on error.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string.
 */
struct RczPulse *rcz_pulse_from_json(const char *json);

/**
 * JSON form of the pulse; release with [`rcz_string_free`]. Null on error.
 *
 * # Safety
 * `pulse` must be null or a live handle.
 */
char *rcz_pulse_to_json(const struct RczPulse *pulse);

/**
 * Gate duration `tau Omega0`; NaN for a null handle.
 *
 * # Safety
 * `pulse` must be null or a live handle.
 */
double rcz_pulse_tau(const struct RczPulse *pulse);

/**
 * # Safety
 * `pulse` must be null or a handle not yet freed.
 */
void rcz_pulse_free(struct RczPulse *pulse);

/**
 * Strontium-88 setup at 10 MHz Rabi frequency.
 */
struct RczSystem *rcz_system_table_one(void);

/**
 * Same atoms at 40 MHz and 2.38 um separation.
 */
struct RczSystem *rcz_system_forty_megahertz(void);

/**
 * # Safety
 * `system` must be null or a live handle.
 */
enum RczStatus rcz_system_set_temperature(struct RczSystem *system, double kelvin);

/**
 * `V / hbar Omega0`; NaN for a null handle.
 *
 * # Safety
 * `system` must be null or a live handle.
 */
double rcz_system_interaction(const struct RczSystem *system);

/**
 * # Safety
 * `system` must be null or a handle not yet freed.
 */
void rcz_system_free(struct RczSystem *system);

/**
 * Runs the idealized gate at blockade `interaction` (`V / hbar Omega0`).
 *
 * # Safety
 * `pulse` must be a live handle and `out` writable.
 */
enum RczStatus rcz_ideal_gate(double interaction,
                              const struct RczPulse *pulse,
                              double tolerance,
                              struct RczGateSummary *out);

/**
 * Optimizes the family of `template` with its default free parameters.
 * On `Ok` or `Infeasible` the best pulse is stored in `*out_pulse` (a new
 * handle owned by the caller) and its summary in `*out`.
 *
 * # Safety
 * `template` must be a live handle; `out_pulse` and `out` writable.
 */
enum RczStatus rcz_optimize(const struct RczPulse *template_,
                            double interaction,
                            enum RczObjective objective,
                            uint64_t seed,
                            struct RczPulse **out_pulse,
                            struct RczGateSummary *out);

/**
 * Infidelity from one error source at temperature `kelvin`, with the
 * analytic estimate. `*converged` is false (and the numeric outputs NaN)
 * when the Fock truncation did not converge.
 *
 * # Safety
 * Handles must be live; output pointers writable.
 */
enum RczStatus rcz_mechanism_infidelity(const struct RczSystem *system,
                                        const struct RczPulse *pulse,
                                        enum RczMechanism mechanism,
                                        double kelvin,
                                        double *bell,
                                        double *avg,
                                        double *analytic,
                                        bool *converged);

/**
 * Full error budget at `n` temperatures (kelvin). The new handle is
 * stored in `*out`.
 *
 * # Safety
 * `temperatures` must point to `n` doubles; handles live; `out` writable.
 */
enum RczStatus rcz_budget_compute(const struct RczSystem *system,
                                  const struct RczPulse *pulse,
                                  const double *temperatures,
                                  size_t n,
                                  struct RczBudget **out);

/**
 * Number of rows; 0 for a null handle.
 *
 * # Safety
 * `budget` must be null or a live handle.
 */
size_t rcz_budget_len(const struct RczBudget *budget);

/**
 * # Safety
 * `budget` must be a live handle and `out` writable.
 */
enum RczStatus rcz_budget_row(const struct RczBudget *budget,
                              size_t index,
                              struct RczBudgetRow *out);

/**
 * JSON form of the budget; release with [`rcz_string_free`].
 *
 * # Safety
 * `budget` must be null or a live handle.
 */
char *rcz_budget_to_json(const struct RczBudget *budget);

/**
 * # Safety
 * `budget` must be null or a handle not yet freed.
 */
void rcz_budget_free(struct RczBudget *budget);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RYDBERG_CZ_H */
