#ifndef COMBCPT_H
#define COMBCPT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. The nonzero simulator codes match the CLI exit codes.
 */
typedef enum CombcptStatus {
  COMBCPT_STATUS_OK = 0,
  COMBCPT_STATUS_CONFIG_ERROR = 2,
  COMBCPT_STATUS_INTEGRATION_ERROR = 3,
  COMBCPT_STATUS_INVARIANT_VIOLATION = 4,
  COMBCPT_STATUS_IO_ERROR = 5,
  COMBCPT_STATUS_NULL_POINTER = 10,
  COMBCPT_STATUS_INVALID_UTF8 = 11,
  COMBCPT_STATUS_OUT_OF_RANGE = 12,
  COMBCPT_STATUS_PANIC = 13,
} CombcptStatus;

/**
 * A validated scenario: level scheme, decays, pulse train, policy, initial
 * state, radius and velocity.
 */
typedef struct CombcptScenario CombcptScenario;

/**
 * Per-pulse snapshots of one propagation.
 */
typedef struct CombcptTrajectory CombcptTrajectory;

/**
 * One snapshot, flattened.
 */
typedef struct CombcptSnapshot {
  uint64_t pulse;
  double time_s;
  /**
   * ρ11, ρ22, ρ33, ρ44.
   */
  double populations[4];
  double re_rho12;
  double im_rho12;
  double abs_rho12;
  double trace_err;
  double herm_err;
} CombcptSnapshot;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a scenario from TOML config text.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CombcptStatus combcpt_scenario_from_config(const char *toml, struct CombcptScenario **out);

/**
 * Builds the base scenario of a named preset.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CombcptStatus combcpt_scenario_from_preset(const char *name, struct CombcptScenario **out);

/**
 * Sets the atom velocity in m/s.
 *
 * # Safety
 * `scenario` must be a live handle.
 */
enum CombcptStatus combcpt_scenario_set_velocity(struct CombcptScenario *scenario, double v);

/**
 * Sets the radial sampling position in m.
 *
 * # Safety
 * `scenario` must be a live handle.
 */
enum CombcptStatus combcpt_scenario_set_radius(struct CombcptScenario *scenario, double r);

/**
 * Sets the number of pulses.
 *
 * # Safety
 * `scenario` must be a live handle.
 */
enum CombcptStatus combcpt_scenario_set_pulses(struct CombcptScenario *scenario, uint64_t n);

/**
 * Propagates the scenario and checks every snapshot against the state
 * invariants.
 *
 * # Safety
 * `scenario` must be a live handle and `out` a valid pointer.
 */
enum CombcptStatus combcpt_scenario_run(const struct CombcptScenario *scenario,
                                        struct CombcptTrajectory **out);

/**
 * Releases a scenario. Null is accepted.
 *
 * # Safety
 * `scenario` must be null or a handle not yet freed.
 */
void combcpt_scenario_free(struct CombcptScenario *scenario);

/**
 * Number of snapshots, initial state included; 0 for null.
 *
 * # Safety
 * `traj` must be null or a live handle.
 */
uint64_t combcpt_trajectory_len(const struct CombcptTrajectory *traj);

/**
 * Copies snapshot `index` into `out`.
 *
 * # Safety
 * `traj` must be a live handle and `out` a valid pointer.
 */
enum CombcptStatus combcpt_trajectory_snapshot(const struct CombcptTrajectory *traj,
                                               uint64_t index,
                                               struct CombcptSnapshot *out);

/**
 * Releases a trajectory. Null is accepted.
 *
 * # Safety
 * `traj` must be null or a handle not yet freed.
 */
void combcpt_trajectory_free(struct CombcptTrajectory *traj);

/**
 * Copies the calling thread's last error message into `buf` (truncated and
 * NUL-terminated) and returns the full message length in bytes. Pass a null
 * `buf` to query the length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t combcpt_last_error(char *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COMBCPT_H */
