/* C interface for the MIT* motion planner. Regenerated by build.rs; do not edit. */

#ifndef MITSTAR_H
#define MITSTAR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a C API call. `Ok` is zero; every failure is nonzero and
 * leaves a message readable through [`mit_last_error_message`].
 */
typedef enum MitStatus {
  MIT_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  MIT_STATUS_NULL_POINTER,
  /**
   * An argument failed validation; the error message has details.
   */
  MIT_STATUS_INVALID_ARGUMENT,
  /**
   * The planner variant name was not recognized.
   */
  MIT_STATUS_UNKNOWN_VARIANT,
  /**
   * The solve itself failed (not the same as finding no solution).
   */
  MIT_STATUS_SOLVE_FAILED,
  /**
   * The result holds no solution path.
   */
  MIT_STATUS_NO_SOLUTION,
  /**
   * An index argument was past the end of the collection.
   */
  MIT_STATUS_INDEX_OUT_OF_RANGE,
  /**
   * The caller-provided buffer is too small for the requested copy.
   */
  MIT_STATUS_BUFFER_TOO_SMALL,
  /**
   * A panic was caught at the language boundary.
   */
  MIT_STATUS_PANIC,
} MitStatus;

/**
 * Planner settings for one solve (opaque).
 */
typedef struct MitConfig MitConfig;

/**
 * A motion-planning problem instance (opaque).
 */
typedef struct MitProblem MitProblem;

/**
 * The result of one solve: solution events, the best path, and counters
 * (opaque).
 */
typedef struct MitSolution MitSolution;

/**
 * One solution discovery during a solve.
 */
typedef struct MitEvent {
  /**
   * Clock reading when the solution was found, in seconds.
   */
  double time_seconds;
  double cost;
  /**
   * True for the first solution of the run, false for improvements.
   */
  bool is_initial;
} MitEvent;

/**
 * Counters accumulated over one solve.
 */
typedef struct MitRunStats {
  /**
   * States added to the planner's graph or trees.
   */
  uint64_t n_samples;
  /**
   * State evaluations spent in full motion validation.
   */
  uint64_t n_full_checks;
  /**
   * State evaluations spent in sparse motion validation.
   */
  uint64_t n_sparse_checks;
  uint64_t n_batches;
  /**
   * Abstract work performed, the basis of the deterministic clock.
   */
  uint64_t work_units;
  /**
   * Final reading of the solve clock, in its mode's seconds.
   */
  double elapsed_seconds;
} MitRunStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version of the planner library as a static nul-terminated string.
 */
const char *mit_version(void);

/**
 * Returns the error message of the most recent failed call on this
 * thread, or null when the last call succeeded. The caller owns the
 * returned string and must release it with [`mit_string_free`].
 */
char *mit_last_error_message(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or an unreleased string obtained from this library.
 */
void mit_string_free(char *s);

/**
 * Parses a problem from its JSON description.
 *
 * On success `*out` holds a new problem that must be released with
 * [`mit_problem_free`].
 *
 * # Safety
 * `json` must be a valid nul-terminated string and `out` a valid pointer.
 */
enum MitStatus mit_problem_from_json(const char *json, struct MitProblem **out);

/**
 * Serializes a problem to JSON with enough digits to round-trip exactly.
 * The caller owns `*out_json` and must release it with [`mit_string_free`].
 *
 * # Safety
 * `problem` must be a live problem handle and `out_json` a valid pointer.
 */
enum MitStatus mit_problem_to_json(const struct MitProblem *problem, char **out_json);

/**
 * Builds a benchmark scenario. `family` is one of `"fg"`, `"rr"`, `"dw"`,
 * or `"ge"`; `dim` must be 2, 4, 8, or 16. The `rr` family draws its
 * obstacles from `seed`; the other families ignore it.
 *
 * # Safety
 * `family` must be a valid nul-terminated string and `out` a valid
 * pointer.
 */
enum MitStatus mit_problem_scenario(const char *family,
                                    size_t dim,
                                    uint64_t seed,
                                    struct MitProblem **out);

/**
 * Dimension of the problem's configuration space, or 0 for null.
 *
 * # Safety
 * `problem` must be null or a live problem handle.
 */
size_t mit_problem_dim(const struct MitProblem *problem);

/**
 * Releases a problem handle. Null is ignored.
 *
 * # Safety
 * `problem` must be null or an unreleased handle from this library.
 */
void mit_problem_free(struct MitProblem *problem);

/**
 * Creates a planner configuration.
 *
 * `variant` selects the planner: `"mitstar"`, `"mitstar-eis"`,
 * `"mitstar-as"`, `"mitstar-sc"`, `"baseline-off"`, or `"rrt-connect"`.
 * `max_time_seconds` is the solve budget on the deterministic virtual
 * clock (see [`mit_config_use_wall_clock`]); it may be infinite if a
 * batch cap is set afterwards. `seed` fixes the random stream: equal
 * seeds give bit-identical runs under the virtual clock.
 *
 * # Safety
 * `variant` must be a valid nul-terminated string and `out` a valid
 * pointer.
 */
enum MitStatus mit_config_new(const char *variant,
                              double max_time_seconds,
                              uint64_t seed,
                              struct MitConfig **out);

/**
 * Sets the number of states sampled per batch. Must be positive.
 *
 * # Safety
 * `config` must be a live configuration handle.
 */
enum MitStatus mit_config_set_batch_size(struct MitConfig *config, size_t batch_size);

/**
 * Caps the number of sampling batches; 0 removes the cap. A cap is
 * required when the time budget is infinite.
 *
 * # Safety
 * `config` must be a live configuration handle.
 */
enum MitStatus mit_config_set_max_batches(struct MitConfig *config, uint64_t max_batches);

/**
 * Switches between the wall clock and the default deterministic virtual
 * clock. Virtual time makes runs with equal seeds bit-identical; wall
 * time makes the budget a real-time limit.
 *
 * # Safety
 * `config` must be a live configuration handle.
 */
enum MitStatus mit_config_use_wall_clock(struct MitConfig *config, bool wall);

/**
 * Releases a configuration handle. Null is ignored.
 *
 * # Safety
 * `config` must be null or an unreleased handle from this library.
 */
void mit_config_free(struct MitConfig *config);

/**
 * Runs the configured planner on a problem until its budget is spent.
 *
 * Succeeds even when no solution was found within the budget; inspect
 * the result with [`mit_solution_waypoint_count`] or
 * [`mit_solution_final_cost`]. On success `*out` must be released with
 * [`mit_solution_free`].
 *
 * # Safety
 * `problem` and `config` must be live handles and `out` a valid pointer.
 */
enum MitStatus mit_solve(const struct MitProblem *problem,
                         const struct MitConfig *config,
                         struct MitSolution **out);

/**
 * Cost of the best solution, or positive infinity when none was found
 * (also for null).
 *
 * # Safety
 * `solution` must be null or a live solution handle.
 */
double mit_solution_final_cost(const struct MitSolution *solution);

/**
 * Number of waypoints on the best path, or 0 when no solution was found.
 *
 * # Safety
 * `solution` must be null or a live solution handle.
 */
size_t mit_solution_waypoint_count(const struct MitSolution *solution);

/**
 * Dimension of the solution's waypoints, or 0 when no solution was found.
 *
 * # Safety
 * `solution` must be null or a live solution handle.
 */
size_t mit_solution_dim(const struct MitSolution *solution);

/**
 * Copies the best path into `buffer` as waypoint-major coordinates, so
 * waypoint `i` occupies `buffer[i * dim .. (i + 1) * dim]`. `capacity`
 * counts doubles and must be at least waypoint count times dimension.
 *
 * # Safety
 * `solution` must be a live solution handle and `buffer` must point to
 * at least `capacity` writable doubles.
 */
enum MitStatus mit_solution_copy_path(const struct MitSolution *solution,
                                      double *buffer,
                                      size_t capacity);

/**
 * Number of solution events (initial discovery plus improvements).
 *
 * # Safety
 * `solution` must be null or a live solution handle.
 */
size_t mit_solution_event_count(const struct MitSolution *solution);

/**
 * Fetches one solution event by index, oldest first.
 *
 * # Safety
 * `solution` must be a live solution handle and `out_event` a valid
 * pointer.
 */
enum MitStatus mit_solution_event(const struct MitSolution *solution,
                                  size_t index,
                                  struct MitEvent *out_event);

/**
 * Copies the solve counters into `out_stats`.
 *
 * # Safety
 * `solution` must be a live solution handle and `out_stats` a valid
 * pointer.
 */
enum MitStatus mit_solution_stats(const struct MitSolution *solution,
                                  struct MitRunStats *out_stats);

/**
 * Releases a solution handle. Null is ignored.
 *
 * # Safety
 * `solution` must be null or an unreleased handle from this library.
 */
void mit_solution_free(struct MitSolution *solution);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MITSTAR_H */
