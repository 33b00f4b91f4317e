#ifndef LGPLATE_H
#define LGPLATE_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum LgStatus {
  LG_STATUS_OK = 0,
  LG_STATUS_NULL_POINTER = 1,
  LG_STATUS_INVALID_UTF8 = 2,
  LG_STATUS_CONFIG = 3,
  LG_STATUS_INVALID_ARGUMENT = 4,
  LG_STATUS_NON_CONVERGENCE = 5,
  LG_STATUS_SOLVER_FAILURE = 6,
  LG_STATUS_IO = 7,
  LG_STATUS_BUFFER_TOO_SMALL = 8,
  LG_STATUS_VERIFICATION_FAILED = 9,
  LG_STATUS_PANIC = 10,
  LG_STATUS_INTERNAL = 11,
} LgStatus;

/**
 * Parsed and validated analysis configuration.
 */
typedef struct LgConfig LgConfig;

/**
 * Converged solution with its summary.
 */
typedef struct LgSolution LgSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *lgplate_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *lgplate_version(void);

/**
 * Parse a TOML configuration.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LgStatus lgplate_config_parse(const char *toml, struct LgConfig **out);

/**
 * # Safety
 * `config` must come from [`lgplate_config_parse`] and not be used afterwards. NULL is ignored.
 */
void lgplate_config_free(struct LgConfig *config);

/**
 * Set the shear modulus (MPa) of every interlayer.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum LgStatus lgplate_config_set_interlayer_shear(struct LgConfig *config, double shear);

/**
 * Set the uniform pressure (MPa).
 *
 * # Safety
 * `config` must be a live handle.
 */
enum LgStatus lgplate_config_set_pressure(struct LgConfig *config, double pressure);

/**
 * Resolved configuration (all defaults filled) as TOML; release it with
 * [`lgplate_string_free`].
 *
 * # Safety
 * `config` must be a live handle and `out` a valid pointer.
 */
enum LgStatus lgplate_config_to_toml(const struct LgConfig *config, char **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. NULL is ignored.
 */
void lgplate_string_free(char *s);

/**
 * Solve the configured plate.
 *
 * # Safety
 * `config` must be a live handle and `out` a valid pointer.
 */
enum LgStatus lgplate_solve(const struct LgConfig *config, struct LgSolution **out);

/**
 * # Safety
 * `solution` must come from [`lgplate_solve`] and not be used afterwards. NULL is ignored.
 */
void lgplate_solution_free(struct LgSolution *solution);

/**
 * Number of mesh nodes; 0 for NULL.
 *
 * # Safety
 * `solution` must be a live handle or NULL.
 */
size_t lgplate_solution_n_nodes(const struct LgSolution *solution);

/**
 * Number of layers; 0 for NULL.
 *
 * # Safety
 * `solution` must be a live handle or NULL.
 */
size_t lgplate_solution_n_layers(const struct LgSolution *solution);

/**
 * Deflection of the loaded layer at the plate centre (mm).
 *
 * # Safety
 * `solution` must be a live handle and `out` a valid pointer.
 */
enum LgStatus lgplate_solution_center_deflection(const struct LgSolution *solution, double *out);

/**
 * Newton iterations and final residual of the solve.
 *
 * # Safety
 * `solution` must be a live handle; `iterations` and `eta` valid pointers.
 */
enum LgStatus lgplate_solution_convergence(const struct LgSolution *solution,
                                           size_t *iterations,
                                           double *eta);

/**
 * Copy the nodal deflections of `layer` into `buffer` of length `len`
 * (at least [`lgplate_solution_n_nodes`]).
 *
 * # Safety
 * `solution` must be a live handle and `buffer` valid for `len` writes.
 */
enum LgStatus lgplate_solution_deflection(const struct LgSolution *solution,
                                          size_t layer,
                                          double *buffer,
                                          size_t len);

/**
 * Coordinates `(x, y)` of node `node` in mm.
 *
 * # Safety
 * `solution` must be a live handle; `x` and `y` valid pointers.
 */
enum LgStatus lgplate_solution_node(const struct LgSolution *solution,
                                    size_t node,
                                    double *x,
                                    double *y);

/**
 * Largest `|σ|` over the reported stress fibres (MPa).
 *
 * # Safety
 * `solution` must be a live handle and `out` a valid pointer.
 */
enum LgStatus lgplate_solution_peak_stress(const struct LgSolution *solution, double *out);

/**
 * Run the configured job and write its artifacts under `out_dir`.
 * Returns [`LgStatus::VerificationFailed`] when a check did not pass.
 *
 * # Safety
 * `config` must be a live handle and `out_dir` a NUL-terminated string.
 */
enum LgStatus lgplate_run_job(const struct LgConfig *config, const char *out_dir);

/**
 * Job kind of a configuration: 0 solve, 1 verify, 2 sweep, 3 convergence, 4 efft; -1 for NULL.
 *
 * # Safety
 * `config` must be a live handle or NULL.
 */
int32_t lgplate_config_job(const struct LgConfig *config);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LGPLATE_H */
