#ifndef NPGAP_H
#define NPGAP_H

/* Generated by cbindgen from the npgap-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes mirroring the CLI exit-code convention.
 */
typedef enum NpgapStatus {
  NpgapStatus_Ok = 0,
  /**
   * Null pointer, bad UTF-8, or out-of-range argument.
   */
  NpgapStatus_InvalidArgument = 1,
  NpgapStatus_ConfigError = 2,
  NpgapStatus_NumericalError = 3,
  NpgapStatus_IoError = 4,
  /**
   * A panic was caught at the boundary.
   */
  NpgapStatus_Internal = 5,
} NpgapStatus;

/**
 * Opaque parsed configuration.
 */
typedef struct NpgapConfig NpgapConfig;

/**
 * Opaque sweep result: rows in descending gap order.
 */
typedef struct NpgapSweep NpgapSweep;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *npgap_version(void);

/**
 * Copies the thread-local last error message into `buf` (truncating) and
 * returns the full message length in bytes, excluding the terminator.
 *
 * # Safety
 * `buf` must point to at least `cap` writable bytes (or be null).
 */
uintptr_t npgap_last_error(char *buf, uintptr_t cap);

/**
 * Parses a TOML experiment configuration.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid out-pointer.
 */
enum NpgapStatus npgap_config_parse(const char *text, struct NpgapConfig **out);

/**
 * # Safety
 * `cfg` must be null or a pointer from [`npgap_config_parse`], not yet freed.
 */
void npgap_config_free(struct NpgapConfig *cfg);

/**
 * Runs the configured sweep. Gap widths whose pipeline fails are skipped
 * and counted in [`npgap_sweep_failure_count`].
 *
 * # Safety
 * `cfg` must come from [`npgap_config_parse`]; `out` must be valid.
 */
enum NpgapStatus npgap_sweep_run(const struct NpgapConfig *cfg, struct NpgapSweep **out);

/**
 * # Safety
 * `sweep` must be null or a pointer from [`npgap_sweep_run`], not yet freed.
 */
void npgap_sweep_free(struct NpgapSweep *sweep);

/**
 * # Safety
 * `sweep` must be null or a pointer from [`npgap_sweep_run`].
 */
uintptr_t npgap_sweep_row_count(const struct NpgapSweep *sweep);

/**
 * # Safety
 * `sweep` must be null or a pointer from [`npgap_sweep_run`].
 */
uintptr_t npgap_sweep_failure_count(const struct NpgapSweep *sweep);

/**
 * Fetches one named column value from a row; column names match the CSV
 * header (`eps`, `c_eps`, `max_gap_grad_u`, ...).
 *
 * # Safety
 * `sweep` must come from [`npgap_sweep_run`]; `column` must be
 * NUL-terminated; `out` must be a valid out-pointer.
 */
enum NpgapStatus npgap_sweep_value(const struct NpgapSweep *sweep,
                                   uintptr_t row,
                                   const char *column,
                                   double *out);

/**
 * Renders the sweep as CSV; free the returned string with
 * [`npgap_string_free`].
 *
 * # Safety
 * `sweep` must come from [`npgap_sweep_run`] (or be null).
 */
char *npgap_sweep_csv(const struct NpgapSweep *sweep);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void npgap_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NPGAP_H */
