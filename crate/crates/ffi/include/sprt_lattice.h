#ifndef SPRT_LATTICE_H
#define SPRT_LATTICE_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SprtColor {
  SPRT_COLOR_WHITE = 0,
  SPRT_COLOR_BLUE = 1,
  SPRT_COLOR_RED = 2,
} SprtColor;

typedef enum SprtProfileField {
  SPRT_PROFILE_FIELD_DELTA_PLUS = 0,
  SPRT_PROFILE_FIELD_DELTA_MINUS = 1,
  SPRT_PROFILE_FIELD_H_PLUS = 2,
  SPRT_PROFILE_FIELD_H_MINUS = 3,
} SprtProfileField;

/**
 * Result code of every fallible call.
 */
typedef enum SprtStatus {
  SPRT_STATUS_OK = 0,
  SPRT_STATUS_NULL_POINTER = 1,
  SPRT_STATUS_INVALID_UTF8 = 2,
  SPRT_STATUS_INVALID_PARAMETER = 3,
  SPRT_STATUS_PARSE = 4,
  SPRT_STATUS_SEAM_VIOLATION = 5,
  SPRT_STATUS_PRECONDITION = 6,
  SPRT_STATUS_POSTCONDITION = 7,
  SPRT_STATUS_BUDGET_EXCEEDED = 8,
  SPRT_STATUS_PANIC = 9,
} SprtStatus;

/**
 * Opaque policy handle.
 */
typedef struct SprtPolicy SprtPolicy;

/**
 * Opaque profile handle.
 */
typedef struct SprtProfile SprtProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread; do not free.
 */
const char *sprt_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void sprt_string_free(char *s);

/**
 * Parses the policy text format.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum SprtStatus sprt_policy_parse(const char *text, struct SprtPolicy **out);

/**
 * The linear policy `P_c` (stop once `|heads - tails| = c`).
 *
 * # Safety
 * `out` must be writable.
 */
enum SprtStatus sprt_policy_linear(uint32_t c, struct SprtPolicy **out);

/**
 * Releases a policy. Null is ignored.
 *
 * # Safety
 * `policy` must come from this library and not have been freed.
 */
void sprt_policy_free(struct SprtPolicy *policy);

/**
 * # Safety
 * `policy` must be a live handle; `out` must be writable.
 */
enum SprtStatus sprt_policy_color_at(const struct SprtPolicy *policy,
                                     size_t h,
                                     size_t t,
                                     enum SprtColor *out);

/**
 * Serializes a policy to the text format. Free the result with
 * [`sprt_string_free`].
 *
 * # Safety
 * `policy` must be a live handle; `out` must be writable.
 */
enum SprtStatus sprt_policy_to_text(const struct SprtPolicy *policy, char **out);

/**
 * Exact profile of `policy` for bias gap `epsilon`.
 *
 * # Safety
 * `policy` must be a live handle, `epsilon` a NUL-terminated string and `out`
 * writable.
 */
enum SprtStatus sprt_profile_exact(const struct SprtPolicy *policy,
                                   const char *epsilon,
                                   struct SprtProfile **out);

/**
 * Releases a profile. Null is ignored.
 *
 * # Safety
 * `profile` must come from this library and not have been freed.
 */
void sprt_profile_free(struct SprtProfile *profile);

/**
 * One profile component as an exact `"num/den"` string.
 *
 * # Safety
 * `profile` must be a live handle; `out` must be writable.
 */
enum SprtStatus sprt_profile_get(const struct SprtProfile *profile,
                                 enum SprtProfileField which,
                                 char **out);

/**
 * One profile component rounded to the nearest double.
 *
 * # Safety
 * `profile` must be a live handle; `out` must be writable.
 */
enum SprtStatus sprt_profile_get_f64(const struct SprtProfile *profile,
                                     enum SprtProfileField which,
                                     double *out);

/**
 * `(delta+ + delta-) + beta (H+ + H-)` as an exact string.
 *
 * # Safety
 * `profile` must be a live handle, `beta` a NUL-terminated string and `out`
 * writable.
 */
enum SprtStatus sprt_bayes_risk(const struct SprtProfile *profile, const char *beta, char **out);

/**
 * Bounds `l_c` and `u_c` of the tradeoffs for which `P_c` is optimal.
 *
 * # Safety
 * `epsilon` must be a NUL-terminated string; both outputs writable.
 */
enum SprtStatus sprt_beta_interval(const char *epsilon,
                                   uint32_t c,
                                   char **lower_out,
                                   char **upper_out);

/**
 * Optimal threshold for `beta`; writes 0 when declaring without tossing is
 * optimal.
 *
 * # Safety
 * `epsilon` and `beta` must be NUL-terminated strings; `out` writable.
 */
enum SprtStatus sprt_choose_c(const char *epsilon, const char *beta, uint32_t *out);

/**
 * Runs the audited transformation to the optimal linear policy and returns
 * it together with its threshold.
 *
 * # Safety
 * `policy` must be a live handle, the rationals NUL-terminated strings and
 * both outputs writable.
 */
enum SprtStatus sprt_linearize(const struct SprtPolicy *policy,
                               const char *epsilon,
                               const char *beta,
                               const char *gamma,
                               struct SprtPolicy **out,
                               uint32_t *threshold_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPRT_LATTICE_H */
