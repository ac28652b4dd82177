#ifndef EFFENT_H
#define EFFENT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every FFI entry point.
 */
typedef enum EffentStatus {
  /**
   * Success.
   */
  EffentStatus_Ok = 0,
  /**
   * A required pointer argument was null.
   */
  EffentStatus_NullPointer = 1,
  /**
   * Input failed validation (bad JSON, non-CPTP channel, invalid state...).
   */
  EffentStatus_InvalidInput = 2,
  /**
   * A numerical procedure failed to reach its guaranteed accuracy.
   */
  EffentStatus_Numerical = 3,
} EffentStatus;

/**
 * Opaque handle wrapping a quantum channel in Kraus form.
 */
typedef struct EffentChannel EffentChannel;

/**
 * Opaque handle wrapping a (possibly multipartite) density matrix.
 */
typedef struct EffentState EffentState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the error message of the most recent failing call on this thread,
 * or null if the most recent call succeeded. The pointer stays valid until
 * the next FFI call on the same thread.
 */
const char *effent_last_error_message(void);

/**
 * Parses a channel from a spec string (`identity:d`, `amplitude-damping:g`,
 * `phase-damping:l`, `depolarizing:p`, `ssr`, `bec:<dist>,<theta>`, or a
 * path to a channel JSON file) and writes a new handle to `out`.
 *
 * # Safety
 * `spec` must be a valid NUL-terminated C string; `out` must be a valid
 * pointer to writable memory.
 */
enum EffentStatus effent_channel_parse(const char *spec, double tol, struct EffentChannel **out);

/**
 * Parses a channel from its JSON representation
 * (`{"d_in", "d_out", "kraus": [...], "cptp"}`).
 *
 * # Safety
 * `json` must be a valid NUL-terminated C string; `out` must be writable.
 */
enum EffentStatus effent_channel_from_json(const char *json,
                                           double tol,
                                           struct EffentChannel **out);

/**
 * Frees a channel handle. Passing null is a no-op.
 *
 * # Safety
 * `handle` must be null or a pointer previously returned by a channel
 * constructor, and must not be used afterwards.
 */
void effent_channel_free(struct EffentChannel *handle);

/**
 * Parses a density matrix from its JSON representation
 * (`{"rows", "cols", "data": [[re, im], ...], "dims": [...]}`).
 *
 * # Safety
 * `json` must be a valid NUL-terminated C string; `out` must be writable.
 */
enum EffentStatus effent_state_from_json(const char *json, double tol, struct EffentState **out);

/**
 * Frees a state handle. Passing null is a no-op.
 *
 * # Safety
 * `handle` must be null or a pointer previously returned by a state
 * constructor, and must not be used afterwards.
 */
void effent_state_free(struct EffentState *handle);

/**
 * Computes the quality factor Q of a channel acting on dimension `d` and
 * writes it to `out`.
 *
 * # Safety
 * `channel` must be a live channel handle; `out` must be writable.
 */
enum EffentStatus effent_quality_factor(const struct EffentChannel *channel,
                                        uintptr_t d,
                                        uint64_t seed,
                                        double *out);

/**
 * Computes the Wootters concurrence of a two-qubit state.
 *
 * # Safety
 * `state` must be a live state handle; `out` must be writable.
 */
enum EffentStatus effent_concurrence(const struct EffentState *state, double *out);

/**
 * Computes the effective G-concurrence of a bipartite state with equal local
 * dimensions under channels on each share. Writes the value to `out` and
 * whether it is exact (1) or an upper bound (0) to `out_exact`.
 *
 * # Safety
 * `state`, `channel_a` and `channel_b` must be live handles; `out` and
 * `out_exact` must be writable.
 */
enum EffentStatus effent_effective_g_concurrence(const struct EffentState *state,
                                                 const struct EffentChannel *channel_a,
                                                 const struct EffentChannel *channel_b,
                                                 uint64_t seed,
                                                 double *out,
                                                 int *out_exact);

/**
 * Computes the complex dephasing factor g of a phase distribution given as a
 * spec string (`uniform`, `delta:p`, `wrapped-normal:m,s`, `double-rect:w,d`,
 * `delta-mixture:p1,w1;p2,w2;...`). Writes real and imaginary parts.
 *
 * # Safety
 * `dist` must be a valid NUL-terminated C string; `out_re` and `out_im` must
 * be writable.
 */
enum EffentStatus effent_bec_g_factor(const char *dist, double *out_re, double *out_im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EFFENT_H */
