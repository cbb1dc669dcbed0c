#ifndef CROWDSTEP_H
#define CROWDSTEP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum CsStatus {
  CS_STATUS_OK = 0,
  CS_STATUS_NULL_POINTER = 1,
  CS_STATUS_INVALID_UTF8 = 2,
  CS_STATUS_INVALID_CONFIG = 3,
  CS_STATUS_SIMULATION = 4,
  CS_STATUS_BUFFER_TOO_SMALL = 5,
  CS_STATUS_PANIC = 6,
} CsStatus;

/**
 * Opaque simulation handle.
 */
typedef struct CsWorld CsWorld;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses `config_json`, builds its scenario and stores a new handle in
 * `*out`. The handle must be released with `cs_world_free`.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CsStatus cs_world_new(const char *config_json, struct CsWorld **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `world` must come from `cs_world_new` and not have been freed.
 */
void cs_world_free(struct CsWorld *world);

/**
 * Advances the simulation by `ticks` steps.
 *
 * # Safety
 * `world` must be a live handle.
 */
enum CsStatus cs_world_step(struct CsWorld *world, uint64_t ticks);

/**
 * Current tick.
 *
 * # Safety
 * `world` must be a live handle and `out` a valid pointer.
 */
enum CsStatus cs_world_tick(struct CsWorld *world, uint64_t *out);

/**
 * Number of agents still in the simulation.
 *
 * # Safety
 * `world` must be a live handle and `out` a valid pointer.
 */
enum CsStatus cs_world_agent_count(struct CsWorld *world, size_t *out);

/**
 * Copies agent ids and positions in id order: `ids[k]` and
 * `xy[2k], xy[2k+1]`. `capacity` is the number of agents the buffers can
 * hold. `*written` receives the agent count; if it exceeds `capacity`
 * nothing is copied and `CS_STATUS_BUFFER_TOO_SMALL` is returned.
 *
 * # Safety
 * `ids` must hold `capacity` u32 values and `xy` `2·capacity` doubles;
 * either may be null when `capacity` is 0.
 */
enum CsStatus cs_world_positions(struct CsWorld *world,
                                 uint32_t *ids,
                                 double *xy,
                                 size_t capacity,
                                 size_t *written);

/**
 * Smallest `distance − b_ij` over all agent pairs.
 *
 * # Safety
 * `world` must be a live handle and `out` a valid pointer.
 */
enum CsStatus cs_world_min_gap(struct CsWorld *world, double *out);

/**
 * Message of the last failed call on this thread, or null. Valid until
 * the next call into this library on the same thread.
 */
const char *cs_last_error_message(void);

/**
 * Library version, NUL-terminated and static.
 */
const char *cs_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CROWDSTEP_H */
