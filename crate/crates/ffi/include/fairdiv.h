#ifndef FAIRDIV_H
#define FAIRDIV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum {
  FD_STATUS_OK = 0,
  /**
   * The decision procedure found no allocation.
   */
  FD_STATUS_NOT_FOUND = 1,
  FD_STATUS_NULL_POINTER = 2,
  FD_STATUS_INVALID_ARGUMENT = 3,
  FD_STATUS_PARSE_ERROR = 4,
  FD_STATUS_NOT_POSITIVE = 5,
  FD_STATUS_NOT_BINARY = 6,
  FD_STATUS_CAP_EXCEEDED = 7,
  FD_STATUS_STEP_LIMIT = 8,
  FD_STATUS_UNKNOWN_FIXTURE = 9,
  FD_STATUS_INTERNAL = 10,
} FdStatus;

/**
 * An allocation handle, together with the utilities it was computed for.
 */
typedef struct FdAllocation FdAllocation;

/**
 * An instance handle.
 */
typedef struct FdInstance FdInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds an instance from a row-major `n_agents × n_goods` value matrix.
 *
 * # Safety
 * `values` must point to `n_agents * n_goods` readable `u64`s; `out` must be writable.
 */
FdStatus fd_instance_new(size_t n_agents, size_t n_goods, const uint64_t *values, FdInstance **out);

/**
 * Parses an instance in JSON or CSV form.
 *
 * # Safety
 * `text` must be a nul-terminated string; `out` must be writable.
 */
FdStatus fd_instance_parse(const char *text, FdInstance **out);

/**
 * Loads a named fixture instance.
 *
 * # Safety
 * `name` must be a nul-terminated string; `out` must be writable.
 */
FdStatus fd_fixture(const char *name, FdInstance **out);

/**
 * # Safety
 * `instance` must be null or a handle not yet freed.
 */
void fd_instance_free(FdInstance *instance);

/**
 * Number of agents, or 0 for a null handle.
 *
 * # Safety
 * `instance` must be null or a live handle.
 */
size_t fd_instance_n_agents(const FdInstance *instance);

/**
 * Number of goods, or 0 for a null handle.
 *
 * # Safety
 * `instance` must be null or a live handle.
 */
size_t fd_instance_n_goods(const FdInstance *instance);

/**
 * Runs `algorithm` (`leximin_bf`, `mnw_bf`, `alg_eq1_po`, `eq_po_binary`,
 * `nash_binary`). `eps` applies to `alg_eq1_po` only; null means exact.
 * Returns `NotFound` when `eq_po_binary` reports that no allocation exists.
 *
 * # Safety
 * Pointers must be valid; `eps` may be null.
 */
FdStatus fd_solve(const FdInstance *instance,
                  const char *algorithm,
                  const char *eps,
                  FdAllocation **out);

/**
 * Wraps an owner vector (`owners[good] = agent`) as an allocation for `instance`.
 *
 * # Safety
 * `owners` must point to `fd_instance_n_goods(instance)` readable `usize`s.
 */
FdStatus fd_allocation_from_owners(const FdInstance *instance,
                                   const size_t *owners,
                                   FdAllocation **out);

/**
 * # Safety
 * `allocation` must be null or a handle not yet freed.
 */
void fd_allocation_free(FdAllocation *allocation);

/**
 * Copies the owner of each good into `owners[0..len]`; `len` must equal the number of goods.
 *
 * # Safety
 * `owners` must point to `len` writable `usize`s.
 */
FdStatus fd_allocation_owners(const FdAllocation *allocation, size_t *owners, size_t len);

/**
 * Utility of `agent` for its own bundle.
 *
 * # Safety
 * `out` must be writable.
 */
FdStatus fd_allocation_utility(const FdAllocation *allocation, size_t agent, uint64_t *out);

/**
 * Checks one property (`EQ1`, `EFX`, `EPS_EQ1:3/100`, ...).
 *
 * # Safety
 * Pointers must be valid; `holds` must be writable.
 */
FdStatus fd_check(const FdInstance *instance,
                  const FdAllocation *allocation,
                  const char *property,
                  bool *holds);

/**
 * Decides by enumeration whether some allocation satisfies `combo`
 * (`EQ1+EF1+PO`, `EQX,FPO`, ...). `cap` bounds `n^m`; 0 uses the default.
 *
 * # Safety
 * Pointers must be valid; `found` must be writable.
 */
FdStatus fd_exists_combo(const FdInstance *instance, const char *combo, uint64_t cap, bool *found);

/**
 * Message for the last failed call on this thread, or null. Free with `fd_string_free`.
 */
char *fd_last_error_message(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void fd_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FAIRDIV_H */
