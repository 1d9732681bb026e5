#ifndef CHRONOSCOPE_H
#define CHRONOSCOPE_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ChronoStatus {
  CHRONO_STATUS_OK = 0,
  CHRONO_STATUS_NULL_POINTER = 1,
  CHRONO_STATUS_INVALID_ARGUMENT = 2,
  CHRONO_STATUS_SITE_OUT_OF_RANGE = 3,
  CHRONO_STATUS_DIMENSION_MISMATCH = 4,
  CHRONO_STATUS_NUMERICAL = 5,
  CHRONO_STATUS_CAPACITY = 6,
  CHRONO_STATUS_CODESPACE = 7,
  CHRONO_STATUS_PANIC = 8,
} ChronoStatus;

typedef struct ChronoField ChronoField;

typedef struct ChronoHamiltonian ChronoHamiltonian;

typedef struct ChronoState ChronoState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *chrono_last_error(void);

void chrono_clear_error(void);

/**
 * Static NUL-terminated version string.
 */
const char *chrono_version(void);

/**
 * Product state from a label over `0 1 + - r`, site 0 first.
 *
 * # Safety
 * `label` must be a NUL-terminated string; `out` must be writable.
 */
enum ChronoStatus chrono_state_from_label(const char *label, struct ChronoState **out);

/**
 * Haar-random state, reproducible for a given seed.
 *
 * # Safety
 * `out` must be writable.
 */
enum ChronoStatus chrono_state_random(size_t n_qubits, uint64_t seed, struct ChronoState **out);

/**
 * State from `2^n` split amplitudes. Must be normalized.
 *
 * # Safety
 * `re` and `im` must each point to `len` doubles; `out` must be writable.
 */
enum ChronoStatus chrono_state_from_amplitudes(size_t n_qubits,
                                               const double *re,
                                               const double *im,
                                               size_t len,
                                               struct ChronoState **out);

/**
 * # Safety
 * `state` must be null or a handle not yet freed.
 */
void chrono_state_free(struct ChronoState *state);

/**
 * Number of qubits, or 0 for null.
 *
 * # Safety
 * `state` must be null or a live handle.
 */
size_t chrono_state_n_qubits(const struct ChronoState *state);

/**
 * Copies the amplitudes into `re`/`im`, which must hold `2^n` entries.
 *
 * # Safety
 * `re` and `im` must each be writable for `len` doubles.
 */
enum ChronoStatus chrono_state_amplitudes(const struct ChronoState *state,
                                          double *re,
                                          double *im,
                                          size_t len);

/**
 * # Safety
 * `out` must be writable.
 */
enum ChronoStatus chrono_hamiltonian_ising(size_t n_qubits,
                                           double j,
                                           double hx,
                                           double hz,
                                           struct ChronoHamiltonian **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum ChronoStatus chrono_hamiltonian_pxp(size_t n_qubits, struct ChronoHamiltonian **out);

/**
 * Sum of `coeffs[k] * strings[k]`, each string a Pauli word such as `"XZI"`.
 *
 * # Safety
 * `coeffs` and `strings` must each hold `len` entries of the stated type.
 */
enum ChronoStatus chrono_hamiltonian_from_terms(size_t n_qubits,
                                                const double *coeffs,
                                                const char *const *strings,
                                                size_t len,
                                                struct ChronoHamiltonian **out);

/**
 * # Safety
 * `h` must be null or a handle not yet freed.
 */
void chrono_hamiltonian_free(struct ChronoHamiltonian *h);

/**
 * New state `exp(-iHt)|state>`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum ChronoStatus chrono_evolve(const struct ChronoState *state,
                                const struct ChronoHamiltonian *h,
                                double t,
                                double tol,
                                struct ChronoState **out);

/**
 * Exact influence of `source` at time 0 on `target` at time `tau`.
 *
 * # Safety
 * Handles must be live; `value` must be writable.
 */
enum ChronoStatus chrono_ci_exact(const struct ChronoState *state,
                                  const struct ChronoHamiltonian *h,
                                  size_t source,
                                  size_t target,
                                  double tau,
                                  double tol,
                                  double *value);

/**
 * Sampled influence with its standard error.
 *
 * # Safety
 * Handles must be live; `value` and `stderr` must be writable.
 */
enum ChronoStatus chrono_ci_monte_carlo(const struct ChronoState *state,
                                        const struct ChronoHamiltonian *h,
                                        size_t source,
                                        size_t target,
                                        double tau,
                                        size_t n_samples,
                                        uint64_t seed,
                                        double *value,
                                        double *stderr);

/**
 * Arrow-of-time field on `n_steps + 1` slices spaced by `dt`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum ChronoStatus chrono_aot_field(const struct ChronoState *state,
                                   const struct ChronoHamiltonian *h,
                                   double dt,
                                   size_t n_steps,
                                   double tol,
                                   struct ChronoField **out);

/**
 * # Safety
 * `field` must be a live handle; outputs must be writable.
 */
enum ChronoStatus chrono_field_shape(const struct ChronoField *field,
                                     size_t *n_slices,
                                     size_t *n_sites);

/**
 * Field vector at slice `t`, site `x` (summed over one step, not divided
 * by `dt`), with the von Neumann entropy of that site.
 *
 * # Safety
 * `field` must be a live handle; outputs must be writable.
 */
enum ChronoStatus chrono_field_get(const struct ChronoField *field,
                                   size_t t,
                                   size_t x,
                                   double *v_t,
                                   double *v_x,
                                   double *entropy);

/**
 * # Safety
 * `field` must be null or a handle not yet freed.
 */
void chrono_field_free(struct ChronoField *field);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHRONOSCOPE_H */
