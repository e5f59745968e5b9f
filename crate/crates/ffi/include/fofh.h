#ifndef FOFH_H
#define FOFH_H

#pragma once

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FofhStatus {
  FOFH_STATUS_OK = 0,
  FOFH_STATUS_NULL_POINTER = 1,
  FOFH_STATUS_INVALID_ARGUMENT = 2,
  FOFH_STATUS_PARSE = 3,
  FOFH_STATUS_TRUNCATION = 4,
  FOFH_STATUS_NUMERIC = 5,
  FOFH_STATUS_BUFFER_TOO_SMALL = 6,
  FOFH_STATUS_PANIC = 7,
} FofhStatus;

typedef enum FofhEnergyConvention {
  FOFH_ENERGY_CONVENTION_CLASSICAL = 0,
  FOFH_ENERGY_CONVENTION_QUANTUM_MEAN = 1,
} FofhEnergyConvention;

/**
 * A function `f` of the oscillator Hamiltonian.
 */
typedef struct FofhHamiltonian FofhHamiltonian;

/**
 * A truncated Fock-space state.
 */
typedef struct FofhState FofhState;

typedef struct FofhComplex {
  double re;
  double im;
} FofhComplex;

/**
 * Moments of `X = (a + a^dag)/sqrt 2`, `P` and `H0`.
 */
typedef struct FofhObservables {
  double mean_x;
  double mean_p;
  double var_x;
  double var_p;
  double mean_h0;
  double var_h0;
} FofhObservables;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next `fofh_*` call on the same thread.
 */
const char *fofh_last_error_message(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *fofh_version(void);

/**
 * Resolves a builtin name (`id`, `er`, `kerr:chi=0.3`, ...) or parses an
 * expression in `x`.
 *
 * # Safety
 * `spec` must be a nul-terminated string; `out` must be writable.
 */
enum FofhStatus fofh_hamiltonian_new(const char *spec, struct FofhHamiltonian **out);

/**
 * # Safety
 * `h` must come from `fofh_hamiltonian_new` and not be freed twice.
 */
void fofh_hamiltonian_free(struct FofhHamiltonian *h);

/**
 * `f(x)`.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum FofhStatus fofh_hamiltonian_eval(const struct FofhHamiltonian *h, double x, double *out);

/**
 * `f'(x)`.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum FofhStatus fofh_hamiltonian_deriv(const struct FofhHamiltonian *h, double x, double *out);

/**
 * Classical phase point `z0` evolved for time `t` under `f`.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum FofhStatus fofh_classical_evolve(const struct FofhHamiltonian *h,
                                      struct FofhComplex z0,
                                      double t,
                                      struct FofhComplex *out);

/**
 * Coherent state `|alpha>`. `nmax = 0` selects the default truncation;
 * a smaller-than-default `nmax` is refused unless `force` is non-zero.
 *
 * # Safety
 * `out` must be writable.
 */
enum FofhStatus fofh_coherent_state(struct FofhComplex alpha,
                                    size_t nmax,
                                    bool force,
                                    struct FofhState **out);

/**
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void fofh_state_free(struct FofhState *s);

/**
 * Number of stored amplitudes, `nmax + 1`; 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
size_t fofh_state_len(const struct FofhState *s);

/**
 * Copies the amplitudes into `buf`, which must hold `fofh_state_len(s)`
 * entries.
 *
 * # Safety
 * `buf` must point to `cap` writable elements.
 */
enum FofhStatus fofh_state_amplitudes(const struct FofhState *s,
                                      struct FofhComplex *buf,
                                      size_t cap);

/**
 * Probability mass dropped by the truncation.
 *
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum FofhStatus fofh_state_tail_bound(const struct FofhState *s, double *out);

/**
 * `exp(-i t f(H0)) s` as a new handle.
 *
 * # Safety
 * `s` and `h` must be live handles; `out` must be writable.
 */
enum FofhStatus fofh_state_evolve(const struct FofhState *s,
                                  const struct FofhHamiltonian *h,
                                  double t,
                                  struct FofhState **out);

/**
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum FofhStatus fofh_state_expectations(const struct FofhState *s, struct FofhObservables *out);

/**
 * `|<s| exp(-i t f(H0)) |s>|`.
 *
 * # Safety
 * `s` and `h` must be live handles; `out` must be writable.
 */
enum FofhStatus fofh_autocorrelation(const struct FofhState *s,
                                     const struct FofhHamiltonian *h,
                                     double t,
                                     double *out);

/**
 * `1 - |<alpha_cl(t)| exp(-i t f(H0)) |alpha0>|` at the default truncation.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum FofhStatus fofh_coherence_defect(struct FofhComplex alpha0,
                                      const struct FofhHamiltonian *h,
                                      double t,
                                      enum FofhEnergyConvention convention,
                                      double *out);

/**
 * `(f(E_n) - f(E_m)) / f'(r^2/2)`.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum FofhStatus fofh_branch_ratio(const struct FofhHamiltonian *h,
                                  size_t n,
                                  size_t m,
                                  double r,
                                  double *out);

/**
 * Einstein-Rosen winding residual: distance of the phase to `2 pi Z`.
 *
 * # Safety
 * `out` must be writable.
 */
enum FofhStatus fofh_er_residual(size_t n, size_t m, int64_t k, double r, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FOFH_H */
