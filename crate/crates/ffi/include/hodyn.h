#ifndef HODYN_H
#define HODYN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  HODYN_STATUS_OK = 0,
  HODYN_STATUS_NULL_POINTER = 1,
  HODYN_STATUS_INVALID_UTF8 = 2,
  HODYN_STATUS_PARSE = 3,
  HODYN_STATUS_VALIDATION = 4,
  HODYN_STATUS_SINGULAR = 5,
  HODYN_STATUS_NOT_KTH_ORDER = 6,
  HODYN_STATUS_NOT_PROJECTABLE = 7,
  HODYN_STATUS_NUMERICAL = 8,
  HODYN_STATUS_BUFFER_TOO_SMALL = 9,
  HODYN_STATUS_WRONG_KIND = 10,
  HODYN_STATUS_PANIC = 11,
} HodynStatus;

typedef enum {
  HODYN_KIND_LAGRANGIAN = 0,
  HODYN_KIND_HAMILTONIAN = 1,
} HodynKind;

/**
 * Opaque handle to a Lagrangian or Hamiltonian system.
 */
typedef struct HodynSystem HodynSystem;

/**
 * Opaque handle to an integrated trajectory.
 */
typedef struct HodynTrajectory HodynTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf`.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes; `needed` must be null or writable.
 */
HodynStatus hodyn_last_error(char *buf, size_t len, size_t *needed);

/**
 * Parses a kth-order Lagrangian in `n` degrees of freedom.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
HodynStatus hodyn_lagrangian_new(const char *text, uint32_t n, uint32_t k, HodynSystem **out);

/**
 * Parses a Hamiltonian on the cotangent bundle of the `(k-1)`-jets.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
HodynStatus hodyn_hamiltonian_new(const char *text, uint32_t n, uint32_t k, HodynSystem **out);

/**
 * # Safety
 * `sys` must be null or a handle from this library, freed at most once.
 */
void hodyn_system_free(HodynSystem *sys);

/**
 * # Safety
 * `sys` must be a live handle; `kind`, `n` and `k` must be null or writable.
 */
HodynStatus hodyn_system_info(const HodynSystem *sys, HodynKind *kind, uint32_t *n, uint32_t *k);

/**
 * The simplified defining function, `L` or `H`.
 *
 * # Safety
 * `sys` must be a live handle; see the module docs for the buffer contract.
 */
HodynStatus hodyn_system_expr(const HodynSystem *sys, char *buf, size_t len, size_t *needed);

/**
 * Euler-Lagrange expression for the 1-based coordinate `i`.
 *
 * # Safety
 * `sys` must be a live handle; see the module docs for the buffer contract.
 */
HodynStatus hodyn_euler_lagrange(const HodynSystem *sys,
                                 uint32_t i,
                                 char *buf,
                                 size_t len,
                                 size_t *needed);

/**
 * Jacobi-Ostrogradsky momentum `p_i^(r)`, `i` 1-based, `r` in `0..k`.
 *
 * # Safety
 * `sys` must be a live handle; see the module docs for the buffer contract.
 */
HodynStatus hodyn_momentum(const HodynSystem *sys,
                           uint32_t i,
                           uint32_t r,
                           char *buf,
                           size_t len,
                           size_t *needed);

/**
 * Canonical Hamiltonian of a regular Lagrangian. Fails with `Numerical`
 * when the Legendre map has no closed-form inverse.
 *
 * # Safety
 * `sys` must be a live handle; `out` must be writable.
 */
HodynStatus hodyn_canonical_hamiltonian(const HodynSystem *sys, HodynSystem **out);

/**
 * Lagrangian of a regular kth-order Hamiltonian.
 *
 * # Safety
 * `sys` must be a live handle; `out` must be writable.
 */
HodynStatus hodyn_reconstruct_lagrangian(const HodynSystem *sys, HodynSystem **out);

/**
 * RK4 from `t0` to `t1` with step `h`.
 *
 * Lagrangian systems take `x0` in jet coordinates `q_(0..2k-1)`, level
 * outer and coordinate inner; Hamiltonian systems take `(q_(0..k-1), p^(0..k-1))`.
 *
 * # Safety
 * `sys` must be a live handle, `x0` valid for `len` doubles, `out` writable.
 */
HodynStatus hodyn_integrate(const HodynSystem *sys,
                            const double *x0,
                            size_t len,
                            double t0,
                            double t1,
                            double h,
                            HodynTrajectory **out);

/**
 * # Safety
 * `traj` must be null or a handle from this library, freed at most once.
 */
void hodyn_trajectory_free(HodynTrajectory *traj);

/**
 * Number of samples, 0 for a null handle.
 *
 * # Safety
 * `traj` must be null or a live handle.
 */
size_t hodyn_trajectory_len(const HodynTrajectory *traj);

/**
 * State dimension, 0 for a null handle.
 *
 * # Safety
 * `traj` must be null or a live handle.
 */
size_t hodyn_trajectory_dim(const HodynTrajectory *traj);

/**
 * Time and state of sample `idx`; `state` must hold `dim` doubles.
 *
 * # Safety
 * `traj` must be a live handle, `time` null or writable, `state` valid for `len` doubles.
 */
HodynStatus hodyn_trajectory_sample(const HodynTrajectory *traj,
                                    size_t idx,
                                    double *time,
                                    double *state,
                                    size_t len);

/**
 * Sets `out` to whether two expressions agree, exactly or on random samples.
 *
 * # Safety
 * `a` and `b` must be NUL-terminated strings; `out` must be writable.
 */
HodynStatus hodyn_equivalent(const char *a, const char *b, bool *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HODYN_H */
