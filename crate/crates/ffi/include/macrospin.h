#ifndef MACROSPIN_H
#define MACROSPIN_H

/* Generated by cbindgen from crates/ffi/src; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum MsStatus {
  MS_STATUS_OK = 0,
  MS_STATUS_NULL_POINTER = 1,
  MS_STATUS_INVALID_ARGUMENT = 2,
  MS_STATUS_DIMENSION_MISMATCH = 3,
  MS_STATUS_INVALID_STATE = 4,
  MS_STATUS_NON_DIVISOR_SLOT_WIDTH = 5,
  MS_STATUS_PARTITION_MISMATCH = 6,
  MS_STATUS_ZERO_PROBABILITY_BRANCH = 7,
  MS_STATUS_NUMERICAL = 8,
  MS_STATUS_BUFFER_TOO_SMALL = 9,
  MS_STATUS_IO = 10,
  MS_STATUS_PANIC = 11,
} MsStatus;

/**
 * Density matrix handle.
 */
typedef struct MsDensityMatrix MsDensityMatrix;

/**
 * Slot partition handle.
 */
typedef struct MsPartition MsPartition;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ms_version(void);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length excluding the NUL, or
 * 0 when there is no message.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t ms_last_error_message(char *buf, size_t len);

/**
 * The maximally mixed state of spin `two_j / 2`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum MsStatus ms_density_maximally_mixed(uint32_t two_j, struct MsDensityMatrix **out);

/**
 * The spin coherent state pointing at `(theta, phi)`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum MsStatus ms_density_coherent(uint32_t two_j,
                                  double theta,
                                  double phi,
                                  struct MsDensityMatrix **out);

/**
 * # Safety
 * `rho` must be null or a handle from this library not yet freed.
 */
void ms_density_free(struct MsDensityMatrix *rho);

/**
 * Hilbert-space dimension `2j+1`, or 0 for a null handle.
 *
 * # Safety
 * `rho` must be null or a live handle.
 */
size_t ms_density_dim(const struct MsDensityMatrix *rho);

/**
 * Writes `p(m)` for `m = j, ..., -j` into `buf` (`len >= 2j+1`).
 *
 * # Safety
 * `rho` must be a live handle and `buf` must hold `len` doubles.
 */
enum MsStatus ms_outcome_distribution(const struct MsDensityMatrix *rho, double *buf, size_t len);

/**
 * Husimi Q-function at `(theta, phi)`.
 *
 * # Safety
 * `rho` must be a live handle and `out` valid.
 */
enum MsStatus ms_husimi_q(const struct MsDensityMatrix *rho, double theta, double phi, double *out);

/**
 * Slots of width `delta_m`; `strict` rejects widths that do not divide `2j+1`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum MsStatus ms_partition_new(uint32_t two_j,
                               size_t delta_m,
                               bool strict,
                               struct MsPartition **out);

/**
 * # Safety
 * `part` must be null or a handle from this library not yet freed.
 */
void ms_partition_free(struct MsPartition *part);

/**
 * Number of slots, or 0 for a null handle.
 *
 * # Safety
 * `part` must be null or a live handle.
 */
size_t ms_partition_len(const struct MsPartition *part);

/**
 * Slot labels in ascending order.
 *
 * # Safety
 * `part` must be a live handle and `buf` must hold `len` doubles.
 */
enum MsStatus ms_partition_labels(const struct MsPartition *part, double *buf, size_t len);

/**
 * Coarse-grained outcome probabilities in slot order.
 *
 * # Safety
 * Handles must be live and `buf` must hold `len` doubles.
 */
enum MsStatus ms_coarse_probabilities(const struct MsDensityMatrix *rho,
                                      const struct MsPartition *part,
                                      double *buf,
                                      size_t len);

/**
 * Total variation between the coarse quantum distribution and the band
 * quadrature of the Q-function.
 *
 * # Safety
 * Handles must be live and `out` valid.
 */
enum MsStatus ms_quantum_q_band_distance(const struct MsDensityMatrix *rho,
                                         const struct MsPartition *part,
                                         double *out);

/**
 * Probability-weighted Q-function disturbance of a slot measurement.
 *
 * # Safety
 * Handles must be live and `out` valid.
 */
enum MsStatus ms_disturbance_average(const struct MsDensityMatrix *rho,
                                     const struct MsPartition *part,
                                     double *out);

/**
 * Parity two-time correlation for `H = omega J_x` between `t1 <= t2`.
 *
 * # Safety
 * `rho` must be a live handle and `out` valid.
 */
enum MsStatus ms_parity_correlation(const struct MsDensityMatrix *rho,
                                    double omega,
                                    double t1,
                                    double t2,
                                    double *out);

/**
 * `3 sin(x)/x - sin(3x)/(3x)`.
 */
double ms_k_analytic(double x);

/**
 * Exact four-time K for parity measurements on the maximally mixed state
 * at `x = (2j+1) omega dt`.
 *
 * # Safety
 * `out` must be valid.
 */
enum MsStatus ms_k_exact_parity(uint32_t two_j, double x, double *out);

/**
 * Four-time K with the slot-sign observable.
 *
 * # Safety
 * `part` must be a live handle and `out` valid.
 */
enum MsStatus ms_coarse_lg(const struct MsPartition *part, double omega, double dt, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MACROSPIN_H */
