#ifndef MIRATE_H
#define MIRATE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MirateStatus {
  MIRATE_STATUS_OK = 0,
  MIRATE_STATUS_NULL_POINTER = 1,
  /**
   * Malformed input: bad distribution, out-of-range symbol, too little data.
   */
  MIRATE_STATUS_INVALID_INPUT = 2,
  /**
   * Mathematical precondition failed (no unique stationary distribution, non-Markov marginal).
   */
  MIRATE_STATUS_PRECONDITION = 3,
  MIRATE_STATUS_NUMERIC = 4,
  /**
   * A Rust panic was caught at the boundary.
   */
  MIRATE_STATUS_INTERNAL = 5,
} MirateStatus;

typedef enum MirateMethod {
  MIRATE_METHOD_EXACT = 0,
  MIRATE_METHOD_BOUNDED = 1,
  MIRATE_METHOD_ESTIMATED = 2,
} MirateMethod;

/**
 * Opaque hidden-Markov pair.
 */
typedef struct MirateHmm MirateHmm;

/**
 * Opaque jointly-Markov pair.
 */
typedef struct MirateJointPair MirateJointPair;

/**
 * Rates in bits per step. The output entropy-rate bounds are NaN unless `method` is bounded.
 */
typedef struct MirateRateReport {
  double entropy_rate_x;
  double entropy_rate_y;
  double entropy_rate_xy;
  double mir;
  double amir;
  double mir_gap_terms;
  double tolerance;
  enum MirateMethod method;
  bool converged;
  double entropy_rate_y_lower;
  double entropy_rate_y_upper;
} MirateRateReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the next call on this thread.
 */
const char *mirate_last_error_message(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *mirate_version(void);

/**
 * Creates a hidden pair from an `x_states x x_states` transition matrix and an
 * `x_states x y_states` emission matrix.
 *
 * # Safety
 * `transition` and `emission` must point to that many doubles; `out` must be writable.
 */
enum MirateStatus mirate_hmm_new(const double *transition,
                                 size_t x_states,
                                 const double *emission,
                                 size_t y_states,
                                 struct MirateHmm **out);

/**
 * # Safety
 * `model` must come from [`mirate_hmm_new`] and not be used afterwards. Null is ignored.
 */
void mirate_hmm_free(struct MirateHmm *model);

/**
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum MirateStatus mirate_hmm_exact_amir(const struct MirateHmm *model, double *out);

/**
 * MIR with the output entropy rate bracketed to within `gap_tolerance`.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum MirateStatus mirate_hmm_exact_rates(const struct MirateHmm *model,
                                         double gap_tolerance,
                                         struct MirateRateReport *out);

/**
 * Writes `n` stationary samples into `x_out` and `y_out`.
 *
 * # Safety
 * `model` must be a live handle; `x_out` and `y_out` must hold `n` elements.
 */
enum MirateStatus mirate_hmm_sample(const struct MirateHmm *model,
                                    size_t n,
                                    uint64_t seed,
                                    uint32_t *x_out,
                                    uint32_t *y_out);

/**
 * Creates a jointly-Markov pair over states `x * y_states + y` from a square
 * `(x_states * y_states)` transition matrix.
 *
 * # Safety
 * `transition` must point to that many doubles; `out` must be writable.
 */
enum MirateStatus mirate_joint_pair_new(size_t x_states,
                                        size_t y_states,
                                        const double *transition,
                                        struct MirateJointPair **out);

/**
 * # Safety
 * `pair` must come from [`mirate_joint_pair_new`] and not be used afterwards. Null is ignored.
 */
void mirate_joint_pair_free(struct MirateJointPair *pair);

/**
 * # Safety
 * `pair` must be a live handle; `out` must be writable.
 */
enum MirateStatus mirate_joint_pair_exact_amir(const struct MirateJointPair *pair, double *out);

/**
 * Exact rates; fails with `MIRATE_STATUS_PRECONDITION` when a marginal is not Markov.
 *
 * # Safety
 * `pair` must be a live handle; `out` must be writable.
 */
enum MirateStatus mirate_joint_pair_exact_rates(const struct MirateJointPair *pair,
                                                struct MirateRateReport *out);

/**
 * # Safety
 * `pair` must be a live handle; `x_out` and `y_out` must hold `n` elements.
 */
enum MirateStatus mirate_joint_pair_sample(const struct MirateJointPair *pair,
                                           size_t n,
                                           uint64_t seed,
                                           uint32_t *x_out,
                                           uint32_t *y_out);

/**
 * Plug-in AMIR estimate from one paired symbol sequence with history depth `memory`.
 *
 * # Safety
 * `x` and `y` must hold `n` elements; `out` must be writable.
 */
enum MirateStatus mirate_estimate_amir(const uint32_t *x,
                                       size_t x_states,
                                       const uint32_t *y,
                                       size_t y_states,
                                       size_t n,
                                       size_t memory,
                                       double *out);

/**
 * kNN (KSG) mutual information estimate of i.i.d. real pairs, in bits.
 *
 * # Safety
 * `x` and `y` must hold `n` elements; `out` must be writable.
 */
enum MirateStatus mirate_estimate_mi_knn(const double *x,
                                         const double *y,
                                         size_t n,
                                         size_t k,
                                         double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MIRATE_H */
