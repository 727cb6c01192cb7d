/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef GSM_THRESHOLD_H
#define GSM_THRESHOLD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define GSM_OK 0

#define GSM_ERR_VALIDATION 1

#define GSM_ERR_RUNTIME 2

#define GSM_ERR_IO 3

#define GSM_ERR_NULL_POINTER 4

#define GSM_ERR_PANIC 5

#define GSM_ARCH_MINIMAL 0

#define GSM_ARCH_CYCLIC 1

#define GSM_PROTOCOL_STATIC 0

#define GSM_PROTOCOL_ACTIVE 1

/**
 * Use the architecture's preferred convention.
 */
#define GSM_CONVENTION_DEFAULT 0

#define GSM_CONVENTION_HADAMARD 1

#define GSM_CONVENTION_SHOR 2

#define GSM_CORRELATION_INDEPENDENT 0

#define GSM_CORRELATION_PER_BSM 1

/**
 * Primal and dual syndrome graphs of one code distance.
 */
typedef struct GsmGraphs GsmGraphs;

/**
 * Encoded-BSM scheme of one fusion network.
 */
typedef struct {
  /**
   * `GSM_ARCH_*`.
   */
  uint32_t architecture;
  /**
   * `GSM_PROTOCOL_*`.
   */
  uint32_t protocol;
  uint32_t n;
  uint32_t m;
  /**
   * Feed-forward depth; must be 0 for the static protocol.
   */
  uint32_t j;
  /**
   * `GSM_CONVENTION_*`.
   */
  uint32_t convention;
} GsmScheme;

typedef struct {
  double p_xx;
  double p_zz;
  double p_joint;
} GsmBsmProbs;

typedef struct {
  double p_erase_x;
  double p_erase_zz;
} GsmErasureProbs;

typedef struct {
  uint64_t samples;
  uint64_t failures;
  uint64_t primal_failures;
  uint64_t dual_failures;
  double rate;
  double ci_low;
  double ci_high;
} GsmBatchResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or an empty string.
 * The pointer stays valid until the next call into this library on the
 * same thread.
 */
const char *gsm_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gsm_version(void);

/**
 * Outcome probabilities of one encoded BSM at loss rate `eta`.
 *
 * # Safety
 * `scheme` and `out` must be valid pointers or null.
 */
int32_t gsm_bsm_probs(const GsmScheme *scheme, double eta, GsmBsmProbs *out);

/**
 * Erasure probabilities of a `k`-qubit GSM built from the scheme's BSMs.
 *
 * # Safety
 * `scheme` and `out` must be valid pointers or null.
 */
int32_t gsm_erasure_probs(const GsmScheme *scheme, uint32_t k, double eta, GsmErasureProbs *out);

/**
 * Probability that a `k`-qubit GSM yields its full logical outcome.
 *
 * # Safety
 * `scheme` and `out` must be valid pointers or null.
 */
int32_t gsm_efficiency(const GsmScheme *scheme, uint32_t k, double eta, double *out);

/**
 * Photons in one encoded two-qubit resource state.
 */
uint32_t gsm_photons_per_resource_state(uint32_t architecture_code, uint32_t n, uint32_t m);

/**
 * Builds the syndrome graphs of an odd distance `d >= 3`. On success
 * `*out` receives a handle to release with `gsm_graphs_free`.
 *
 * # Safety
 * `out` must be a valid pointer or null.
 */
int32_t gsm_graphs_new(uint32_t d, uint32_t architecture_code, GsmGraphs **out);

/**
 * Releases a handle from `gsm_graphs_new`. Null is ignored.
 *
 * # Safety
 * `graphs` must come from `gsm_graphs_new` and not be freed twice.
 */
void gsm_graphs_free(GsmGraphs *graphs);

/**
 * Edge counts of the primal and dual graphs.
 *
 * # Safety
 * All pointers must be valid or null.
 */
int32_t gsm_graphs_edge_counts(const GsmGraphs *graphs, size_t *primal, size_t *dual);

/**
 * Monte-Carlo logical error rate of the graphs under the scheme's
 * erasures at loss rate `eta`. Deterministic in `seed`.
 *
 * # Safety
 * All pointers must be valid or null.
 */
int32_t gsm_run_batch(const GsmGraphs *graphs,
                      const GsmScheme *scheme,
                      double eta,
                      uint32_t correlation_code,
                      uint64_t samples,
                      uint64_t seed,
                      GsmBatchResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GSM_THRESHOLD_H */
