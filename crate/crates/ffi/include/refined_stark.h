#ifndef REFINED_STARK_H
#define REFINED_STARK_H

/* Auto-generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum RsStatus {
  /**
   * The call succeeded.
   */
  RS_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  RS_STATUS_NULL_POINTER = 1,
  /**
   * An argument was out of range or otherwise invalid.
   */
  RS_STATUS_INVALID_ARGUMENT = 2,
  /**
   * An internal consistency check failed.
   */
  RS_STATUS_INTERNAL = 3,
  /**
   * Working precision was exhausted.
   */
  RS_STATUS_PRECISION = 4,
  /**
   * A verification step could not be completed.
   */
  RS_STATUS_VERIFICATION = 5,
  /**
   * An I/O or serialization error occurred.
   */
  RS_STATUS_IO = 6,
  /**
   * The library caught a panic; the handle state is still valid.
   */
  RS_STATUS_PANIC = 7,
} RsStatus;

/**
 * Opaque verification-case handle for one (D, n) instance.
 */
typedef struct RsCase RsCase;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread, or NULL if the
 * last call succeeded. The pointer is invalidated by the next library call
 * on the same thread; copy the string if it must outlive that.
 */
const char *rs_last_error_message(void);

/**
 * Release a string returned by this library. NULL is ignored.
 */
void rs_string_free(char *s);

/**
 * Create a case handle for discriminant `d` and modulus `n`. On success the
 * new handle is stored in `*out` and must be released with [`rs_case_free`].
 */
enum RsStatus rs_case_new(uint64_t d, uint64_t n, struct RsCase **out);

/**
 * Release a case handle. NULL is ignored.
 */
void rs_case_free(struct RsCase *case_);

/**
 * The derived comparison modulus m of the case (1 in the degenerate case).
 */
enum RsStatus rs_case_modulus(const struct RsCase *case_, uint64_t *out);

/**
 * Number of split (resp. inert) primes dividing n, written to `nu_plus` and
 * `nu_minus`; either out-pointer may be NULL to skip it.
 */
enum RsStatus rs_case_signature(const struct RsCase *case_, uint64_t *nu_plus, uint64_t *nu_minus);

/**
 * Run the headline class comparison for the case. `mutated` nonzero runs
 * the deliberately wrong-class-number control, whose expected verdict is a
 * failure. The JSON verdict record is stored in `*out_json`.
 */
enum RsStatus rs_case_verify_headline(const struct RsCase *case_,
                                      int32_t mutated,
                                      uintptr_t trials,
                                      uint64_t seed,
                                      uintptr_t precision_bits,
                                      double tolerance,
                                      char **out_json);

/**
 * Full composite verification of one (D, n) case: filtration, auxiliary
 * family certificate, exact norm identity, leading-term identity, descent,
 * and the headline comparison. The JSON report is stored in `*out_json`.
 */
enum RsStatus rs_verify_case(uint64_t d,
                             uint64_t n,
                             uintptr_t trials,
                             uint64_t seed,
                             uintptr_t precision_bits,
                             double tolerance,
                             char **out_json);

/**
 * Numerical rank-1 Stark verification for discriminant `d`, modulus `n`,
 * and the auxiliary prime set `t_set` (length `t_len`).
 */
enum RsStatus rs_verify_stark_rank1(uint64_t d,
                                    uint64_t n,
                                    const uint64_t *t_set,
                                    uintptr_t t_len,
                                    uintptr_t precision_bits,
                                    double tolerance,
                                    char **out_json);

/**
 * Regulator comparison between the base field and the extension for
 * discriminant `d` and modulus `n`; the JSON record includes both sides and
 * the relative error.
 */
enum RsStatus rs_lemma_compute(uint64_t d, uint64_t n, uintptr_t precision_bits, char **out_json);

/**
 * Exact unramified-tower oracle: quadratic field of fundamental discriminant
 * `disc` (negative for the rank-0 branch, positive prime for rank 1), inert
 * primes `qs`, auxiliary set `t_set`, and `trials` residue trials.
 */
enum RsStatus rs_verify_unramified(int64_t disc,
                                   const uint64_t *qs,
                                   uintptr_t qs_len,
                                   const uint64_t *t_set,
                                   uintptr_t t_len,
                                   uintptr_t trials,
                                   char **out_json);

/**
 * Find an auxiliary prime family for `level` with primes below `bound`,
 * returned as a JSON array of {"t": prime, "a": coefficient-as-string}.
 */
enum RsStatus rs_find_t_family(uint64_t level, uint64_t bound, char **out_json);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* REFINED_STARK_H */
