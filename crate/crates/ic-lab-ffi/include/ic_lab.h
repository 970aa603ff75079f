#ifndef IC_LAB_H
#define IC_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every C-ABI call.
 */
typedef enum IcLabStatus {
  IcLabStatus_Ok = 0,
  IcLabStatus_NullPointer = 1,
  IcLabStatus_InvalidArgument = 2,
  IcLabStatus_InvalidUtf8 = 3,
  IcLabStatus_InternalError = 4,
} IcLabStatus;

/**
 * Opaque handle to a conditional probability table.
 */
typedef struct IcLabBox IcLabBox;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent error on this thread. The pointer is
 * valid until the next library call on the same thread.
 */
const char *ic_lab_last_error(void);

/**
 * Library version as a caller-owned string.
 */
enum IcLabStatus ic_lab_version(char **out);

/**
 * Release a string returned by this library.
 */
void ic_lab_string_free(char *s);

/**
 * The two-party box with perfectly correlated XOR on the input product.
 */
enum IcLabStatus ic_lab_box_pr(struct IcLabBox **out);

/**
 * Two-party box with tunable correlation `e` in [-1, 1].
 */
enum IcLabStatus ic_lab_box_isotropic(double e, struct IcLabBox **out);

/**
 * Sender plus `n` receivers sharing the sender's first data bit.
 */
enum IcLabStatus ic_lab_box_shared_coin(uintptr_t n, struct IcLabBox **out);

/**
 * Signaling probe: `n` receivers each seeing a perfect pairwise box.
 */
enum IcLabStatus ic_lab_box_broadcast_pr(uintptr_t n, struct IcLabBox **out);

/**
 * Two senders and `n` receivers saturating the three-party functional.
 */
enum IcLabStatus ic_lab_box_sb(uintptr_t n, struct IcLabBox **out);

/**
 * Parse a box from its JSON form.
 */
enum IcLabStatus ic_lab_box_from_json(const char *json, struct IcLabBox **out);

/**
 * Serialize a box to JSON; exact round trip.
 */
enum IcLabStatus ic_lab_box_to_json(const struct IcLabBox *handle, char **out);

/**
 * Release a box handle.
 */
void ic_lab_box_free(struct IcLabBox *handle);

/**
 * Worst marginal spread across parties; `passed` is 1 when it is within
 * `tol`.
 */
enum IcLabStatus ic_lab_box_no_signaling(const struct IcLabBox *handle,
                                         double tol,
                                         double *worst_violation,
                                         int32_t *passed);

/**
 * Run the additive decoding protocol for `n` receivers and `k` data bits
 * over the box; the full report comes back as a JSON string.
 */
enum IcLabStatus ic_lab_rac_run_additive(const struct IcLabBox *handle,
                                         uintptr_t receivers,
                                         uintptr_t database_bits,
                                         char **out_json);

/**
 * Split one shared bit of a qubit channel at error rate `qber` into the
 * two receiver quantities.
 */
enum IcLabStatus ic_lab_bb84_split(double qber, double *i1, double *i2);

/**
 * Closed-form window of the k-receiver functional.
 */
enum IcLabStatus ic_lab_ic_bounds(uintptr_t k, double *lower, double *upper);

/**
 * Randomized ratio probe of the channel-reduction lemma; reports the
 * maximum of `ratio / xi^2` over all trials.
 */
enum IcLabStatus ic_lab_es_probe(uint64_t trials, uint64_t seed, double *max_ratio_over_xi2);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IC_LAB_H */
