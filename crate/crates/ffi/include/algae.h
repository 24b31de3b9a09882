#ifndef ALGAE_H
#define ALGAE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AlgaeStatus {
  ALGAE_STATUS_OK = 0,
  ALGAE_STATUS_NULL_POINTER = 1,
  ALGAE_STATUS_INVALID_INPUT = 2,
  ALGAE_STATUS_CONFIG = 3,
  ALGAE_STATUS_DOMAIN = 4,
  ALGAE_STATUS_SUPPORT = 5,
  ALGAE_STATUS_SOLVER_FAILURE = 6,
  ALGAE_STATUS_PARSE = 7,
  ALGAE_STATUS_IO = 8,
  ALGAE_STATUS_BUFFER_SIZE = 9,
  ALGAE_STATUS_PANIC = 10,
} AlgaeStatus;

/**
 * Opaque MDP handle.
 */
typedef struct AlgaeMdp AlgaeMdp;

/**
 * Opaque softmax policy handle.
 */
typedef struct AlgaePolicy AlgaePolicy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *algae_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *algae_version(void);

/**
 * Parses an MDP from its JSON description.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum AlgaeStatus algae_mdp_from_json(const char *json, struct AlgaeMdp **out);

/**
 * Builds the Four Rooms MDP with the default layout and `γ = 0.99`.
 *
 * # Safety
 * `out` must be a writable pointer.
 */
enum AlgaeStatus algae_mdp_four_rooms(double slip, bool goal_reset, struct AlgaeMdp **out);

/**
 * # Safety
 * `mdp` must be a live handle; the output pointers must be writable.
 */
enum AlgaeStatus algae_mdp_shape(const struct AlgaeMdp *mdp,
                                 size_t *num_states,
                                 size_t *num_actions);

/**
 * # Safety
 * `mdp` must be NULL or a handle not freed before.
 */
void algae_mdp_free(struct AlgaeMdp *mdp);

/**
 * Softmax policy from `num_states * num_actions` logits, row-major by state.
 *
 * # Safety
 * `logits` must point to `len` readable doubles; `out` must be writable.
 */
enum AlgaeStatus algae_policy_new(size_t num_states,
                                  size_t num_actions,
                                  const double *logits,
                                  size_t len,
                                  struct AlgaePolicy **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum AlgaeStatus algae_policy_uniform(size_t num_states,
                                      size_t num_actions,
                                      struct AlgaePolicy **out);

/**
 * # Safety
 * `policy` must be NULL or a handle not freed before.
 */
void algae_policy_free(struct AlgaePolicy *policy);

/**
 * Normalized primal and dual returns of `policy`.
 *
 * # Safety
 * Handles must be live; outputs writable.
 */
enum AlgaeStatus algae_returns(const struct AlgaeMdp *mdp,
                               const struct AlgaePolicy *policy,
                               double *primal,
                               double *dual);

/**
 * Normalized discounted visitation `d^π`, flattened `s * A + a`.
 *
 * # Safety
 * Handles must be live; `out` must hold `len` doubles.
 */
enum AlgaeStatus algae_visitation(const struct AlgaeMdp *mdp,
                                  const struct AlgaePolicy *policy,
                                  double *out,
                                  size_t len);

/**
 * `Q_π`, flattened `s * A + a`.
 *
 * # Safety
 * Handles must be live; `out` must hold `len` doubles.
 */
enum AlgaeStatus algae_q_values(const struct AlgaeMdp *mdp,
                                const struct AlgaePolicy *policy,
                                double *out,
                                size_t len);

/**
 * Exact saddle point for the quadratic divergence. `nu_out` and
 * `zeta_out` may be NULL; otherwise each holds `num_pairs` doubles.
 *
 * # Safety
 * Handles must be live; buffers sized as documented.
 */
enum AlgaeStatus algae_solve_quadratic(const struct AlgaeMdp *mdp,
                                       const struct AlgaePolicy *policy,
                                       const double *d_data,
                                       size_t len,
                                       double alpha,
                                       double *nu_out,
                                       double *zeta_out,
                                       double *objective_out);

/**
 * Gradient of the quadratic-divergence objective with respect to the
 * policy logits. `grad_out` holds `num_pairs` doubles; `objective_out`
 * may be NULL.
 *
 * # Safety
 * Handles must be live; buffers sized as documented.
 */
enum AlgaeStatus algae_policy_gradient(const struct AlgaeMdp *mdp,
                                       const struct AlgaePolicy *policy,
                                       const double *d_data,
                                       size_t len,
                                       double alpha,
                                       double *grad_out,
                                       double *objective_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ALGAE_H */
