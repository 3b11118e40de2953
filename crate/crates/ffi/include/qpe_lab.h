#ifndef QPE_LAB_H
#define QPE_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define QPE_CHANNEL_BITFLIP 0

#define QPE_CHANNEL_PHASEFLIP 1

#define QPE_CHANNEL_BITPHASEFLIP 2

#define QPE_CHANNEL_DEPOLARIZING 3

#define QPE_TWO_QUBIT_NOISE_BOTH 0

#define QPE_TWO_QUBIT_NOISE_TARGET 1

#define QPE_TWO_QUBIT_NOISE_NONE 2

typedef enum QpeStatus {
  QPE_STATUS_OK = 0,
  QPE_STATUS_NULL_POINTER = 1,
  QPE_STATUS_INVALID_ARGUMENT = 2,
  QPE_STATUS_SIMULATION = 3,
  QPE_STATUS_FIT = 4,
  QPE_STATUS_BUFFER_TOO_SMALL = 5,
  QPE_STATUS_PANIC = 6,
} QpeStatus;

/**
 * Opaque circuit handle.
 */
typedef struct QpeCircuit QpeCircuit;

/**
 * Opaque outcome distribution handle.
 */
typedef struct QpeDistribution QpeDistribution;

typedef struct QpeStats {
  double theta_bar;
  double delta_theta;
} QpeStats;

typedef struct QpeFit {
  double k1;
  double k2;
  double k3;
  double r_squared;
  double window_lo;
  double window_hi;
  uint32_t iterations;
  bool converged;
} QpeFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or an empty string.
 * The pointer stays valid until the next library call on the same thread.
 */
const char *qpe_last_error_message(void);

/**
 * Builds the phase-estimation circuit for `n` estimation qubits and phase
 * `theta`, optionally rewritten into the {I, X, SX, Rz, CX} basis.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum QpeStatus qpe_circuit_build(uint32_t n,
                                 double theta,
                                 bool transpiled,
                                 struct QpeCircuit **out);

/**
 * # Safety
 * `circuit` must be NULL or a handle from [`qpe_circuit_build`] not yet freed.
 */
void qpe_circuit_free(struct QpeCircuit *circuit);

/**
 * # Safety
 * `circuit` must be a live handle; `out` must be writable.
 */
enum QpeStatus qpe_circuit_width(const struct QpeCircuit *circuit, size_t *out);

/**
 * # Safety
 * `circuit` must be a live handle; `out` must be writable.
 */
enum QpeStatus qpe_circuit_num_ops(const struct QpeCircuit *circuit, size_t *out);

/**
 * Serializes the circuit to its text form. Release the string with
 * [`qpe_string_free`].
 *
 * # Safety
 * `circuit` must be a live handle; `out` must be writable.
 */
enum QpeStatus qpe_circuit_to_text(const struct QpeCircuit *circuit, char **out);

/**
 * Parses a circuit from its text form.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum QpeStatus qpe_circuit_parse(const char *text, struct QpeCircuit **out);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library not yet freed.
 */
void qpe_string_free(char *s);

/**
 * Exact density-matrix simulation of the noisy phase-estimation circuit.
 *
 * # Safety
 * `out` must be writable.
 */
enum QpeStatus qpe_simulate_exact(uint32_t n,
                                  double theta,
                                  uint32_t channel,
                                  double p,
                                  uint32_t two_qubit_noise,
                                  struct QpeDistribution **out);

/**
 * Sampled simulation with `shots` seeded trajectories.
 *
 * # Safety
 * `out` must be writable.
 */
enum QpeStatus qpe_simulate_sampled(uint32_t n,
                                    double theta,
                                    uint32_t channel,
                                    double p,
                                    uint32_t two_qubit_noise,
                                    uint64_t shots,
                                    uint64_t seed,
                                    struct QpeDistribution **out);

/**
 * Number of outcomes, 2^n.
 *
 * # Safety
 * `dist` must be a live handle; `out` must be writable.
 */
enum QpeStatus qpe_distribution_len(const struct QpeDistribution *dist, size_t *out);

/**
 * Copies the outcome probabilities into `buf`, which holds `len` doubles.
 *
 * # Safety
 * `dist` must be a live handle; `buf` must point to `len` writable doubles.
 */
enum QpeStatus qpe_distribution_probs(const struct QpeDistribution *dist, double *buf, size_t len);

/**
 * # Safety
 * `dist` must be a live handle; `out` must be writable.
 */
enum QpeStatus qpe_distribution_stats(const struct QpeDistribution *dist, struct QpeStats *out);

/**
 * # Safety
 * `dist` must be NULL or a live handle.
 */
void qpe_distribution_free(struct QpeDistribution *dist);

/**
 * Fits y = k1 + k2·exp(−k3·p) to the points with p in [window_lo, window_hi].
 *
 * # Safety
 * `p` and `y` must each point to `len` readable doubles; `out` must be writable.
 */
enum QpeStatus qpe_fit_exponential(const double *p,
                                   const double *y,
                                   size_t len,
                                   double window_lo,
                                   double window_hi,
                                   struct QpeFit *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QPE_LAB_H */
