#ifndef RWLAB_H
#define RWLAB_H

#pragma once

/* Generated by cbindgen at build time; edit src/lib.rs instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RwlabStatus {
  RWLAB_STATUS_OK = 0,
  RWLAB_STATUS_NULL_POINTER = 1,
  RWLAB_STATUS_INVALID_ARGUMENT = 2,
  RWLAB_STATUS_NUMERICAL = 3,
  RWLAB_STATUS_IO = 4,
  RWLAB_STATUS_PANIC = 5,
} RwlabStatus;

typedef enum RwlabKernel {
  RWLAB_KERNEL_SUM = 0,
  RWLAB_KERNEL_MIN = 1,
  RWLAB_KERNEL_PRODUCT = 2,
  RWLAB_KERNEL_PREFERENTIAL_ATTACHMENT = 3,
} RwlabKernel;

/**
 * Opaque weighted network.
 */
typedef struct RwlabNetwork RwlabNetwork;

/**
 * Opaque random-connection-model sample.
 */
typedef struct RwlabRcmSample RwlabRcmSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into the library from the same thread.
 */
const char *rwlab_last_error(void);

/**
 * Static, nul-terminated version string.
 */
const char *rwlab_version(void);

/**
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum RwlabStatus rwlab_network_new(size_t vertices, struct RwlabNetwork **out);

/**
 * # Safety
 * `net` must come from `rwlab_network_new` and not have been freed.
 */
enum RwlabStatus rwlab_network_add_edge(struct RwlabNetwork *net,
                                        size_t u,
                                        size_t v,
                                        double conductance);

/**
 * # Safety
 * `net` must be a live handle and `out` writable.
 */
enum RwlabStatus rwlab_network_vertex_count(const struct RwlabNetwork *net, size_t *out);

/**
 * Effective conductance between vertex sets A and B.
 *
 * # Safety
 * `net` must be a live handle, `a`/`b` must hold `a_len`/`b_len`
 * indices and `out` must be writable.
 */
enum RwlabStatus rwlab_effective_conductance(const struct RwlabNetwork *net,
                                             const size_t *a,
                                             size_t a_len,
                                             const size_t *b,
                                             size_t b_len,
                                             double *out);

/**
 * # Safety
 * `net` must be null or a handle not yet freed.
 */
void rwlab_network_free(struct RwlabNetwork *net);

/**
 * Total energy of the staged unit flow to infinity in dimension `dim`
 * with decay exponent `s`, stages `start..=last`.
 *
 * # Safety
 * `out` must be writable.
 */
enum RwlabStatus rwlab_flow_energy(size_t dim,
                                   double s,
                                   uint32_t start,
                                   uint32_t last,
                                   double *out);

/**
 * P(|S_n| ≤ 3n) for the discretized Cauchy walk, exact up to the
 * truncation mass reported in `truncated`.
 *
 * # Safety
 * `probability` and `truncated` must be writable.
 */
enum RwlabStatus rwlab_cauchy_halfmass(size_t n,
                                       uint64_t radius,
                                       double *probability,
                                       double *truncated);

/**
 * Probability that two points at distance `r` are joined, integrated over
 * both weights, with ρ(x) = min(1, x^{-δ}).
 *
 * # Safety
 * `value` must be writable; `error` may be null.
 */
enum RwlabStatus rwlab_connection_probability(enum RwlabKernel kernel,
                                              double gamma,
                                              double beta,
                                              double delta,
                                              double r,
                                              double *value,
                                              double *error);

/**
 * Samples the model in [0, side)² from `seed`.
 *
 * # Safety
 * `out` must be writable.
 */
enum RwlabStatus rwlab_rcm_sample(double side,
                                  enum RwlabKernel kernel,
                                  double gamma,
                                  double beta,
                                  double delta,
                                  uint64_t seed,
                                  struct RwlabRcmSample **out);

/**
 * # Safety
 * `sample` must be a live handle; `points` and `edges` writable.
 */
enum RwlabStatus rwlab_rcm_sample_counts(const struct RwlabRcmSample *sample,
                                         size_t *points,
                                         size_t *edges);

/**
 * Position and weight parameter of point `index`.
 *
 * # Safety
 * `sample` must be a live handle; `xy` must hold two writable doubles
 * and `weight` one.
 */
enum RwlabStatus rwlab_rcm_sample_point(const struct RwlabRcmSample *sample,
                                        size_t index,
                                        double *xy,
                                        double *weight);

/**
 * # Safety
 * `sample` must be null or a handle not yet freed.
 */
void rwlab_rcm_sample_free(struct RwlabRcmSample *sample);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RWLAB_H */
