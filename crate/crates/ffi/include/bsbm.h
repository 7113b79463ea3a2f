#ifndef BSBM_H
#define BSBM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BsbmStatus {
  BSBM_STATUS_OK = 0,
  BSBM_STATUS_NULL_POINTER = 1,
  BSBM_STATUS_INVALID_ARGUMENT = 2,
  BSBM_STATUS_PARSE = 3,
  BSBM_STATUS_IO = 4,
  BSBM_STATUS_NUMERICAL = 5,
  BSBM_STATUS_PANIC = 6,
} BsbmStatus;

typedef enum BsbmMethod {
  BSBM_METHOD_MC = 0,
  BSBM_METHOD_SCP = 1,
  BSBM_METHOD_PPL = 2,
  BSBM_METHOD_PPL_MERGE = 3,
} BsbmMethod;

// Opaque fit result.
typedef struct BsbmFit BsbmFit;

// Opaque signed graph.
typedef struct BsbmGraph BsbmGraph;

// Settings for [`bsbm_fit`]; obtain defaults from [`bsbm_fit_options_default`].
typedef struct BsbmFitOptions {
  size_t k;
  uint64_t seed;
  size_t restarts;
  double inner_tol;
  size_t inner_max;
  double outer_tol;
  size_t outer_max;
} BsbmFitOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on the calling thread; empty if none.
// The pointer stays valid until the next failing call on this thread.
const char *bsbm_last_error(void);

// Static description of a status code.
const char *bsbm_status_message(enum BsbmStatus status);

// Build a graph on `n` nodes from `m` edges `(u[e], v[e], sign[e])`, signs in {-1, +1}.
//
// # Safety
// `u`, `v` and `sign` must point to `m` readable elements; `out` must be writable.
enum BsbmStatus bsbm_graph_new(size_t n,
                               const size_t *u,
                               const size_t *v,
                               const int8_t *sign,
                               size_t m,
                               struct BsbmGraph **out);

// Read a `u v sign` edge list (optional `n=<int>` header).
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum BsbmStatus bsbm_graph_read(const char *path, struct BsbmGraph **out);

// Write the graph as a canonical edge list.
//
// # Safety
// `graph` must come from this library; `path` must be a NUL-terminated string.
enum BsbmStatus bsbm_graph_write(const struct BsbmGraph *graph, const char *path);

// Number of nodes; 0 for a null handle.
//
// # Safety
// `graph` must be null or come from this library.
size_t bsbm_graph_node_count(const struct BsbmGraph *graph);

// Number of edges; 0 for a null handle.
//
// # Safety
// `graph` must be null or come from this library.
size_t bsbm_graph_edge_count(const struct BsbmGraph *graph);

// # Safety
// `graph` must be null or come from this library and not be used afterwards.
void bsbm_graph_free(struct BsbmGraph *graph);

// Draw a graph of `n` nodes from the model `(pi, P, eta, nu)` with `K = k`.
// True labels are written to `out_labels` (length `n`).
//
// # Safety
// `pi` and `nu` hold `k` elements, `p` and `eta` hold `k * k`; `out_labels`
// holds `n`; `out_graph` must be writable.
enum BsbmStatus bsbm_sample(size_t k,
                            const double *pi,
                            const double *p,
                            const double *eta,
                            const int8_t *nu,
                            size_t n,
                            uint64_t seed,
                            struct BsbmGraph **out_graph,
                            size_t *out_labels);

// Default fit settings for `k` communities.
struct BsbmFitOptions bsbm_fit_options_default(size_t k);

// Fit the model by profile pseudo-likelihood. A run that hits the iteration
// cap still returns `BSBM_STATUS_OK`; query [`bsbm_fit_converged`].
//
// # Safety
// `graph` must come from this library; `options` must be readable; `out` writable.
enum BsbmStatus bsbm_fit(const struct BsbmGraph *graph,
                         const struct BsbmFitOptions *options,
                         struct BsbmFit **out);

// Estimated labels; `len` must equal the node count.
//
// # Safety
// `fit` must come from this library; `out` must hold `len` elements.
enum BsbmStatus bsbm_fit_labels(const struct BsbmFit *fit, size_t *out, size_t len);

// Estimated parameters: `pi` and `nu` of length K, `p` and `eta` of length K*K (row-major).
//
// # Safety
// `fit` must come from this library; each buffer must hold the stated length.
enum BsbmStatus bsbm_fit_params(const struct BsbmFit *fit,
                                double *pi,
                                double *p,
                                double *eta,
                                int8_t *nu);

// Number of communities of the fit; 0 for a null handle.
//
// # Safety
// `fit` must be null or come from this library.
size_t bsbm_fit_k(const struct BsbmFit *fit);

// Final log pseudo-likelihood; NaN for a null handle.
//
// # Safety
// `fit` must be null or come from this library.
double bsbm_fit_lpl(const struct BsbmFit *fit);

// # Safety
// `fit` must be null or come from this library.
bool bsbm_fit_converged(const struct BsbmFit *fit);

// Length of the pseudo-likelihood trace; 0 for a null handle.
//
// # Safety
// `fit` must be null or come from this library.
size_t bsbm_fit_trace_len(const struct BsbmFit *fit);

// Copy the pseudo-likelihood trace; `len` must equal [`bsbm_fit_trace_len`].
//
// # Safety
// `fit` must come from this library; `out` must hold `len` elements.
enum BsbmStatus bsbm_fit_trace(const struct BsbmFit *fit, double *out, size_t len);

// # Safety
// `fit` must be null or come from this library and not be used afterwards.
void bsbm_fit_free(struct BsbmFit *fit);

// Run a comparison method; labels go to `out_labels` (length = node count).
//
// # Safety
// `graph` must come from this library; `out_labels` must hold one entry per node.
enum BsbmStatus bsbm_baseline(const struct BsbmGraph *graph,
                              enum BsbmMethod method,
                              size_t k,
                              uint64_t seed,
                              size_t *out_labels);

// Normalized mutual information between two labelings of length `n`.
//
// # Safety
// `a` and `b` must hold `n` elements; `out` must be writable.
enum BsbmStatus bsbm_nmi(const size_t *a, const size_t *b, size_t n, double *out);

// Library version as a static NUL-terminated string.
const char *bsbm_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BSBM_H */
