#ifndef CORRCLUST_H
#define CORRCLUST_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes for every fallible entry point.
typedef enum CcStatus {
  CC_OK = 0,
  CC_NULL_ARGUMENT = 1,
  CC_INVALID_ARGUMENT = 2,
  CC_PARSE_ERROR = 3,
  CC_LIMIT_EXCEEDED = 4,
  CC_INTERNAL_ERROR = 5,
} CcStatus;

typedef struct CcBundle CcBundle;

typedef struct CcClustering CcClustering;

typedef struct CcGraph CcGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the most recent failure on this thread, or NULL.
// The pointer stays valid until the next failing call on the thread.
const char *cc_last_error(void);

// Release a string returned by this library.
//
// # Safety
// `s` must have been returned by a `cc_*` function and not yet freed.
void cc_string_free(char *s);

// Parse a graph document (first line "n m", then edges "u v").
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be a valid pointer.
enum CcStatus cc_graph_parse(const char *text, struct CcGraph **out);

// # Safety
// `g` must be a live handle from `cc_graph_parse` (or NULL).
void cc_graph_free(struct CcGraph *g);

// # Safety
// `g` must be a live graph handle.
uint32_t cc_graph_vertex_count(const struct CcGraph *g);

// # Safety
// `g` must be a live graph handle.
uint64_t cc_graph_positive_edge_count(const struct CcGraph *g);

// Canonical text serialization of the graph.
//
// # Safety
// `g` must be a live graph handle; `out` must be valid.
enum CcStatus cc_graph_serialize(const struct CcGraph *g, char **out);

// Draw the sample S and its four subsamples with probability
// ε = eps_num/eps_den (exact rational, 0 < ε < 1).
//
// # Safety
// `g` must be a live graph handle; `out` must be valid.
enum CcStatus cc_bundle_draw(const struct CcGraph *g,
                             uint64_t eps_num,
                             uint64_t eps_den,
                             uint64_t seed,
                             struct CcBundle **out);

// # Safety
// `b` must be a live handle from `cc_bundle_draw` (or NULL).
void cc_bundle_free(struct CcBundle *b);

// Bundle as JSON ({epsilon, seed, S, S_p, S_d, S_b, S_r}).
//
// # Safety
// `b` must be a live bundle handle; `out` must be valid.
enum CcStatus cc_bundle_to_json(const struct CcBundle *b, char **out);

// Run the online algorithm. `order` lists the arrival order of V ∖ S;
// pass NULL to use ascending ids. The sample is processed first.
//
// # Safety
// `g` and `b` must be live handles; `order` (when non-NULL) must point to
// `order_len` readable u32 values; `out` must be valid.
enum CcStatus cc_run(const struct CcGraph *g,
                     const struct CcBundle *b,
                     const uint32_t *order,
                     size_t order_len,
                     struct CcClustering **out);

// # Safety
// `c` must be a live handle from `cc_run` (or NULL).
void cc_clustering_free(struct CcClustering *c);

// Cluster id of a vertex, or u32::MAX when out of range.
//
// # Safety
// `c` must be a live clustering handle.
uint32_t cc_clustering_cluster_of(const struct CcClustering *c, uint32_t v);

// Cost report JSON ({edge_cost, y, norms}) of a clustering, with norms
// 1, 2, and inf.
//
// # Safety
// `g` and `c` must be live handles; `out` must be valid.
enum CcStatus cc_cost_report_json(const struct CcGraph *g,
                                  const struct CcClustering *c,
                                  char **out);

// Exact brute-force optimum (n ≤ 12) as JSON; `p` is "1", "2", ... or "inf".
//
// # Safety
// `g` must be a live graph handle; `p` a NUL-terminated string; `out` valid.
enum CcStatus cc_brute_force_opt(const struct CcGraph *g, const char *p, char **out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CORRCLUST_H */
