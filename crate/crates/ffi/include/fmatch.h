#ifndef FMATCH_H
#define FMATCH_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FmStatus {
  FM_STATUS_OK = 0,
  FM_STATUS_NULL_POINTER = 1,
  FM_STATUS_INVALID_ARGUMENT = 2,
  FM_STATUS_PARSE_ERROR = 3,
  FM_STATUS_INFEASIBLE = 4,
  FM_STATUS_TOO_LARGE = 5,
  FM_STATUS_REFUSED = 6,
  FM_STATUS_INTERNAL = 7,
} FmStatus;

/**
 * A multigraph with degree bounds.
 */
typedef struct FmGraph FmGraph;

/**
 * A maximum f-matching with its phase statistics.
 */
typedef struct FmSolution FmSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. The pointer stays valid
 * until the next failing call on the same thread.
 */
const char *fm_last_error(void);

/**
 * New graph on `n` vertices, no edges, all bounds 1.
 */
struct FmGraph *fm_graph_new(size_t n);

/**
 * # Safety
 * `graph` must come from this library and not be freed; `edge_id` may be null.
 */
enum FmStatus fm_graph_add_edge(struct FmGraph *graph, size_t u, size_t v, size_t *edge_id);

/**
 * # Safety
 * `graph` must come from this library and not be freed.
 */
enum FmStatus fm_graph_set_bound(struct FmGraph *graph, size_t v, uint32_t bound);

/**
 * Parses the text graph format into a new graph stored in `*out`.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum FmStatus fm_graph_parse(const char *text, struct FmGraph **out);

/**
 * # Safety
 * `graph` must come from this library; null is ignored.
 */
void fm_graph_free(struct FmGraph *graph);

/**
 * # Safety
 * `graph` must be a live graph handle.
 */
size_t fm_graph_vertex_count(const struct FmGraph *graph);

/**
 * # Safety
 * `graph` must be a live graph handle.
 */
size_t fm_graph_edge_count(const struct FmGraph *graph);

/**
 * Computes a maximum f-matching from the empty matching.
 *
 * # Safety
 * `graph` must be a live graph handle; `out` must be writable.
 */
enum FmStatus fm_solve(const struct FmGraph *graph, struct FmSolution **out);

/**
 * # Safety
 * `solution` must be a live solution handle.
 */
size_t fm_solution_cardinality(const struct FmSolution *solution);

/**
 * # Safety
 * `solution` must be a live solution handle.
 */
size_t fm_solution_phase_count(const struct FmSolution *solution);

/**
 * Copies up to `cap` matched edge ids into `buf` and returns the total
 * number of matched edges.
 *
 * # Safety
 * `buf` must have room for `cap` values (it may be null when `cap` is 0).
 */
size_t fm_solution_edges(const struct FmSolution *solution, size_t *buf, size_t cap);

/**
 * Sat length of phase `phase` (0-based).
 *
 * # Safety
 * `solution` must be a live solution handle; `out` must be writable.
 */
enum FmStatus fm_solution_sat_length(const struct FmSolution *solution, size_t phase, size_t *out);

/**
 * # Safety
 * `solution` must come from this library; null is ignored.
 */
void fm_solution_free(struct FmSolution *solution);

/**
 * Maximum cardinality by exhaustive search; refuses graphs with many edges.
 *
 * # Safety
 * `graph` must be a live graph handle; `out` must be writable.
 */
enum FmStatus fm_brute_force(const struct FmGraph *graph, size_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FMATCH_H */
