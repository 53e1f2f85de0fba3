#ifndef PCNPATH_H
#define PCNPATH_H

/* Generated by cbindgen from the pcnpath-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum PcnStatus {
  PCN_STATUS_OK = 0,
  // A required pointer argument was null.
  PCN_STATUS_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  PCN_STATUS_INVALID_UTF8 = 2,
  // The snapshot file could not be read.
  PCN_STATUS_IO = 3,
  // The snapshot JSON failed to parse or validate.
  PCN_STATUS_PARSE = 4,
  // A vertex key is not present in the graph.
  PCN_STATUS_UNKNOWN_VERTEX = 5,
  // The query is malformed (equal endpoints, non-positive amount).
  PCN_STATUS_INVALID_QUERY = 6,
  // No feasible route exists; no route handle is produced.
  PCN_STATUS_NO_PATH = 7,
  // The graph exceeds the exhaustive planner's size guard.
  PCN_STATUS_TOO_LARGE = 8,
  // Unexpected internal failure; see pcn_last_error_message.
  PCN_STATUS_INTERNAL = 9,
} PcnStatus;

// Planner selector for pcn_plan.
typedef enum PcnPlanner {
  // Search from the destination over the transpose graph.
  PCN_PLANNER_UNIDIRECTIONAL = 0,
  // Early exit at any in-neighbour of the source; fee quoted with
  // first-hop fees at zero.
  PCN_PLANNER_PARTIAL_BIDIRECTIONAL = 1,
  // Balance barrier folded into the fee instead of an explicit check.
  PCN_PLANNER_BARRIER = 2,
  // Exhaustive enumeration; small graphs only.
  PCN_PLANNER_ORACLE = 3,
} PcnPlanner;

// Opaque channel graph handle.
typedef struct PcnGraph PcnGraph;

// Opaque planned-route handle.
typedef struct PcnRoute PcnRoute;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the last error message of this thread into `buf` (NUL-terminated,
// truncated to `cap` bytes) and return the full length including the NUL.
// With a null `buf` or zero `cap`, only the required length is returned.
//
// # Safety
// When `buf` is non-null it must point to at least `cap` writable bytes.
size_t pcn_last_error_message(char *buf, size_t cap);

// Load a snapshot JSON file (lnd describegraph schema) into a new graph
// handle. On success `*out` owns the graph; free it with pcn_graph_free.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be a valid pointer.
enum PcnStatus pcn_graph_load_file(const char *path, struct PcnGraph **out);

// Parse snapshot JSON from memory into a new graph handle.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be a valid pointer.
enum PcnStatus pcn_graph_load_json(const char *json, struct PcnGraph **out);

// Release a graph handle. Null is a no-op.
//
// # Safety
// `g` must have come from a pcn_graph_load_* call and not be freed twice.
void pcn_graph_free(struct PcnGraph *g);

// Number of vertices, or 0 for a null handle.
//
// # Safety
// `g` must be a live graph handle or null.
size_t pcn_graph_vertex_count(const struct PcnGraph *g);

// Number of directed arcs, or 0 for a null handle.
//
// # Safety
// `g` must be a live graph handle or null.
size_t pcn_graph_arc_count(const struct PcnGraph *g);

// Dense index of the vertex with the given key, or -1 when absent.
//
// # Safety
// `g` must be a live graph handle or null; `key` a NUL-terminated string.
int64_t pcn_graph_vertex_index(const struct PcnGraph *g, const char *key);

// Plan one payment. On success `*out` owns the route handle; a NoPath
// status leaves `*out` null and is not an error of the call itself.
//
// # Safety
// `g` must be a live graph handle; `source`/`destination` NUL-terminated
// strings; `out` a valid pointer.
enum PcnStatus pcn_plan(const struct PcnGraph *g,
                        const char *source,
                        const char *destination,
                        double amount,
                        enum PcnPlanner planner,
                        struct PcnRoute **out);

// Release a route handle. Null is a no-op.
//
// # Safety
// `r` must have come from pcn_plan and not be freed twice.
void pcn_route_free(struct PcnRoute *r);

// Total fee of the route under its fee semantics; NaN for null handles.
//
// # Safety
// `r` must be a live route handle or null.
double pcn_route_total_fee(const struct PcnRoute *r);

// Number of arcs in the route.
//
// # Safety
// `r` must be a live route handle or null.
size_t pcn_route_hop_count(const struct PcnRoute *r);

// True when the fee is quoted with source-adjacent fees at zero (the
// partial-bidirectional planner's convention).
//
// # Safety
// `r` must be a live route handle or null.
bool pcn_route_source_fees_zero(const struct PcnRoute *r);

// Arc-relaxation count of the search that produced this route.
//
// # Safety
// `r` must be a live route handle or null.
uint64_t pcn_route_relaxations(const struct PcnRoute *r);

// Queue-pop count of the search that produced this route.
//
// # Safety
// `r` must be a live route handle or null.
uint64_t pcn_route_pops(const struct PcnRoute *r);

// Wall-clock duration of the search, in nanoseconds.
//
// # Safety
// `r` must be a live route handle or null.
uint64_t pcn_route_wall_time_ns(const struct PcnRoute *r);

// Copy hop amounts (hop_count + 1 values, source first) into `buf`,
// writing at most `cap` values; returns how many values the route has.
//
// # Safety
// `r` must be a live route handle or null; when `buf` is non-null it must
// point to at least `cap` writable doubles.
size_t pcn_route_hop_amounts(const struct PcnRoute *r, double *buf, size_t cap);

// Copy the route's arc ids (payment direction) into `buf`, writing at most
// `cap` values; returns the hop count.
//
// # Safety
// `r` must be a live route handle or null; when `buf` is non-null it must
// point to at least `cap` writable uint32 slots.
size_t pcn_route_arc_ids(const struct PcnRoute *r, uint32_t *buf, size_t cap);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PCNPATH_H */
