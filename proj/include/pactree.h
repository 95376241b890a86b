/* SPDX-License-Identifier: Apache-2.0 */
#ifndef PACTREE_H
#define PACTREE_H

/*
 * C interface to the pactree library.
 *
 * Maps are persistent: every update returns a new handle and leaves its
 * inputs unchanged, unless the call is one of the *_inplace variants,
 * which replace the handle's tree and may reuse nodes nobody else holds.
 * Handles are independent; pt_map_clone is O(1).
 *
 * Every fallible call returns a pt_status. On failure, pt_last_error()
 * describes the most recent error on the calling thread.
 */

#include <stddef.h>
#include <stdint.h>

#include "pactree/export.h"

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pt_status {
  PT_OK = 0,
  PT_INVALID_ARGUMENT = 1,
  PT_NOT_FOUND = 2,
  PT_OUT_OF_RANGE = 3,
  PT_BUFFER_TOO_SMALL = 4,
  PT_CODEC_ERROR = 5,
  PT_PARSE_ERROR = 6,
  PT_IO_ERROR = 7,
  PT_OUT_OF_MEMORY = 8,
  PT_INTERNAL = 9
} pt_status;

typedef enum pt_encoding { PT_ENCODING_IDENTITY = 0, PT_ENCODING_DIFF = 1 } pt_encoding;

/* Zero fields select the defaults (alpha 0.29, block 128, kappa 8*block,
 * grain 4*block). */
typedef struct pt_config {
  double alpha;
  size_t block;
  size_t kappa;
  size_t grain;
  pt_encoding encoding;
} pt_config;

typedef struct pt_counters {
  uint64_t unfolds;
  uint64_t folds;
  uint64_t decodes;
  uint64_t allocations;
  uint64_t reclaims;
  int64_t live_nodes;
  int64_t structural_bytes;
  int64_t payload_bytes;
} pt_counters;

typedef struct pt_space {
  size_t regular_nodes;
  size_t flat_nodes;
  size_t height;
  size_t structural_bytes;
  size_t payload_bytes;
} pt_space;

typedef struct pt_map pt_map;
typedef struct pt_graph pt_graph;

PACTREE_API const char* pt_version(void);
PACTREE_API const char* pt_last_error(void);
PACTREE_API const char* pt_status_name(pt_status s);

PACTREE_API pt_status pt_set_threads(size_t n); /* 0 = hardware default */
PACTREE_API size_t pt_threads(void);
PACTREE_API void pt_get_counters(pt_counters* out);

/* ---- maps: uint64 keys to uint64 values, augmented with the value sum */

PACTREE_API pt_status pt_map_new(const pt_config* cfg, pt_map** out);
/* Unsorted input; on duplicate keys the last value wins. */
PACTREE_API pt_status pt_map_build(const pt_config* cfg, const uint64_t* keys,
                                   const uint64_t* values, size_t n, pt_map** out);
PACTREE_API pt_status pt_map_clone(const pt_map* m, pt_map** out);
PACTREE_API void pt_map_free(pt_map* m);

PACTREE_API size_t pt_map_size(const pt_map* m);
PACTREE_API uint64_t pt_map_sum(const pt_map* m);
/* *found is 0 or 1; *value is written only when found. */
PACTREE_API pt_status pt_map_find(const pt_map* m, uint64_t key, uint64_t* value, int* found);
PACTREE_API pt_status pt_map_rank(const pt_map* m, uint64_t key, size_t* rank);
PACTREE_API pt_status pt_map_select(const pt_map* m, size_t i, uint64_t* key, uint64_t* value);
/* Sum of values with lo <= key <= hi. */
PACTREE_API pt_status pt_map_aug_range(const pt_map* m, uint64_t lo, uint64_t hi, uint64_t* sum);
/* Copies up to cap entries in key order; *n receives the map size.
 * Returns PT_BUFFER_TOO_SMALL when cap < size. */
PACTREE_API pt_status pt_map_entries(const pt_map* m, uint64_t* keys, uint64_t* values,
                                     size_t cap, size_t* n);

PACTREE_API pt_status pt_map_insert(const pt_map* m, uint64_t key, uint64_t value, pt_map** out);
PACTREE_API pt_status pt_map_remove(const pt_map* m, uint64_t key, pt_map** out);
PACTREE_API pt_status pt_map_insert_inplace(pt_map* m, uint64_t key, uint64_t value);
PACTREE_API pt_status pt_map_remove_inplace(pt_map* m, uint64_t key);

/* Binary operations require maps with equal block size and encoding.
 * On equal keys union and intersection keep b's value. */
PACTREE_API pt_status pt_map_union(const pt_map* a, const pt_map* b, pt_map** out);
PACTREE_API pt_status pt_map_intersect(const pt_map* a, const pt_map* b, pt_map** out);
PACTREE_API pt_status pt_map_difference(const pt_map* a, const pt_map* b, pt_map** out);

PACTREE_API pt_status pt_map_multi_insert(const pt_map* m, const uint64_t* keys,
                                          const uint64_t* values, size_t n, pt_map** out);
PACTREE_API pt_status pt_map_multi_delete(const pt_map* m, const uint64_t* keys, size_t n,
                                          pt_map** out);
/* Entries with lo <= key <= hi. */
PACTREE_API pt_status pt_map_range(const pt_map* m, uint64_t lo, uint64_t hi, pt_map** out);
/* Keeps entries for which pred returns nonzero. pred may run concurrently. */
PACTREE_API pt_status pt_map_filter(const pt_map* m,
                                    int (*pred)(uint64_t key, uint64_t value, void* ctx),
                                    void* ctx, pt_map** out);

/* Structure statistics; fails with PT_INTERNAL if an invariant is broken. */
PACTREE_API pt_status pt_map_space(const pt_map* m, pt_space* out);
PACTREE_API pt_status pt_map_validate(const pt_map* m);

/* ---- graphs: vertex ids are uint64, edges directed and unweighted */

PACTREE_API pt_status pt_graph_new(size_t vertex_block, size_t edge_block, pt_graph** out);
PACTREE_API pt_status pt_graph_from_edges(size_t vertex_block, size_t edge_block,
                                          const uint64_t* src, const uint64_t* dst, size_t n,
                                          pt_graph** out);
/* Reads a "u v" per line edge list. */
PACTREE_API pt_status pt_graph_read(const char* path, int symmetrize, size_t vertex_block,
                                    size_t edge_block, pt_graph** out);
PACTREE_API pt_status pt_graph_clone(const pt_graph* g, pt_graph** out);
PACTREE_API void pt_graph_free(pt_graph* g);

PACTREE_API pt_status pt_graph_insert_edges(const pt_graph* g, const uint64_t* src,
                                            const uint64_t* dst, size_t n, pt_graph** out);
PACTREE_API pt_status pt_graph_delete_edges(const pt_graph* g, const uint64_t* src,
                                            const uint64_t* dst, size_t n, pt_graph** out);

PACTREE_API uint64_t pt_graph_edge_count(const pt_graph* g);
PACTREE_API size_t pt_graph_vertex_count(const pt_graph* g);
PACTREE_API size_t pt_graph_degree(const pt_graph* g, uint64_t v);
PACTREE_API int pt_graph_has_edge(const pt_graph* g, uint64_t u, uint64_t v);
/* Copies up to cap edges in (src, dst) order; *n receives the edge count. */
PACTREE_API pt_status pt_graph_edges(const pt_graph* g, uint64_t* src, uint64_t* dst,
                                     size_t cap, size_t* n);
/* Distances from source, ordered by vertex id; *n receives the number of
 * reached vertices. PT_NOT_FOUND if source is not a vertex. */
PACTREE_API pt_status pt_graph_bfs(const pt_graph* g, uint64_t source, uint64_t* vertices,
                                   uint64_t* dist, size_t cap, size_t* n);
/* Structural bytes cover both levels; payload counts encoded edge blocks. */
PACTREE_API pt_status pt_graph_space(const pt_graph* g, size_t* structural_bytes,
                                     size_t* edge_payload_bytes, size_t* vertex_payload_bytes);

#ifdef __cplusplus
}
#endif

#endif /* PACTREE_H */
