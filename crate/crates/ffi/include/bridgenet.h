/* C interface for the bridgenet graph-analysis library. */

#ifndef BRIDGENET_H
#define BRIDGENET_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum BnStatus {
  BnStatus_Ok = 0,
  BnStatus_NullPointer = 1,
  BnStatus_InvalidUtf8 = 2,
  BnStatus_MalformedId = 3,
  BnStatus_UndefinedMetric = 4,
  BnStatus_NotConverged = 5,
  BnStatus_PartitionMismatch = 6,
  BnStatus_MissingMetric = 7,
  BnStatus_InvalidArgument = 8,
  BnStatus_ParseError = 9,
  BnStatus_IoError = 10,
  BnStatus_OutOfRange = 11,
} BnStatus;

// Opaque forwarding graph handle.
typedef struct BnGraph BnGraph;

// Opaque community partition handle.
typedef struct BnPartition BnPartition;

// Opaque bridge-score ranking handle.
typedef struct BnRanking BnRanking;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent error on this thread, or null if none.
// The pointer stays valid until the next failing call on the same thread;
// do not free it.
const char *bn_last_error_message(void);

// Frees a string returned by this library.
//
// # Safety
// `s` must be a pointer previously returned by a `bridgenet` function that
// transfers string ownership, not yet freed; null is a no-op.
void bn_string_free(char *s);

// Creates an empty graph. Free with [`bn_graph_free`].
struct BnGraph *bn_graph_new(void);

// # Safety
// `g` must be a pointer returned by a graph-producing function of this
// library, not yet freed; null is a no-op.
void bn_graph_free(struct BnGraph *g);

// Records one forwarding event `source -> target`. Self-forwards are
// dropped and tallied, matching ingestion semantics.
//
// # Safety
// `g` must be a live graph handle; `source` and `target` must be valid
// NUL-terminated strings.
enum BnStatus bn_graph_add_edge(struct BnGraph *g, const char *source, const char *target);

// Flags a channel as a seed channel.
//
// # Safety
// `g` must be a live graph handle; `id` must be a valid NUL-terminated
// string.
enum BnStatus bn_graph_mark_seed(struct BnGraph *g, const char *id);

// # Safety
// `g` must be a live graph handle or null (returns 0).
size_t bn_graph_node_count(const struct BnGraph *g);

// # Safety
// `g` must be a live graph handle or null (returns 0).
size_t bn_graph_edge_count(const struct BnGraph *g);

// # Safety
// `g` must be a live graph handle or null (returns 0).
uint64_t bn_graph_total_weight(const struct BnGraph *g);

// # Safety
// `g` must be a live graph handle or null (returns 0).
uint64_t bn_graph_dropped_self_loops(const struct BnGraph *g);

// Network density `2|E| / (|V|(|V|-1))`.
//
// # Safety
// `g` must be a live graph handle; `out` must point to writable memory.
enum BnStatus bn_graph_density(const struct BnGraph *g, double *out);

// Directed density `|E| / (|V|(|V|-1))`.
//
// # Safety
// `g` must be a live graph handle; `out` must point to writable memory.
enum BnStatus bn_graph_directed_density(const struct BnGraph *g, double *out);

// Mean shortest-path hop count over reachable ordered pairs.
//
// # Safety
// `g` must be a live graph handle; `out` must point to writable memory.
enum BnStatus bn_graph_average_path_length(const struct BnGraph *g, double *out);

// Reads a `source<TAB>target<TAB>weight` edge-list file.
//
// # Safety
// `path` must be a valid NUL-terminated string; `out` must point to a
// writable `BnGraph*` slot.
enum BnStatus bn_graph_read_edgelist(const char *path, struct BnGraph **out);

// Writes the graph as an edge-list file.
//
// # Safety
// `g` must be a live graph handle; `path` must be a valid NUL-terminated
// string.
enum BnStatus bn_graph_write_edgelist(const struct BnGraph *g, const char *path);

// Reads a GEXF 1.2 file (directed graphs only).
//
// # Safety
// `path` must be a valid NUL-terminated string; `out` must point to a
// writable `BnGraph*` slot.
enum BnStatus bn_graph_read_gexf(const char *path, struct BnGraph **out);

// Writes the graph as a GEXF 1.2 file (no annotations).
//
// # Safety
// `g` must be a live graph handle; `path` must be a valid NUL-terminated
// string.
enum BnStatus bn_graph_write_gexf(const struct BnGraph *g, const char *path);

// Builds a new graph without the listed channels; absent ids are ignored.
//
// # Safety
// `g` must be a live graph handle; `ids` must point to `len` valid
// NUL-terminated strings; `out` must point to a writable `BnGraph*` slot.
enum BnStatus bn_graph_remove_nodes(const struct BnGraph *g,
                                    const char *const *ids,
                                    size_t len,
                                    struct BnGraph **out);

// Writes the default bridge-score weights (10, 7, 7).
//
// # Safety
// All three pointers must point to writable memory.
enum BnStatus bn_default_weights(double *w_indegree, double *w_eigenvector, double *w_clustering);

// Ranks every channel by bridge score. `damping` in `[0, 1)`; 0 disables
// the teleport term. Free the result with [`bn_ranking_free`].
//
// # Safety
// `g` must be a live graph handle; `out` must point to a writable
// `BnRanking*` slot.
enum BnStatus bn_rank(const struct BnGraph *g,
                      double w_indegree,
                      double w_eigenvector,
                      double w_clustering,
                      double damping,
                      double tolerance,
                      size_t max_iterations,
                      struct BnRanking **out);

// # Safety
// `r` must be a live ranking handle or null (returns 0).
size_t bn_ranking_len(const struct BnRanking *r);

// Channel id at `index` in rank order, as a caller-owned string (release
// with [`bn_string_free`]); null if out of range.
//
// # Safety
// `r` must be a live ranking handle or null.
char *bn_ranking_channel(const struct BnRanking *r, size_t index);

// Bridge score at `index` in rank order.
//
// # Safety
// `r` must be a live ranking handle; `out` must point to writable memory.
enum BnStatus bn_ranking_score(const struct BnRanking *r, size_t index, double *out);

// # Safety
// `r` must be a pointer returned by [`bn_rank`], not yet freed; null is a
// no-op.
void bn_ranking_free(struct BnRanking *r);

// Louvain community detection on the undirected weighted projection.
// Free the result with [`bn_partition_free`].
//
// # Safety
// `g` must be a live graph handle; `out` must point to a writable
// `BnPartition*` slot.
enum BnStatus bn_louvain(const struct BnGraph *g,
                         double resolution,
                         uint64_t seed,
                         struct BnPartition **out);

// # Safety
// `p` must be a live partition handle or null (returns 0).
size_t bn_partition_community_count(const struct BnPartition *p);

// Modularity of the partition; NaN if `p` is null.
//
// # Safety
// `p` must be a live partition handle or null.
double bn_partition_modularity(const struct BnPartition *p);

// Community id of a channel, or -1 if the channel is not in the partition.
//
// # Safety
// `p` must be a live partition handle; `id` must be a valid NUL-terminated
// string.
int64_t bn_partition_community_of(const struct BnPartition *p, const char *id);

// # Safety
// `p` must be a pointer returned by [`bn_louvain`], not yet freed; null is
// a no-op.
void bn_partition_free(struct BnPartition *p);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* BRIDGENET_H */
