#pragma once
// Ego-subgraph extraction: the k-hop neighborhood of a target account,
// capped at the top max_neighbors partners per node ranked by bidirectional
// transaction volume, with the induced edge set over the selected nodes.

#include <cstdint>
#include <vector>

#include "i2b/graph.hpp"
#include "i2b/matrix.hpp"

namespace i2b {

struct SamplingConfig {
    int hops = 2;            // 1 or 2
    int max_neighbors = 10;  // n_u, per-node cap during expansion
    bool symmetrize = true;  // A <- A + A^T on both channels
    bool eosio_mode = false; // system accounts kept as nodes, never expanded

    void validate() const;
};

// One edge of a subgraph in local node indices. When the subgraph is
// symmetric the list holds each unordered pair once with u < v and weights
// already folded (w[u][v] = w_dir[u][v] + w_dir[v][u]).
struct SubgraphEdge {
    int u = 0;
    int v = 0;
    double volume = 0.0;
    double frequency = 0.0;
};

struct Subgraph {
    int64_t id = -1;                    // position within the extracted dataset
    int center = 0;                     // local index of the target account
    std::vector<AccountHandle> nodes;   // local index -> account handle
    std::vector<NameKind> node_kinds;   // parallel to nodes
    std::vector<SubgraphEdge> edges;
    bool symmetric = true;
    bool isolated = false;              // target had no transaction partners
    int label = -1;
    SparseRows features;                // filled by build_features

    int node_count() const { return static_cast<int>(nodes.size()); }

    // Dense m x m adjacency of one weight channel (volume or frequency).
    Matrix dense_adjacency(bool use_frequency) const;
};

// Neighbors of `account` ranked by volume(a->u)+volume(u->a) descending,
// ties by ascending handle, truncated to n_u. Returns all neighbors when
// fewer than n_u exist.
std::vector<AccountHandle> rank_neighbors(const TransactionGraph& g, AccountHandle account,
                                          int n_u);

// Extracts the ego subgraph of `account`. Node order: center, then ranked
// 1-hop partners, then (hops=2) each expanded partner's ranked neighbors in
// expansion order, deduplicated. Label is left unset.
Subgraph extract_subgraph(const TransactionGraph& g, AccountHandle account,
                          const SamplingConfig& cfg);

// One labeled subgraph per account, in input order. Every account must carry
// a label. `threads` > 1 extracts in parallel; output is identical to the
// sequential order.
std::vector<Subgraph> extract_dataset(const TransactionGraph& g,
                                      const std::vector<AccountHandle>& accounts,
                                      const SamplingConfig& cfg, int threads = 1);

}  // namespace i2b
