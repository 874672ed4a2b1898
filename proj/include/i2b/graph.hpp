#pragma once
// In-memory transaction graph: accounts interned to dense handles, one
// aggregated edge per ordered (src,dst) pair carrying total volume and
// transaction count. Built once by the ingest routines, immutable after.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "i2b/names.hpp"

namespace i2b {

using AccountHandle = uint32_t;

struct AdjEdge {
    AccountHandle peer = 0;
    double volume = 0.0;     // summed over raw rows, >= 0
    uint64_t frequency = 0;  // summed transaction count, >= 1
};

struct EdgeRecord {
    std::string src;
    std::string dst;
    double volume = 0.0;
    uint64_t count = 1;
};

struct CallRecord {
    AccountHandle caller = 0;
    uint32_t contract = 0;  // index into ContractVocab
    uint64_t count = 1;
};

struct ContractVocab {
    std::vector<std::string> names;          // rank order: by total call count desc
    std::unordered_map<std::string, uint32_t> index;

    uint32_t size() const { return static_cast<uint32_t>(names.size()); }
};

// Aggregated contract calls restricted to a vocabulary, grouped by caller.
struct CallTable {
    ContractVocab vocab;
    // per account handle: (contract index, count), sorted by contract index
    std::vector<std::vector<std::pair<uint32_t, uint64_t>>> calls;

    const std::vector<std::pair<uint32_t, uint64_t>>* calls_for(AccountHandle a) const {
        if (a >= calls.size()) return nullptr;
        return &calls[a];
    }
};

class TransactionGraph {
public:
    // --- accounts -----------------------------------------------------------
    uint32_t account_count() const { return static_cast<uint32_t>(names_.size()); }
    const std::string& name(AccountHandle a) const { return names_[a]; }
    NameKind kind(AccountHandle a) const { return kinds_[a]; }

    std::optional<AccountHandle> find(const std::string& name) const {
        auto it = handle_of_.find(name);
        if (it == handle_of_.end()) return std::nullopt;
        return it->second;
    }

    // Interns `name`, assigning the next dense handle on first appearance.
    AccountHandle intern(const std::string& name);

    // --- adjacency ----------------------------------------------------------
    const std::vector<AdjEdge>& out_edges(AccountHandle a) const { return out_[a]; }
    const std::vector<AdjEdge>& in_edges(AccountHandle a) const { return in_[a]; }
    uint64_t edge_count() const { return edge_count_; }

    // Volume on the aggregated edge a->b, 0.0 if absent.
    double volume(AccountHandle a, AccountHandle b) const;
    // Frequency on the aggregated edge a->b, 0 if absent.
    uint64_t frequency(AccountHandle a, AccountHandle b) const;

    bool has_edges(AccountHandle a) const { return !out_[a].empty() || !in_[a].empty(); }

    // --- labels -------------------------------------------------------------
    // -1 when unlabeled.
    int label(AccountHandle a) const { return labels_[a]; }
    void set_label(AccountHandle a, int cls);
    std::vector<AccountHandle> labeled_accounts() const;

    // Accounts that appeared only in the label file, not in any edge row.
    const std::vector<AccountHandle>& label_only_accounts() const { return label_only_; }

    // --- ingest bookkeeping -------------------------------------------------
    uint64_t dropped_self_loops() const { return dropped_self_loops_; }

private:
    friend TransactionGraph ingest_edges(const std::vector<EdgeRecord>&);
    friend void ingest_labels_into(TransactionGraph&,
                                   const std::vector<std::pair<std::string, int>>&);
    friend TransactionGraph load_graph(const std::string&);

    void finalize_adjacency(
        const std::vector<std::unordered_map<AccountHandle, std::pair<double, uint64_t>>>& acc);

    std::vector<std::string> names_;
    std::unordered_map<std::string, AccountHandle> handle_of_;
    std::vector<NameKind> kinds_;
    std::vector<std::vector<AdjEdge>> out_;  // sorted by peer handle
    std::vector<std::vector<AdjEdge>> in_;   // mirror of out_, sorted by peer handle
    std::vector<int8_t> labels_;
    std::vector<AccountHandle> label_only_;
    uint64_t edge_count_ = 0;
    uint64_t dropped_self_loops_ = 0;
};

// --- ingest -----------------------------------------------------------------

// Aggregates raw rows into the immutable graph. Self-loop rows are dropped
// (counted); duplicate (src,dst) rows sum volume and count in row order.
// Throws on an empty stream.
TransactionGraph ingest_edges(const std::vector<EdgeRecord>& rows);

// Applies (account,class) pairs; accounts unseen in the edge stream are
// interned and tracked as label-only. Conflicting duplicates throw.
void ingest_labels_into(TransactionGraph& g,
                        const std::vector<std::pair<std::string, int>>& rows);

// Keeps the top_c contracts by total call count (ties by first appearance)
// and aggregates per-(caller, contract) counts restricted to that vocabulary.
CallTable ingest_calls(TransactionGraph& g,
                       const std::vector<std::tuple<std::string, std::string, uint64_t>>& rows,
                       uint32_t top_c);

// --- file loaders -----------------------------------------------------------

// edges file: header src,dst,volume,count[,timestamp]; timestamps ignored.
std::vector<EdgeRecord> read_edge_file(const std::string& path);

// labels file: header account,label; tokens mapped through `label_map`
// (e.g. {"0",0},{"1",1} or {"phisher",1},{"normal",0}).
std::vector<std::pair<std::string, int>> read_label_file(
    const std::string& path, const std::unordered_map<std::string, int>& label_map);

// calls file: header account,contract,count.
std::vector<std::tuple<std::string, std::string, uint64_t>> read_call_file(
    const std::string& path);

// --- persistence ------------------------------------------------------------

// Single binary file, little-endian: magic "I2BG", u16 format version, then
// tagged length-prefixed sections (meta, accounts, adjacency, labels, kinds)
// and a trailing 64-bit checksum over all preceding bytes. `meta` carries an
// optional provenance string (resolved run configuration).
void save_graph(const TransactionGraph& g, const std::string& path,
                const std::string& meta = "");
TransactionGraph load_graph(const std::string& path);
std::string load_graph_meta(const std::string& path);

// FNV-1a, also used for feature-schema hashes.
uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace i2b
