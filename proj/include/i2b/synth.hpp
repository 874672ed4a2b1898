#pragma once

// Seeded synthetic two-class transaction data. Class 1 accounts look
// bot-like: many low-volume, high-frequency edges and heavy calls into a
// narrow contract band. Class 0 accounts look organic: fewer edges with
// heavy-tailed volumes and sparse calls spread over the whole vocabulary.
//
// `noise` blends both class profiles linearly toward their midpoint; at
// noise = 1 the two classes draw from identical distributions.

#include <cstdint>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "i2b/graph.hpp"

namespace i2b {

struct SynthConfig {
    int per_class = 100;        // labeled accounts per class
    int contracts = 20;         // contract vocabulary size
    double noise = 0.0;         // in [0,1]; see header comment
    uint64_t seed = 1;
    int background_factor = 3;  // unlabeled pool = factor * labeled count

    void validate() const;
};

struct SynthData {
    std::vector<EdgeRecord> edges;
    std::vector<std::pair<std::string, int>> labels;
    std::vector<std::tuple<std::string, std::string, uint64_t>> calls;  // account,contract,count
};

// Deterministic for a fixed config: same seed, same bytes.
SynthData generate(const SynthConfig& cfg);

// Convenience: records -> graph + call table. top_c = 0 keeps every contract.
std::pair<TransactionGraph, CallTable> materialize(const SynthData& data, uint32_t top_c = 0);

// Writes the three CSV files in the formats the ingest pipeline reads.
void save_synth_csv(const SynthData& data, const std::string& edges_path,
                    const std::string& labels_path, const std::string& calls_path);

}  // namespace i2b
