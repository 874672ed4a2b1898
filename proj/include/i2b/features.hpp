#pragma once
// Node feature construction: contract-calling counts per account (optionally
// ln(1+count)-compressed or binarized) concatenated, in EOSIO mode, with a
// three-way one-hot of the account-name kind.

#include <string>
#include <vector>

#include "i2b/graph.hpp"
#include "i2b/sampler.hpp"

namespace i2b {

enum class FeatureTransform { Log1p, Binary };

struct FeatureSchema {
    std::vector<std::string> vocabulary;  // contract names in rank order
    bool use_name_kind = false;
    FeatureTransform transform = FeatureTransform::Log1p;

    int dimension() const {
        return static_cast<int>(vocabulary.size()) + (use_name_kind ? 3 : 0);
    }
    // Stable 64-bit digest; checkpoints refuse bundles with a different hash.
    uint64_t hash() const;
};

FeatureSchema make_schema(const ContractVocab& vocab, bool use_name_kind,
                          FeatureTransform transform);

const char* transform_name(FeatureTransform t);
FeatureTransform transform_from_name(const std::string& name);

// Fills sub.features: row i holds the calling profile of node i over the
// schema vocabulary (zero when the account never called into it), plus the
// name-kind one-hot block when enabled.
void build_features(Subgraph& sub, const CallTable& calls, const FeatureSchema& schema);

}  // namespace i2b
