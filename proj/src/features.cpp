#include "i2b/features.hpp"

#include <cmath>
#include <stdexcept>

namespace i2b {

uint64_t FeatureSchema::hash() const {
    uint64_t h = 0xcbf29ce484222325ULL;
    const std::string tn = transform_name(transform);
    h = fnv1a64(tn.data(), tn.size(), h);
    const char nk = use_name_kind ? '1' : '0';
    h = fnv1a64(&nk, 1, h);
    for (const std::string& v : vocabulary) {
        h = fnv1a64(v.data(), v.size(), h);
        h = fnv1a64("\n", 1, h);
    }
    return h;
}

FeatureSchema make_schema(const ContractVocab& vocab, bool use_name_kind,
                          FeatureTransform transform) {
    FeatureSchema s;
    s.vocabulary = vocab.names;
    s.use_name_kind = use_name_kind;
    s.transform = transform;
    if (s.dimension() == 0)
        throw std::invalid_argument("feature schema is empty: no vocabulary and no name kinds");
    return s;
}

const char* transform_name(FeatureTransform t) {
    switch (t) {
        case FeatureTransform::Log1p: return "log1p";
        case FeatureTransform::Binary: return "binary";
    }
    return "?";
}

FeatureTransform transform_from_name(const std::string& name) {
    if (name == "log1p") return FeatureTransform::Log1p;
    if (name == "binary") return FeatureTransform::Binary;
    throw std::invalid_argument("unknown feature transform '" + name + "'");
}

void build_features(Subgraph& sub, const CallTable& calls, const FeatureSchema& schema) {
    const int n_contracts = static_cast<int>(schema.vocabulary.size());
    sub.features.cols = schema.dimension();
    sub.features.rows.assign(sub.nodes.size(), {});

    for (int i = 0; i < sub.node_count(); ++i) {
        auto& row = sub.features.rows[i];
        if (const auto* cc = calls.calls_for(sub.nodes[i])) {
            for (const auto& [contract, count] : *cc) {
                if (static_cast<int>(contract) >= n_contracts) continue;
                const double v = schema.transform == FeatureTransform::Binary
                                     ? 1.0
                                     : std::log1p(static_cast<double>(count));
                row.emplace_back(static_cast<int>(contract), v);
            }
        }
        if (schema.use_name_kind)
            row.emplace_back(n_contracts + static_cast<int>(sub.node_kinds[i]), 1.0);
    }
}

}  // namespace i2b
