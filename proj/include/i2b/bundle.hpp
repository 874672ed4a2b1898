#pragma once
// Subgraph bundle files: line-delimited JSON, one header object followed by
// one record per subgraph. The header pins the sampling config and feature
// schema so training can reject incompatible inputs.

#include <string>
#include <vector>

#include "i2b/features.hpp"
#include "i2b/sampler.hpp"

namespace i2b {

struct BundleHeader {
    SamplingConfig sampling;
    FeatureSchema schema;
    std::string config_echo;  // resolved run configuration, free-form
};

struct Bundle {
    BundleHeader header;
    std::vector<Subgraph> subgraphs;
    // node names per subgraph, parallel to Subgraph::nodes
    std::vector<std::vector<std::string>> node_names;
};

void save_bundle(const Bundle& bundle, const std::string& path);
Bundle load_bundle(const std::string& path);

}  // namespace i2b
