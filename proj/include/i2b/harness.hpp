#pragma once

// Experiment protocols on top of the model and baselines: stratified
// train/test splits, the method comparison table, the 1-hop vs 2-hop depth
// study, and the split-ratio sweep. Each protocol writes a CSV (resolved
// configuration echoed as leading # comments) and an aligned console table.

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "i2b/features.hpp"
#include "i2b/gnn.hpp"
#include "i2b/graph.hpp"
#include "i2b/metrics.hpp"
#include "i2b/sampler.hpp"

namespace i2b {

struct Split {
    std::vector<int> train;
    std::vector<int> val;  // unused by default; the trainer carves its own
    std::vector<int> test;
    std::string ratio;
    uint64_t seed = 0;
};

// "a:b" (train:test, positive integers) or a decimal train fraction in (0,1).
double parse_ratio(const std::string& ratio);

// One split per seed (base_seed, base_seed+1, ...), stratified by class.
// Errors out with guidance when a ratio would leave a class empty on either
// side. labels must be 0/1 and index the dataset positions.
std::vector<Split> make_splits(const std::vector<int>& labels, const std::string& ratio,
                               int n_seeds, uint64_t base_seed);

// Method tokens accepted by the protocols below.
extern const std::vector<std::string> kAllMethods;  // i2bgnn-v i2bgnn-t fgsd+knn netlsd+knn
bool is_known_method(const std::string& method);

struct ProtocolConfig {
    std::string ratio = "1:1";
    int n_seeds = 3;     // "resplit 3 times"
    uint64_t seed = 1;   // base split seed; also drives model init per split
    TrainConfig train;   // GNN hyperparameters (seed/variant overridden per run)
    int knn_k = 5;
    int fgsd_bins = 128;
    int netlsd_scales = 128;
    int threads = 1;
};

struct MethodReport {
    std::string method;
    std::vector<Metrics> per_seed;
    Metrics mean;  // arithmetic mean over seeds, per metric
};

std::vector<MethodReport> run_comparison(const std::vector<Subgraph>& dataset,
                                         const std::vector<std::string>& methods,
                                         const ProtocolConfig& cfg);

struct DepthReport {
    int hops = 0;
    std::vector<Metrics> per_seed;
    Metrics mean;
};

// Extracts the dataset at both depths from the same graph and reuses the
// same account-level splits, so per-seed results pair up across depths.
std::vector<DepthReport> run_depth_study(const TransactionGraph& g, const CallTable& calls,
                                         const FeatureSchema& schema,
                                         const std::vector<AccountHandle>& accounts,
                                         const SamplingConfig& sampling,
                                         const ProtocolConfig& cfg);

struct SweepCell {
    std::string ratio;
    std::string method;
    std::vector<Metrics> per_seed;
    Metrics mean;
};

std::vector<SweepCell> run_split_sweep(const std::vector<Subgraph>& dataset,
                                       const std::vector<std::string>& ratios,
                                       const std::vector<std::string>& methods,
                                       const ProtocolConfig& cfg);

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

void write_comparison_csv(const std::string& path, const std::vector<MethodReport>& reports,
                          const ConfigEcho& echo);
void write_depth_csv(const std::string& path, const std::vector<DepthReport>& reports,
                     const ConfigEcho& echo);
void write_sweep_csv(const std::string& path, const std::vector<SweepCell>& cells,
                     const ConfigEcho& echo);

void print_comparison(std::ostream& out, const std::vector<MethodReport>& reports);
void print_depth(std::ostream& out, const std::vector<DepthReport>& reports);
void print_sweep(std::ostream& out, const std::vector<SweepCell>& cells);

}  // namespace i2b
