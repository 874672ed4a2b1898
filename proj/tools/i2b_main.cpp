// i2b: transaction-graph identity inference toolkit.
//
// Pipeline: ingest (CSV -> graph file) -> extract (graph -> subgraph bundle)
// -> train (bundle -> checkpoint) -> eval (checkpoint + bundle -> metrics).
// `synth` generates seeded two-class data; `baseline`, `sweep`, and `depth`
// run the comparison protocols end to end on a bundle or graph.
//
// Every option can come from a config file (`--config`, `key = value` lines,
// `#` comments), an I2B_* environment variable, or the flag itself; flags win
// over environment, environment over file.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>

#include "i2b/baselines.hpp"
#include "i2b/bundle.hpp"
#include "i2b/features.hpp"
#include "i2b/gnn.hpp"
#include "i2b/graph.hpp"
#include "i2b/harness.hpp"
#include "i2b/metrics.hpp"
#include "i2b/sampler.hpp"
#include "i2b/synth.hpp"

namespace {

using i2b::ConfigEcho;

std::string echo_line(const ConfigEcho& echo) {
    std::string out;
    for (const auto& [k, v] : echo) {
        if (!out.empty()) out += "; ";
        out += k + "=" + v;
    }
    return out;
}

std::string fmtg(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string strip(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// flat `key = value` config reader: '#'/';' comments, optional quotes
std::unordered_map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::unordered_map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = strip(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        const auto eq = t.find('=');
        const std::string key = eq == std::string::npos ? "" : strip(t.substr(0, eq));
        if (key.empty())
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 'key = value'");
        std::string value = strip(t.substr(eq + 1));
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
            value.back() == value.front()) {
            value = value.substr(1, value.size() - 2);
        } else {
            const auto hash = value.find_first_of("#;");
            if (hash != std::string::npos) value = strip(value.substr(0, hash));
        }
        kv[key] = value;
    }
    return kv;
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(csv);
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::unordered_map<std::string, int> parse_label_map(const std::string& spec) {
    std::unordered_map<std::string, int> map;
    for (const auto& pair : split_list(spec)) {
        const auto eq = pair.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("bad label-map entry '" + pair + "' (use token=class)");
        map[pair.substr(0, eq)] = std::stoi(pair.substr(eq + 1));
    }
    if (map.empty()) throw std::invalid_argument("empty label map");
    return map;
}

// Options shared by every command that trains the GNN.
struct GnnOpts {
    int hidden = 128;
    int epochs = 50;
    int batch = 30;
    double dropout = 0.3;
    double lr = 1e-3;
    double val_fraction = 0.1;
    std::string weight_transform = "log1p";
    bool row_normalize = false;
};

void add_gnn_opts(CLI::App* sub, GnnOpts& o) {
    sub->add_option("--hidden", o.hidden, "embedding width h")
        ->envname("I2B_HIDDEN")
        ->check(CLI::PositiveNumber);
    sub->add_option("--epochs", o.epochs, "training epochs")
        ->envname("I2B_EPOCHS")
        ->check(CLI::PositiveNumber);
    sub->add_option("--batch", o.batch, "minibatch size")
        ->envname("I2B_BATCH")
        ->check(CLI::PositiveNumber);
    sub->add_option("--dropout", o.dropout, "dropout rate on hidden layers")
        ->envname("I2B_DROPOUT")
        ->check(CLI::Range(0.0, 0.999));
    sub->add_option("--lr", o.lr, "Adam learning rate")->envname("I2B_LR");
    sub->add_option("--val-fraction", o.val_fraction,
                    "fraction of the training side held out for epoch selection")
        ->envname("I2B_VAL_FRACTION")
        ->check(CLI::Range(0.0, 0.9));
    sub->add_option("--weight-transform", o.weight_transform,
                    "edge-weight transform before normalization")
        ->envname("I2B_WEIGHT_TRANSFORM")
        ->check(CLI::IsMember({"log1p", "raw"}));
    sub->add_flag("--row-normalize", o.row_normalize, "L1-normalize feature rows")
        ->envname("I2B_ROW_NORMALIZE");
}

i2b::TrainConfig to_train_config(const GnnOpts& o, uint64_t seed, const std::string& variant) {
    i2b::TrainConfig tc;
    tc.hidden = o.hidden;
    tc.epochs = o.epochs;
    tc.batch_size = o.batch;
    tc.dropout = o.dropout;
    tc.lr = o.lr;
    tc.val_fraction = o.val_fraction;
    tc.weight_transform =
        o.weight_transform == "raw" ? i2b::WeightTransform::Raw : i2b::WeightTransform::Log1p;
    tc.row_normalize_features = o.row_normalize;
    tc.seed = seed;
    tc.variant = i2b::variant_from_name(variant);
    return tc;
}

void append_gnn_echo(ConfigEcho& echo, const GnnOpts& o) {
    echo.emplace_back("hidden", std::to_string(o.hidden));
    echo.emplace_back("epochs", std::to_string(o.epochs));
    echo.emplace_back("batch", std::to_string(o.batch));
    echo.emplace_back("dropout", fmtg(o.dropout));
    echo.emplace_back("lr", fmtg(o.lr));
    echo.emplace_back("val_fraction", fmtg(o.val_fraction));
    echo.emplace_back("weight_transform", o.weight_transform);
    echo.emplace_back("row_normalize", o.row_normalize ? "1" : "0");
}

// Loads the call CSV and builds the vocabulary; top_c = 0 keeps everything.
i2b::CallTable load_calls(i2b::TransactionGraph& g, const std::string& path, uint32_t top_c) {
    const auto rows = i2b::read_call_file(path);
    uint32_t keep = top_c;
    if (keep == 0) {
        std::unordered_set<std::string> distinct;
        for (const auto& [acct, contract, count] : rows) distinct.insert(contract);
        keep = static_cast<uint32_t>(distinct.size());
    }
    if (keep == 0) throw std::runtime_error(path + ": no call records");
    return i2b::ingest_calls(g, rows, keep);
}

i2b::FeatureSchema schema_from_flags(const i2b::ContractVocab& vocab, bool name_kind,
                                     const std::string& transform) {
    return i2b::make_schema(vocab, name_kind, i2b::transform_from_name(transform));
}

std::vector<int> bundle_labels(const i2b::Bundle& bundle) {
    std::vector<int> labels;
    for (const auto& sub : bundle.subgraphs) {
        if (sub.label < 0)
            throw std::runtime_error("bundle contains unlabeled subgraphs; re-extract with labels");
        labels.push_back(sub.label);
    }
    return labels;
}

void write_metrics_csv(const std::string& path, const ConfigEcho& echo, const i2b::Metrics& m) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& [k, v] : echo) out << "# " << k << " = " << v << '\n';
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f", m.precision, m.recall, m.f1);
    out << "precision,recall,f1\n" << buf << '\n';
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"transaction-graph identity inference toolkit"};
    app.set_version_flag("--version", "i2b 1.0.0");
    app.require_subcommand(1);

    // --- ingest -------------------------------------------------------------
    auto* ing = app.add_subcommand("ingest", "build a binary graph file from CSV inputs");
    struct {
        std::string edges, labels, out;
        std::string label_map = "0=0,1=1";
    } ing_o;
    ing->set_config("--config");
    ing->add_option("--edges", ing_o.edges, "edge CSV (src,dst,volume,count[,timestamp])")
        ->envname("I2B_EDGES")
        ->required()
        ->check(CLI::ExistingFile);
    ing->add_option("--labels", ing_o.labels, "label CSV (account,label)")
        ->envname("I2B_LABELS")
        ->required()
        ->check(CLI::ExistingFile);
    ing->add_option("--label-map", ing_o.label_map, "token=class pairs, comma separated")
        ->envname("I2B_LABEL_MAP");
    ing->add_option("--out", ing_o.out, "output graph file")->envname("I2B_OUT")->required();
    ing->callback([&] {
        ConfigEcho echo = {{"command", std::string("ingest")},
                           {"edges", ing_o.edges},
                           {"labels", ing_o.labels},
                           {"label_map", ing_o.label_map},
                           {"out", ing_o.out}};
        auto g = i2b::ingest_edges(i2b::read_edge_file(ing_o.edges));
        i2b::ingest_labels_into(g, i2b::read_label_file(ing_o.labels,
                                                        parse_label_map(ing_o.label_map)));
        i2b::save_graph(g, ing_o.out, echo_line(echo));
        std::cout << "graph written: " << ing_o.out << " (accounts=" << g.account_count()
                  << " edges=" << g.edge_count()
                  << " labeled=" << g.labeled_accounts().size()
                  << " dropped_self_loops=" << g.dropped_self_loops() << ")\n";
    });

    // --- synth --------------------------------------------------------------
    auto* syn = app.add_subcommand("synth", "generate seeded synthetic two-class data");
    struct {
        i2b::SynthConfig cfg;
        std::string out_dir = ".";
    } syn_o;
    syn->set_config("--config");
    syn->add_option("--per-class", syn_o.cfg.per_class, "labeled accounts per class")
        ->envname("I2B_PER_CLASS")
        ->check(CLI::PositiveNumber);
    syn->add_option("--contracts", syn_o.cfg.contracts, "contract vocabulary size")
        ->envname("I2B_CONTRACTS")
        ->check(CLI::PositiveNumber);
    syn->add_option("--noise", syn_o.cfg.noise, "class-profile blend in [0,1]")
        ->envname("I2B_NOISE")
        ->check(CLI::Range(0.0, 1.0));
    syn->add_option("--background-factor", syn_o.cfg.background_factor,
                    "unlabeled pool size multiplier")
        ->envname("I2B_BACKGROUND_FACTOR")
        ->check(CLI::PositiveNumber);
    syn->add_option("--seed", syn_o.cfg.seed, "generator seed")->envname("I2B_SEED");
    syn->add_option("--out-dir", syn_o.out_dir, "directory for edges/labels/calls CSVs")
        ->envname("I2B_OUT_DIR");
    syn->callback([&] {
        namespace fs = std::filesystem;
        fs::create_directories(syn_o.out_dir);
        const auto data = i2b::generate(syn_o.cfg);
        const auto dir = fs::path(syn_o.out_dir);
        i2b::save_synth_csv(data, (dir / "edges.csv").string(), (dir / "labels.csv").string(),
                            (dir / "calls.csv").string());
        ConfigEcho echo = {{"command", std::string("synth")},
                           {"per_class", std::to_string(syn_o.cfg.per_class)},
                           {"contracts", std::to_string(syn_o.cfg.contracts)},
                           {"noise", fmtg(syn_o.cfg.noise)},
                           {"background_factor", std::to_string(syn_o.cfg.background_factor)},
                           {"seed", std::to_string(syn_o.cfg.seed)},
                           {"out_dir", syn_o.out_dir}};
        std::ofstream cfg_out(dir / "config.txt", std::ios::trunc);
        for (const auto& [k, v] : echo) cfg_out << k << " = " << v << '\n';
        std::cout << "synthetic data written to " << syn_o.out_dir << " (edges="
                  << data.edges.size() << " labels=" << data.labels.size()
                  << " calls=" << data.calls.size() << ")\n";
    });

    // --- extract ------------------------------------------------------------
    auto* ext = app.add_subcommand("extract", "extract labeled ego-subgraphs into a bundle");
    struct {
        std::string graph, calls, out;
        i2b::SamplingConfig sampling;
        uint32_t top_contracts = 0;
        std::string transform = "log1p";
        bool name_kind = false;
        bool no_symmetrize = false;
        int threads = 1;
    } ext_o;
    ext->set_config("--config");
    ext->add_option("--graph", ext_o.graph, "graph file from ingest")
        ->envname("I2B_GRAPH")
        ->required()
        ->check(CLI::ExistingFile);
    ext->add_option("--calls", ext_o.calls, "call CSV (account,contract,count)")
        ->envname("I2B_CALLS")
        ->required()
        ->check(CLI::ExistingFile);
    ext->add_option("--hops", ext_o.sampling.hops, "neighborhood depth (1 or 2)")
        ->envname("I2B_HOPS")
        ->check(CLI::Range(1, 2));
    ext->add_option("--max-neighbors", ext_o.sampling.max_neighbors,
                    "top-n_u volume-ranked partners per node")
        ->envname("I2B_MAX_NEIGHBORS")
        ->check(CLI::PositiveNumber);
    ext->add_flag("--no-symmetrize", ext_o.no_symmetrize, "keep directed adjacency");
    ext->add_flag("--eosio", ext_o.sampling.eosio_mode,
                  "EOSIO mode: keep system accounts but never expand them; "
                  "adds name-kind features")
        ->envname("I2B_EOSIO");
    ext->add_option("--top-contracts", ext_o.top_contracts,
                    "feature vocabulary size (0 = every contract)")
        ->envname("I2B_TOP_CONTRACTS");
    ext->add_option("--transform", ext_o.transform, "call-count feature transform")
        ->envname("I2B_TRANSFORM")
        ->check(CLI::IsMember({"log1p", "binary"}));
    ext->add_flag("--name-kind", ext_o.name_kind, "append the 3-way name-kind one-hot block")
        ->envname("I2B_NAME_KIND");
    ext->add_option("--threads", ext_o.threads, "extraction workers")
        ->envname("I2B_THREADS")
        ->check(CLI::PositiveNumber);
    ext->add_option("--out", ext_o.out, "output bundle (JSON lines)")
        ->envname("I2B_OUT")
        ->required();
    ext->callback([&] {
        ext_o.sampling.symmetrize = !ext_o.no_symmetrize;
        ext_o.sampling.validate();
        auto g = i2b::load_graph(ext_o.graph);
        const auto calls = load_calls(g, ext_o.calls, ext_o.top_contracts);
        const bool name_kind = ext_o.name_kind || ext_o.sampling.eosio_mode;
        const auto schema = schema_from_flags(calls.vocab, name_kind, ext_o.transform);

        const auto accounts = g.labeled_accounts();
        if (accounts.empty()) throw std::runtime_error(ext_o.graph + ": no labeled accounts");
        auto dataset = i2b::extract_dataset(g, accounts, ext_o.sampling, ext_o.threads);
        for (auto& sub : dataset) i2b::build_features(sub, calls, schema);

        ConfigEcho echo = {{"command", std::string("extract")},
                           {"graph", ext_o.graph},
                           {"calls", ext_o.calls},
                           {"hops", std::to_string(ext_o.sampling.hops)},
                           {"max_neighbors", std::to_string(ext_o.sampling.max_neighbors)},
                           {"symmetrize", ext_o.sampling.symmetrize ? "1" : "0"},
                           {"eosio", ext_o.sampling.eosio_mode ? "1" : "0"},
                           {"top_contracts", std::to_string(ext_o.top_contracts)},
                           {"transform", ext_o.transform},
                           {"name_kind", name_kind ? "1" : "0"},
                           {"out", ext_o.out}};
        i2b::Bundle bundle;
        bundle.header.sampling = ext_o.sampling;
        bundle.header.schema = schema;
        bundle.header.config_echo = echo_line(echo);
        for (const auto& sub : dataset) {
            std::vector<std::string> names;
            for (i2b::AccountHandle h : sub.nodes) names.push_back(g.name(h));
            bundle.node_names.push_back(std::move(names));
        }
        bundle.subgraphs = std::move(dataset);
        i2b::save_bundle(bundle, ext_o.out);
        std::cout << "bundle written: " << ext_o.out << " (subgraphs="
                  << bundle.subgraphs.size() << " feature_dim=" << schema.dimension() << ")\n";
    });

    // --- train --------------------------------------------------------------
    auto* trn = app.add_subcommand("train", "train the GNN on a bundle");
    struct {
        std::string bundle, out, history;
        std::string variant = "t";
        std::string ratio;  // empty = train on the whole bundle
        uint64_t seed = 1;
        uint64_t split_seed = 0;  // 0 = same as seed
        GnnOpts gnn;
    } trn_o;
    trn->set_config("--config");
    trn->add_option("--bundle", trn_o.bundle, "subgraph bundle from extract")
        ->envname("I2B_BUNDLE")
        ->required()
        ->check(CLI::ExistingFile);
    trn->add_option("--variant", trn_o.variant, "adjacency channel: t (frequency) or v (volume)")
        ->envname("I2B_VARIANT")
        ->check(CLI::IsMember({"t", "v"}));
    trn->add_option("--ratio", trn_o.ratio,
                    "train on the training side of this stratified split (e.g. 1:1)")
        ->envname("I2B_RATIO");
    trn->add_option("--seed", trn_o.seed, "training seed (init, shuffles, dropout)")
        ->envname("I2B_SEED");
    trn->add_option("--split-seed", trn_o.split_seed, "split seed (defaults to --seed)")
        ->envname("I2B_SPLIT_SEED");
    add_gnn_opts(trn, trn_o.gnn);
    trn->add_option("--history", trn_o.history, "optional per-epoch CSV (epoch,train_loss,val_f1)")
        ->envname("I2B_HISTORY");
    trn->add_option("--out", trn_o.out, "output checkpoint")->envname("I2B_OUT")->required();
    trn->callback([&] {
        const auto bundle = i2b::load_bundle(trn_o.bundle);
        const auto labels = bundle_labels(bundle);
        const uint64_t split_seed = trn_o.split_seed ? trn_o.split_seed : trn_o.seed;

        std::vector<int> train_idx;
        if (trn_o.ratio.empty()) {
            for (size_t i = 0; i < labels.size(); ++i) train_idx.push_back(static_cast<int>(i));
        } else {
            train_idx = i2b::make_splits(labels, trn_o.ratio, 1, split_seed).front().train;
        }

        const auto tc = to_train_config(trn_o.gnn, trn_o.seed, trn_o.variant);
        const auto result = i2b::train(bundle.subgraphs, train_idx, tc);

        ConfigEcho echo = {{"command", std::string("train")},
                           {"bundle", trn_o.bundle},
                           {"variant", trn_o.variant},
                           {"ratio", trn_o.ratio.empty() ? "all" : trn_o.ratio},
                           {"seed", std::to_string(trn_o.seed)},
                           {"split_seed", std::to_string(split_seed)}};
        append_gnn_echo(echo, trn_o.gnn);

        i2b::Checkpoint ckpt;
        ckpt.params = result.params;
        ckpt.variant = tc.variant;
        ckpt.weight_transform = tc.weight_transform;
        ckpt.row_normalize_features = tc.row_normalize_features;
        ckpt.schema_hash = bundle.header.schema.hash();
        ckpt.hyper_echo = echo_line(echo);
        i2b::save_checkpoint(ckpt, trn_o.out);

        if (!trn_o.history.empty()) {
            std::ofstream hist(trn_o.history, std::ios::trunc);
            if (!hist) throw std::runtime_error("cannot write " + trn_o.history);
            for (const auto& [k, v] : echo) hist << "# " << k << " = " << v << '\n';
            hist << "epoch,train_loss,val_f1\n";
            char buf[64];
            for (const auto& e : result.history) {
                std::snprintf(buf, sizeof buf, "%d,%.9f,%.6f", e.epoch, e.train_loss, e.val_f1);
                hist << buf << '\n';
            }
        }
        char buf[96];
        std::snprintf(buf, sizeof buf, "checkpoint written: %s (best epoch %d, val F1 %.4f)",
                      trn_o.out.c_str(), result.best_epoch, result.best_val_f1);
        std::cout << buf << '\n';
    });

    // --- eval ---------------------------------------------------------------
    auto* evl = app.add_subcommand("eval", "evaluate a checkpoint on a bundle");
    struct {
        std::string bundle, model, out;
        std::string ratio;  // empty = evaluate on the whole bundle
        uint64_t split_seed = 1;
        int batch = 30;
    } evl_o;
    evl->set_config("--config");
    evl->add_option("--bundle", evl_o.bundle, "subgraph bundle")
        ->envname("I2B_BUNDLE")
        ->required()
        ->check(CLI::ExistingFile);
    evl->add_option("--model", evl_o.model, "checkpoint from train")
        ->envname("I2B_MODEL")
        ->required()
        ->check(CLI::ExistingFile);
    evl->add_option("--ratio", evl_o.ratio,
                    "evaluate on the test side of this stratified split (e.g. 1:1)")
        ->envname("I2B_RATIO");
    evl->add_option("--split-seed", evl_o.split_seed, "split seed used at training time")
        ->envname("I2B_SPLIT_SEED");
    evl->add_option("--batch", evl_o.batch, "inference batch size")
        ->envname("I2B_BATCH")
        ->check(CLI::PositiveNumber);
    evl->add_option("--out", evl_o.out, "metrics CSV")->envname("I2B_OUT");
    evl->callback([&] {
        const auto bundle = i2b::load_bundle(evl_o.bundle);
        const auto ckpt = i2b::load_checkpoint(evl_o.model);
        const uint64_t bundle_hash = bundle.header.schema.hash();
        if (ckpt.schema_hash != bundle_hash) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "schema mismatch: checkpoint %016llx vs bundle %016llx "
                          "(re-extract with the training schema or retrain)",
                          static_cast<unsigned long long>(ckpt.schema_hash),
                          static_cast<unsigned long long>(bundle_hash));
            throw std::runtime_error(buf);
        }
        const auto labels = bundle_labels(bundle);

        std::vector<int> eval_idx;
        if (evl_o.ratio.empty()) {
            for (size_t i = 0; i < labels.size(); ++i) eval_idx.push_back(static_cast<int>(i));
        } else {
            eval_idx = i2b::make_splits(labels, evl_o.ratio, 1, evl_o.split_seed).front().test;
        }
        const auto preds =
            i2b::predict(ckpt.params, bundle.subgraphs, eval_idx, ckpt.variant,
                         ckpt.weight_transform, ckpt.row_normalize_features, evl_o.batch);
        std::vector<int> truth;
        for (int idx : eval_idx) truth.push_back(labels[idx]);
        const auto m = i2b::evaluate(preds, truth);

        ConfigEcho echo = {{"command", std::string("eval")},
                           {"bundle", evl_o.bundle},
                           {"model", evl_o.model},
                           {"ratio", evl_o.ratio.empty() ? "all" : evl_o.ratio},
                           {"split_seed", std::to_string(evl_o.split_seed)},
                           {"graphs", std::to_string(eval_idx.size())}};
        if (!evl_o.out.empty()) write_metrics_csv(evl_o.out, echo, m);
        char buf[96];
        std::snprintf(buf, sizeof buf, "precision=%.4f recall=%.4f f1=%.4f (n=%zu)", m.precision,
                      m.recall, m.f1, eval_idx.size());
        std::cout << buf << '\n';
    });

    // --- baseline -----------------------------------------------------------
    auto* cmp = app.add_subcommand("baseline",
                                   "run the method comparison (GNN variants and baselines)");
    struct {
        std::string bundle, out = "comparison.csv";
        std::string methods = "i2bgnn-v,i2bgnn-t,fgsd+knn,netlsd+knn";
        std::string ratio = "1:1";
        std::string variant = "t";
        int seeds = 3;
        uint64_t seed = 1;
        int knn_k = 5;
        int fgsd_bins = 128;
        int netlsd_scales = 128;
        int threads = 1;
        GnnOpts gnn;
    } cmp_o;
    cmp->set_config("--config");
    cmp->add_option("--bundle", cmp_o.bundle, "subgraph bundle")
        ->envname("I2B_BUNDLE")
        ->required()
        ->check(CLI::ExistingFile);
    cmp->add_option("--methods", cmp_o.methods, "comma list of methods to run")
        ->envname("I2B_METHODS");
    cmp->add_option("--ratio", cmp_o.ratio, "train:test ratio")->envname("I2B_RATIO");
    cmp->add_option("--seeds", cmp_o.seeds, "number of resplits")
        ->envname("I2B_SEEDS")
        ->check(CLI::PositiveNumber);
    cmp->add_option("--seed", cmp_o.seed, "base split seed")->envname("I2B_SEED");
    cmp->add_option("--knn-k", cmp_o.knn_k, "kNN neighbor count")
        ->envname("I2B_KNN_K")
        ->check(CLI::PositiveNumber);
    cmp->add_option("--fgsd-bins", cmp_o.fgsd_bins, "FGSD histogram bins")
        ->envname("I2B_FGSD_BINS")
        ->check(CLI::PositiveNumber);
    cmp->add_option("--netlsd-scales", cmp_o.netlsd_scales, "NetLSD timescale count")
        ->envname("I2B_NETLSD_SCALES")
        ->check(CLI::PositiveNumber);
    cmp->add_option("--threads", cmp_o.threads, "worker threads")
        ->envname("I2B_THREADS")
        ->check(CLI::PositiveNumber);
    add_gnn_opts(cmp, cmp_o.gnn);
    cmp->add_option("--out", cmp_o.out, "comparison CSV")->envname("I2B_OUT");
    cmp->callback([&] {
        const auto bundle = i2b::load_bundle(cmp_o.bundle);
        i2b::ProtocolConfig pc;
        pc.ratio = cmp_o.ratio;
        pc.n_seeds = cmp_o.seeds;
        pc.seed = cmp_o.seed;
        pc.train = to_train_config(cmp_o.gnn, cmp_o.seed, "t");
        pc.knn_k = cmp_o.knn_k;
        pc.fgsd_bins = cmp_o.fgsd_bins;
        pc.netlsd_scales = cmp_o.netlsd_scales;
        pc.threads = cmp_o.threads;
        const auto reports =
            i2b::run_comparison(bundle.subgraphs, split_list(cmp_o.methods), pc);

        ConfigEcho echo = {{"command", std::string("baseline")},
                           {"bundle", cmp_o.bundle},
                           {"methods", cmp_o.methods},
                           {"ratio", cmp_o.ratio},
                           {"seeds", std::to_string(cmp_o.seeds)},
                           {"seed", std::to_string(cmp_o.seed)},
                           {"knn_k", std::to_string(cmp_o.knn_k)},
                           {"fgsd_bins", std::to_string(cmp_o.fgsd_bins)},
                           {"netlsd_scales", std::to_string(cmp_o.netlsd_scales)}};
        append_gnn_echo(echo, cmp_o.gnn);
        i2b::write_comparison_csv(cmp_o.out, reports, echo);
        i2b::print_comparison(std::cout, reports);
        std::cout << "comparison written: " << cmp_o.out << '\n';
    });

    // --- sweep --------------------------------------------------------------
    auto* swp = app.add_subcommand("sweep", "F1 across train:test split ratios");
    struct {
        std::string bundle, out = "sweep.csv";
        std::string ratios = "1:9,1:7,1:5,1:3,1:1,3:1";
        std::string methods = "i2bgnn-t";
        int seeds = 3;
        uint64_t seed = 1;
        int knn_k = 5;
        int fgsd_bins = 128;
        int netlsd_scales = 128;
        int threads = 1;
        GnnOpts gnn;
    } swp_o;
    swp->set_config("--config");
    swp->add_option("--bundle", swp_o.bundle, "subgraph bundle")
        ->envname("I2B_BUNDLE")
        ->required()
        ->check(CLI::ExistingFile);
    swp->add_option("--ratios", swp_o.ratios, "comma list of train:test ratios")
        ->envname("I2B_RATIOS");
    swp->add_option("--methods", swp_o.methods, "comma list of methods")->envname("I2B_METHODS");
    swp->add_option("--seeds", swp_o.seeds, "number of resplits per ratio")
        ->envname("I2B_SEEDS")
        ->check(CLI::PositiveNumber);
    swp->add_option("--seed", swp_o.seed, "base split seed")->envname("I2B_SEED");
    swp->add_option("--knn-k", swp_o.knn_k, "kNN neighbor count")->check(CLI::PositiveNumber);
    swp->add_option("--fgsd-bins", swp_o.fgsd_bins, "FGSD histogram bins")
        ->check(CLI::PositiveNumber);
    swp->add_option("--netlsd-scales", swp_o.netlsd_scales, "NetLSD timescale count")
        ->check(CLI::PositiveNumber);
    swp->add_option("--threads", swp_o.threads, "worker threads")
        ->envname("I2B_THREADS")
        ->check(CLI::PositiveNumber);
    add_gnn_opts(swp, swp_o.gnn);
    swp->add_option("--out", swp_o.out, "sweep CSV")->envname("I2B_OUT");
    swp->callback([&] {
        const auto bundle = i2b::load_bundle(swp_o.bundle);
        i2b::ProtocolConfig pc;
        pc.n_seeds = swp_o.seeds;
        pc.seed = swp_o.seed;
        pc.train = to_train_config(swp_o.gnn, swp_o.seed, "t");
        pc.knn_k = swp_o.knn_k;
        pc.fgsd_bins = swp_o.fgsd_bins;
        pc.netlsd_scales = swp_o.netlsd_scales;
        pc.threads = swp_o.threads;
        const auto cells = i2b::run_split_sweep(bundle.subgraphs, split_list(swp_o.ratios),
                                                split_list(swp_o.methods), pc);

        ConfigEcho echo = {{"command", std::string("sweep")},
                           {"bundle", swp_o.bundle},
                           {"ratios", swp_o.ratios},
                           {"methods", swp_o.methods},
                           {"seeds", std::to_string(swp_o.seeds)},
                           {"seed", std::to_string(swp_o.seed)}};
        append_gnn_echo(echo, swp_o.gnn);
        i2b::write_sweep_csv(swp_o.out, cells, echo);
        i2b::print_sweep(std::cout, cells);
        std::cout << "sweep written: " << swp_o.out << '\n';
    });

    // --- depth --------------------------------------------------------------
    auto* dep = app.add_subcommand("depth", "paired 1-hop vs 2-hop neighborhood study");
    struct {
        std::string graph, calls, out = "depth.csv";
        std::string ratio = "1:1";
        std::string variant = "t";
        std::string transform = "log1p";
        int max_neighbors = 10;
        bool eosio = false;
        bool name_kind = false;
        uint32_t top_contracts = 0;
        int seeds = 3;
        uint64_t seed = 1;
        int threads = 1;
        GnnOpts gnn;
    } dep_o;
    dep->set_config("--config");
    dep->add_option("--graph", dep_o.graph, "graph file from ingest")
        ->envname("I2B_GRAPH")
        ->required()
        ->check(CLI::ExistingFile);
    dep->add_option("--calls", dep_o.calls, "call CSV")
        ->envname("I2B_CALLS")
        ->required()
        ->check(CLI::ExistingFile);
    dep->add_option("--max-neighbors", dep_o.max_neighbors, "top-n_u cap per node")
        ->envname("I2B_MAX_NEIGHBORS")
        ->check(CLI::PositiveNumber);
    dep->add_flag("--eosio", dep_o.eosio, "EOSIO mode (stoplist + name-kind features)")
        ->envname("I2B_EOSIO");
    dep->add_flag("--name-kind", dep_o.name_kind, "append name-kind one-hot features");
    dep->add_option("--top-contracts", dep_o.top_contracts, "vocabulary size (0 = all)")
        ->envname("I2B_TOP_CONTRACTS");
    dep->add_option("--transform", dep_o.transform, "call-count feature transform")
        ->envname("I2B_TRANSFORM")
        ->check(CLI::IsMember({"log1p", "binary"}));
    dep->add_option("--variant", dep_o.variant, "adjacency channel: t or v")
        ->envname("I2B_VARIANT")
        ->check(CLI::IsMember({"t", "v"}));
    dep->add_option("--ratio", dep_o.ratio, "train:test ratio")->envname("I2B_RATIO");
    dep->add_option("--seeds", dep_o.seeds, "number of resplits")
        ->envname("I2B_SEEDS")
        ->check(CLI::PositiveNumber);
    dep->add_option("--seed", dep_o.seed, "base split seed")->envname("I2B_SEED");
    dep->add_option("--threads", dep_o.threads, "worker threads")
        ->envname("I2B_THREADS")
        ->check(CLI::PositiveNumber);
    add_gnn_opts(dep, dep_o.gnn);
    dep->add_option("--out", dep_o.out, "depth CSV")->envname("I2B_OUT");
    dep->callback([&] {
        auto g = i2b::load_graph(dep_o.graph);
        const auto calls = load_calls(g, dep_o.calls, dep_o.top_contracts);
        const bool name_kind = dep_o.name_kind || dep_o.eosio;
        const auto schema = schema_from_flags(calls.vocab, name_kind, dep_o.transform);
        const auto accounts = g.labeled_accounts();
        if (accounts.empty()) throw std::runtime_error(dep_o.graph + ": no labeled accounts");

        i2b::SamplingConfig sampling;
        sampling.max_neighbors = dep_o.max_neighbors;
        sampling.eosio_mode = dep_o.eosio;
        i2b::ProtocolConfig pc;
        pc.ratio = dep_o.ratio;
        pc.n_seeds = dep_o.seeds;
        pc.seed = dep_o.seed;
        pc.train = to_train_config(dep_o.gnn, dep_o.seed, dep_o.variant);
        pc.threads = dep_o.threads;
        const auto reports = i2b::run_depth_study(g, calls, schema, accounts, sampling, pc);

        ConfigEcho echo = {{"command", std::string("depth")},
                           {"graph", dep_o.graph},
                           {"calls", dep_o.calls},
                           {"max_neighbors", std::to_string(dep_o.max_neighbors)},
                           {"eosio", dep_o.eosio ? "1" : "0"},
                           {"name_kind", name_kind ? "1" : "0"},
                           {"top_contracts", std::to_string(dep_o.top_contracts)},
                           {"transform", dep_o.transform},
                           {"variant", dep_o.variant},
                           {"ratio", dep_o.ratio},
                           {"seeds", std::to_string(dep_o.seeds)},
                           {"seed", std::to_string(dep_o.seed)}};
        append_gnn_echo(echo, dep_o.gnn);
        i2b::write_depth_csv(dep_o.out, reports, echo);
        i2b::print_depth(std::cout, reports);
        std::cout << "depth study written: " << dep_o.out << '\n';
    });

    // Precedence: flags > I2B_* environment > config file > defaults. CLI11
    // only processes config files attached to the root app, so the
    // subcommand's --config file is read here and, together with set
    // environment values, promoted to synthetic trailing arguments; an
    // explicitly given flag suppresses both.
    std::vector<std::string> args(argv + 1, argv + argc);
    if (!args.empty() && !args[0].empty() && args[0][0] != '-') {
        if (CLI::App* sub = app.get_subcommand_no_throw(args[0])) {
            std::string config_path;
            for (std::size_t i = 1; i < args.size(); ++i) {
                if (args[i] == "--config" && i + 1 < args.size())
                    config_path = args[i + 1];
                else if (args[i].rfind("--config=", 0) == 0)
                    config_path = args[i].substr(9);
            }
            std::unordered_map<std::string, std::string> file_kv;
            if (!config_path.empty()) {
                try {
                    file_kv = read_config_file(config_path);
                } catch (const std::exception& e) {
                    std::cerr << "error: " << e.what() << '\n';
                    return 1;
                }
            }
            std::unordered_set<std::string> known;
            for (const CLI::Option* opt : sub->get_options()) {
                if (opt->get_lnames().empty()) continue;
                for (const std::string& lname : opt->get_lnames()) known.insert(lname);
                const std::string flag = "--" + opt->get_lnames().front();
                bool given = false;
                for (const std::string& tok : args)
                    if (tok == flag || tok.rfind(flag + "=", 0) == 0) {
                        given = true;
                        break;
                    }
                if (given) continue;
                const std::string& env = opt->get_envname();
                const char* env_value = env.empty() ? nullptr : std::getenv(env.c_str());
                if (env_value != nullptr && *env_value != '\0') {
                    args.push_back(flag + "=" + env_value);
                } else if (auto it = file_kv.find(opt->get_lnames().front());
                           it != file_kv.end()) {
                    args.push_back(flag + "=" + it->second);
                }
            }
            for (const auto& [key, value] : file_kv) {
                if (known.count(key) != 0) continue;
                std::cerr << "error: " << config_path << ": unknown config key '" << key
                          << "'\n";
                return 1;
            }
        }
    }
    std::reverse(args.begin(), args.end());

    try {
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
