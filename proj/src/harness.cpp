#include "i2b/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "i2b/baselines.hpp"
#include "i2b/rng.hpp"

namespace i2b {

double parse_ratio(const std::string& ratio) {
    const auto colon = ratio.find(':');
    if (colon != std::string::npos) {
        long a = 0, b = 0;
        const char* s = ratio.c_str();
        auto r1 = std::from_chars(s, s + colon, a);
        auto r2 = std::from_chars(s + colon + 1, s + ratio.size(), b);
        if (r1.ec != std::errc() || r1.ptr != s + colon || r2.ec != std::errc() ||
            r2.ptr != s + ratio.size() || a <= 0 || b <= 0)
            throw std::invalid_argument("unrecognized ratio '" + ratio +
                                        "' (use a:b with positive integers, e.g. 1:1)");
        return static_cast<double>(a) / static_cast<double>(a + b);
    }
    double p = 0.0;
    const auto r = std::from_chars(ratio.data(), ratio.data() + ratio.size(), p);
    if (r.ec != std::errc() || r.ptr != ratio.data() + ratio.size() || !(p > 0.0 && p < 1.0))
        throw std::invalid_argument("unrecognized ratio '" + ratio +
                                    "' (use a:b or a train fraction in (0,1))");
    return p;
}

std::vector<Split> make_splits(const std::vector<int>& labels, const std::string& ratio,
                               int n_seeds, uint64_t base_seed) {
    if (labels.empty()) throw std::invalid_argument("splits: empty dataset");
    if (n_seeds < 1) throw std::invalid_argument("splits: n_seeds must be >= 1");
    const double p = parse_ratio(ratio);

    std::vector<int> cls[2];
    for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1)
            throw std::invalid_argument("splits: labels must be 0/1");
        cls[labels[i]].push_back(static_cast<int>(i));
    }

    size_t n_train[2];
    for (int c = 0; c < 2; ++c) {
        const size_t n = cls[c].size();
        n_train[c] = static_cast<size_t>(std::lround(p * static_cast<double>(n)));
        if (n_train[c] == 0 || n_train[c] >= n)
            throw std::runtime_error(
                "ratio " + ratio + " leaves class " + std::to_string(c) + " with no " +
                (n_train[c] == 0 ? "training" : "test") + " graphs (" + std::to_string(n) +
                " in class); use a milder ratio or more data");
    }

    std::vector<Split> splits;
    splits.reserve(n_seeds);
    for (int s = 0; s < n_seeds; ++s) {
        Split split;
        split.ratio = ratio;
        split.seed = base_seed + static_cast<uint64_t>(s);
        Rng rng(split.seed);
        for (int c = 0; c < 2; ++c) {
            std::vector<int> order = cls[c];
            rng.shuffle(order);
            split.train.insert(split.train.end(), order.begin(), order.begin() + n_train[c]);
            split.test.insert(split.test.end(), order.begin() + n_train[c], order.end());
        }
        std::sort(split.train.begin(), split.train.end());
        std::sort(split.test.begin(), split.test.end());
        splits.push_back(std::move(split));
    }
    return splits;
}

const std::vector<std::string> kAllMethods = {"i2bgnn-v", "i2bgnn-t", "fgsd+knn", "netlsd+knn"};

bool is_known_method(const std::string& method) {
    return std::find(kAllMethods.begin(), kAllMethods.end(), method) != kAllMethods.end();
}

namespace {

std::vector<int> dataset_labels(const std::vector<Subgraph>& dataset) {
    std::vector<int> labels;
    labels.reserve(dataset.size());
    for (const Subgraph& s : dataset) {
        if (s.label < 0) throw std::runtime_error("protocol: dataset contains unlabeled subgraphs");
        labels.push_back(s.label);
    }
    return labels;
}

// Per-graph quantities that do not depend on the split, so each protocol
// computes them at most once.
struct SignatureCache {
    bool have_fgsd = false;
    std::vector<std::vector<double>> fgsd_dists;  // harmonic-distance multisets
    std::vector<double> fgsd_max;                 // max distance per graph
    bool have_netlsd = false;
    std::vector<std::vector<double>> netlsd;

    void ensure_fgsd(const std::vector<Subgraph>& dataset) {
        if (have_fgsd) return;
        fgsd_dists.resize(dataset.size());
        fgsd_max.assign(dataset.size(), 0.0);
        for (size_t i = 0; i < dataset.size(); ++i) {
            fgsd_dists[i] = harmonic_distances(dataset[i]);
            for (double d : fgsd_dists[i]) fgsd_max[i] = std::max(fgsd_max[i], d);
        }
        have_fgsd = true;
    }
    void ensure_netlsd(const std::vector<Subgraph>& dataset, int scales) {
        if (have_netlsd) return;
        netlsd = netlsd_signatures(dataset, netlsd_timescales(scales), 1);
        have_netlsd = true;
    }
};

std::vector<double> histogram_of(const std::vector<double>& dists, int bins, double range) {
    std::vector<double> hist(bins, 0.0);
    const double width = range / bins;
    for (double d : dists) {
        int bin = static_cast<int>(std::floor(d / width));
        hist[std::clamp(bin, 0, bins - 1)] += 1.0;
    }
    return hist;
}

Metrics eval_knn(const std::vector<std::vector<double>>& sigs, const std::vector<int>& labels,
                 const Split& split, int k, int threads) {
    KnnModel model;
    model.k = k;
    for (int idx : split.train) {
        model.points.push_back(sigs[idx]);
        model.labels.push_back(labels[idx]);
    }
    std::vector<std::vector<double>> queries;
    std::vector<int> truth;
    for (int idx : split.test) {
        queries.push_back(sigs[idx]);
        truth.push_back(labels[idx]);
    }
    return evaluate(knn_predict_all(model, queries, threads), truth);
}

Metrics eval_method(const std::vector<Subgraph>& dataset, const std::vector<int>& labels,
                    const Split& split, const std::string& method, const ProtocolConfig& cfg,
                    SignatureCache& cache) {
    if (method == "i2bgnn-v" || method == "i2bgnn-t") {
        TrainConfig tc = cfg.train;
        tc.variant = method == "i2bgnn-v" ? Variant::Volume : Variant::Frequency;
        tc.seed = split.seed;
        const TrainResult result = train(dataset, split.train, tc);
        const auto preds = predict(result.params, dataset, split.test, tc.variant,
                                   tc.weight_transform, tc.row_normalize_features, tc.batch_size);
        std::vector<int> truth;
        for (int idx : split.test) truth.push_back(labels[idx]);
        return evaluate(preds, truth);
    }
    if (method == "fgsd+knn") {
        cache.ensure_fgsd(dataset);
        // Histogram range calibrated on the training side only, with
        // headroom so unseen test distances rarely clamp.
        double mx = 0.0;
        for (int idx : split.train) mx = std::max(mx, cache.fgsd_max[idx]);
        const double range = mx > 0.0 ? 2.0 * mx : 1.0;
        std::vector<std::vector<double>> sigs(dataset.size());
        for (size_t i = 0; i < dataset.size(); ++i)
            sigs[i] = histogram_of(cache.fgsd_dists[i], cfg.fgsd_bins, range);
        return eval_knn(sigs, labels, split, cfg.knn_k, cfg.threads);
    }
    if (method == "netlsd+knn") {
        cache.ensure_netlsd(dataset, cfg.netlsd_scales);
        return eval_knn(cache.netlsd, labels, split, cfg.knn_k, cfg.threads);
    }
    throw std::invalid_argument("unknown method '" + method +
                                "' (expected i2bgnn-v, i2bgnn-t, fgsd+knn, or netlsd+knn)");
}

Metrics mean_of(const std::vector<Metrics>& per_seed) {
    Metrics m;
    for (const Metrics& s : per_seed) {
        m.precision += s.precision;
        m.recall += s.recall;
        m.f1 += s.f1;
    }
    const double n = static_cast<double>(per_seed.size());
    m.precision /= n;
    m.recall /= n;
    m.f1 /= n;
    return m;
}

}  // namespace

std::vector<MethodReport> run_comparison(const std::vector<Subgraph>& dataset,
                                         const std::vector<std::string>& methods,
                                         const ProtocolConfig& cfg) {
    if (methods.empty()) throw std::invalid_argument("comparison: empty method list");
    for (const auto& m : methods)
        if (!is_known_method(m)) throw std::invalid_argument("unknown method '" + m + "'");

    const auto labels = dataset_labels(dataset);
    const auto splits = make_splits(labels, cfg.ratio, cfg.n_seeds, cfg.seed);
    SignatureCache cache;

    std::vector<MethodReport> reports;
    for (const auto& method : methods) {
        MethodReport report;
        report.method = method;
        for (const Split& split : splits)
            report.per_seed.push_back(eval_method(dataset, labels, split, method, cfg, cache));
        report.mean = mean_of(report.per_seed);
        reports.push_back(std::move(report));
    }
    return reports;
}

std::vector<DepthReport> run_depth_study(const TransactionGraph& g, const CallTable& calls,
                                         const FeatureSchema& schema,
                                         const std::vector<AccountHandle>& accounts,
                                         const SamplingConfig& sampling,
                                         const ProtocolConfig& cfg) {
    std::vector<int> labels;
    labels.reserve(accounts.size());
    for (AccountHandle a : accounts) {
        const int lbl = g.label(a);
        if (lbl < 0) throw std::runtime_error("depth study: account without label");
        labels.push_back(lbl);
    }
    // One split family shared by both depths: accounts, not subgraphs, are
    // what gets split, so the per-seed results pair up.
    const auto splits = make_splits(labels, cfg.ratio, cfg.n_seeds, cfg.seed);

    std::vector<DepthReport> reports;
    for (int hops = 1; hops <= 2; ++hops) {
        SamplingConfig sc = sampling;
        sc.hops = hops;
        auto dataset = extract_dataset(g, accounts, sc, cfg.threads);
        for (Subgraph& sub : dataset) build_features(sub, calls, schema);

        DepthReport report;
        report.hops = hops;
        const std::string method = cfg.train.variant == Variant::Volume ? "i2bgnn-v" : "i2bgnn-t";
        SignatureCache cache;
        for (const Split& split : splits)
            report.per_seed.push_back(eval_method(dataset, labels, split, method, cfg, cache));
        report.mean = mean_of(report.per_seed);
        reports.push_back(std::move(report));
    }
    return reports;
}

std::vector<SweepCell> run_split_sweep(const std::vector<Subgraph>& dataset,
                                       const std::vector<std::string>& ratios,
                                       const std::vector<std::string>& methods,
                                       const ProtocolConfig& cfg) {
    if (ratios.empty()) throw std::invalid_argument("sweep: empty ratio list");
    if (methods.empty()) throw std::invalid_argument("sweep: empty method list");
    for (const auto& m : methods)
        if (!is_known_method(m)) throw std::invalid_argument("unknown method '" + m + "'");
    for (const auto& r : ratios) parse_ratio(r);  // fail fast on bad tokens

    const auto labels = dataset_labels(dataset);
    SignatureCache cache;

    std::vector<SweepCell> cells;
    for (const auto& ratio : ratios) {
        const auto splits = make_splits(labels, ratio, cfg.n_seeds, cfg.seed);
        for (const auto& method : methods) {
            SweepCell cell;
            cell.ratio = ratio;
            cell.method = method;
            for (const Split& split : splits)
                cell.per_seed.push_back(eval_method(dataset, labels, split, method, cfg, cache));
            cell.mean = mean_of(cell.per_seed);
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

// --- output -----------------------------------------------------------------

namespace {

void write_echo(std::ofstream& out, const ConfigEcho& echo) {
    for (const auto& [key, value] : echo) out << "# " << key << " = " << value << '\n';
}

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void write_metric_row(std::ofstream& out, const std::string& prefix, const std::string& seed,
                      const Metrics& m) {
    out << prefix << seed << ',' << fmt6(m.precision) << ',' << fmt6(m.recall) << ','
        << fmt6(m.f1) << '\n';
}

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

}  // namespace

void write_comparison_csv(const std::string& path, const std::vector<MethodReport>& reports,
                          const ConfigEcho& echo) {
    auto out = open_csv(path);
    write_echo(out, echo);
    out << "method,seed,precision,recall,f1\n";
    for (const auto& r : reports) {
        for (size_t s = 0; s < r.per_seed.size(); ++s)
            write_metric_row(out, r.method + ",", std::to_string(s), r.per_seed[s]);
        write_metric_row(out, r.method + ",", "mean", r.mean);
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

void write_depth_csv(const std::string& path, const std::vector<DepthReport>& reports,
                     const ConfigEcho& echo) {
    auto out = open_csv(path);
    write_echo(out, echo);
    out << "hops,seed,precision,recall,f1\n";
    for (const auto& r : reports) {
        for (size_t s = 0; s < r.per_seed.size(); ++s)
            write_metric_row(out, std::to_string(r.hops) + ",", std::to_string(s), r.per_seed[s]);
        write_metric_row(out, std::to_string(r.hops) + ",", "mean", r.mean);
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

void write_sweep_csv(const std::string& path, const std::vector<SweepCell>& cells,
                     const ConfigEcho& echo) {
    auto out = open_csv(path);
    write_echo(out, echo);
    out << "ratio,method,seed,precision,recall,f1\n";
    for (const auto& c : cells) {
        for (size_t s = 0; s < c.per_seed.size(); ++s)
            write_metric_row(out, c.ratio + "," + c.method + ",", std::to_string(s),
                             c.per_seed[s]);
        write_metric_row(out, c.ratio + "," + c.method + ",", "mean", c.mean);
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

void print_comparison(std::ostream& out, const std::vector<MethodReport>& reports) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-12s %10s %10s %10s", "method", "precision", "recall", "f1");
    out << buf << '\n';
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, "%-12s %10.4f %10.4f %10.4f", r.method.c_str(),
                      r.mean.precision, r.mean.recall, r.mean.f1);
        out << buf << '\n';
    }
}

void print_depth(std::ostream& out, const std::vector<DepthReport>& reports) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-6s %10s %10s %10s", "hops", "precision", "recall", "f1");
    out << buf << '\n';
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, "%-6d %10.4f %10.4f %10.4f", r.hops, r.mean.precision,
                      r.mean.recall, r.mean.f1);
        out << buf << '\n';
    }
    if (reports.size() == 2) {
        std::snprintf(buf, sizeof buf, "paired mean F1 delta (2-hop - 1-hop): %+.4f",
                      reports[1].mean.f1 - reports[0].mean.f1);
        out << buf << '\n';
    }
}

void print_sweep(std::ostream& out, const std::vector<SweepCell>& cells) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-8s %-12s %10s %10s %10s", "ratio", "method", "precision",
                  "recall", "f1");
    out << buf << '\n';
    for (const auto& c : cells) {
        std::snprintf(buf, sizeof buf, "%-8s %-12s %10.4f %10.4f %10.4f", c.ratio.c_str(),
                      c.method.c_str(), c.mean.precision, c.mean.recall, c.mean.f1);
        out << buf << '\n';
    }
}

}  // namespace i2b
