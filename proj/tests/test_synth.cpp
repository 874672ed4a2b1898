#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "i2b/baselines.hpp"
#include "i2b/graph.hpp"
#include "i2b/sampler.hpp"
#include "i2b/synth.hpp"

using namespace i2b;

namespace {

bool same_data(const SynthData& a, const SynthData& b) {
    if (a.edges.size() != b.edges.size() || a.labels != b.labels || a.calls != b.calls)
        return false;
    for (size_t i = 0; i < a.edges.size(); ++i) {
        const auto& x = a.edges[i];
        const auto& y = b.edges[i];
        if (x.src != y.src || x.dst != y.dst || x.volume != y.volume || x.count != y.count)
            return false;
    }
    return true;
}

// rows touching each labeled account, keyed by class
std::map<int, std::vector<double>> degree_samples(const SynthData& data) {
    std::unordered_map<std::string, int> cls;
    for (const auto& [name, c] : data.labels) cls[name] = c;
    std::unordered_map<std::string, double> deg;
    for (const auto& e : data.edges) {
        if (cls.count(e.src)) deg[e.src] += 1.0;
        if (cls.count(e.dst)) deg[e.dst] += 1.0;
    }
    std::map<int, std::vector<double>> out;
    for (const auto& [name, c] : data.labels) out[c].push_back(deg[name]);
    return out;
}

std::map<int, std::vector<double>> call_total_samples(const SynthData& data) {
    std::unordered_map<std::string, int> cls;
    for (const auto& [name, c] : data.labels) cls[name] = c;
    std::unordered_map<std::string, double> tot;
    for (const auto& [name, contract, count] : data.calls)
        if (cls.count(name)) tot[name] += static_cast<double>(count);
    std::map<int, std::vector<double>> out;
    for (const auto& [name, c] : data.labels) out[c].push_back(tot[name]);
    return out;
}

// two-sample Kolmogorov-Smirnov statistic: sup |F_a - F_b|
double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                                 static_cast<double>(j) / b.size()));
    }
    return d;
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
    SynthConfig cfg;
    cfg.per_class = 25;
    cfg.seed = 77;
    const auto a = generate(cfg);
    const auto b = generate(cfg);
    CHECK(same_data(a, b));

    cfg.seed = 78;
    const auto c = generate(cfg);
    CHECK_FALSE(same_data(a, c));
}

TEST_CASE("labeled accounts are balanced and transacting") {
    SynthConfig cfg;
    cfg.per_class = 30;
    cfg.seed = 3;
    const auto data = generate(cfg);

    int n0 = 0, n1 = 0;
    for (const auto& [name, c] : data.labels) (c == 0 ? n0 : n1)++;
    CHECK(n0 == 30);
    CHECK(n1 == 30);

    const auto deg = degree_samples(data);
    for (const auto& [c, samples] : deg) {
        REQUIRE(static_cast<int>(samples.size()) == 30);
        for (double d : samples) CHECK(d >= 1.0);
    }
}

TEST_CASE("config validation rejects out-of-range settings") {
    SynthConfig cfg;
    cfg.per_class = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SynthConfig{};
    cfg.contracts = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SynthConfig{};
    cfg.noise = -0.1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.noise = 1.1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SynthConfig{};
    cfg.background_factor = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("materialize builds a labeled graph and call table") {
    SynthConfig cfg;
    cfg.per_class = 20;
    cfg.contracts = 10;
    cfg.seed = 11;
    const auto data = generate(cfg);
    auto [g, calls] = materialize(data);

    CHECK(g.labeled_accounts().size() == 40);
    CHECK(g.label_only_accounts().empty());
    CHECK(g.account_count() >= 40);
    CHECK(calls.vocab.size() <= 10);

    auto [g3, calls3] = materialize(data, 3);
    CHECK(calls3.vocab.size() == 3);
}

TEST_CASE("csv round trip reproduces the in-memory graph") {
    SynthConfig cfg;
    cfg.per_class = 15;
    cfg.seed = 21;
    const auto data = generate(cfg);

    const auto dir = std::filesystem::temp_directory_path() / "i2b_synth_rt";
    std::filesystem::create_directories(dir);
    const auto ep = (dir / "edges.csv").string();
    const auto lp = (dir / "labels.csv").string();
    const auto cp = (dir / "calls.csv").string();
    save_synth_csv(data, ep, lp, cp);

    TransactionGraph g2 = ingest_edges(read_edge_file(ep));
    ingest_labels_into(g2, read_label_file(lp, {{"0", 0}, {"1", 1}}));

    auto [g1, calls1] = materialize(data);
    CHECK(g1.account_count() == g2.account_count());
    CHECK(g1.edge_count() == g2.edge_count());
    CHECK(g1.labeled_accounts() == g2.labeled_accounts());
    for (AccountHandle a = 0; a < g1.account_count(); ++a) {
        CHECK(g1.name(a) == g2.name(a));
        CHECK(g1.label(a) == g2.label(a));
    }
    const auto rt_calls = read_call_file(cp);
    CHECK(rt_calls == data.calls);
    std::filesystem::remove_all(dir);
}

TEST_CASE("noise drives the classes from distinct to indistinguishable") {
    SynthConfig cfg;
    cfg.per_class = 400;
    cfg.seed = 99;

    cfg.noise = 0.0;
    const auto clean = generate(cfg);
    cfg.noise = 1.0;
    const auto mixed = generate(cfg);

    auto deg_clean = degree_samples(clean);
    auto deg_mixed = degree_samples(mixed);
    CHECK(ks_statistic(deg_clean[0], deg_clean[1]) > 0.4);
    CHECK(ks_statistic(deg_mixed[0], deg_mixed[1]) < 0.12);

    auto call_clean = call_total_samples(clean);
    auto call_mixed = call_total_samples(mixed);
    CHECK(ks_statistic(call_clean[0], call_clean[1]) > 0.4);
    CHECK(ks_statistic(call_mixed[0], call_mixed[1]) < 0.12);
}

TEST_CASE("topology baseline accuracy decays with noise") {
    auto accuracy_at = [](double noise) {
        SynthConfig cfg;
        cfg.per_class = 40;
        cfg.noise = noise;
        cfg.seed = 5;
        auto [g, calls] = materialize(generate(cfg));
        SamplingConfig sc;
        sc.hops = 1;
        const auto dataset = extract_dataset(g, g.labeled_accounts(), sc, 2);

        std::vector<int> train, test;
        for (int i = 0; i < static_cast<int>(dataset.size()); ++i)
            (i % 2 == 0 ? train : test).push_back(i);
        const double range = std::max(1e-9, 2.0 * max_harmonic_distance(dataset, train));
        const auto sigs = fgsd_signatures(dataset, 32, range, 2);

        KnnModel model;
        for (int i : train) {
            model.points.push_back(sigs[i]);
            model.labels.push_back(dataset[i].label);
        }
        int correct = 0;
        for (int i : test)
            if (knn_predict(model, sigs[i]) == dataset[i].label) ++correct;
        return static_cast<double>(correct) / test.size();
    };

    const double clean = accuracy_at(0.0);
    const double noisy = accuracy_at(1.0);
    CHECK(clean > 0.7);
    CHECK(noisy < clean - 0.1);
}
