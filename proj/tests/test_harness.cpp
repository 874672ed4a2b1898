#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "i2b/features.hpp"
#include "i2b/harness.hpp"
#include "i2b/synth.hpp"

using namespace i2b;

namespace {

struct TinyProblem {
    std::vector<Subgraph> dataset;
    TransactionGraph graph;
    CallTable calls;
    FeatureSchema schema;
};

TinyProblem tiny_problem(int per_class, uint64_t seed) {
    SynthConfig cfg;
    cfg.per_class = per_class;
    cfg.seed = seed;
    auto [g, calls] = materialize(generate(cfg));
    TinyProblem p{{}, std::move(g), std::move(calls), {}};
    p.schema = make_schema(p.calls.vocab, false, FeatureTransform::Log1p);
    SamplingConfig sc;
    sc.hops = 1;
    p.dataset = extract_dataset(p.graph, p.graph.labeled_accounts(), sc, 2);
    for (auto& sub : p.dataset) build_features(sub, p.calls, p.schema);
    return p;
}

ProtocolConfig fast_config() {
    ProtocolConfig cfg;
    cfg.n_seeds = 2;
    cfg.seed = 4;
    cfg.train.hidden = 8;
    cfg.train.epochs = 2;
    cfg.train.batch_size = 8;
    cfg.fgsd_bins = 16;
    cfg.netlsd_scales = 16;
    cfg.threads = 2;
    return cfg;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

}  // namespace

TEST_CASE("ratio parsing accepts a:b and fractions, rejects the rest") {
    CHECK(parse_ratio("1:1") == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(parse_ratio("4:1") == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(parse_ratio("1:4") == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(parse_ratio("3:2") == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(parse_ratio("0.3") == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(parse_ratio("0.75") == doctest::Approx(0.75).epsilon(1e-15));

    for (const char* bad : {"", "abc", "1:0", "0:1", "-1:2", "1:", ":1", "1:2:3",
                            "0", "1", "1.5", "-0.3", "0.5x"})
        CHECK_THROWS_AS(parse_ratio(bad), std::invalid_argument);
}

TEST_CASE("splits are stratified, disjoint and covering") {
    std::vector<int> labels;
    for (int i = 0; i < 100; ++i) labels.push_back(i % 2);

    const auto splits = make_splits(labels, "7:3", 3, 10);
    REQUIRE(splits.size() == 3);
    for (size_t s = 0; s < splits.size(); ++s) {
        const Split& sp = splits[s];
        CHECK(sp.seed == 10 + s);
        CHECK(sp.ratio == "7:3");
        CHECK(sp.train.size() == 70);
        CHECK(sp.test.size() == 30);
        CHECK(std::is_sorted(sp.train.begin(), sp.train.end()));
        CHECK(std::is_sorted(sp.test.begin(), sp.test.end()));

        int train_pos = 0, test_pos = 0;
        std::set<int> seen;
        for (int i : sp.train) {
            train_pos += labels[i];
            seen.insert(i);
        }
        for (int i : sp.test) {
            test_pos += labels[i];
            seen.insert(i);
        }
        CHECK(train_pos == 35);  // exactly half of each side is class 1
        CHECK(test_pos == 15);
        CHECK(seen.size() == 100);  // disjoint cover of the dataset
    }
}

TEST_CASE("splits are reproducible per seed and differ across seeds") {
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i) labels.push_back(i < 30 ? 0 : 1);

    const auto a = make_splits(labels, "1:1", 2, 5);
    const auto b = make_splits(labels, "1:1", 2, 5);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].train == b[i].train);
        CHECK(a[i].test == b[i].test);
    }
    CHECK(a[0].train != a[1].train);  // different seed, different shuffle

    const auto c = make_splits(labels, "1:1", 1, 99);
    CHECK(c[0].train != a[0].train);
}

TEST_CASE("degenerate splits fail with guidance") {
    std::vector<int> small = {0, 0, 1, 1};
    CHECK_THROWS_WITH_AS(make_splits(small, "1:99", 1, 0),
                         doctest::Contains("milder ratio or more data"), std::runtime_error);
    CHECK_THROWS_WITH_AS(make_splits(small, "99:1", 1, 0),
                         doctest::Contains("no test graphs"), std::runtime_error);

    CHECK_THROWS_AS(make_splits({}, "1:1", 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_splits(small, "1:1", 0, 0), std::invalid_argument);
    std::vector<int> bad = {0, 1, 2, 1};
    CHECK_THROWS_AS(make_splits(bad, "1:1", 1, 0), std::invalid_argument);
}

TEST_CASE("method tokens") {
    REQUIRE(kAllMethods.size() == 4);
    for (const auto& m : kAllMethods) CHECK(is_known_method(m));
    CHECK_FALSE(is_known_method("gcn"));
    CHECK_FALSE(is_known_method(""));
}

TEST_CASE("metric evaluation handles zero denominators") {
    const Metrics perfect = evaluate({1, 0, 1, 0}, {1, 0, 1, 0});
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);

    const Metrics inverted = evaluate({0, 1, 0, 1}, {1, 0, 1, 0});
    CHECK(inverted.precision == 0.0);
    CHECK(inverted.recall == 0.0);
    CHECK(inverted.f1 == 0.0);

    // no positive predictions: precision undefined -> 0
    const Metrics silent = evaluate({0, 0, 0, 0}, {1, 0, 1, 0});
    CHECK(silent.precision == 0.0);
    CHECK(silent.recall == 0.0);
    CHECK(silent.f1 == 0.0);

    // half right on the positive side
    const Metrics half = evaluate({1, 0, 0, 0}, {1, 0, 1, 0});
    CHECK(half.precision == 1.0);
    CHECK(half.recall == 0.5);
    CHECK(half.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    CHECK_THROWS_AS(evaluate({1, 0}, {1}), std::invalid_argument);
}

TEST_CASE("comparison runs every requested method and averages per seed") {
    const auto p = tiny_problem(12, 31);
    auto cfg = fast_config();

    const std::vector<std::string> methods = {"i2bgnn-t", "fgsd+knn", "netlsd+knn"};
    const auto reports = run_comparison(p.dataset, methods, cfg);
    REQUIRE(reports.size() == methods.size());
    for (size_t i = 0; i < reports.size(); ++i) {
        CHECK(reports[i].method == methods[i]);
        REQUIRE(static_cast<int>(reports[i].per_seed.size()) == cfg.n_seeds);
        double p_sum = 0.0, r_sum = 0.0, f_sum = 0.0;
        for (const Metrics& m : reports[i].per_seed) {
            CHECK(m.f1 >= 0.0);
            CHECK(m.f1 <= 1.0);
            p_sum += m.precision;
            r_sum += m.recall;
            f_sum += m.f1;
        }
        CHECK(reports[i].mean.precision ==
              doctest::Approx(p_sum / cfg.n_seeds).epsilon(1e-12));
        CHECK(reports[i].mean.recall == doctest::Approx(r_sum / cfg.n_seeds).epsilon(1e-12));
        CHECK(reports[i].mean.f1 == doctest::Approx(f_sum / cfg.n_seeds).epsilon(1e-12));
    }

    // bitwise reproducible, including the trained methods
    const auto again = run_comparison(p.dataset, methods, cfg);
    for (size_t i = 0; i < reports.size(); ++i) {
        for (int s = 0; s < cfg.n_seeds; ++s) {
            CHECK(reports[i].per_seed[s].precision == again[i].per_seed[s].precision);
            CHECK(reports[i].per_seed[s].recall == again[i].per_seed[s].recall);
            CHECK(reports[i].per_seed[s].f1 == again[i].per_seed[s].f1);
        }
    }

    CHECK_THROWS_AS(run_comparison(p.dataset, {}, cfg), std::invalid_argument);
    CHECK_THROWS_WITH_AS(run_comparison(p.dataset, {"svm"}, cfg),
                         doctest::Contains("unknown method"), std::invalid_argument);
}

TEST_CASE("sweep produces one cell per ratio-method pair, ratio-major") {
    const auto p = tiny_problem(12, 47);
    auto cfg = fast_config();

    const std::vector<std::string> ratios = {"1:1", "2:1"};
    const std::vector<std::string> methods = {"fgsd+knn", "netlsd+knn"};
    const auto cells = run_split_sweep(p.dataset, ratios, methods, cfg);
    REQUIRE(cells.size() == 4);
    CHECK(cells[0].ratio == "1:1");
    CHECK(cells[0].method == "fgsd+knn");
    CHECK(cells[1].ratio == "1:1");
    CHECK(cells[1].method == "netlsd+knn");
    CHECK(cells[2].ratio == "2:1");
    CHECK(cells[3].ratio == "2:1");
    for (const auto& c : cells) REQUIRE(static_cast<int>(c.per_seed.size()) == cfg.n_seeds);

    CHECK_THROWS_AS(run_split_sweep(p.dataset, {"nope"}, methods, cfg), std::invalid_argument);
    CHECK_THROWS_AS(run_split_sweep(p.dataset, {}, methods, cfg), std::invalid_argument);
    CHECK_THROWS_AS(run_split_sweep(p.dataset, ratios, {}, cfg), std::invalid_argument);
}

TEST_CASE("depth study reports both hop depths over shared splits") {
    const auto p = tiny_problem(10, 53);
    auto cfg = fast_config();

    SamplingConfig sc;
    const auto reports = run_depth_study(p.graph, p.calls, p.schema,
                                         p.graph.labeled_accounts(), sc, cfg);
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].hops == 1);
    CHECK(reports[1].hops == 2);
    for (const auto& r : reports) {
        REQUIRE(static_cast<int>(r.per_seed.size()) == cfg.n_seeds);
        for (const Metrics& m : r.per_seed) {
            CHECK(m.f1 >= 0.0);
            CHECK(m.f1 <= 1.0);
        }
    }
}

TEST_CASE("csv writers echo configuration and emit fixed-format rows") {
    const Metrics m{1.0, 0.5, 2.0 / 3.0};
    const ConfigEcho echo = {{"ratio", "1:1"}, {"seeds", "1"}};
    const auto dir = std::filesystem::temp_directory_path() / "i2b_harness_csv";
    std::filesystem::create_directories(dir);

    {
        const auto path = (dir / "cmp.csv").string();
        write_comparison_csv(path, {{"fgsd+knn", {m}, m}}, echo);
        const auto lines = read_lines(path);
        REQUIRE(lines.size() == 5);
        CHECK(lines[0] == "# ratio = 1:1");
        CHECK(lines[1] == "# seeds = 1");
        CHECK(lines[2] == "method,seed,precision,recall,f1");
        CHECK(lines[3] == "fgsd+knn,0,1.000000,0.500000,0.666667");
        CHECK(lines[4] == "fgsd+knn,mean,1.000000,0.500000,0.666667");
    }
    {
        const auto path = (dir / "depth.csv").string();
        write_depth_csv(path, {{2, {m}, m}}, echo);
        const auto lines = read_lines(path);
        REQUIRE(lines.size() == 5);
        CHECK(lines[2] == "hops,seed,precision,recall,f1");
        CHECK(lines[3] == "2,0,1.000000,0.500000,0.666667");
        CHECK(lines[4] == "2,mean,1.000000,0.500000,0.666667");
    }
    {
        const auto path = (dir / "sweep.csv").string();
        write_sweep_csv(path, {{"1:1", "netlsd+knn", {m}, m}}, echo);
        const auto lines = read_lines(path);
        REQUIRE(lines.size() == 5);
        CHECK(lines[2] == "ratio,method,seed,precision,recall,f1");
        CHECK(lines[3] == "1:1,netlsd+knn,0,1.000000,0.500000,0.666667");
        CHECK(lines[4] == "1:1,netlsd+knn,mean,1.000000,0.500000,0.666667");
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("console tables include headers and every row") {
    const Metrics m{0.9, 0.8, 0.85};
    std::ostringstream cmp;
    print_comparison(cmp, {{"i2bgnn-v", {m}, m}});
    CHECK(cmp.str().find("method") != std::string::npos);
    CHECK(cmp.str().find("i2bgnn-v") != std::string::npos);
    CHECK(cmp.str().find("0.9000") != std::string::npos);

    std::ostringstream depth;
    print_depth(depth, {{1, {m}, m}, {2, {m}, m}});
    CHECK(depth.str().find("hops") != std::string::npos);
    CHECK(depth.str().find("paired mean F1 delta") != std::string::npos);

    std::ostringstream sweep;
    print_sweep(sweep, {{"1:1", "fgsd+knn", {m}, m}});
    CHECK(sweep.str().find("ratio") != std::string::npos);
    CHECK(sweep.str().find("fgsd+knn") != std::string::npos);
}
