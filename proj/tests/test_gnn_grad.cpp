#include <doctest.h>

#include <cmath>

#include "i2b/gnn.hpp"
#include "i2b/rng.hpp"
#include "oracles.hpp"

using namespace i2b;

namespace {

double loss_at(const BatchedGraphs& batch, const ModelParams& p) {
    const auto trace = forward(batch, p, 0.0, false);
    return batch_loss(trace, batch.labels);
}

// max relative error between analytic and central finite differences over
// every entry of one parameter tensor
double fd_check_array(BatchedGraphs& batch, ModelParams& p, double* values,
                      const double* grad, size_t n) {
    constexpr double eps = 1e-5;
    double worst = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double keep = values[i];
        values[i] = keep + eps;
        const double up = loss_at(batch, p);
        values[i] = keep - eps;
        const double down = loss_at(batch, p);
        values[i] = keep;
        const double fd = (up - down) / (2.0 * eps);
        const double rel =
            std::abs(grad[i] - fd) / std::max({std::abs(grad[i]), std::abs(fd), 1e-6});
        worst = std::max(worst, rel);
    }
    return worst;
}

BatchedGraphs random_batch(Rng& rng, int n_graphs, int feat_dim) {
    std::vector<Subgraph> dataset;
    std::vector<int> idx;
    for (int i = 0; i < n_graphs; ++i) {
        auto sub = test::random_subgraph(rng, 6, feat_dim);
        sub.label = static_cast<int>(rng.uniform_int(2));
        dataset.push_back(std::move(sub));
        idx.push_back(i);
    }
    return make_batch(dataset, idx, Variant::Volume, WeightTransform::Log1p, false);
}

}  // namespace

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(123);
    for (int trial = 0; trial < 8; ++trial) {
        auto batch = random_batch(rng, 1 + static_cast<int>(rng.uniform_int(3)), 4);
        auto params = init_params(4, 5, rng);

        const auto trace = forward(batch, params, 0.0, false);
        Gradients grads;
        loss_and_backward(batch, trace, params, grads);

        CHECK(fd_check_array(batch, params, params.w0.a.data(), grads.w0.a.data(),
                             params.w0.a.size()) < 1e-4);
        CHECK(fd_check_array(batch, params, params.w1.a.data(), grads.w1.a.data(),
                             params.w1.a.size()) < 1e-4);
        CHECK(fd_check_array(batch, params, params.w2.a.data(), grads.w2.a.data(),
                             params.w2.a.size()) < 1e-4);
        CHECK(fd_check_array(batch, params, params.b.data(), grads.b.data(),
                             params.b.size()) < 1e-4);
    }
}

TEST_CASE("input gradients match finite differences") {
    Rng rng(321);
    for (int trial = 0; trial < 4; ++trial) {
        auto batch = random_batch(rng, 2, 4);
        auto params = init_params(4, 5, rng);

        const auto trace = forward(batch, params, 0.0, false);
        Gradients grads;
        loss_and_backward(batch, trace, params, grads, true);
        REQUIRE(grads.x.rows == batch.n_nodes());
        REQUIRE(grads.x.cols == 4);

        constexpr double eps = 1e-5;
        for (int r = 0; r < batch.n_nodes(); ++r) {
            for (auto& [col, val] : batch.x.rows[r]) {
                const double keep = val;
                val = keep + eps;
                const double up = loss_at(batch, params);
                val = keep - eps;
                const double down = loss_at(batch, params);
                val = keep;
                const double fd = (up - down) / (2.0 * eps);
                const double g = grads.x.at(r, col);
                const double rel = std::abs(g - fd) / std::max({std::abs(g), std::abs(fd), 1e-6});
                CHECK(rel < 1e-4);
            }
        }
    }
}

TEST_CASE("dropout draws are deterministic and masks replay in backward") {
    Rng rng(55);
    auto batch = random_batch(rng, 3, 4);
    auto params = init_params(4, 8, rng);

    Rng d1(99), d2(99);
    const auto t1 = forward(batch, params, 0.3, true, &d1);
    const auto t2 = forward(batch, params, 0.3, true, &d2);
    CHECK(t1.keep1 == t2.keep1);
    CHECK(t1.keep2 == t2.keep2);
    CHECK(t1.probs.a == t2.probs.a);
    CHECK(t1.keep_prob == doctest::Approx(0.7));

    // the masks actually zero entries
    size_t dropped = 0;
    for (size_t i = 0; i < t1.keep1.size(); ++i)
        if (!t1.keep1[i]) {
            CHECK(t1.h1.a[i] == 0.0);
            ++dropped;
        }
    CHECK(dropped > 0);

    // backward on a dropout trace runs and produces finite gradients
    Gradients grads;
    const double loss = loss_and_backward(batch, t1, params, grads);
    CHECK(std::isfinite(loss));
    for (double v : grads.w0.a) CHECK(std::isfinite(v));

    // dropout-off traces carry no masks
    const auto t3 = forward(batch, params, 0.0, false);
    CHECK(t3.keep1.empty());
    CHECK(t3.keep2.empty());

    // surviving entries scale by 1/keep_prob
    for (size_t i = 0; i < t1.keep1.size(); ++i)
        if (t1.keep1[i])
            CHECK(t1.h1.a[i] == doctest::Approx(t3.h1.a[i] / 0.7).epsilon(1e-12));
}

TEST_CASE("dropout requires an rng in training mode") {
    Rng rng(77);
    auto batch = random_batch(rng, 1, 4);
    auto params = init_params(4, 5, rng);
    CHECK_THROWS_AS(forward(batch, params, 0.3, true, nullptr), std::invalid_argument);
}
