#include "i2b/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <Eigen/Dense>

namespace i2b {

namespace {

// Static partition: worker w handles indices [w*n/t, (w+1)*n/t). Each slot is
// written by exactly one worker, so the result is independent of scheduling.
template <typename Fn>
void parallel_for(size_t n, int threads, Fn fn) {
    if (threads <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const size_t t = std::min<size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (size_t w = 0; w < t; ++w) {
        const size_t lo = w * n / t;
        const size_t hi = (w + 1) * n / t;
        pool.emplace_back([lo, hi, &fn] {
            for (size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

Eigen::MatrixXd to_eigen(const Matrix& m) {
    Eigen::MatrixXd out(m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) out(i, j) = m.at(i, j);
    return out;
}

}  // namespace

Matrix binary_laplacian(const Subgraph& sub) {
    if (!sub.symmetric)
        throw std::runtime_error("baseline signatures require symmetrized subgraphs");
    const int n = sub.node_count();
    Matrix adj(n, n);
    for (const SubgraphEdge& e : sub.edges) {
        adj.at(e.u, e.v) = 1.0;
        adj.at(e.v, e.u) = 1.0;
    }
    std::vector<double> deg(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) deg[i] += adj.at(i, j);

    Matrix lap(n, n);
    for (int i = 0; i < n; ++i) {
        if (deg[i] == 0.0) continue;  // isolated node: zero row, zero eigenvalue
        lap.at(i, i) = 1.0;
        for (int j = 0; j < n; ++j) {
            if (adj.at(i, j) != 0.0)
                lap.at(i, j) -= adj.at(i, j) / std::sqrt(deg[i] * deg[j]);
        }
    }
    return lap;
}

std::vector<double> symmetric_spectrum(const Matrix& m) {
    if (m.rows != m.cols) throw std::invalid_argument("spectrum: matrix not square");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_eigen(m),
                                                          Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigendecomposition failed");
    const auto& ev = solver.eigenvalues();
    return std::vector<double>(ev.data(), ev.data() + ev.size());
}

std::vector<double> harmonic_distances(const Subgraph& sub) {
    const int n = sub.node_count();
    if (n < 2) return {};
    const Eigen::MatrixXd lap = to_eigen(binary_laplacian(sub));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigendecomposition failed");

    // Moore-Penrose pseudoinverse: invert only the numerically nonzero part
    // of the spectrum.
    Eigen::VectorXd inv = solver.eigenvalues();
    for (int i = 0; i < inv.size(); ++i) inv(i) = inv(i) > 1e-10 ? 1.0 / inv(i) : 0.0;
    const Eigen::MatrixXd pinv =
        solver.eigenvectors() * inv.asDiagonal() * solver.eigenvectors().transpose();

    std::vector<double> out;
    out.reserve(static_cast<size_t>(n) * (n - 1) / 2);
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y)
            out.push_back(pinv(x, x) + pinv(y, y) - 2.0 * pinv(x, y));
    return out;
}

double max_harmonic_distance(const std::vector<Subgraph>& dataset,
                             const std::vector<int>& indices) {
    double mx = 0.0;
    for (int idx : indices)
        for (double d : harmonic_distances(dataset.at(idx))) mx = std::max(mx, d);
    return mx;
}

std::vector<double> fgsd_signature(const Subgraph& sub, int bins, double range) {
    if (bins < 1) throw std::invalid_argument("fgsd: bins must be positive");
    if (!(range > 0.0)) throw std::invalid_argument("fgsd: range must be positive");
    std::vector<double> hist(bins, 0.0);
    const double width = range / bins;
    for (double d : harmonic_distances(sub)) {
        int bin = static_cast<int>(std::floor(d / width));
        bin = std::clamp(bin, 0, bins - 1);
        hist[bin] += 1.0;
    }
    return hist;
}

std::vector<double> netlsd_timescales(int count, double tmin, double tmax) {
    if (count < 1) throw std::invalid_argument("netlsd: need at least one timescale");
    if (!(tmin > 0.0) || tmax < tmin) throw std::invalid_argument("netlsd: bad timescale range");
    std::vector<double> ts(count);
    if (count == 1) {
        ts[0] = tmin;
        return ts;
    }
    const double lo = std::log10(tmin), hi = std::log10(tmax);
    for (int i = 0; i < count; ++i)
        ts[i] = std::pow(10.0, lo + (hi - lo) * i / (count - 1));
    return ts;
}

std::vector<double> netlsd_signature(const Subgraph& sub, const std::vector<double>& timescales) {
    const auto spectrum = symmetric_spectrum(binary_laplacian(sub));
    std::vector<double> sig(timescales.size(), 0.0);
    for (size_t i = 0; i < timescales.size(); ++i) {
        double h = 0.0;
        for (double lambda : spectrum) h += std::exp(-timescales[i] * lambda);
        sig[i] = h;
    }
    return sig;
}

std::vector<std::vector<double>> fgsd_signatures(const std::vector<Subgraph>& dataset, int bins,
                                                 double range, int threads) {
    std::vector<std::vector<double>> out(dataset.size());
    parallel_for(dataset.size(), threads,
                 [&](size_t i) { out[i] = fgsd_signature(dataset[i], bins, range); });
    return out;
}

std::vector<std::vector<double>> netlsd_signatures(const std::vector<Subgraph>& dataset,
                                                   const std::vector<double>& timescales,
                                                   int threads) {
    std::vector<std::vector<double>> out(dataset.size());
    parallel_for(dataset.size(), threads,
                 [&](size_t i) { out[i] = netlsd_signature(dataset[i], timescales); });
    return out;
}

int knn_predict(const KnnModel& model, const std::vector<double>& query) {
    if (model.points.empty()) throw std::runtime_error("knn: empty training set");
    if (model.k < 1) throw std::invalid_argument("knn: k must be positive");

    std::vector<std::pair<double, int>> dist;
    dist.reserve(model.points.size());
    for (size_t i = 0; i < model.points.size(); ++i) {
        const auto& p = model.points[i];
        if (p.size() != query.size()) throw std::runtime_error("knn: dimension mismatch");
        double d2 = 0.0;
        for (size_t j = 0; j < p.size(); ++j) {
            const double diff = p[j] - query[j];
            d2 += diff * diff;
        }
        dist.emplace_back(d2, static_cast<int>(i));
    }
    const size_t k = std::min<size_t>(model.k, dist.size());
    // pair ordering breaks distance ties toward the lower training index
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());

    std::vector<int> votes;
    for (size_t i = 0; i < k; ++i) {
        const int label = model.labels.at(dist[i].second);
        if (label < 0) throw std::runtime_error("knn: unlabeled training point");
        if (label >= static_cast<int>(votes.size())) votes.resize(label + 1, 0);
        votes[label]++;
    }
    int best = 0;
    for (size_t c = 1; c < votes.size(); ++c)
        if (votes[c] > votes[best]) best = static_cast<int>(c);
    return best;
}

std::vector<int> knn_predict_all(const KnnModel& model,
                                 const std::vector<std::vector<double>>& queries, int threads) {
    std::vector<int> out(queries.size());
    parallel_for(queries.size(), threads,
                 [&](size_t i) { out[i] = knn_predict(model, queries[i]); });
    return out;
}

void save_signatures_csv(const std::string& path, const std::vector<Subgraph>& dataset,
                         const std::vector<std::vector<double>>& sigs) {
    if (dataset.size() != sigs.size())
        throw std::invalid_argument("signature export: size mismatch");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    const size_t width = sigs.empty() ? 0 : sigs.front().size();
    out << "id,label";
    for (size_t j = 0; j < width; ++j) out << ",s" << j;
    out << '\n';
    char buf[32];
    for (size_t i = 0; i < sigs.size(); ++i) {
        if (sigs[i].size() != width) throw std::invalid_argument("signature export: ragged rows");
        out << dataset[i].id << ',' << dataset[i].label;
        for (double v : sigs[i]) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace i2b
