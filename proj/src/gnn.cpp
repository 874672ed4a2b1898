#include "i2b/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "i2b/metrics.hpp"

namespace i2b {

const char* variant_name(Variant v) { return v == Variant::Volume ? "v" : "t"; }

Variant variant_from_name(const std::string& name) {
    if (name == "v" || name == "volume") return Variant::Volume;
    if (name == "t" || name == "frequency") return Variant::Frequency;
    throw std::invalid_argument("unknown variant '" + name + "' (expected v or t)");
}

// --- normalization ----------------------------------------------------------

namespace {

SparseCsr csr_from_triplets(int rows, int cols, std::vector<std::tuple<int, int, double>> trips) {
    std::sort(trips.begin(), trips.end());
    SparseCsr m;
    m.rows = rows;
    m.cols = cols;
    m.row_ptr.assign(rows + 1, 0);
    m.col_idx.reserve(trips.size());
    m.vals.reserve(trips.size());
    for (const auto& [r, c, v] : trips) {
        m.row_ptr[r + 1]++;
        m.col_idx.push_back(c);
        m.vals.push_back(v);
    }
    for (int r = 0; r < rows; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
    return m;
}

double csr_entry(const SparseCsr& m, int r, int c) {
    const auto begin = m.col_idx.begin() + m.row_ptr[r];
    const auto end = m.col_idx.begin() + m.row_ptr[r + 1];
    const auto it = std::lower_bound(begin, end, c);
    if (it == end || *it != c) return 0.0;
    return m.vals[it - m.col_idx.begin()];
}

}  // namespace

NormalizedAdjacency normalize(const SparseCsr& A, WeightTransform wt) {
    if (A.rows != A.cols) throw std::invalid_argument("normalize: matrix not square");
    const int n = A.rows;
    for (int i = 0; i < n; ++i) {
        for (int p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p) {
            const int j = A.col_idx[p];
            const double w = A.vals[p];
            if (!std::isfinite(w)) throw std::invalid_argument("normalize: non-finite weight");
            if (w < 0.0) throw std::invalid_argument("normalize: negative weight");
            if (i == j && w != 0.0) throw std::invalid_argument("normalize: nonzero diagonal");
            if (csr_entry(A, j, i) != w) throw std::invalid_argument("normalize: matrix not symmetric");
        }
    }

    NormalizedAdjacency out;
    // A~ = T(A) + I with the self-loop weight pinned at exactly 1.
    std::vector<std::tuple<int, int, double>> trips;
    trips.reserve(A.col_idx.size() + n);
    for (int i = 0; i < n; ++i) {
        for (int p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p) {
            if (A.col_idx[p] == i) continue;
            const double w = wt == WeightTransform::Log1p ? std::log1p(A.vals[p]) : A.vals[p];
            trips.emplace_back(i, A.col_idx[p], w);
        }
        trips.emplace_back(i, i, 1.0);
    }
    out.a_tilde = csr_from_triplets(n, n, std::move(trips));

    out.d_tilde.assign(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int p = out.a_tilde.row_ptr[i]; p < out.a_tilde.row_ptr[i + 1]; ++p)
            out.d_tilde[i] += out.a_tilde.vals[p];

    std::vector<double> inv_sqrt(n);
    for (int i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(out.d_tilde[i]);

    out.a_hat = out.a_tilde;
    for (int i = 0; i < n; ++i)
        for (int p = out.a_hat.row_ptr[i]; p < out.a_hat.row_ptr[i + 1]; ++p)
            out.a_hat.vals[p] *= inv_sqrt[i] * inv_sqrt[out.a_hat.col_idx[p]];
    return out;
}

SparseCsr subgraph_adjacency_csr(const Subgraph& sub, Variant variant) {
    if (!sub.symmetric)
        throw std::runtime_error("model input requires symmetrized subgraphs");
    std::vector<std::tuple<int, int, double>> trips;
    trips.reserve(sub.edges.size() * 2);
    for (const SubgraphEdge& e : sub.edges) {
        const double w = variant == Variant::Volume ? e.volume : e.frequency;
        trips.emplace_back(e.u, e.v, w);
        trips.emplace_back(e.v, e.u, w);
    }
    return csr_from_triplets(sub.node_count(), sub.node_count(), std::move(trips));
}

// --- model ------------------------------------------------------------------

namespace {

void glorot_fill(Matrix& w, Rng& rng) {
    const double limit = std::sqrt(6.0 / (w.rows + w.cols));
    for (double& x : w.a) x = rng.uniform(-limit, limit);
}

}  // namespace

ModelParams init_params(int feature_dim, int hidden_dim, Rng& rng) {
    ModelParams p;
    p.w0 = Matrix(feature_dim, hidden_dim);
    p.w1 = Matrix(hidden_dim, hidden_dim);
    p.w2 = Matrix(hidden_dim, kNumClasses);
    p.b.assign(kNumClasses, 0.0);
    glorot_fill(p.w0, rng);
    glorot_fill(p.w1, rng);
    glorot_fill(p.w2, rng);
    return p;
}

BatchedGraphs make_batch(const std::vector<Subgraph>& dataset, const std::vector<int>& indices,
                         Variant variant, WeightTransform wt, bool row_normalize_features) {
    if (indices.empty()) throw std::invalid_argument("make_batch: empty batch");

    BatchedGraphs batch;
    batch.graph_offset.push_back(0);
    int offset = 0;
    std::vector<std::tuple<int, int, double>> trips;
    for (size_t gi = 0; gi < indices.size(); ++gi) {
        const Subgraph& sub = dataset.at(indices[gi]);
        const auto norm = normalize(subgraph_adjacency_csr(sub, variant), wt);
        const SparseCsr& ah = norm.a_hat;
        for (int i = 0; i < ah.rows; ++i)
            for (int p = ah.row_ptr[i]; p < ah.row_ptr[i + 1]; ++p)
                trips.emplace_back(offset + i, offset + ah.col_idx[p], ah.vals[p]);

        if (batch.x.cols == 0) batch.x.cols = sub.features.cols;
        if (batch.x.cols != sub.features.cols)
            throw std::invalid_argument("make_batch: inconsistent feature dimension");
        for (const auto& row : sub.features.rows) {
            auto copy = row;
            if (row_normalize_features) {
                double s = 0.0;
                for (const auto& [c, v] : copy) s += v;
                if (s > 0.0)
                    for (auto& [c, v] : copy) v /= s;
            }
            batch.x.rows.push_back(std::move(copy));
        }
        for (int i = 0; i < sub.node_count(); ++i) batch.segment.push_back(static_cast<int>(gi));
        offset += sub.node_count();
        batch.graph_offset.push_back(offset);
        batch.labels.push_back(sub.label);
    }
    batch.a_hat = csr_from_triplets(offset, offset, std::move(trips));
    return batch;
}

Matrix gcn_layer(const SparseCsr& a_hat, const Matrix& H, const Matrix& W, bool relu) {
    Matrix hw;
    matmul(H, W, hw);
    Matrix out;
    spmm(a_hat, hw, out);
    if (relu)
        for (double& x : out.a) x = x > 0.0 ? x : 0.0;
    return out;
}

namespace {

void relu_inplace(const Matrix& pre, Matrix& act) {
    act = pre;
    for (double& x : act.a) x = x > 0.0 ? x : 0.0;
}

void apply_dropout(Matrix& h, std::vector<uint8_t>& keep, double keep_prob, Rng& rng) {
    keep.resize(h.a.size());
    const double inv = 1.0 / keep_prob;
    for (size_t i = 0; i < h.a.size(); ++i) {
        const bool k = rng.uniform01() < keep_prob;
        keep[i] = k;
        h.a[i] = k ? h.a[i] * inv : 0.0;
    }
}

}  // namespace

ForwardTrace forward(const BatchedGraphs& batch, const ModelParams& params, double dropout_rate,
                     bool training, Rng* rng) {
    const int n_nodes = batch.n_nodes();
    const int n_graphs = batch.n_graphs();
    if (n_graphs <= 0 || n_nodes <= 0) throw std::invalid_argument("forward: empty batch");
    if (batch.x.cols != params.w0.rows)
        throw std::invalid_argument("forward: feature dimension mismatch");
    for (int i = 0; i < n_nodes; ++i)
        if (batch.segment[i] < 0 || batch.segment[i] >= n_graphs ||
            i < batch.graph_offset[batch.segment[i]] ||
            i >= batch.graph_offset[batch.segment[i] + 1])
            throw std::invalid_argument("forward: inconsistent segment map");

    const bool use_dropout = training && dropout_rate > 0.0;
    if (use_dropout && rng == nullptr)
        throw std::invalid_argument("forward: dropout requires an rng");

    ForwardTrace t;
    t.keep_prob = use_dropout ? 1.0 - dropout_rate : 1.0;

    Matrix p0;
    sparse_rows_mm(batch.x, params.w0, p0);
    spmm(batch.a_hat, p0, t.z1);
    relu_inplace(t.z1, t.h1);
    if (use_dropout) apply_dropout(t.h1, t.keep1, t.keep_prob, *rng);

    Matrix p1;
    matmul(t.h1, params.w1, p1);
    spmm(batch.a_hat, p1, t.z2);
    relu_inplace(t.z2, t.h2);
    if (use_dropout) apply_dropout(t.h2, t.keep2, t.keep_prob, *rng);

    // Per-feature max over each graph's nodes; strict > keeps the lowest
    // node row on ties, which backprop reuses for routing.
    const int h = params.hidden_dim();
    t.pooled = Matrix(n_graphs, h);
    t.pooled.fill(-std::numeric_limits<double>::infinity());
    t.argmax.assign(static_cast<size_t>(n_graphs) * h, -1);
    for (int i = 0; i < n_nodes; ++i) {
        const int b = batch.segment[i];
        const double* hrow = t.h2.row(i);
        double* prow = t.pooled.row(b);
        int* arow = t.argmax.data() + static_cast<size_t>(b) * h;
        for (int k = 0; k < h; ++k) {
            if (hrow[k] > prow[k]) {
                prow[k] = hrow[k];
                arow[k] = i;
            }
        }
    }
    // A segment whose rows are all equal on some feature never updated argmax
    // past the first row only if strictly greater; seed missing entries with
    // the segment's first node.
    for (int b = 0; b < n_graphs; ++b) {
        int* arow = t.argmax.data() + static_cast<size_t>(b) * h;
        double* prow = t.pooled.row(b);
        for (int k = 0; k < h; ++k) {
            if (arow[k] < 0) {
                arow[k] = batch.graph_offset[b];
                prow[k] = t.h2.at(arow[k], k);
            }
        }
    }

    matmul(t.pooled, params.w2, t.logits);
    for (int b = 0; b < n_graphs; ++b)
        for (int c = 0; c < kNumClasses; ++c) t.logits.at(b, c) += params.b[c];

    t.probs = Matrix(n_graphs, kNumClasses);
    for (int b = 0; b < n_graphs; ++b) {
        const double* lrow = t.logits.row(b);
        double mx = lrow[0];
        for (int c = 1; c < kNumClasses; ++c) mx = std::max(mx, lrow[c]);
        double sum = 0.0;
        for (int c = 0; c < kNumClasses; ++c) sum += std::exp(lrow[c] - mx);
        for (int c = 0; c < kNumClasses; ++c) t.probs.at(b, c) = std::exp(lrow[c] - mx) / sum;
    }
    return t;
}

double batch_loss(const ForwardTrace& trace, const std::vector<int>& labels) {
    const int n = trace.probs.rows;
    if (static_cast<int>(labels.size()) != n)
        throw std::invalid_argument("batch_loss: labels length mismatch");
    double loss = 0.0;
    for (int b = 0; b < n; ++b) {
        const int y = labels[b];
        if (y < 0 || y >= kNumClasses) throw std::invalid_argument("batch_loss: label out of range");
        loss -= std::log(std::max(trace.probs.at(b, y), 1e-300));
    }
    return loss / n;
}

double loss_and_backward(const BatchedGraphs& batch, const ForwardTrace& trace,
                         const ModelParams& params, Gradients& grads, bool want_input_grad) {
    const int n_graphs = batch.n_graphs();
    const int h = params.hidden_dim();
    const double loss = batch_loss(trace, batch.labels);
    if (!std::isfinite(loss)) throw std::runtime_error("non-finite loss (training diverged)");

    // softmax + cross-entropy collapses to (probs - onehot) / B
    Matrix dlogits = trace.probs;
    for (int b = 0; b < n_graphs; ++b) dlogits.at(b, batch.labels[b]) -= 1.0;
    for (double& x : dlogits.a) x /= n_graphs;

    grads.b.assign(kNumClasses, 0.0);
    for (int b = 0; b < n_graphs; ++b)
        for (int c = 0; c < kNumClasses; ++c) grads.b[c] += dlogits.at(b, c);
    matmul_at_b(trace.pooled, dlogits, grads.w2);

    Matrix dg;
    matmul_a_bt(dlogits, params.w2, dg);

    // Max-pool routing: each pooled feature's gradient flows to the node row
    // recorded during forward.
    Matrix dh2(trace.h2.rows, h);
    for (int b = 0; b < n_graphs; ++b) {
        const double* grow = dg.row(b);
        const int* arow = trace.argmax.data() + static_cast<size_t>(b) * h;
        for (int k = 0; k < h; ++k) dh2.at(arow[k], k) += grow[k];
    }

    if (!trace.keep2.empty()) {
        const double inv = 1.0 / trace.keep_prob;
        for (size_t i = 0; i < dh2.a.size(); ++i) dh2.a[i] = trace.keep2[i] ? dh2.a[i] * inv : 0.0;
    }
    for (size_t i = 0; i < dh2.a.size(); ++i)
        if (trace.z2.a[i] <= 0.0) dh2.a[i] = 0.0;

    Matrix dp1;
    spmm(batch.a_hat, dh2, dp1);  // a_hat is symmetric, so A^T = A
    matmul_at_b(trace.h1, dp1, grads.w1);

    Matrix dh1;
    matmul_a_bt(dp1, params.w1, dh1);
    if (!trace.keep1.empty()) {
        const double inv = 1.0 / trace.keep_prob;
        for (size_t i = 0; i < dh1.a.size(); ++i) dh1.a[i] = trace.keep1[i] ? dh1.a[i] * inv : 0.0;
    }
    for (size_t i = 0; i < dh1.a.size(); ++i)
        if (trace.z1.a[i] <= 0.0) dh1.a[i] = 0.0;

    Matrix dp0;
    spmm(batch.a_hat, dh1, dp0);
    grads.w0 = Matrix(params.w0.rows, params.w0.cols);
    sparse_rows_tmm_accum(batch.x, dp0, grads.w0);

    if (want_input_grad) matmul_a_bt(dp0, params.w0, grads.x);

    return loss;
}

// --- training ---------------------------------------------------------------

namespace {

struct AdamState {
    Matrix m_w0, v_w0, m_w1, v_w1, m_w2, v_w2;
    std::vector<double> m_b, v_b;
    long t = 0;

    explicit AdamState(const ModelParams& p)
        : m_w0(p.w0.rows, p.w0.cols), v_w0(p.w0.rows, p.w0.cols),
          m_w1(p.w1.rows, p.w1.cols), v_w1(p.w1.rows, p.w1.cols),
          m_w2(p.w2.rows, p.w2.cols), v_w2(p.w2.rows, p.w2.cols),
          m_b(p.b.size(), 0.0), v_b(p.b.size(), 0.0) {}
};

void adam_update_array(double* x, const double* g, double* m, double* v, size_t n,
                       const TrainConfig& cfg, double bc1, double bc2) {
    for (size_t i = 0; i < n; ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        x[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
}

void adam_step(ModelParams& p, const Gradients& g, AdamState& s, const TrainConfig& cfg) {
    ++s.t;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(s.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(s.t));
    adam_update_array(p.w0.a.data(), g.w0.a.data(), s.m_w0.a.data(), s.v_w0.a.data(),
                      p.w0.a.size(), cfg, bc1, bc2);
    adam_update_array(p.w1.a.data(), g.w1.a.data(), s.m_w1.a.data(), s.v_w1.a.data(),
                      p.w1.a.size(), cfg, bc1, bc2);
    adam_update_array(p.w2.a.data(), g.w2.a.data(), s.m_w2.a.data(), s.v_w2.a.data(),
                      p.w2.a.size(), cfg, bc1, bc2);
    adam_update_array(p.b.data(), g.b.data(), s.m_b.data(), s.v_b.data(), p.b.size(), cfg, bc1,
                      bc2);
}

std::vector<int> predict_with_params(const ModelParams& params,
                                     const std::vector<Subgraph>& dataset,
                                     const std::vector<int>& indices, const TrainConfig& cfg,
                                     int batch_size) {
    std::vector<int> out;
    out.reserve(indices.size());
    for (size_t begin = 0; begin < indices.size(); begin += batch_size) {
        const size_t end = std::min(indices.size(), begin + batch_size);
        const std::vector<int> chunk(indices.begin() + begin, indices.begin() + end);
        const auto batch = make_batch(dataset, chunk, cfg.variant, cfg.weight_transform,
                                      cfg.row_normalize_features);
        const auto trace = forward(batch, params, 0.0, false);
        for (int b = 0; b < batch.n_graphs(); ++b)
            out.push_back(trace.probs.at(b, 1) > trace.probs.at(b, 0) ? 1 : 0);
    }
    return out;
}

}  // namespace

TrainResult train(const std::vector<Subgraph>& dataset, const std::vector<int>& train_indices,
                  const TrainConfig& cfg) {
    if (dataset.empty() || train_indices.empty())
        throw std::invalid_argument("train: empty dataset or split");
    if (cfg.epochs < 1 || cfg.batch_size < 1 || cfg.hidden < 1)
        throw std::invalid_argument("train: invalid hyperparameters");
    const int f_dim = dataset[train_indices.front()].features.cols;
    for (int idx : train_indices) {
        const Subgraph& s = dataset.at(idx);
        if (s.label < 0) throw std::runtime_error("train: unlabeled subgraph in split");
        if (s.features.cols != f_dim) throw std::runtime_error("train: feature dimension varies");
    }

    Rng rng(cfg.seed);

    // Stratified validation slice from the tail of a per-class shuffle.
    std::vector<int> cls0, cls1;
    for (int idx : train_indices)
        (dataset[idx].label == 1 ? cls1 : cls0).push_back(idx);
    rng.shuffle(cls0);
    rng.shuffle(cls1);
    auto carve = [&](std::vector<int>& cls, std::vector<int>& fit, std::vector<int>& val) {
        size_t n_val = static_cast<size_t>(std::floor(cfg.val_fraction * cls.size() + 0.5));
        if (n_val >= cls.size() && !cls.empty()) n_val = cls.size() - 1;
        fit.insert(fit.end(), cls.begin(), cls.end() - n_val);
        val.insert(val.end(), cls.end() - n_val, cls.end());
    };
    std::vector<int> fit_idx, val_idx;
    carve(cls0, fit_idx, val_idx);
    carve(cls1, fit_idx, val_idx);
    const bool has_val = !val_idx.empty();

    TrainResult result;
    ModelParams params = init_params(f_dim, cfg.hidden, rng);
    AdamState adam(params);

    std::vector<int> val_labels;
    for (int idx : val_idx) val_labels.push_back(dataset[idx].label);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(fit_idx);
        double loss_sum = 0.0;
        size_t n_seen = 0;
        for (size_t begin = 0; begin < fit_idx.size(); begin += cfg.batch_size) {
            const size_t end = std::min(fit_idx.size(), begin + cfg.batch_size);
            const std::vector<int> chunk(fit_idx.begin() + begin, fit_idx.begin() + end);
            const auto batch = make_batch(dataset, chunk, cfg.variant, cfg.weight_transform,
                                          cfg.row_normalize_features);
            const auto trace = forward(batch, params, cfg.dropout, true, &rng);
            Gradients grads;
            double loss;
            try {
                loss = loss_and_backward(batch, trace, params, grads);
            } catch (const std::runtime_error& e) {
                throw std::runtime_error(std::string(e.what()) + " at epoch " +
                                         std::to_string(epoch) + ", batch " +
                                         std::to_string(begin / cfg.batch_size));
            }
            adam_step(params, grads, adam, cfg);
            loss_sum += loss * static_cast<double>(chunk.size());
            n_seen += chunk.size();
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = loss_sum / static_cast<double>(n_seen);
        if (has_val) {
            const auto preds = predict_with_params(params, dataset, val_idx, cfg, cfg.batch_size);
            stats.val_f1 = evaluate(preds, val_labels).f1;
        }
        result.history.push_back(stats);

        if (!has_val || stats.val_f1 >= result.best_val_f1) {
            result.best_val_f1 = stats.val_f1;
            result.best_epoch = epoch;
            result.params = params;
        }
    }
    return result;
}

std::vector<int> predict(const ModelParams& params, const std::vector<Subgraph>& dataset,
                         const std::vector<int>& indices, Variant variant, WeightTransform wt,
                         bool row_normalize_features, int batch_size) {
    TrainConfig cfg;
    cfg.variant = variant;
    cfg.weight_transform = wt;
    cfg.row_normalize_features = row_normalize_features;
    return predict_with_params(params, dataset, indices, cfg, batch_size);
}

// --- checkpoints ------------------------------------------------------------

namespace {

std::string hex_encode(const double* data, size_t n) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(n * 16);
    for (size_t i = 0; i < n; ++i) {
        uint64_t bits;
        std::memcpy(&bits, &data[i], sizeof bits);
        for (int shift = 60; shift >= 0; shift -= 4) out.push_back(digits[(bits >> shift) & 0xF]);
    }
    return out;
}

void hex_decode(const std::string& s, double* out, size_t n) {
    if (s.size() != n * 16) throw std::runtime_error("checkpoint: tensor payload length mismatch");
    for (size_t i = 0; i < n; ++i) {
        uint64_t bits = 0;
        for (size_t k = 0; k < 16; ++k) {
            const char c = s[i * 16 + k];
            uint64_t d;
            if (c >= '0' && c <= '9') d = c - '0';
            else if (c >= 'a' && c <= 'f') d = 10 + (c - 'a');
            else throw std::runtime_error("checkpoint: invalid hex digit");
            bits = (bits << 4) | d;
        }
        std::memcpy(&out[i], &bits, sizeof bits);
    }
}

void write_tensor(std::ostream& out, const char* name, int rows, int cols, const double* data) {
    out << "tensor " << name << ' ' << rows << ' ' << cols << '\n'
        << hex_encode(data, static_cast<size_t>(rows) * cols) << '\n';
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    char hash_hex[17];
    std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                  static_cast<unsigned long long>(ckpt.schema_hash));
    out << "i2b-checkpoint 1\n"
        << "variant " << variant_name(ckpt.variant) << '\n'
        << "weight_transform "
        << (ckpt.weight_transform == WeightTransform::Log1p ? "log1p" : "raw") << '\n'
        << "row_normalize " << (ckpt.row_normalize_features ? 1 : 0) << '\n'
        << "schema_hash " << hash_hex << '\n'
        << "feature_dim " << ckpt.params.feature_dim() << '\n'
        << "hidden " << ckpt.params.hidden_dim() << '\n'
        << "hyper " << ckpt.hyper_echo << '\n';
    write_tensor(out, "w0", ckpt.params.w0.rows, ckpt.params.w0.cols, ckpt.params.w0.a.data());
    write_tensor(out, "w1", ckpt.params.w1.rows, ckpt.params.w1.cols, ckpt.params.w1.a.data());
    write_tensor(out, "w2", ckpt.params.w2.rows, ckpt.params.w2.cols, ckpt.params.w2.a.data());
    write_tensor(out, "b", 1, static_cast<int>(ckpt.params.b.size()), ckpt.params.b.data());
    if (!out) throw std::runtime_error("write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "i2b-checkpoint 1")
        throw std::runtime_error(path + ": not a checkpoint (or unsupported version)");

    Checkpoint ckpt;
    int feature_dim = -1, hidden = -1;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "tensor") {
            std::string name;
            int rows, cols;
            ss >> name >> rows >> cols;
            if (!ss || rows < 0 || cols < 0)
                throw std::runtime_error(path + ": bad tensor line");
            std::string payload;
            if (!std::getline(in, payload)) throw std::runtime_error(path + ": missing tensor data");
            const size_t n = static_cast<size_t>(rows) * cols;
            if (name == "b") {
                ckpt.params.b.assign(n, 0.0);
                hex_decode(payload, ckpt.params.b.data(), n);
            } else {
                Matrix* dst = name == "w0" ? &ckpt.params.w0
                              : name == "w1" ? &ckpt.params.w1
                              : name == "w2" ? &ckpt.params.w2
                                             : nullptr;
                if (!dst) throw std::runtime_error(path + ": unknown tensor '" + name + "'");
                *dst = Matrix(rows, cols);
                hex_decode(payload, dst->a.data(), n);
            }
        } else if (key == "variant") {
            std::string v;
            ss >> v;
            ckpt.variant = variant_from_name(v);
        } else if (key == "weight_transform") {
            std::string v;
            ss >> v;
            if (v == "log1p") ckpt.weight_transform = WeightTransform::Log1p;
            else if (v == "raw") ckpt.weight_transform = WeightTransform::Raw;
            else throw std::runtime_error(path + ": unknown weight transform");
        } else if (key == "row_normalize") {
            int v;
            ss >> v;
            ckpt.row_normalize_features = v != 0;
        } else if (key == "schema_hash") {
            std::string v;
            ss >> v;
            ckpt.schema_hash = std::stoull(v, nullptr, 16);
        } else if (key == "feature_dim") {
            ss >> feature_dim;
        } else if (key == "hidden") {
            ss >> hidden;
        } else if (key == "hyper") {
            ckpt.hyper_echo = line.size() > 6 ? line.substr(6) : "";
        }
        // unknown keys are skipped for forward compatibility
    }
    if (ckpt.params.w0.rows == 0 || ckpt.params.w1.rows == 0 || ckpt.params.w2.rows == 0 ||
        ckpt.params.b.empty())
        throw std::runtime_error(path + ": incomplete checkpoint");
    if (feature_dim >= 0 && ckpt.params.w0.rows != feature_dim)
        throw std::runtime_error(path + ": feature_dim/tensor shape mismatch");
    if (hidden >= 0 && ckpt.params.w0.cols != hidden)
        throw std::runtime_error(path + ": hidden/tensor shape mismatch");
    return ckpt;
}

}  // namespace i2b
