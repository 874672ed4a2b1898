#pragma once
// The graph classification model and its training loop: symmetric adjacency
// normalization, two graph-convolution layers, per-graph max-pool readout,
// a linear head with softmax, hand-derived backpropagation (cross-entropy,
// dropout replay, pooling argmax routing) and Adam updates. All arithmetic
// is 64-bit and bitwise deterministic for a fixed seed.

#include <cstdint>
#include <string>
#include <vector>

#include "i2b/matrix.hpp"
#include "i2b/rng.hpp"
#include "i2b/sampler.hpp"

namespace i2b {

constexpr int kNumClasses = 2;

// Which weight channel drives message passing: transaction volume (-v) or
// transaction frequency (-t).
enum class Variant { Volume, Frequency };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

enum class WeightTransform { Log1p, Raw };

// --- normalization ----------------------------------------------------------

struct NormalizedAdjacency {
    SparseCsr a_hat;              // D~^{-1/2} (T(A)+I) D~^{-1/2}
    SparseCsr a_tilde;            // T(A) + I, kept for verification
    std::vector<double> d_tilde;  // row sums of a_tilde
};

// A must be symmetric with a zero diagonal and non-negative finite weights.
// Off-diagonal weights pass through the transform (default ln(1+w)) before
// the unit self-loop is added.
NormalizedAdjacency normalize(const SparseCsr& A, WeightTransform wt = WeightTransform::Log1p);

// Symmetric CSR of one subgraph channel (requires sub.symmetric).
SparseCsr subgraph_adjacency_csr(const Subgraph& sub, Variant variant);

// --- model ------------------------------------------------------------------

struct ModelParams {
    Matrix w0;              // f x h
    Matrix w1;              // h x h
    Matrix w2;              // h x kNumClasses
    std::vector<double> b;  // kNumClasses

    int feature_dim() const { return w0.rows; }
    int hidden_dim() const { return w0.cols; }
};

// Glorot-uniform weights, zero bias; consumes draws from rng in a fixed
// order (w0, w1, w2 row-major).
ModelParams init_params(int feature_dim, int hidden_dim, Rng& rng);

// Several subgraphs packed as one block-diagonal system.
struct BatchedGraphs {
    SparseCsr a_hat;                // N x N, block diagonal, no cross blocks
    SparseRows x;                   // N x f
    std::vector<int> segment;       // node row -> graph id (contiguous 0..B-1)
    std::vector<int> graph_offset;  // graph id -> first node row, size B+1
    std::vector<int> labels;        // per graph, -1 if unknown

    int n_graphs() const { return static_cast<int>(graph_offset.size()) - 1; }
    int n_nodes() const { return static_cast<int>(segment.size()); }
};

BatchedGraphs make_batch(const std::vector<Subgraph>& dataset, const std::vector<int>& indices,
                         Variant variant, WeightTransform wt, bool row_normalize_features);

struct ForwardTrace {
    Matrix z1;                   // pre-activation of layer 1
    Matrix h1;                   // post-ReLU (and post-dropout) layer 1
    Matrix z2;                   // pre-activation of layer 2
    Matrix h2;                   // post-ReLU (and post-dropout) layer 2
    std::vector<uint8_t> keep1;  // dropout keep masks, empty in eval mode
    std::vector<uint8_t> keep2;
    double keep_prob = 1.0;
    Matrix pooled;               // B x h, per-feature max over each segment
    std::vector<int> argmax;     // B*h winning node rows, ties -> lowest row
    Matrix logits;               // B x kNumClasses
    Matrix probs;                // row-softmax of logits
};

// One convolution step: activation(a_hat * H * W).
Matrix gcn_layer(const SparseCsr& a_hat, const Matrix& H, const Matrix& W, bool relu = true);

// Full model forward. In training mode dropout masks are drawn from rng
// (required when dropout_rate > 0).
ForwardTrace forward(const BatchedGraphs& batch, const ModelParams& params,
                     double dropout_rate, bool training, Rng* rng = nullptr);

// Mean cross-entropy of the trace against batch labels.
double batch_loss(const ForwardTrace& trace, const std::vector<int>& labels);

struct Gradients {
    Matrix w0, w1, w2;
    std::vector<double> b;
    Matrix x;  // populated only when requested
};

// Reverse pass for the trace; returns the loss. Dropout masks recorded in
// the trace are replayed exactly. Throws on non-finite loss.
double loss_and_backward(const BatchedGraphs& batch, const ForwardTrace& trace,
                         const ModelParams& params, Gradients& grads,
                         bool want_input_grad = false);

// --- training ---------------------------------------------------------------

struct TrainConfig {
    int hidden = 128;
    int epochs = 50;
    int batch_size = 30;
    double dropout = 0.3;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    uint64_t seed = 0;
    Variant variant = Variant::Frequency;
    WeightTransform weight_transform = WeightTransform::Log1p;
    bool row_normalize_features = false;
    double val_fraction = 0.1;  // stratified slice carved from the train split
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_f1 = 0.0;
};

struct TrainResult {
    ModelParams params;  // snapshot at the best validation F1 (ties -> later)
    std::vector<EpochStats> history;
    int best_epoch = -1;
    double best_val_f1 = 0.0;
};

TrainResult train(const std::vector<Subgraph>& dataset, const std::vector<int>& train_indices,
                  const TrainConfig& cfg);

// Argmax class per subgraph, eval mode.
std::vector<int> predict(const ModelParams& params, const std::vector<Subgraph>& dataset,
                         const std::vector<int>& indices, Variant variant, WeightTransform wt,
                         bool row_normalize_features, int batch_size = 64);

// --- checkpoints ------------------------------------------------------------

struct Checkpoint {
    ModelParams params;
    Variant variant = Variant::Frequency;
    WeightTransform weight_transform = WeightTransform::Log1p;
    bool row_normalize_features = false;
    uint64_t schema_hash = 0;
    std::string hyper_echo;   // resolved training configuration, single line
};

// Text header (version, shapes, hyperparameters, schema hash, variant)
// followed by base-16 encoded row-major 64-bit float tensors.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace i2b
