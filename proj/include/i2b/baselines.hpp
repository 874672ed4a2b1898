#pragma once

// Graph-signature baselines and the kNN classifier used to compare against
// the neural model. Both signatures work on the binarized, symmetrized
// subgraph topology; edge weights are deliberately ignored.

#include <string>
#include <vector>

#include "i2b/matrix.hpp"
#include "i2b/sampler.hpp"

namespace i2b {

// Dense symmetric normalized Laplacian L = I - D^{-1/2} A D^{-1/2} of the
// binarized subgraph adjacency. Isolated nodes get an all-zero row/column
// (L[i,i] = 0), so each contributes a zero eigenvalue.
Matrix binary_laplacian(const Subgraph& sub);

// Eigenvalues of a dense symmetric matrix, ascending.
std::vector<double> symmetric_spectrum(const Matrix& m);

// Multiset of harmonic (effective-resistance-like) distances
// S(x,y) = Lp[x,x] + Lp[y,y] - 2 Lp[x,y] over all unordered pairs x < y,
// where Lp is the Moore-Penrose pseudoinverse of the Laplacian.
// Size is m(m-1)/2; empty for single-node graphs.
std::vector<double> harmonic_distances(const Subgraph& sub);

// Largest harmonic distance across the given graphs. Used to calibrate the
// histogram range before computing signatures.
double max_harmonic_distance(const std::vector<Subgraph>& dataset,
                             const std::vector<int>& indices);

// Fixed-width histogram of the harmonic distances with `bins` buckets
// covering [0, range). Out-of-range values clamp to the edge buckets.
std::vector<double> fgsd_signature(const Subgraph& sub, int bins, double range);

// Log-spaced heat-kernel timescales in [tmin, tmax].
std::vector<double> netlsd_timescales(int count = 128, double tmin = 1e-2, double tmax = 1e2);

// Heat trace h(t) = sum_j exp(-t * lambda_j) of the normalized Laplacian,
// evaluated at each timescale.
std::vector<double> netlsd_signature(const Subgraph& sub, const std::vector<double>& timescales);

// Signature matrices for a whole dataset (one row per subgraph), computed
// with a static thread partition so results do not depend on scheduling.
std::vector<std::vector<double>> fgsd_signatures(const std::vector<Subgraph>& dataset, int bins,
                                                 double range, int threads = 1);
std::vector<std::vector<double>> netlsd_signatures(const std::vector<Subgraph>& dataset,
                                                   const std::vector<double>& timescales,
                                                   int threads = 1);

// Plain Euclidean kNN. Distance ties break toward the lower training index,
// vote ties toward the lower class id.
struct KnnModel {
    int k = 5;
    std::vector<std::vector<double>> points;
    std::vector<int> labels;
};

int knn_predict(const KnnModel& model, const std::vector<double>& query);
std::vector<int> knn_predict_all(const KnnModel& model,
                                 const std::vector<std::vector<double>>& queries, int threads = 1);

// Writes one row per graph: id,label,s0,s1,... Used by the CLI to export
// signatures for outside inspection.
void save_signatures_csv(const std::string& path, const std::vector<Subgraph>& dataset,
                         const std::vector<std::vector<double>>& sigs);

}  // namespace i2b
