#pragma once
// Binary-classification metrics. Positive class is label 1; undefined ratios
// (zero denominators) are reported as 0, including F1 = 0 when P + R = 0.

#include <stdexcept>
#include <vector>

namespace i2b {

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

inline Metrics evaluate(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.size() != labels.size())
        throw std::invalid_argument("evaluate: predictions/labels length mismatch");
    long tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (predictions[i] == 1 && labels[i] == 1) ++tp;
        else if (predictions[i] == 1 && labels[i] == 0) ++fp;
        else if (predictions[i] == 0 && labels[i] == 1) ++fn;
    }
    Metrics m;
    m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

}  // namespace i2b
