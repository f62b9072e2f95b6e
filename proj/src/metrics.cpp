#include "al/metrics.hpp"

#include <cmath>

#include "al/common.hpp"

namespace al {

double rmse(std::span<const double> pred, std::span<const double> gt) {
    if (pred.size() != gt.size()) throw Error("rmse: length mismatch");
    if (pred.empty()) throw Error("rmse: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        double e = pred[i] - gt[i];
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(pred.size()));
}

double miou(std::span<const int> pred_mask, std::span<const int> gt_mask,
            int num_classes) {
    if (pred_mask.size() != gt_mask.size()) throw Error("miou: shape mismatch");
    if (pred_mask.empty()) throw Error("miou: empty masks");
    std::vector<std::size_t> inter(num_classes, 0), uni(num_classes, 0);
    for (std::size_t i = 0; i < pred_mask.size(); ++i) {
        int p = pred_mask[i], g = gt_mask[i];
        if (p < 0 || p >= num_classes || g < 0 || g >= num_classes)
            throw Error("miou: class id out of range at position " + std::to_string(i));
        if (p == g) {
            ++inter[p];
            ++uni[p];
        } else {
            ++uni[p];
            ++uni[g];
        }
    }
    double sum = 0.0;
    std::size_t present = 0;
    for (int c = 0; c < num_classes; ++c) {
        if (uni[c] == 0) continue;  // absent from both masks
        sum += static_cast<double>(inter[c]) / static_cast<double>(uni[c]);
        ++present;
    }
    return present == 0 ? 0.0 : sum / static_cast<double>(present);
}

double accuracy(std::span<const int> pred_class, std::span<const int> gt_class) {
    if (pred_class.size() != gt_class.size()) throw Error("accuracy: length mismatch");
    if (pred_class.empty()) throw Error("accuracy: empty input");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred_class.size(); ++i)
        if (pred_class[i] == gt_class[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(pred_class.size());
}

double coverage_radius(const EmbeddingMatrix& Z,
                       const std::vector<std::uint64_t>& centers) {
    if (centers.empty()) throw Error("coverage_radius: empty center set");
    std::vector<std::size_t> center_rows;
    center_rows.reserve(centers.size());
    for (std::uint64_t id : centers) center_rows.push_back(Z.row_index(id));
    double worst = 0.0;
    for (std::size_t i = 0; i < Z.n; ++i) {
        auto pi = Z.row(i);
        double best = -1.0;
        for (std::size_t c : center_rows) {
            auto pc = Z.row(c);
            double sq = 0.0;
            for (std::size_t j = 0; j < Z.d; ++j) {
                double diff = pi[j] - pc[j];
                sq += diff * diff;
            }
            if (best < 0.0 || sq < best) best = sq;
        }
        worst = std::max(worst, best);
    }
    return std::sqrt(worst);
}

}  // namespace al
