#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "al/pool.hpp"

namespace al {

double rmse(std::span<const double> pred, std::span<const double> gt);

// Mean over classes present in either mask of |pred_c & gt_c| / |pred_c | gt_c|.
// Classes absent from both masks are excluded from the mean.
double miou(std::span<const int> pred_mask, std::span<const int> gt_mask,
            int num_classes);

double accuracy(std::span<const int> pred_class, std::span<const int> gt_class);

// k-center objective value: max over points of the min Euclidean distance to
// any center. Reported as a true distance, not squared.
double coverage_radius(const EmbeddingMatrix& Z,
                       const std::vector<std::uint64_t>& centers);

}  // namespace al
