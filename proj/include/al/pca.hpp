#pragma once

#include <cstddef>
#include <vector>

#include "al/pool.hpp"

namespace al {

// Top-r principal directions of a fitted embedding matrix. Components are
// rows, orthonormal, sign-canonicalized (first nonzero coordinate positive),
// variances sorted non-increasing.
struct PcaModel {
    std::size_t d = 0;
    std::size_t r = 0;
    std::vector<double> mean;                // d
    std::vector<double> components;          // r x d, row-major
    std::vector<double> explained_variance;  // r, non-increasing
};

// Eigendecomposition of the sample covariance via power iteration with
// deflation; uses the Gram-matrix trick when n < d. Deterministic.
PcaModel pca_fit(const EmbeddingMatrix& X, std::size_t r);

// Centered projection (X - mean) * components^T; ids carried over.
EmbeddingMatrix pca_project(const PcaModel& model, const EmbeddingMatrix& X);

}  // namespace al
