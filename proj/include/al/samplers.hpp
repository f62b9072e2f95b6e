#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "al/pool.hpp"

namespace al {

enum class StrategyKind { Random, KCenter, PcaCoreset, Uncertainty, Hybrid };

StrategyKind strategy_kind_from_string(const std::string& s);
std::string to_string(StrategyKind kind);

// Which acquisition function to run and its parameters.
struct StrategySpec {
    StrategyKind kind = StrategyKind::Random;
    std::size_t budget = 0;
    std::optional<double> gamma;          // hybrid only, in [0, 1]
    std::optional<std::size_t> pca_dims;  // pca_coreset; optionally hybrid
    std::uint64_t seed = 0;

    void validate() const;
};

// Per-id uncertainty scores aligned to the unlabelled set. Lower score means
// more uncertain (BvSB margin).
struct ScoreVector {
    std::vector<std::uint64_t> ids;
    std::vector<double> scores;
};

// K-Center-Greedy: repeatedly picks the id whose minimum Euclidean distance
// to the current set is largest. Maintains one running min-distance per
// candidate, updated against the last pick only, instead of rescanning all
// pairs each step. Ties break toward the smallest id.
//
// With an empty seed set the first pick is the point farthest from the
// centroid; the remaining b-1 picks follow the greedy rule.
std::vector<std::uint64_t> kcenter_greedy(const EmbeddingMatrix& Z,
                                          const std::vector<std::uint64_t>& s0,
                                          std::size_t b);

// Uniform sample of b distinct unlabelled ids; deterministic per seed.
std::vector<std::uint64_t> random_select(const PoolState& pool, std::size_t b,
                                         std::uint64_t seed);

// kcenter_greedy on the top-r PCA projection of X.
std::vector<std::uint64_t> pca_coreset_select(const EmbeddingMatrix& X,
                                              const PoolState& pool,
                                              std::size_t b, std::size_t r);

// BvSB margin per row: largest minus second-largest class probability.
ScoreVector bvsb_scores(const std::vector<std::uint64_t>& ids,
                        const std::vector<double>& probs,
                        std::size_t num_classes);

// The b ids with smallest scores, ascending; ties break toward smaller id.
std::vector<std::uint64_t> uncertainty_select(const ScoreVector& scores,
                                              std::size_t b);

// floor(gamma*b) uncertain picks first, then the remainder from
// kcenter_greedy seeded with labelled + the uncertain picks, so the diverse
// batch is disjoint from and complementary to the uncertain one.
std::vector<std::uint64_t> hybrid_select(const EmbeddingMatrix& Z,
                                         const PoolState& pool,
                                         const ScoreVector& scores,
                                         std::size_t b, double gamma);

}  // namespace al
