#include "al/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "al/pca.hpp"

namespace al {

StrategyKind strategy_kind_from_string(const std::string& s) {
    if (s == "random") return StrategyKind::Random;
    if (s == "kcenter") return StrategyKind::KCenter;
    if (s == "pca_coreset") return StrategyKind::PcaCoreset;
    if (s == "uncertainty") return StrategyKind::Uncertainty;
    if (s == "hybrid") return StrategyKind::Hybrid;
    throw Error("unknown strategy '" + s + "'");
}

std::string to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::Random: return "random";
        case StrategyKind::KCenter: return "kcenter";
        case StrategyKind::PcaCoreset: return "pca_coreset";
        case StrategyKind::Uncertainty: return "uncertainty";
        case StrategyKind::Hybrid: return "hybrid";
    }
    throw Error("bad strategy kind");
}

void StrategySpec::validate() const {
    if (budget == 0) throw Error("strategy budget must be positive");
    if (kind == StrategyKind::Hybrid) {
        if (!gamma) throw Error("hybrid strategy requires gamma");
        if (*gamma < 0.0 || *gamma > 1.0) throw Error("gamma must lie in [0, 1]");
    } else if (gamma) {
        throw Error("gamma is only valid for the hybrid strategy");
    }
    if (kind == StrategyKind::PcaCoreset) {
        if (!pca_dims) throw Error("pca_coreset strategy requires pca_dims");
    } else if (pca_dims && kind != StrategyKind::Hybrid) {
        throw Error("pca_dims is only valid for pca_coreset or hybrid");
    }
}

namespace {

double squared_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

}  // namespace

std::vector<std::uint64_t> kcenter_greedy(const EmbeddingMatrix& Z,
                                          const std::vector<std::uint64_t>& s0,
                                          std::size_t b) {
    if (b == 0) return {};
    if (Z.n == 0) throw Error("kcenter_greedy: empty embedding matrix");

    std::unordered_set<std::uint64_t> seed_set;
    for (std::uint64_t id : s0) {
        Z.row_index(id);  // throws if not in Z
        seed_set.insert(id);
    }

    // candidate rows, ascending id so ties resolve toward the smallest id
    std::vector<std::size_t> cand;
    cand.reserve(Z.n);
    {
        std::vector<std::size_t> order(Z.n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t c) { return Z.ids[a] < Z.ids[c]; });
        for (std::size_t i : order)
            if (!seed_set.count(Z.ids[i])) cand.push_back(i);
    }
    if (b > cand.size())
        throw Error("kcenter_greedy: budget " + std::to_string(b) +
                    " exceeds available unlabelled " + std::to_string(cand.size()));

    std::vector<double> min_sq(cand.size(), std::numeric_limits<double>::infinity());
    std::vector<std::uint64_t> picked;
    picked.reserve(b);

    auto update_against = [&](std::size_t center_row) {
        auto c = Z.row(center_row);
        for (std::size_t k = 0; k < cand.size(); ++k) {
            double sq = squared_dist(Z.row(cand[k]), c);
            if (sq < min_sq[k]) min_sq[k] = sq;
        }
    };

    if (seed_set.empty()) {
        // no seeds: start from the point farthest from the centroid
        std::vector<double> centroid(Z.d, 0.0);
        for (std::size_t i = 0; i < Z.n; ++i)
            for (std::size_t j = 0; j < Z.d; ++j) centroid[j] += Z.data[i * Z.d + j];
        for (auto& c : centroid) c /= static_cast<double>(Z.n);
        std::size_t best = 0;
        double best_sq = -1.0;
        for (std::size_t k = 0; k < cand.size(); ++k) {
            double sq = squared_dist(Z.row(cand[k]), {centroid.data(), Z.d});
            if (sq > best_sq) {
                best_sq = sq;
                best = k;
            }
        }
        std::size_t row = cand[best];
        picked.push_back(Z.ids[row]);
        cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(best));
        min_sq.pop_back();
        std::fill(min_sq.begin(), min_sq.end(),
                  std::numeric_limits<double>::infinity());
        update_against(row);
    } else {
        for (std::uint64_t id : s0) update_against(Z.row_index(id));
    }

    while (picked.size() < b) {
        std::size_t best = 0;
        double best_sq = -1.0;
        for (std::size_t k = 0; k < cand.size(); ++k) {
            if (min_sq[k] > best_sq) {
                best_sq = min_sq[k];
                best = k;
            }
        }
        std::size_t row = cand[best];
        picked.push_back(Z.ids[row]);
        cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(best));
        min_sq.erase(min_sq.begin() + static_cast<std::ptrdiff_t>(best));
        update_against(row);
    }
    return picked;
}

std::vector<std::uint64_t> random_select(const PoolState& pool, std::size_t b,
                                         std::uint64_t seed) {
    if (b > pool.unlabelled.size())
        throw Error("random_select: budget exceeds unlabelled count");
    std::vector<std::uint64_t> deck = pool.unlabelled;
    Rng rng(seed);
    for (std::size_t i = 0; i < b; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(deck.size() - i));
        std::swap(deck[i], deck[j]);
    }
    deck.resize(b);
    return deck;
}

std::vector<std::uint64_t> pca_coreset_select(const EmbeddingMatrix& X,
                                              const PoolState& pool,
                                              std::size_t b, std::size_t r) {
    PcaModel model = pca_fit(X, r);
    EmbeddingMatrix projected = pca_project(model, X);
    return kcenter_greedy(projected, pool.labelled, b);
}

ScoreVector bvsb_scores(const std::vector<std::uint64_t>& ids,
                        const std::vector<double>& probs,
                        std::size_t num_classes) {
    if (num_classes < 2) throw Error("bvsb_scores: need at least 2 classes");
    if (probs.size() != ids.size() * num_classes)
        throw Error("bvsb_scores: probability matrix shape mismatch");
    ScoreVector out;
    out.ids = ids;
    out.scores.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const double* row = probs.data() + i * num_classes;
        double sum = 0.0, best = -1.0, second = -1.0;
        for (std::size_t c = 0; c < num_classes; ++c) {
            double p = row[c];
            if (p < 0.0) throw Error("bvsb_scores: negative probability in row " +
                                     std::to_string(i));
            sum += p;
            if (p > best) {
                second = best;
                best = p;
            } else if (p > second) {
                second = p;
            }
        }
        if (std::abs(sum - 1.0) > 1e-6)
            throw Error("bvsb_scores: row " + std::to_string(i) +
                        " does not sum to 1");
        out.scores.push_back(best - second);
    }
    return out;
}

std::vector<std::uint64_t> uncertainty_select(const ScoreVector& scores,
                                              std::size_t b) {
    if (b > scores.ids.size())
        throw Error("uncertainty_select: budget exceeds scored examples");
    std::vector<std::size_t> order(scores.ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
        if (scores.scores[a] != scores.scores[c])
            return scores.scores[a] < scores.scores[c];
        return scores.ids[a] < scores.ids[c];
    });
    std::vector<std::uint64_t> out;
    out.reserve(b);
    for (std::size_t k = 0; k < b; ++k) out.push_back(scores.ids[order[k]]);
    return out;
}

std::vector<std::uint64_t> hybrid_select(const EmbeddingMatrix& Z,
                                         const PoolState& pool,
                                         const ScoreVector& scores,
                                         std::size_t b, double gamma) {
    if (gamma < 0.0 || gamma > 1.0) throw Error("hybrid_select: gamma outside [0, 1]");
    if (b > pool.unlabelled.size())
        throw Error("hybrid_select: budget exceeds unlabelled count");
    auto n_uncertain = static_cast<std::size_t>(
        std::floor(gamma * static_cast<double>(b) + 1e-9));
    n_uncertain = std::min(n_uncertain, b);

    std::vector<std::uint64_t> out = uncertainty_select(scores, n_uncertain);
    std::size_t n_diverse = b - n_uncertain;
    if (n_diverse > 0) {
        std::vector<std::uint64_t> seeds = pool.labelled;
        seeds.insert(seeds.end(), out.begin(), out.end());
        auto diverse = kcenter_greedy(Z, seeds, n_diverse);
        out.insert(out.end(), diverse.begin(), diverse.end());
    }
    return out;
}

}  // namespace al
