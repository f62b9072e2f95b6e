#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "al/common.hpp"

namespace al {

// n x d feature rows plus an explicit id per row. Ids are stable identifiers,
// not row positions, so selection output stays joinable after reordering.
struct EmbeddingMatrix {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> data;          // row-major, n * d
    std::vector<std::uint64_t> ids;    // one per row, unique

    std::span<const double> row(std::size_t i) const {
        return {data.data() + i * d, d};
    }

    // Row index for an id; throws on unknown id.
    std::size_t row_index(std::uint64_t id) const;

    bool has_id(std::uint64_t id) const { return index_.count(id) != 0; }

    // Checks invariants (finiteness, unique ids, shape) and rebuilds the
    // id -> row map. Loaders and generators call this; call it yourself after
    // constructing a matrix by hand.
    void validate();

private:
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

enum class LabelKind { Class, Dense };

// Ground-truth labels keyed by example id. Either integer classes in [0, C)
// or fixed-shape dense vectors (mask / depth grid flattened).
struct LabelStore {
    LabelKind kind = LabelKind::Class;
    std::size_t num_classes = 0;   // Class kind
    std::size_t dense_dim = 0;     // Dense kind
    std::unordered_map<std::uint64_t, int> class_labels;
    std::unordered_map<std::uint64_t, std::vector<double>> dense_labels;

    bool has(std::uint64_t id) const;
    std::size_t size() const;
};

// Partition of the pool into labelled / unlabelled / currently-selected id
// sets. Vectors keep insertion order: selection order is meaningful output.
struct PoolState {
    std::vector<std::uint64_t> labelled;
    std::vector<std::uint64_t> unlabelled;
    std::vector<std::uint64_t> selected;

    std::size_t total() const {
        return labelled.size() + unlabelled.size() + selected.size();
    }
};

// Throws if the three sets are not pairwise disjoint or their union differs
// from `all_ids`.
void check_pool_invariants(const PoolState& state,
                           const std::vector<std::uint64_t>& all_ids);

// Moves selected ids into the labelled set (labels must exist for each) and
// empties the selection. Unlabelled is untouched.
PoolState commit_selection(const PoolState& state, const LabelStore& labels);

enum class EmbeddingFormat { Csv, Binary };

EmbeddingMatrix load_embeddings(const std::string& path, EmbeddingFormat format);
void save_embeddings(const std::string& path, EmbeddingFormat format,
                     const EmbeddingMatrix& m);

LabelStore load_class_labels(const std::string& path);
LabelStore load_dense_labels(const std::string& path);

std::vector<std::uint64_t> load_index_list(const std::string& path);
void save_index_list(const std::string& path,
                     const std::vector<std::uint64_t>& ids);

}  // namespace al
