#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "al/learner.hpp"
#include "al/pool.hpp"
#include "al/samplers.hpp"

namespace al {

enum class TaskMode { ToyClassification, ToyDenseRegression, ExternalEmbeddings };

TaskMode task_mode_from_string(const std::string& s);
std::string to_string(TaskMode mode);

// Desk-scale data generators: Gaussian class blobs (optionally imbalanced)
// or a fixed random linear teacher for dense regression.
struct SyntheticTaskSpec {
    std::size_t n_examples = 2000;
    std::size_t input_dim = 8;
    std::size_t n_outputs = 4;          // classes C or dense width m
    double noise = 1.0;                 // within-cluster sigma / target noise
    double separation = 4.0;            // blob center scale
    std::vector<double> class_weights;  // optional, blobs only
    std::uint64_t seed = 0;
};

struct Dataset {
    EmbeddingMatrix features;
    LabelStore labels;
};

Dataset generate_blobs(const SyntheticTaskSpec& spec, std::uint64_t seed);
Dataset generate_linear_teacher(const SyntheticTaskSpec& spec, std::uint64_t seed);

struct SplitRatios {
    double train = 0.8, val = 0.1, test = 0.1;
    void validate() const;
};

struct ExperimentConfig {
    TaskMode task = TaskMode::ToyClassification;
    SyntheticTaskSpec synth;
    // external_embeddings mode
    std::string embeddings_path;
    std::string embeddings_format = "csv";
    std::string labels_path;
    std::string label_kind = "class";

    StrategySpec strategy;
    std::size_t initial_size = 100;
    std::size_t rounds = 5;
    std::vector<std::uint64_t> seeds{0};
    TrainConfig learner;
    SplitRatios split;
    std::size_t latent_dim = 16;
    bool warm_start = false;
};

ExperimentConfig load_config(const std::string& path);

// One measurement row; labelled_count = initial_size + round * budget.
struct RunRecord {
    std::uint64_t seed = 0;
    std::string strategy;
    std::size_t round = 0;
    std::size_t labelled_count = 0;
    std::string metric;
    double value = 0.0;
};

// Uniform initial labelled set of exactly `initial_size` train-pool ids.
PoolState seed_pool(const std::vector<std::uint64_t>& train_ids,
                    std::size_t initial_size, std::uint64_t seed);

// Simulated oracle: hands back ground-truth labels for the requested ids.
LabelStore reveal_labels(const LabelStore& oracle,
                         const std::vector<std::uint64_t>& ids);

// Full AL protocol: seed, evaluate round 0, then per round
// select -> commit -> retrain from scratch -> evaluate, for every seed.
std::vector<RunRecord> run_al_loop(const ExperimentConfig& config);

void write_records_csv(const std::string& path,
                       const std::vector<RunRecord>& records);
std::vector<RunRecord> read_records_csv(const std::string& path);

// PCA 2-D projection of the latents tagged unlabelled / labelled / selected.
void export_projection(const EmbeddingMatrix& Z, const PoolState& pool,
                       const std::vector<std::uint64_t>& newly_selected,
                       const std::string& out_path);

struct SummaryRow {
    std::string strategy;
    std::size_t labelled_count = 0;
    std::string metric;
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t n_seeds = 0;
};

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records);
void write_summary_csv(const std::string& path,
                       const std::vector<SummaryRow>& rows,
                       std::size_t fraction_denominator = 0);
void print_summary(const std::vector<SummaryRow>& rows,
                   std::size_t fraction_denominator = 0);

}  // namespace al
