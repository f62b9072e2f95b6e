#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "al/pool.hpp"

namespace al {

enum class TaskKind { Classifier, DenseRegressor };

// Two-stage toy network: encoder (tanh, hidden width h) feeding either a
// softmax classification head or a linear regression head. The encoder
// activations are the latent space handed to the samplers.
struct LearnerModel {
    TaskKind task = TaskKind::Classifier;
    std::size_t input_dim = 0;
    std::size_t hidden = 0;     // latent width h
    std::size_t output_dim = 0; // C classes or m output values

    std::vector<double> w_enc;   // hidden x input_dim
    std::vector<double> b_enc;   // hidden
    std::vector<double> w_head;  // output_dim x hidden
    std::vector<double> b_head;  // output_dim

    std::size_t parameter_count() const {
        return w_enc.size() + b_enc.size() + w_head.size() + b_head.size();
    }
};

struct TrainConfig {
    std::size_t epochs = 200;
    double learning_rate = 0.05;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;

    void validate() const;
};

// A training batch: inputs plus class or dense targets depending on task.
struct Batch {
    std::size_t n = 0;
    std::vector<double> inputs;     // n x input_dim
    std::vector<int> class_targets; // n (classifier)
    std::vector<double> dense_targets;  // n x output_dim (regressor)
};

// Parameter-shaped gradient container.
struct Gradients {
    std::vector<double> w_enc, b_enc, w_head, b_head;
};

LearnerModel init_model(TaskKind task, std::size_t input_dim, std::size_t hidden,
                        std::size_t output_dim, std::uint64_t seed);

// Mini-batch gradient descent over the rows of X restricted to `train_ids`.
// Cross-entropy for the classifier, mean squared error for the regressor.
LearnerModel train(const LearnerModel& model, const EmbeddingMatrix& X,
                   const std::vector<std::uint64_t>& train_ids,
                   const LabelStore& labels, const TrainConfig& cfg);

// Encoder activations for every row of X; output dimension is always h.
EmbeddingMatrix encode(const LearnerModel& model, const EmbeddingMatrix& X);

// Classifier: n x C probability rows. Regressor: n x m outputs.
std::vector<double> predict(const LearnerModel& model, const EmbeddingMatrix& X);

// Mean-reduced task loss and its analytic gradient for one batch.
std::pair<double, Gradients> loss_and_grad(const LearnerModel& model,
                                           const Batch& batch);

void save_model(const std::string& path, const LearnerModel& model);
LearnerModel load_model(const std::string& path);

}  // namespace al
