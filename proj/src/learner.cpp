#include "al/learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "al/common.hpp"

namespace al {

void TrainConfig::validate() const {
    if (epochs < 1) throw Error("epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw Error("learning_rate must be positive");
    if (batch_size < 1) throw Error("batch_size must be >= 1");
}

namespace {

// z = tanh(W1 x + b1), out = W2 z + b2
void forward(const LearnerModel& m, const double* x, double* latent, double* out) {
    for (std::size_t i = 0; i < m.hidden; ++i) {
        double s = m.b_enc[i];
        const double* w = m.w_enc.data() + i * m.input_dim;
        for (std::size_t j = 0; j < m.input_dim; ++j) s += w[j] * x[j];
        latent[i] = std::tanh(s);
    }
    for (std::size_t i = 0; i < m.output_dim; ++i) {
        double s = m.b_head[i];
        const double* w = m.w_head.data() + i * m.hidden;
        for (std::size_t j = 0; j < m.hidden; ++j) s += w[j] * latent[j];
        out[i] = s;
    }
}

void softmax_inplace(double* v, std::size_t c) {
    double mx = v[0];
    for (std::size_t i = 1; i < c; ++i) mx = std::max(mx, v[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
        v[i] = std::exp(v[i] - mx);
        sum += v[i];
    }
    for (std::size_t i = 0; i < c; ++i) v[i] /= sum;
}

Gradients zero_gradients(const LearnerModel& m) {
    Gradients g;
    g.w_enc.assign(m.w_enc.size(), 0.0);
    g.b_enc.assign(m.b_enc.size(), 0.0);
    g.w_head.assign(m.w_head.size(), 0.0);
    g.b_head.assign(m.b_head.size(), 0.0);
    return g;
}

}  // namespace

LearnerModel init_model(TaskKind task, std::size_t input_dim, std::size_t hidden,
                        std::size_t output_dim, std::uint64_t seed) {
    if (input_dim < 1 || hidden < 1 || output_dim < 1)
        throw Error("init_model: all dimensions must be >= 1");
    LearnerModel m;
    m.task = task;
    m.input_dim = input_dim;
    m.hidden = hidden;
    m.output_dim = output_dim;
    Rng rng(seed);
    double enc_scale = 1.0 / std::sqrt(static_cast<double>(input_dim));
    double head_scale = 1.0 / std::sqrt(static_cast<double>(hidden));
    m.w_enc.resize(hidden * input_dim);
    for (auto& w : m.w_enc) w = rng.uniform(-enc_scale, enc_scale);
    m.b_enc.assign(hidden, 0.0);
    m.w_head.resize(output_dim * hidden);
    for (auto& w : m.w_head) w = rng.uniform(-head_scale, head_scale);
    m.b_head.assign(output_dim, 0.0);
    return m;
}

std::pair<double, Gradients> loss_and_grad(const LearnerModel& model,
                                           const Batch& batch) {
    if (batch.n == 0) throw Error("loss_and_grad: empty batch");
    if (batch.inputs.size() != batch.n * model.input_dim)
        throw Error("loss_and_grad: input shape mismatch");
    const bool classify = model.task == TaskKind::Classifier;
    if (classify && batch.class_targets.size() != batch.n)
        throw Error("loss_and_grad: class target shape mismatch");
    if (!classify && batch.dense_targets.size() != batch.n * model.output_dim)
        throw Error("loss_and_grad: dense target shape mismatch");

    Gradients g = zero_gradients(model);
    std::vector<double> latent(model.hidden), out(model.output_dim);
    std::vector<double> d_out(model.output_dim), d_latent(model.hidden);
    double loss = 0.0;
    const double inv_n = 1.0 / static_cast<double>(batch.n);
    const double inv_nm =
        inv_n / static_cast<double>(classify ? 1 : model.output_dim);

    for (std::size_t ex = 0; ex < batch.n; ++ex) {
        const double* x = batch.inputs.data() + ex * model.input_dim;
        forward(model, x, latent.data(), out.data());

        if (classify) {
            int y = batch.class_targets[ex];
            if (y < 0 || static_cast<std::size_t>(y) >= model.output_dim)
                throw Error("loss_and_grad: class target out of range");
            softmax_inplace(out.data(), model.output_dim);
            loss += -std::log(std::max(out[static_cast<std::size_t>(y)], 1e-300)) * inv_n;
            for (std::size_t c = 0; c < model.output_dim; ++c)
                d_out[c] = (out[c] - (static_cast<std::size_t>(y) == c ? 1.0 : 0.0)) * inv_n;
        } else {
            const double* t = batch.dense_targets.data() + ex * model.output_dim;
            for (std::size_t c = 0; c < model.output_dim; ++c) {
                double e = out[c] - t[c];
                loss += e * e * inv_nm;
                d_out[c] = 2.0 * e * inv_nm;
            }
        }

        for (std::size_t i = 0; i < model.output_dim; ++i) {
            g.b_head[i] += d_out[i];
            double* gw = g.w_head.data() + i * model.hidden;
            for (std::size_t j = 0; j < model.hidden; ++j)
                gw[j] += d_out[i] * latent[j];
        }
        std::fill(d_latent.begin(), d_latent.end(), 0.0);
        for (std::size_t i = 0; i < model.output_dim; ++i) {
            const double* w = model.w_head.data() + i * model.hidden;
            for (std::size_t j = 0; j < model.hidden; ++j)
                d_latent[j] += w[j] * d_out[i];
        }
        for (std::size_t j = 0; j < model.hidden; ++j) {
            double dz = d_latent[j] * (1.0 - latent[j] * latent[j]);
            g.b_enc[j] += dz;
            double* gw = g.w_enc.data() + j * model.input_dim;
            for (std::size_t k = 0; k < model.input_dim; ++k)
                gw[k] += dz * x[k];
        }
    }
    return {loss, std::move(g)};
}

LearnerModel train(const LearnerModel& model, const EmbeddingMatrix& X,
                   const std::vector<std::uint64_t>& train_ids,
                   const LabelStore& labels, const TrainConfig& cfg) {
    cfg.validate();
    const bool classify = model.task == TaskKind::Classifier;
    if (classify != (labels.kind == LabelKind::Class))
        throw Error("train: label kind does not match model task");

    std::vector<std::size_t> rows;
    rows.reserve(train_ids.size());
    for (std::uint64_t id : train_ids) {
        if (!labels.has(id))
            throw Error("train: id " + std::to_string(id) + " has no label");
        rows.push_back(X.row_index(id));
    }
    if (rows.empty()) throw Error("train: empty training set");

    LearnerModel m = model;
    Rng rng(cfg.seed);
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);

    auto apply = [&](std::vector<double>& params, const std::vector<double>& grad) {
        for (std::size_t i = 0; i < params.size(); ++i)
            params[i] -= cfg.learning_rate * grad[i];
    };

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            std::size_t j = i + static_cast<std::size_t>(rng.below(order.size() - i));
            std::swap(order[i], order[j]);
        }
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::size_t stop = std::min(start + cfg.batch_size, order.size());
            Batch batch;
            batch.n = stop - start;
            batch.inputs.reserve(batch.n * m.input_dim);
            for (std::size_t k = start; k < stop; ++k) {
                std::size_t row = rows[order[k]];
                auto src = X.row(row);
                batch.inputs.insert(batch.inputs.end(), src.begin(), src.end());
                std::uint64_t id = X.ids[row];
                if (classify) {
                    batch.class_targets.push_back(labels.class_labels.at(id));
                } else {
                    const auto& t = labels.dense_labels.at(id);
                    if (t.size() != m.output_dim)
                        throw Error("train: dense label dimension mismatch");
                    batch.dense_targets.insert(batch.dense_targets.end(),
                                               t.begin(), t.end());
                }
            }
            auto [loss, grad] = loss_and_grad(m, batch);
            if (!std::isfinite(loss))
                throw Error("train: non-finite loss at epoch " + std::to_string(epoch));
            apply(m.w_enc, grad.w_enc);
            apply(m.b_enc, grad.b_enc);
            apply(m.w_head, grad.w_head);
            apply(m.b_head, grad.b_head);
        }
    }
    return m;
}

EmbeddingMatrix encode(const LearnerModel& model, const EmbeddingMatrix& X) {
    if (X.d != model.input_dim)
        throw Error("encode: input dimension mismatch");
    EmbeddingMatrix out;
    out.n = X.n;
    out.d = model.hidden;
    out.ids = X.ids;
    out.data.resize(X.n * model.hidden);
    std::vector<double> head(model.output_dim);
    for (std::size_t i = 0; i < X.n; ++i)
        forward(model, X.data.data() + i * X.d, out.data.data() + i * model.hidden,
                head.data());
    out.validate();
    return out;
}

std::vector<double> predict(const LearnerModel& model, const EmbeddingMatrix& X) {
    if (X.d != model.input_dim)
        throw Error("predict: input dimension mismatch");
    std::vector<double> out(X.n * model.output_dim);
    std::vector<double> latent(model.hidden);
    for (std::size_t i = 0; i < X.n; ++i) {
        double* row = out.data() + i * model.output_dim;
        forward(model, X.data.data() + i * X.d, latent.data(), row);
        if (model.task == TaskKind::Classifier)
            softmax_inplace(row, model.output_dim);
    }
    return out;
}

namespace {
constexpr char kModelMagic[4] = {'A', 'L', 'M', 'D'};

template <typename T>
void read_raw(std::istream& in, T* out, std::size_t count) {
    in.read(reinterpret_cast<char*>(out), static_cast<std::streamsize>(count * sizeof(T)));
    if (static_cast<std::size_t>(in.gcount()) != count * sizeof(T))
        throw Error("truncated model file");
}
}  // namespace

void save_model(const std::string& path, const LearnerModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out.write(kModelMagic, 4);
    std::uint32_t header[5] = {
        1u, model.task == TaskKind::Classifier ? 0u : 1u,
        static_cast<std::uint32_t>(model.input_dim),
        static_cast<std::uint32_t>(model.hidden),
        static_cast<std::uint32_t>(model.output_dim)};
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    for (const auto* block : {&model.w_enc, &model.b_enc, &model.w_head, &model.b_head})
        out.write(reinterpret_cast<const char*>(block->data()),
                  static_cast<std::streamsize>(block->size() * sizeof(double)));
}

LearnerModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    char magic[4];
    read_raw(in, magic, 4);
    if (std::memcmp(magic, kModelMagic, 4) != 0)
        throw Error("bad magic: not an ALMD file");
    std::uint32_t header[5];
    read_raw(in, header, 5);
    if (header[0] != 1) throw Error("unsupported model version");
    if (header[1] > 1) throw Error("unknown task tag");
    LearnerModel m;
    m.task = header[1] == 0 ? TaskKind::Classifier : TaskKind::DenseRegressor;
    m.input_dim = header[2];
    m.hidden = header[3];
    m.output_dim = header[4];
    m.w_enc.resize(m.hidden * m.input_dim);
    m.b_enc.resize(m.hidden);
    m.w_head.resize(m.output_dim * m.hidden);
    m.b_head.resize(m.output_dim);
    for (auto* block : {&m.w_enc, &m.b_enc, &m.w_head, &m.b_head})
        read_raw(in, block->data(), block->size());
    return m;
}

}  // namespace al
