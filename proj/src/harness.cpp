#include "al/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "al/metrics.hpp"
#include "al/pca.hpp"

namespace al {

using nlohmann::json;

TaskMode task_mode_from_string(const std::string& s) {
    if (s == "toy_classification") return TaskMode::ToyClassification;
    if (s == "toy_dense_regression") return TaskMode::ToyDenseRegression;
    if (s == "external_embeddings") return TaskMode::ExternalEmbeddings;
    throw Error("unknown task '" + s + "'");
}

std::string to_string(TaskMode mode) {
    switch (mode) {
        case TaskMode::ToyClassification: return "toy_classification";
        case TaskMode::ToyDenseRegression: return "toy_dense_regression";
        case TaskMode::ExternalEmbeddings: return "external_embeddings";
    }
    throw Error("bad task mode");
}

void SplitRatios::validate() const {
    if (!(train > 0.0 && val > 0.0 && test > 0.0))
        throw Error("split ratios must all be positive");
    if (std::abs(train + val + test - 1.0) > 1e-9)
        throw Error("split ratios must sum to 1");
}

Dataset generate_blobs(const SyntheticTaskSpec& spec, std::uint64_t seed) {
    if (spec.n_outputs < 2) throw Error("blobs need at least 2 classes");
    Rng rng(seed);
    const std::size_t c = spec.n_outputs, d = spec.input_dim;
    std::vector<double> centers(c * d);
    for (auto& v : centers) v = spec.separation * rng.normal();

    std::vector<double> cum(c);
    if (!spec.class_weights.empty()) {
        if (spec.class_weights.size() != c)
            throw Error("class_weights size must equal class count");
        double total = 0.0;
        for (double w : spec.class_weights) {
            if (w <= 0.0) throw Error("class weights must be positive");
            total += w;
        }
        double acc = 0.0;
        for (std::size_t k = 0; k < c; ++k) {
            acc += spec.class_weights[k] / total;
            cum[k] = acc;
        }
    } else {
        for (std::size_t k = 0; k < c; ++k)
            cum[k] = static_cast<double>(k + 1) / static_cast<double>(c);
    }

    Dataset ds;
    ds.features.n = spec.n_examples;
    ds.features.d = d;
    ds.features.data.resize(spec.n_examples * d);
    ds.features.ids.resize(spec.n_examples);
    ds.labels.kind = LabelKind::Class;
    ds.labels.num_classes = c;
    for (std::size_t i = 0; i < spec.n_examples; ++i) {
        double u = rng.uniform();
        std::size_t cls = 0;
        while (cls + 1 < c && u >= cum[cls]) ++cls;
        for (std::size_t j = 0; j < d; ++j)
            ds.features.data[i * d + j] = centers[cls * d + j] + spec.noise * rng.normal();
        ds.features.ids[i] = i;
        ds.labels.class_labels[i] = static_cast<int>(cls);
    }
    ds.features.validate();
    return ds;
}

Dataset generate_linear_teacher(const SyntheticTaskSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t m = spec.n_outputs, d = spec.input_dim;
    std::vector<double> teacher(m * d);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (auto& v : teacher) v = scale * rng.normal();

    Dataset ds;
    ds.features.n = spec.n_examples;
    ds.features.d = d;
    ds.features.data.resize(spec.n_examples * d);
    ds.features.ids.resize(spec.n_examples);
    ds.labels.kind = LabelKind::Dense;
    ds.labels.dense_dim = m;
    for (std::size_t i = 0; i < spec.n_examples; ++i) {
        double* x = ds.features.data.data() + i * d;
        for (std::size_t j = 0; j < d; ++j) x[j] = rng.uniform(-1.0, 1.0);
        std::vector<double> y(m);
        for (std::size_t k = 0; k < m; ++k) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += teacher[k * d + j] * x[j];
            y[k] = s + spec.noise * rng.normal();
        }
        ds.features.ids[i] = i;
        ds.labels.dense_labels[i] = std::move(y);
    }
    ds.features.validate();
    return ds;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error("config parse error: " + std::string(e.what()));
    }
    ExperimentConfig cfg;
    try {
        cfg.task = task_mode_from_string(j.at("task").get<std::string>());
        const auto& s = j.at("strategy");
        cfg.strategy.kind = strategy_kind_from_string(s.at("kind").get<std::string>());
        cfg.strategy.budget = s.at("budget").get<std::size_t>();
        if (s.contains("gamma")) cfg.strategy.gamma = s.at("gamma").get<double>();
        if (s.contains("pca_dims"))
            cfg.strategy.pca_dims = s.at("pca_dims").get<std::size_t>();
        if (s.contains("seed")) cfg.strategy.seed = s.at("seed").get<std::uint64_t>();
        cfg.initial_size = j.at("initial_size").get<std::size_t>();
        cfg.rounds = j.at("rounds").get<std::size_t>();
        cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        if (j.contains("learner")) {
            const auto& l = j.at("learner");
            if (l.contains("epochs")) cfg.learner.epochs = l.at("epochs").get<std::size_t>();
            if (l.contains("learning_rate"))
                cfg.learner.learning_rate = l.at("learning_rate").get<double>();
            if (l.contains("batch_size"))
                cfg.learner.batch_size = l.at("batch_size").get<std::size_t>();
        }
        if (j.contains("split")) {
            auto v = j.at("split").get<std::vector<double>>();
            if (v.size() != 3) throw Error("split must have 3 entries");
            cfg.split = {v[0], v[1], v[2]};
        }
        if (j.contains("latent_dim")) cfg.latent_dim = j.at("latent_dim").get<std::size_t>();
        if (j.contains("warm_start")) cfg.warm_start = j.at("warm_start").get<bool>();
        if (j.contains("task_params")) {
            const auto& t = j.at("task_params");
            if (t.contains("n_examples"))
                cfg.synth.n_examples = t.at("n_examples").get<std::size_t>();
            if (t.contains("input_dim"))
                cfg.synth.input_dim = t.at("input_dim").get<std::size_t>();
            if (t.contains("classes"))
                cfg.synth.n_outputs = t.at("classes").get<std::size_t>();
            if (t.contains("outputs"))
                cfg.synth.n_outputs = t.at("outputs").get<std::size_t>();
            if (t.contains("noise")) cfg.synth.noise = t.at("noise").get<double>();
            if (t.contains("separation"))
                cfg.synth.separation = t.at("separation").get<double>();
            if (t.contains("class_weights"))
                cfg.synth.class_weights = t.at("class_weights").get<std::vector<double>>();
            if (t.contains("seed")) cfg.synth.seed = t.at("seed").get<std::uint64_t>();
        }
        if (j.contains("data")) {
            const auto& d = j.at("data");
            cfg.embeddings_path = d.at("embeddings").get<std::string>();
            if (d.contains("format"))
                cfg.embeddings_format = d.at("format").get<std::string>();
            cfg.labels_path = d.at("labels").get<std::string>();
            if (d.contains("label_kind"))
                cfg.label_kind = d.at("label_kind").get<std::string>();
        }
    } catch (const json::exception& e) {
        throw Error("config error: " + std::string(e.what()));
    }
    cfg.split.validate();
    cfg.strategy.validate();
    cfg.learner.validate();
    if (cfg.initial_size == 0) throw Error("initial_size must be positive");
    if (cfg.seeds.empty()) throw Error("seeds must not be empty");
    if (cfg.task == TaskMode::ExternalEmbeddings && cfg.embeddings_path.empty())
        throw Error("external_embeddings task requires a data section");
    return cfg;
}

PoolState seed_pool(const std::vector<std::uint64_t>& train_ids,
                    std::size_t initial_size, std::uint64_t seed) {
    if (initial_size > train_ids.size())
        throw Error("initial_size " + std::to_string(initial_size) +
                    " exceeds training pool size " + std::to_string(train_ids.size()));
    std::vector<std::uint64_t> deck = train_ids;
    Rng rng(seed);
    for (std::size_t i = 0; i + 1 < deck.size(); ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(deck.size() - i));
        std::swap(deck[i], deck[j]);
    }
    PoolState pool;
    pool.labelled.assign(deck.begin(), deck.begin() + static_cast<std::ptrdiff_t>(initial_size));
    pool.unlabelled.assign(deck.begin() + static_cast<std::ptrdiff_t>(initial_size), deck.end());
    return pool;
}

LabelStore reveal_labels(const LabelStore& oracle,
                         const std::vector<std::uint64_t>& ids) {
    LabelStore out;
    out.kind = oracle.kind;
    out.num_classes = oracle.num_classes;
    out.dense_dim = oracle.dense_dim;
    for (std::uint64_t id : ids) {
        if (!oracle.has(id))
            throw Error("oracle has no ground truth for id " + std::to_string(id));
        if (oracle.kind == LabelKind::Class)
            out.class_labels[id] = oracle.class_labels.at(id);
        else
            out.dense_labels[id] = oracle.dense_labels.at(id);
    }
    return out;
}

namespace {

EmbeddingMatrix submatrix(const EmbeddingMatrix& X,
                          const std::vector<std::uint64_t>& ids) {
    EmbeddingMatrix out;
    out.n = ids.size();
    out.d = X.d;
    out.ids = ids;
    out.data.reserve(ids.size() * X.d);
    for (std::uint64_t id : ids) {
        auto row = X.row(X.row_index(id));
        out.data.insert(out.data.end(), row.begin(), row.end());
    }
    out.validate();
    return out;
}

struct SeedRunContext {
    Dataset data;
    std::vector<std::uint64_t> train_ids, val_ids, test_ids;
    EmbeddingMatrix train_x, test_x;
};

SeedRunContext prepare_seed_run(const ExperimentConfig& cfg, std::uint64_t seed,
                                const Dataset* external) {
    SeedRunContext ctx;
    switch (cfg.task) {
        case TaskMode::ToyClassification:
            ctx.data = generate_blobs(cfg.synth, mix_seed(cfg.synth.seed, seed));
            break;
        case TaskMode::ToyDenseRegression:
            ctx.data = generate_linear_teacher(cfg.synth, mix_seed(cfg.synth.seed, seed));
            break;
        case TaskMode::ExternalEmbeddings:
            ctx.data = *external;
            break;
    }
    const auto& ids = ctx.data.features.ids;
    std::vector<std::uint64_t> deck = ids;
    Rng rng(mix_seed(seed, 0x73706c6974ULL));
    for (std::size_t i = 0; i + 1 < deck.size(); ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(deck.size() - i));
        std::swap(deck[i], deck[j]);
    }
    auto n = deck.size();
    auto n_train = static_cast<std::size_t>(std::floor(cfg.split.train * static_cast<double>(n)));
    auto n_val = static_cast<std::size_t>(std::floor(cfg.split.val * static_cast<double>(n)));
    if (n_train == 0 || n_train + n_val >= n)
        throw Error("split produces an empty partition");
    ctx.train_ids.assign(deck.begin(), deck.begin() + static_cast<std::ptrdiff_t>(n_train));
    ctx.val_ids.assign(deck.begin() + static_cast<std::ptrdiff_t>(n_train),
                       deck.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    ctx.test_ids.assign(deck.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), deck.end());
    ctx.train_x = submatrix(ctx.data.features, ctx.train_ids);
    ctx.test_x = submatrix(ctx.data.features, ctx.test_ids);
    return ctx;
}

TaskKind learner_task(const Dataset& ds) {
    return ds.labels.kind == LabelKind::Class ? TaskKind::Classifier
                                              : TaskKind::DenseRegressor;
}

std::size_t learner_output_dim(const Dataset& ds) {
    return ds.labels.kind == LabelKind::Class ? ds.labels.num_classes
                                              : ds.labels.dense_dim;
}

LearnerModel fit_round_model(const ExperimentConfig& cfg, const SeedRunContext& ctx,
                             const PoolState& pool, std::uint64_t seed,
                             std::size_t round, const LearnerModel* warm) {
    LearnerModel model =
        (cfg.warm_start && warm != nullptr)
            ? *warm
            : init_model(learner_task(ctx.data), ctx.train_x.d, cfg.latent_dim,
                         learner_output_dim(ctx.data), mix_seed(seed, 0xb000 + round));
    TrainConfig tc = cfg.learner;
    tc.seed = mix_seed(seed, 0xc000 + round);
    return train(model, ctx.train_x, pool.labelled, ctx.data.labels, tc);
}

void evaluate_round(const ExperimentConfig& cfg, const SeedRunContext& ctx,
                    const LearnerModel& model, const PoolState& pool,
                    std::uint64_t seed, std::size_t round,
                    std::vector<RunRecord>& records) {
    const std::string strat = to_string(cfg.strategy.kind);
    const std::size_t labelled_count = pool.labelled.size();
    std::vector<double> out = predict(model, ctx.test_x);

    if (ctx.data.labels.kind == LabelKind::Class) {
        const std::size_t c = model.output_dim;
        std::vector<int> pred(ctx.test_x.n), gt(ctx.test_x.n);
        for (std::size_t i = 0; i < ctx.test_x.n; ++i) {
            const double* row = out.data() + i * c;
            pred[i] = static_cast<int>(std::max_element(row, row + c) - row);
            gt[i] = ctx.data.labels.class_labels.at(ctx.test_x.ids[i]);
        }
        records.push_back({seed, strat, round, labelled_count, "accuracy",
                           accuracy(pred, gt)});
    } else {
        std::vector<double> gt;
        gt.reserve(out.size());
        for (std::uint64_t id : ctx.test_x.ids) {
            const auto& y = ctx.data.labels.dense_labels.at(id);
            gt.insert(gt.end(), y.begin(), y.end());
        }
        records.push_back({seed, strat, round, labelled_count, "rmse", rmse(out, gt)});
    }

    EmbeddingMatrix latents = encode(model, ctx.train_x);
    records.push_back({seed, strat, round, labelled_count, "coverage_radius",
                       coverage_radius(latents, pool.labelled)});
}

std::vector<std::uint64_t> apply_strategy(const ExperimentConfig& cfg,
                                          const SeedRunContext& ctx,
                                          const LearnerModel& model,
                                          const PoolState& pool,
                                          std::uint64_t seed, std::size_t round) {
    const std::size_t b = cfg.strategy.budget;
    switch (cfg.strategy.kind) {
        case StrategyKind::Random:
            return random_select(pool, b, mix_seed(seed, 0xd000 + round));
        case StrategyKind::KCenter: {
            EmbeddingMatrix z = encode(model, ctx.train_x);
            return kcenter_greedy(z, pool.labelled, b);
        }
        case StrategyKind::PcaCoreset: {
            std::size_t r = cfg.strategy.pca_dims
                                ? *cfg.strategy.pca_dims
                                : std::min<std::size_t>(32, ctx.train_x.d);
            return pca_coreset_select(ctx.train_x, pool, b, r);
        }
        case StrategyKind::Uncertainty:
        case StrategyKind::Hybrid: {
            if (ctx.data.labels.kind != LabelKind::Class)
                throw Error("uncertainty-based strategies need per-example "
                            "probability vectors (classification task)");
            EmbeddingMatrix unl = submatrix(ctx.train_x, pool.unlabelled);
            std::vector<double> probs = predict(model, unl);
            ScoreVector scores = bvsb_scores(pool.unlabelled, probs, model.output_dim);
            if (cfg.strategy.kind == StrategyKind::Uncertainty)
                return uncertainty_select(scores, b);
            // hybrid diversity space: task-aware latents, or the PCA
            // projection of raw features when pca_dims is given
            if (cfg.strategy.pca_dims) {
                PcaModel p = pca_fit(ctx.train_x, *cfg.strategy.pca_dims);
                EmbeddingMatrix z = pca_project(p, ctx.train_x);
                return hybrid_select(z, pool, scores, b, *cfg.strategy.gamma);
            }
            EmbeddingMatrix z = encode(model, ctx.train_x);
            return hybrid_select(z, pool, scores, b, *cfg.strategy.gamma);
        }
    }
    throw Error("bad strategy kind");
}

}  // namespace

std::vector<RunRecord> run_al_loop(const ExperimentConfig& config) {
    Dataset external;
    if (config.task == TaskMode::ExternalEmbeddings) {
        auto fmt = config.embeddings_format == "binary" ? EmbeddingFormat::Binary
                                                        : EmbeddingFormat::Csv;
        external.features = load_embeddings(config.embeddings_path, fmt);
        external.labels = config.label_kind == "dense"
                              ? load_dense_labels(config.labels_path)
                              : load_class_labels(config.labels_path);
    }

    std::vector<RunRecord> records;
    for (std::uint64_t seed : config.seeds) {
        SeedRunContext ctx = prepare_seed_run(config, seed, &external);
        if (config.initial_size + config.rounds * config.strategy.budget >
            ctx.train_ids.size())
            throw Error("initial_size + rounds*budget exceeds training pool size");

        PoolState pool =
            seed_pool(ctx.train_ids, config.initial_size, mix_seed(seed, 0xa11eedULL));
        LearnerModel model;
        std::size_t round = 0;
        try {
            model = fit_round_model(config, ctx, pool, seed, 0, nullptr);
            evaluate_round(config, ctx, model, pool, seed, 0, records);
            for (round = 1; round <= config.rounds; ++round) {
                auto picks = apply_strategy(config, ctx, model, pool, seed, round);
                std::unordered_set<std::uint64_t> picked(picks.begin(), picks.end());
                pool.selected = picks;
                std::erase_if(pool.unlabelled,
                              [&](std::uint64_t id) { return picked.count(id) != 0; });
                pool = commit_selection(pool, reveal_labels(ctx.data.labels, picks));
                model = fit_round_model(config, ctx, pool, seed, round, &model);
                evaluate_round(config, ctx, model, pool, seed, round, records);
            }
        } catch (const Error& e) {
            throw Error("seed " + std::to_string(seed) + " round " +
                        std::to_string(round) + ": " + e.what());
        }
    }
    return records;
}

void write_records_csv(const std::string& path,
                       const std::vector<RunRecord>& records) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "seed,strategy,round,labelled_count,metric,value\n";
    char buf[64];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof(buf), "%.17g", r.value);
        out << r.seed << ',' << r.strategy << ',' << r.round << ','
            << r.labelled_count << ',' << r.metric << ',' << buf << "\n";
    }
}

std::vector<RunRecord> read_records_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) ||
        line != "seed,strategy,round,labelled_count,metric,value")
        throw Error("malformed records header");
    std::vector<RunRecord> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> toks;
        while (std::getline(ss, tok, ',')) toks.push_back(tok);
        if (toks.size() != 6)
            throw Error("line " + std::to_string(line_no) + ": expected 6 columns");
        RunRecord r;
        try {
            r.seed = std::stoull(toks[0]);
            r.strategy = toks[1];
            r.round = std::stoul(toks[2]);
            r.labelled_count = std::stoul(toks[3]);
            r.metric = toks[4];
            r.value = std::stod(toks[5]);
        } catch (const std::exception&) {
            throw Error("line " + std::to_string(line_no) + ": malformed row");
        }
        out.push_back(std::move(r));
    }
    return out;
}

void export_projection(const EmbeddingMatrix& Z, const PoolState& pool,
                       const std::vector<std::uint64_t>& newly_selected,
                       const std::string& out_path) {
    if (Z.n < 2) throw Error("export_projection: need at least 2 points");
    std::size_t r = std::min<std::size_t>(2, std::min(Z.n, Z.d));
    PcaModel model = pca_fit(Z, r);
    EmbeddingMatrix proj = pca_project(model, Z);

    std::unordered_set<std::uint64_t> sel(newly_selected.begin(), newly_selected.end());
    std::unordered_set<std::uint64_t> lab(pool.labelled.begin(), pool.labelled.end());

    std::ofstream out(out_path);
    if (!out) throw Error("cannot write " + out_path);
    out << "id,x,y,status\n";
    char buf[128];
    for (std::size_t i = 0; i < proj.n; ++i) {
        double x = proj.data[i * r];
        double y = r > 1 ? proj.data[i * r + 1] : 0.0;
        std::uint64_t id = proj.ids[i];
        const char* status = sel.count(id)   ? "selected"
                             : lab.count(id) ? "labelled"
                                             : "unlabelled";
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g", x, y);
        out << id << ',' << buf << ',' << status << "\n";
    }
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
    std::map<std::tuple<std::string, std::size_t, std::string>, std::vector<double>> groups;
    for (const auto& r : records)
        groups[{r.strategy, r.labelled_count, r.metric}].push_back(r.value);
    std::vector<SummaryRow> rows;
    rows.reserve(groups.size());
    for (const auto& [key, vals] : groups) {
        SummaryRow row;
        row.strategy = std::get<0>(key);
        row.labelled_count = std::get<1>(key);
        row.metric = std::get<2>(key);
        row.n_seeds = vals.size();
        double mean = std::accumulate(vals.begin(), vals.end(), 0.0) /
                      static_cast<double>(vals.size());
        double var = 0.0;
        for (double v : vals) var += (v - mean) * (v - mean);
        var /= static_cast<double>(vals.size());
        row.mean = mean;
        row.stddev = std::sqrt(var);
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_summary_csv(const std::string& path,
                       const std::vector<SummaryRow>& rows,
                       std::size_t fraction_denominator) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "strategy,labelled_count,metric,mean,std,seeds";
    if (fraction_denominator > 0) out << ",fraction";
    out << "\n";
    char buf[96];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g", r.mean, r.stddev);
        out << r.strategy << ',' << r.labelled_count << ',' << r.metric << ','
            << buf << ',' << r.n_seeds;
        if (fraction_denominator > 0) {
            std::snprintf(buf, sizeof(buf), "%.9g",
                          static_cast<double>(r.labelled_count) /
                              static_cast<double>(fraction_denominator));
            out << ',' << buf;
        }
        out << "\n";
    }
}

void print_summary(const std::vector<SummaryRow>& rows,
                   std::size_t fraction_denominator) {
    std::printf("%-14s %10s %-16s %12s %12s %6s", "strategy", "labelled",
                "metric", "mean", "std", "seeds");
    if (fraction_denominator > 0) std::printf(" %10s", "fraction");
    std::printf("\n");
    for (const auto& r : rows) {
        std::printf("%-14s %10zu %-16s %12.6g %12.6g %6zu", r.strategy.c_str(),
                    r.labelled_count, r.metric.c_str(), r.mean, r.stddev, r.n_seeds);
        if (fraction_denominator > 0)
            std::printf(" %10.4g", static_cast<double>(r.labelled_count) /
                                       static_cast<double>(fraction_denominator));
        std::printf("\n");
    }
}

}  // namespace al
