#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>

#include "al/harness.hpp"
#include "al/metrics.hpp"
#include "al/pca.hpp"
#include "al/pool.hpp"
#include "al/samplers.hpp"

namespace {

al::EmbeddingFormat parse_format(const std::string& s) {
    if (s == "csv") return al::EmbeddingFormat::Csv;
    if (s == "binary") return al::EmbeddingFormat::Binary;
    throw al::Error("unknown embedding format '" + s + "'");
}

// Scores file: either `id,score` (used as-is, lower = more uncertain) or
// `id,p0,...,p{C-1}` probability rows run through the BvSB margin.
al::ScoreVector load_scores(const std::string& path,
                            const std::vector<std::uint64_t>& unlabelled) {
    std::ifstream in(path);
    if (!in) throw al::Error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("id,", 0) != 0)
        throw al::Error("malformed scores header in " + path);
    std::size_t columns = 1 + static_cast<std::size_t>(
        std::count(line.begin(), line.end(), ','));
    const bool direct = line == "id,score";
    if (!direct && columns < 3)
        throw al::Error("scores header must be 'id,score' or 'id,p0,...'");

    std::vector<std::uint64_t> ids;
    std::vector<double> values;  // scores, or flattened probability rows
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> toks;
        while (std::getline(ss, tok, ',')) toks.push_back(tok);
        if (toks.size() != columns)
            throw al::Error("scores line " + std::to_string(line_no) +
                            ": expected " + std::to_string(columns) + " columns");
        try {
            ids.push_back(std::stoull(toks[0]));
            for (std::size_t j = 1; j < toks.size(); ++j)
                values.push_back(std::stod(toks[j]));
        } catch (const std::exception&) {
            throw al::Error("scores line " + std::to_string(line_no) + ": bad value");
        }
    }

    std::unordered_map<std::uint64_t, double> by_id;
    if (direct) {
        for (std::size_t i = 0; i < ids.size(); ++i) by_id[ids[i]] = values[i];
    } else {
        // tolerate rounding from files with truncated decimals
        const std::size_t c = columns - 1;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < c; ++j) sum += values[i * c + j];
            if (std::abs(sum - 1.0) > 1e-3)
                throw al::Error("probability row for id " + std::to_string(ids[i]) +
                                " does not sum to 1");
            for (std::size_t j = 0; j < c; ++j) values[i * c + j] /= sum;
        }
        al::ScoreVector all = al::bvsb_scores(ids, values, columns - 1);
        for (std::size_t i = 0; i < all.ids.size(); ++i)
            by_id[all.ids[i]] = all.scores[i];
    }
    al::ScoreVector out;
    for (std::uint64_t id : unlabelled) {
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw al::Error("no score for unlabelled id " + std::to_string(id));
        out.ids.push_back(id);
        out.scores.push_back(it->second);
    }
    return out;
}

int cmd_select(const std::string& embeddings, const std::string& format,
               const std::string& labelled_path, const std::string& strategy,
               std::size_t budget, double gamma, bool has_gamma,
               std::size_t pca_dims, bool has_pca_dims,
               const std::string& scores_path, std::uint64_t seed,
               const std::string& out_path) {
    auto z = al::load_embeddings(embeddings, parse_format(format));
    auto labelled = labelled_path.empty() ? std::vector<std::uint64_t>{}
                                          : al::load_index_list(labelled_path);
    std::unordered_set<std::uint64_t> lab(labelled.begin(), labelled.end());
    al::PoolState pool;
    pool.labelled = labelled;
    for (std::uint64_t id : z.ids)
        if (!lab.count(id)) pool.unlabelled.push_back(id);

    al::StrategySpec spec;
    spec.kind = al::strategy_kind_from_string(strategy);
    spec.budget = budget;
    spec.seed = seed;
    if (has_gamma) spec.gamma = gamma;
    if (has_pca_dims) spec.pca_dims = pca_dims;
    if (spec.kind == al::StrategyKind::PcaCoreset && !spec.pca_dims)
        spec.pca_dims = std::min<std::size_t>(32, z.d);
    spec.validate();

    std::vector<std::uint64_t> picks;
    switch (spec.kind) {
        case al::StrategyKind::Random:
            picks = al::random_select(pool, budget, seed);
            break;
        case al::StrategyKind::KCenter:
            picks = al::kcenter_greedy(z, pool.labelled, budget);
            break;
        case al::StrategyKind::PcaCoreset:
            picks = al::pca_coreset_select(z, pool, budget, *spec.pca_dims);
            break;
        case al::StrategyKind::Uncertainty: {
            auto scores = load_scores(scores_path, pool.unlabelled);
            picks = al::uncertainty_select(scores, budget);
            break;
        }
        case al::StrategyKind::Hybrid: {
            auto scores = load_scores(scores_path, pool.unlabelled);
            if (spec.pca_dims) {
                auto model = al::pca_fit(z, *spec.pca_dims);
                auto proj = al::pca_project(model, z);
                picks = al::hybrid_select(proj, pool, scores, budget, *spec.gamma);
            } else {
                picks = al::hybrid_select(z, pool, scores, budget, *spec.gamma);
            }
            break;
        }
    }
    al::save_index_list(out_path, picks);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Task-aware active-learning sampling engine"};
    app.require_subcommand(1);

    // select
    auto* sel = app.add_subcommand("select", "Run one acquisition step on an embedding file");
    std::string sel_embeddings, sel_format = "csv", sel_labelled, sel_strategy;
    std::string sel_scores, sel_out;
    std::size_t sel_budget = 0, sel_pca_dims = 0;
    double sel_gamma = 0.0;
    std::uint64_t sel_seed = 0;
    sel->add_option("--embeddings", sel_embeddings, "Embedding file")->required();
    sel->add_option("--format", sel_format, "csv or binary");
    sel->add_option("--labelled", sel_labelled, "Labelled id list file");
    sel->add_option("--strategy", sel_strategy,
                    "random | kcenter | pca_coreset | uncertainty | hybrid")
        ->required();
    sel->add_option("--budget", sel_budget, "Examples to select")->required();
    auto* gamma_opt = sel->add_option("--gamma", sel_gamma, "Hybrid mixing fraction");
    auto* pca_opt = sel->add_option("--pca-dims", sel_pca_dims, "PCA target dimension");
    sel->add_option("--scores", sel_scores,
                    "Scores CSV (id,score or id,p0,...) for uncertainty/hybrid");
    sel->add_option("--seed", sel_seed, "Random seed");
    sel->add_option("--out", sel_out, "Output id list")->required();

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run the full AL loop from a JSON config");
    std::string sim_config, sim_out;
    sim->add_option("--config", sim_config, "JSON experiment config")->required();
    sim->add_option("--out", sim_out, "Records CSV output")->required();

    // project
    auto* prj = app.add_subcommand("project", "Export a PCA 2-D projection with pool status");
    std::string prj_embeddings, prj_format = "csv", prj_labelled, prj_selected, prj_out;
    prj->add_option("--embeddings", prj_embeddings, "Embedding file")->required();
    prj->add_option("--format", prj_format, "csv or binary");
    prj->add_option("--labelled", prj_labelled, "Labelled id list file");
    prj->add_option("--selected", prj_selected, "Newly selected id list file");
    prj->add_option("--out", prj_out, "Output CSV")->required();

    // report
    auto* rep = app.add_subcommand("report", "Summarize a records CSV across seeds");
    std::string rep_in, rep_out;
    std::size_t rep_denominator = 0;
    rep->add_option("--in", rep_in, "Records CSV")->required();
    rep->add_option("--out", rep_out, "Summary CSV (default: <in>.summary.csv)");
    rep->add_option("--denominator", rep_denominator,
                    "Pool size used to report labelled fractions");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sel->parsed()) {
            return cmd_select(sel_embeddings, sel_format, sel_labelled, sel_strategy,
                              sel_budget, sel_gamma, gamma_opt->count() > 0,
                              sel_pca_dims, pca_opt->count() > 0, sel_scores,
                              sel_seed, sel_out);
        }
        if (sim->parsed()) {
            auto cfg = al::load_config(sim_config);
            auto records = al::run_al_loop(cfg);
            al::write_records_csv(sim_out, records);
            std::printf("wrote %zu records to %s\n", records.size(), sim_out.c_str());
            return 0;
        }
        if (prj->parsed()) {
            auto z = al::load_embeddings(prj_embeddings, parse_format(prj_format));
            al::PoolState pool;
            if (!prj_labelled.empty()) pool.labelled = al::load_index_list(prj_labelled);
            std::vector<std::uint64_t> selected;
            if (!prj_selected.empty()) selected = al::load_index_list(prj_selected);
            al::export_projection(z, pool, selected, prj_out);
            return 0;
        }
        if (rep->parsed()) {
            auto records = al::read_records_csv(rep_in);
            auto rows = al::summarize(records);
            al::print_summary(rows, rep_denominator);
            std::string out = rep_out.empty() ? rep_in + ".summary.csv" : rep_out;
            al::write_summary_csv(out, rows, rep_denominator);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
