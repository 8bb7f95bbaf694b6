#include "graphmi/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "graphmi/checkpoint.hpp"
#include "graphmi/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace gmi {

namespace {

void require_keys(const json& obj, const char* where,
                  std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw Error(std::string(where) + ": expected a JSON object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (key == k) ok = true;
        if (!ok) throw Error(std::string(where) + ": unknown key '" + key + "'");
    }
}

template <typename T>
void maybe(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

json finite_or_string(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
}

void parse_attack_obj(const json& a, AttackSpec& out) {
    require_keys(a, "attack",
                 {"method", "alpha", "beta", "lr", "iterations", "trials", "density",
                  "label_fraction", "mu", "q", "rl"});
    maybe(a, "method", out.method);
    if (out.method != "graphmi" && out.method != "ge" && out.method != "rl" &&
        out.method != "none")
        throw Error("attack.method must be one of graphmi|ge|rl|none");
    maybe(a, "alpha", out.base.alpha);
    maybe(a, "beta", out.base.beta);
    maybe(a, "lr", out.base.lr);
    maybe(a, "iterations", out.base.iterations);
    maybe(a, "trials", out.base.trials);
    double density = 0.0;
    maybe(a, "density", density);
    if (density > 0.0) out.base.density = DensityEstimate{density, false};
    maybe(a, "label_fraction", out.base.label_fraction);
    maybe(a, "mu", out.mu);
    maybe(a, "q", out.q);
    if (a.contains("rl")) {
        const json& r = a["rl"];
        require_keys(r, "attack.rl",
                     {"gamma", "episodes", "target_update", "buffer_capacity", "batch_size",
                      "embed_dim", "lr", "eps_start", "eps_end", "max_edges"});
        maybe(r, "gamma", out.rl.gamma);
        maybe(r, "episodes", out.rl.episodes);
        maybe(r, "target_update", out.rl.target_update);
        maybe(r, "buffer_capacity", out.rl.buffer_capacity);
        maybe(r, "batch_size", out.rl.batch_size);
        maybe(r, "embed_dim", out.rl.embed_dim);
        maybe(r, "lr", out.rl.lr);
        maybe(r, "eps_start", out.rl.eps_start);
        maybe(r, "eps_end", out.rl.eps_end);
        maybe(r, "max_edges", out.rl.max_edges);
    }
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json root = json::parse(json_text, nullptr, false);
    if (root.is_discarded()) throw Error("config: invalid JSON");
    require_keys(root, "config",
                 {"dataset", "model", "attack", "defense", "baselines", "influence_quantiles",
                  "save_scores", "seeds", "output_dir"});
    ExperimentConfig cfg;

    if (root.contains("dataset")) {
        const json& d = root["dataset"];
        require_keys(d, "dataset",
                     {"kind", "path", "blocks", "nodes_per_block", "p_in", "p_out",
                      "feature_noise", "seed"});
        std::string kind = "sbm";
        maybe(d, "kind", kind);
        if (kind == "sbm")
            cfg.dataset.kind = DatasetSpec::Kind::kSbm;
        else if (kind == "files")
            cfg.dataset.kind = DatasetSpec::Kind::kFiles;
        else
            throw Error("dataset.kind must be 'sbm' or 'files'");
        maybe(d, "path", cfg.dataset.path);
        maybe(d, "blocks", cfg.dataset.sbm.blocks);
        maybe(d, "nodes_per_block", cfg.dataset.sbm.nodes_per_block);
        maybe(d, "p_in", cfg.dataset.sbm.p_in);
        maybe(d, "p_out", cfg.dataset.sbm.p_out);
        maybe(d, "feature_noise", cfg.dataset.sbm.feature_noise);
        maybe(d, "seed", cfg.dataset.seed);
        if (cfg.dataset.kind == DatasetSpec::Kind::kFiles && cfg.dataset.path.empty())
            throw Error("dataset.path is required when dataset.kind is 'files'");
    }

    if (root.contains("model")) {
        const json& m = root["model"];
        require_keys(m, "model",
                     {"hidden", "epochs", "lr", "train_fraction", "val_fraction", "patience",
                      "checkpoint"});
        maybe(m, "hidden", cfg.model.hidden);
        maybe(m, "epochs", cfg.model.epochs);
        maybe(m, "lr", cfg.model.lr);
        maybe(m, "train_fraction", cfg.model.train_fraction);
        maybe(m, "val_fraction", cfg.model.val_fraction);
        maybe(m, "patience", cfg.model.patience);
        maybe(m, "checkpoint", cfg.model.checkpoint);
        if (cfg.model.hidden < 1 || cfg.model.epochs < 0)
            throw Error("model: hidden must be >= 1 and epochs >= 0");
        if (!(cfg.model.train_fraction > 0.0 && cfg.model.train_fraction < 1.0))
            throw Error("model.train_fraction must be in (0,1)");
        if (!(cfg.model.val_fraction >= 0.0 &&
              cfg.model.train_fraction + cfg.model.val_fraction < 1.0))
            throw Error("model.val_fraction leaves no held-out nodes");
    }

    if (root.contains("attack")) parse_attack_obj(root["attack"], cfg.attack);

    if (root.contains("defense")) {
        const json& d = root["defense"];
        require_keys(d, "defense",
                     {"strategy", "p", "budget_fraction", "clip_norm", "noise_multiplier",
                      "delta", "iterations", "sweep"});
        maybe(d, "strategy", cfg.defense.strategy);
        if (cfg.defense.strategy != "none" && cfg.defense.strategy != "dp" &&
            cfg.defense.strategy != "rewire" && cfg.defense.strategy != "add" &&
            cfg.defense.strategy != "flip")
            throw Error("defense.strategy must be one of none|dp|rewire|add|flip");
        maybe(d, "p", cfg.defense.p);
        maybe(d, "budget_fraction", cfg.defense.budget_fraction);
        maybe(d, "clip_norm", cfg.defense.dp.clip_norm);
        maybe(d, "noise_multiplier", cfg.defense.dp.noise_multiplier);
        maybe(d, "delta", cfg.defense.dp.delta);
        maybe(d, "iterations", cfg.defense.dp.iterations);
        maybe(d, "sweep", cfg.defense.sweep);
    }

    maybe(root, "baselines", cfg.baselines);
    maybe(root, "influence_quantiles", cfg.influence_quantiles);
    maybe(root, "save_scores", cfg.save_scores);
    maybe(root, "seeds", cfg.seeds);
    maybe(root, "output_dir", cfg.output_dir);
    if (cfg.seeds.empty()) throw Error("config: seeds must be non-empty");
    return cfg;
}

std::string default_config_json() {
    json root;
    root["dataset"] = {{"kind", "sbm"},       {"blocks", 2},   {"nodes_per_block", 20},
                       {"p_in", 0.5},         {"p_out", 0.02}, {"feature_noise", 0.1},
                       {"seed", 7}};
    root["model"] = {{"hidden", 16},         {"epochs", 200}, {"lr", 0.01},
                     {"train_fraction", 0.1}, {"val_fraction", 0.2}, {"patience", 20}};
    root["attack"] = {{"method", "graphmi"},  {"alpha", 0.001}, {"beta", 0.0001},
                      {"lr", 0.1},            {"iterations", 100}, {"trials", 20},
                      {"density", 0.0},       {"label_fraction", 1.0}, {"mu", 0.01},
                      {"q", 100}};
    root["defense"] = {{"strategy", "none"}, {"p", 0.5}, {"budget_fraction", 0.2},
                       {"clip_norm", 1.0},   {"noise_multiplier", 1.0}, {"delta", 1e-5},
                       {"iterations", 200}};
    root["baselines"] = true;
    root["seeds"] = {1, 2, 3, 4, 5};
    root["output_dir"] = "out";
    return root.dump(2);
}

namespace {

struct Masks {
    std::vector<std::uint8_t> train, val, test;
};

// Random split into train/val/test with at least one training node per class.
Masks make_masks(const Graph& g, double train_fraction, double val_fraction, Rng& rng) {
    const std::size_t n = g.num_nodes;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::size_t j = i + rng.below(n - i);
        std::swap(order[i], order[j]);
    }
    Masks m;
    m.train.assign(n, 0);
    m.val.assign(n, 0);
    m.test.assign(n, 0);
    std::size_t n_train = std::max<std::size_t>(
        1, static_cast<std::size_t>(train_fraction * static_cast<double>(n)));
    const std::size_t n_val = static_cast<std::size_t>(val_fraction * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (i < n_train)
            m.train[order[i]] = 1;
        else if (i < n_train + n_val)
            m.val[order[i]] = 1;
        else
            m.test[order[i]] = 1;
    }
    // Promote one node of any class the shuffle missed.
    const std::size_t classes = g.num_classes();
    for (std::size_t c = 0; c < classes; ++c) {
        bool seen = false;
        for (std::size_t i = 0; i < n; ++i)
            if (m.train[i] && g.labels[i] == static_cast<int>(c)) seen = true;
        if (seen) continue;
        for (std::size_t i = 0; i < n; ++i)
            if (!m.train[i] && g.labels[i] == static_cast<int>(c)) {
                m.train[i] = 1;
                m.val[i] = 0;
                m.test[i] = 0;
                break;
            }
    }
    return m;
}

struct SeedOutcome {
    json entry;
    double auc_value = 0.0;
    double ap_value = 0.0;
    double accuracy_value = 0.0;
    double queries = 0.0;
};

json stats_to_json(const GraphStatsReport& s) {
    return {{"wl", s.wl_similarity},
            {"degree_cos", s.degree_cos},
            {"lcc_cos", s.lcc_cos},
            {"bc_cos", s.bc_cos},
            {"cc_cos", s.cc_cos}};
}

SeedOutcome run_single_seed(const ExperimentConfig& cfg, const Graph& original,
                            std::uint64_t seed, const fs::path& out) {
    Rng root(seed);
    SeedOutcome outcome;
    json& entry = outcome.entry;
    entry["seed"] = seed;
    json timing;

    // Defense first: the target trains on the perturbed graph, metrics are
    // always taken against the original edges.
    Graph working = original;
    if (cfg.defense.strategy != "none" && cfg.defense.strategy != "dp") {
        PerturbConfig pc;
        pc.strategy = parse_strategy(cfg.defense.strategy == "add" ? "add_similar"
                                                                   : cfg.defense.strategy);
        pc.p = cfg.defense.strategy == "add" ? cfg.defense.budget_fraction : cfg.defense.p;
        pc.seed = root.fork("defense").next_u64();
        double eps = 0.0;
        working = apply_perturbation(original, pc, &eps);
        entry["defense"] = {{"strategy", cfg.defense.strategy}, {"p", pc.p}};
        if (cfg.defense.strategy == "flip") entry["defense"]["epsilon"] = eps;
    }

    const auto t_train0 = std::chrono::steady_clock::now();
    Masks masks = [&] {
        Rng mask_rng = root.fork("masks");
        return make_masks(working, cfg.model.train_fraction, cfg.model.val_fraction, mask_rng);
    }();
    GcnModel model;
    if (!cfg.model.checkpoint.empty()) {
        model = load_model(cfg.model.checkpoint);
    } else if (cfg.defense.strategy == "dp") {
        DpTrainResult dp = train_gcn_dp(working, masks.train, cfg.defense.dp, cfg.model.lr,
                                        root.fork("train").next_u64());
        model = std::move(dp.model);
        entry["dp_epsilon"] = finite_or_string(dp.epsilon);
    } else {
        TrainOptions opt;
        opt.hidden = cfg.model.hidden;
        opt.epochs = cfg.model.epochs;
        opt.lr = cfg.model.lr;
        opt.patience = cfg.model.patience;
        opt.seed = root.fork("train").next_u64();
        TrainResult tr = train_gcn(working, masks.train, masks.val, opt);
        model = std::move(tr.model);
        entry["epochs_run"] = tr.epochs_run;
    }
    timing["train_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_train0).count();

    // Utility of the (possibly defended) deployment.
    const std::vector<int> predictions = predict_hard(model, working.adjacency, working.features);
    outcome.accuracy_value = accuracy(predictions, working.labels, masks.test);
    entry["model_accuracy"] = outcome.accuracy_value;

    if (cfg.attack.method == "none") {
        entry["timing"] = timing;
        outcome.auc_value = std::numeric_limits<double>::quiet_NaN();
        return outcome;
    }

    const std::uint64_t attack_seed = root.fork("attack").next_u64();
    const auto t_attack0 = std::chrono::steady_clock::now();
    ReconstructionResult recon = run_attack(model, original, cfg.attack, attack_seed);
    timing["attack_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_attack0).count();

    const std::uint64_t eval_seed = root.fork("eval").next_u64();
    const EdgeScoreSet set =
        make_edge_score_set(original.adjacency, recon.probabilities, eval_seed);
    outcome.auc_value = auc(set);
    outcome.ap_value = average_precision(set);
    outcome.queries = static_cast<double>(recon.query_count);
    entry["auc"] = outcome.auc_value;
    entry["ap"] = outcome.ap_value;
    entry["queries"] = recon.query_count;
    std::size_t sampled_edges = 0;
    for (double v : upper_triangle(recon.sampled).values)
        if (v != 0.0) ++sampled_edges;
    entry["sampled_edges"] = sampled_edges;
    entry["stats"] = stats_to_json(macro_stats_similarity(original.adjacency, recon.sampled));

    if (cfg.baselines) {
        json b;
        {
            const AdjVector attr = baseline_attr_similarity(original);
            const EdgeScoreSet s2 = make_edge_score_set(original.adjacency, attr, eval_seed);
            b["attr_auc"] = auc(s2);
            b["attr_ap"] = average_precision(s2);
        }
        {
            const AdjVector emb = baseline_emb_similarity(model, original);
            const EdgeScoreSet s3 = make_edge_score_set(original.adjacency, emb, eval_seed);
            b["emb_auc"] = auc(s3);
            b["emb_ap"] = average_precision(s3);
        }
        entry["baselines"] = b;
    }

    if (cfg.influence_quantiles > 0) {
        json table = json::array();
        for (const auto& row :
             influence_stratified_auc(model, original, recon.probabilities,
                                      cfg.influence_quantiles, eval_seed)) {
            table.push_back({{"stratum", row.index},
                             {"influence_lo", row.influence_lo},
                             {"influence_hi", row.influence_hi},
                             {"edges", row.edge_count},
                             {"auc", row.auc}});
        }
        entry["influence"] = table;
    }

    // Curve CSVs: attack loss trace and, for gradient estimation, the
    // rectified-gradient norms.
    {
        std::ofstream csv(out / ("loss_trace_seed" + std::to_string(seed) + ".csv"));
        csv << "iteration,attack_loss\n";
        for (std::size_t i = 0; i < recon.attack_loss_trace.size(); ++i)
            csv << i << "," << recon.attack_loss_trace[i] << "\n";
    }
    if (!recon.rectified_norm_trace.empty()) {
        std::ofstream csv(out / ("rectified_norm_seed" + std::to_string(seed) + ".csv"));
        csv << "iteration,rectified_norm\n";
        for (std::size_t i = 0; i < recon.rectified_norm_trace.size(); ++i)
            csv << i << "," << recon.rectified_norm_trace[i] << "\n";
    }
    {
        std::ofstream tsv(out / ("recon_edges_seed" + std::to_string(seed) + ".tsv"));
        const std::size_t n = original.num_nodes;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (recon.sampled(i, j) != 0.0) tsv << i << "\t" << j << "\n";
    }
    if (cfg.save_scores) {
        std::ofstream csv(out / ("recon_scores_seed" + std::to_string(seed) + ".csv"));
        csv << "i,j,score\n";
        csv.precision(17);
        const std::size_t n = original.num_nodes;
        std::size_t k = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j, ++k)
                csv << i << "," << j << "," << recon.probabilities.values[k] << "\n";
    }

    entry["timing"] = timing;
    return outcome;
}

json aggregate_from_entries(const json& per_seed) {
    std::vector<double> aucs, aps, accs, queries;
    for (const auto& e : per_seed) {
        if (e.contains("auc")) aucs.push_back(e["auc"].get<double>());
        if (e.contains("ap")) aps.push_back(e["ap"].get<double>());
        if (e.contains("model_accuracy")) accs.push_back(e["model_accuracy"].get<double>());
        if (e.contains("queries")) queries.push_back(e["queries"].get<double>());
    }
    json agg;
    if (!aucs.empty()) {
        agg["auc_mean"] = mean_of(aucs);
        agg["auc_std"] = stddev_of(aucs);
    }
    if (!aps.empty()) {
        agg["ap_mean"] = mean_of(aps);
        agg["ap_std"] = stddev_of(aps);
    }
    if (!accs.empty()) {
        agg["accuracy_mean"] = mean_of(accs);
        agg["accuracy_std"] = stddev_of(accs);
    }
    if (!queries.empty()) agg["queries_mean"] = mean_of(queries);
    return agg;
}

Graph load_or_generate(const ExperimentConfig& cfg) {
    if (cfg.dataset.kind == DatasetSpec::Kind::kFiles) return load_dataset(cfg.dataset.path);
    return generate_sbm(cfg.dataset.sbm, cfg.dataset.seed);
}

}  // namespace

AttackSpec parse_attack_spec(const std::string& json_text) {
    json obj = json::parse(json_text, nullptr, false);
    if (obj.is_discarded()) throw Error("attack spec: invalid JSON");
    AttackSpec spec;
    parse_attack_obj(obj, spec);
    return spec;
}

ReconstructionResult run_attack(const GcnModel& model, const Graph& original,
                                const AttackSpec& spec, std::uint64_t seed) {
    AttackSpec eff = spec;
    if (!(eff.base.density.rho > 0.0))
        eff.base.density = DensityEstimate{density(original.adjacency), true};
    if (eff.method == "graphmi")
        return run_graphmi(model, original.features, original.labels, eff.base, seed);
    if (eff.method == "ge") {
        HardLabelOracle oracle(model, original.features);
        GeConfig ge;
        ge.base = eff.base;
        ge.mu = eff.mu;
        ge.q = eff.q;
        return run_gradient_estimation(oracle, original.features, original.labels, ge, seed);
    }
    if (eff.method == "rl") {
        HardLabelOracle oracle(model, original.features);
        RlConfig rl = eff.rl;
        if (rl.max_edges <= 1) {
            const std::size_t pairs = original.num_nodes * (original.num_nodes - 1) / 2;
            rl.max_edges =
                std::max(1, static_cast<int>(eff.base.density.rho * static_cast<double>(pairs)));
        }
        return run_rl_graphmi(oracle, original.features, original.labels, rl,
                              eff.base.label_fraction, seed);
    }
    throw Error("run_attack: method '" + eff.method + "' does not produce a reconstruction");
}

TrainSpec parse_train_spec(const std::string& json_text) {
    json obj = json::parse(json_text, nullptr, false);
    if (obj.is_discarded()) throw Error("train spec: invalid JSON");
    require_keys(obj, "train",
                 {"hidden", "epochs", "lr", "train_fraction", "val_fraction", "patience",
                  "checkpoint", "seed", "dp"});
    TrainSpec spec;
    maybe(obj, "hidden", spec.model.hidden);
    maybe(obj, "epochs", spec.model.epochs);
    maybe(obj, "lr", spec.model.lr);
    maybe(obj, "train_fraction", spec.model.train_fraction);
    maybe(obj, "val_fraction", spec.model.val_fraction);
    maybe(obj, "patience", spec.model.patience);
    maybe(obj, "checkpoint", spec.model.checkpoint);
    maybe(obj, "seed", spec.seed);
    if (obj.contains("dp")) {
        require_keys(obj["dp"], "train.dp",
                     {"clip_norm", "noise_multiplier", "delta", "iterations"});
        spec.use_dp = true;
        maybe(obj["dp"], "clip_norm", spec.dp.clip_norm);
        maybe(obj["dp"], "noise_multiplier", spec.dp.noise_multiplier);
        maybe(obj["dp"], "delta", spec.dp.delta);
        maybe(obj["dp"], "iterations", spec.dp.iterations);
    }
    return spec;
}

TrainedModel train_from_spec(const Graph& g, const TrainSpec& spec) {
    Rng root(spec.seed);
    Rng mask_rng = root.fork("masks");
    const Masks masks =
        make_masks(g, spec.model.train_fraction, spec.model.val_fraction, mask_rng);
    TrainedModel out;
    if (spec.use_dp) {
        DpTrainResult dp =
            train_gcn_dp(g, masks.train, spec.dp, spec.model.lr, root.fork("train").next_u64());
        out.model = std::move(dp.model);
        out.epsilon = dp.epsilon;
    } else {
        TrainOptions opt;
        opt.hidden = spec.model.hidden;
        opt.epochs = spec.model.epochs;
        opt.lr = spec.model.lr;
        opt.patience = spec.model.patience;
        opt.seed = root.fork("train").next_u64();
        out.model = train_gcn(g, masks.train, masks.val, opt).model;
    }
    out.test_accuracy =
        accuracy(predict_hard(out.model, g.adjacency, g.features), g.labels, masks.test);
    return out;
}

std::string run_pipeline(const std::string& config_json, const std::string& out_dir) {
    const ExperimentConfig cfg = parse_config(config_json);
    const fs::path out(out_dir);
    fs::create_directories(out);

    json report;
    report["config"] = json::parse(config_json);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const Graph original = load_or_generate(cfg);
        report["dataset"] = {{"nodes", original.num_nodes},
                             {"edges", original.num_edges()},
                             {"density", density(original.adjacency)},
                             {"classes", original.num_classes()},
                             {"hash", hex64(original.content_hash())}};
        json per_seed = json::array();
        for (std::uint64_t seed : cfg.seeds) {
            SeedOutcome o = run_single_seed(cfg, original, seed, out);
            per_seed.push_back(std::move(o.entry));
        }
        report["per_seed"] = per_seed;
        report["aggregate"] = aggregate_from_entries(per_seed);
        report["status"] = "ok";
    } catch (const std::exception& e) {
        report["status"] = "partial";
        report["error"] = e.what();
        report["timing"] = {{"total_seconds",
                             std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                 .count()}};
        std::ofstream f(out / "report.json");
        f << report.dump(2) << "\n";
        throw;
    }
    report["timing"] = {
        {"total_seconds",
         std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
    std::ofstream f(out / "report.json");
    const std::string text = report.dump(2);
    f << text << "\n";
    return text;
}

std::string run_sweep(const std::string& config_json, const std::string& out_dir) {
    const ExperimentConfig cfg = parse_config(config_json);
    if (cfg.defense.sweep.empty()) throw Error("sweep: defense.sweep must list parameter values");
    if (cfg.defense.strategy == "none") throw Error("sweep: defense.strategy must be set");
    const fs::path out(out_dir);
    fs::create_directories(out);

    json points = json::array();
    std::ofstream csv(out / "sweep.csv");
    csv << "parameter,accuracy_mean,accuracy_std,auc_mean,auc_std,ap_mean\n";
    for (double value : cfg.defense.sweep) {
        json sub = json::parse(config_json);
        sub.erase("output_dir");
        sub["defense"].erase("sweep");
        if (cfg.defense.strategy == "dp")
            sub["defense"]["noise_multiplier"] = value;
        else if (cfg.defense.strategy == "add")
            sub["defense"]["budget_fraction"] = value;
        else
            sub["defense"]["p"] = value;
        std::ostringstream label;
        label << "point_" << value;
        const std::string report_text = run_pipeline(sub.dump(), (out / label.str()).string());
        const json report = json::parse(report_text);
        const json& agg = report.at("aggregate");
        json point = {{"parameter", value},
                      {"accuracy_mean", agg.value("accuracy_mean", 0.0)},
                      {"accuracy_std", agg.value("accuracy_std", 0.0)},
                      {"auc_mean", agg.value("auc_mean", 0.0)},
                      {"auc_std", agg.value("auc_std", 0.0)},
                      {"ap_mean", agg.value("ap_mean", 0.0)}};
        points.push_back(point);
        csv << value << "," << point["accuracy_mean"].get<double>() << ","
            << point["accuracy_std"].get<double>() << "," << point["auc_mean"].get<double>()
            << "," << point["auc_std"].get<double>() << "," << point["ap_mean"].get<double>()
            << "\n";
    }
    json summary = {{"strategy", cfg.defense.strategy}, {"points", points}};
    std::ofstream f(out / "sweep.json");
    const std::string text = summary.dump(2);
    f << text << "\n";
    return text;
}

void verify_report(const std::string& report_json) {
    const json report = json::parse(report_json);
    if (!report.contains("per_seed")) throw Error("verify_report: missing per_seed");
    const json recomputed = aggregate_from_entries(report.at("per_seed"));
    if (recomputed != report.at("aggregate"))
        throw Error("verify_report: aggregate does not match per-seed entries");
}

namespace {

void strip_timing_inplace(json& node) {
    if (node.is_object()) {
        node.erase("timing");
        for (auto& [key, value] : node.items()) strip_timing_inplace(value);
    } else if (node.is_array()) {
        for (auto& value : node) strip_timing_inplace(value);
    }
}

}  // namespace

std::string strip_timing(const std::string& report_json) {
    json report = json::parse(report_json);
    strip_timing_inplace(report);
    return report.dump(2);
}

}  // namespace gmi
