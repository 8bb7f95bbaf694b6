// graphmi command-line front end. All heavy lifting goes through the C API in
// graphmi.h; this file only assembles configuration JSON from flags and files.

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "graphmi.h"

using nlohmann::json;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::string> seeds_csv;

    // dataset
    std::optional<std::string> data_path;
    std::optional<int> sbm_blocks, sbm_nodes_per_block;
    std::optional<double> sbm_p_in, sbm_p_out, sbm_feature_noise;
    std::optional<std::uint64_t> dataset_seed;

    // model
    std::optional<int> hidden, epochs, patience;
    std::optional<double> model_lr, train_fraction, val_fraction;
    std::optional<std::string> checkpoint;

    // attack
    std::optional<std::string> method;
    std::optional<double> alpha, beta, attack_lr, density, label_fraction, mu;
    std::optional<int> iterations, trials, q;
    std::optional<int> rl_episodes, rl_target_update, rl_batch_size, rl_embed_dim, rl_max_edges;
    std::optional<double> rl_gamma, rl_lr;

    // defense
    std::optional<std::string> strategy;
    std::optional<double> p, budget_fraction, clip_norm, noise_multiplier, delta;
    std::optional<int> dp_iterations;
    std::optional<std::string> sweep_csv;

    std::optional<bool> baselines;
    std::optional<int> influence_quantiles;
    std::optional<bool> save_scores;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "base config JSON file");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--seeds", f.seeds_csv, "comma-separated seed list");

    cmd->add_option("--data", f.data_path, "dataset directory (edges.tsv, labels.csv, ...)");
    cmd->add_option("--sbm-blocks", f.sbm_blocks);
    cmd->add_option("--sbm-nodes-per-block", f.sbm_nodes_per_block);
    cmd->add_option("--sbm-p-in", f.sbm_p_in);
    cmd->add_option("--sbm-p-out", f.sbm_p_out);
    cmd->add_option("--sbm-feature-noise", f.sbm_feature_noise);
    cmd->add_option("--dataset-seed", f.dataset_seed);

    cmd->add_option("--hidden", f.hidden);
    cmd->add_option("--epochs", f.epochs);
    cmd->add_option("--model-lr", f.model_lr);
    cmd->add_option("--train-fraction", f.train_fraction);
    cmd->add_option("--val-fraction", f.val_fraction);
    cmd->add_option("--patience", f.patience);
    cmd->add_option("--model", f.checkpoint, "load model checkpoint instead of training");

    cmd->add_option("--alpha", f.alpha);
    cmd->add_option("--beta", f.beta);
    cmd->add_option("--attack-lr", f.attack_lr);
    cmd->add_option("--iterations", f.iterations);
    cmd->add_option("--trials", f.trials);
    cmd->add_option("--density", f.density, "edge-density estimate; 0 uses ground truth");
    cmd->add_option("--label-fraction", f.label_fraction);
    cmd->add_option("--mu", f.mu);
    cmd->add_option("--q", f.q);
    cmd->add_option("--rl-episodes", f.rl_episodes);
    cmd->add_option("--rl-gamma", f.rl_gamma);
    cmd->add_option("--rl-target-update", f.rl_target_update);
    cmd->add_option("--rl-batch-size", f.rl_batch_size);
    cmd->add_option("--rl-embed-dim", f.rl_embed_dim);
    cmd->add_option("--rl-max-edges", f.rl_max_edges);
    cmd->add_option("--rl-lr", f.rl_lr);

    cmd->add_option("--p", f.p, "perturbation probability (rewire/flip)");
    cmd->add_option("--budget-fraction", f.budget_fraction, "added-edge budget (add)");
    cmd->add_option("--clip-norm", f.clip_norm);
    cmd->add_option("--noise-multiplier", f.noise_multiplier);
    cmd->add_option("--delta", f.delta);
    cmd->add_option("--dp-iterations", f.dp_iterations);
    cmd->add_option("--sweep", f.sweep_csv, "comma-separated sweep values");

    cmd->add_option("--baselines", f.baselines);
    cmd->add_option("--influence-quantiles", f.influence_quantiles);
    cmd->add_option("--save-scores", f.save_scores);
}

json load_base_config(const CommonFlags& f) {
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) throw std::runtime_error("cannot open config file: " + f.config_path);
        std::stringstream buf;
        buf << in.rdbuf();
        json cfg = json::parse(buf.str(), nullptr, false);
        if (cfg.is_discarded())
            throw std::runtime_error("invalid JSON in config file: " + f.config_path);
        return cfg;
    }
    char* text = nullptr;
    gmi_default_config(&text);
    json cfg = json::parse(text);
    gmi_string_free(text);
    return cfg;
}

std::vector<double> parse_csv_doubles(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
    return out;
}

template <typename T>
void overlay(json& obj, const char* key, const std::optional<T>& v) {
    if (v) obj[key] = *v;
}

json build_config(const CommonFlags& f) {
    json cfg = load_base_config(f);
    if (f.data_path) {
        cfg["dataset"]["kind"] = "files";
        cfg["dataset"]["path"] = *f.data_path;
        // SBM knobs make no sense alongside a file dataset.
        for (const char* k : {"blocks", "nodes_per_block", "p_in", "p_out", "feature_noise"})
            cfg["dataset"].erase(k);
    }
    overlay(cfg["dataset"], "blocks", f.sbm_blocks);
    overlay(cfg["dataset"], "nodes_per_block", f.sbm_nodes_per_block);
    overlay(cfg["dataset"], "p_in", f.sbm_p_in);
    overlay(cfg["dataset"], "p_out", f.sbm_p_out);
    overlay(cfg["dataset"], "feature_noise", f.sbm_feature_noise);
    overlay(cfg["dataset"], "seed", f.dataset_seed);

    overlay(cfg["model"], "hidden", f.hidden);
    overlay(cfg["model"], "epochs", f.epochs);
    overlay(cfg["model"], "lr", f.model_lr);
    overlay(cfg["model"], "train_fraction", f.train_fraction);
    overlay(cfg["model"], "val_fraction", f.val_fraction);
    overlay(cfg["model"], "patience", f.patience);
    overlay(cfg["model"], "checkpoint", f.checkpoint);

    overlay(cfg["attack"], "method", f.method);
    overlay(cfg["attack"], "alpha", f.alpha);
    overlay(cfg["attack"], "beta", f.beta);
    overlay(cfg["attack"], "lr", f.attack_lr);
    overlay(cfg["attack"], "iterations", f.iterations);
    overlay(cfg["attack"], "trials", f.trials);
    overlay(cfg["attack"], "density", f.density);
    overlay(cfg["attack"], "label_fraction", f.label_fraction);
    overlay(cfg["attack"], "mu", f.mu);
    overlay(cfg["attack"], "q", f.q);
    if (f.rl_episodes || f.rl_gamma || f.rl_target_update || f.rl_batch_size || f.rl_embed_dim ||
        f.rl_max_edges || f.rl_lr) {
        json& rl = cfg["attack"]["rl"];
        if (!rl.is_object()) rl = json::object();
        overlay(rl, "episodes", f.rl_episodes);
        overlay(rl, "gamma", f.rl_gamma);
        overlay(rl, "target_update", f.rl_target_update);
        overlay(rl, "batch_size", f.rl_batch_size);
        overlay(rl, "embed_dim", f.rl_embed_dim);
        overlay(rl, "max_edges", f.rl_max_edges);
        overlay(rl, "lr", f.rl_lr);
    }

    overlay(cfg["defense"], "strategy", f.strategy);
    overlay(cfg["defense"], "p", f.p);
    overlay(cfg["defense"], "budget_fraction", f.budget_fraction);
    overlay(cfg["defense"], "clip_norm", f.clip_norm);
    overlay(cfg["defense"], "noise_multiplier", f.noise_multiplier);
    overlay(cfg["defense"], "delta", f.delta);
    overlay(cfg["defense"], "iterations", f.dp_iterations);
    if (f.sweep_csv) cfg["defense"]["sweep"] = parse_csv_doubles(*f.sweep_csv);

    overlay(cfg, "baselines", f.baselines);
    overlay(cfg, "influence_quantiles", f.influence_quantiles);
    overlay(cfg, "save_scores", f.save_scores);
    if (f.seeds_csv) {
        std::vector<std::uint64_t> seeds;
        for (double v : parse_csv_doubles(*f.seeds_csv))
            seeds.push_back(static_cast<std::uint64_t>(v));
        cfg["seeds"] = seeds;
    }
    cfg["output_dir"] = f.out_dir;
    return cfg;
}

int fail_with_error(gmi_status status, const std::string& where) {
    json err = {{"status", "error"},
                {"code", static_cast<int>(status)},
                {"where", where},
                {"message", gmi_last_error()}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 1;
}

int run_pipeline_command(const CommonFlags& f) {
    const json cfg = build_config(f);
    char* report = nullptr;
    const gmi_status st = gmi_run_pipeline(cfg.dump().c_str(), f.out_dir.c_str(), &report);
    if (st != GMI_OK) return fail_with_error(st, "pipeline");
    std::printf("%s\n", report);
    gmi_string_free(report);
    return 0;
}

gmi_graph* open_graph(const json& cfg) {
    gmi_graph* graph = nullptr;
    const json& d = cfg.at("dataset");
    gmi_status st;
    if (d.value("kind", "sbm") == "files")
        st = gmi_graph_load(d.at("path").get<std::string>().c_str(), &graph);
    else
        st = gmi_graph_sbm(d.value("blocks", 2), d.value("nodes_per_block", 20),
                           d.value("p_in", 0.5), d.value("p_out", 0.02),
                           d.value("feature_noise", 0.1), d.value("seed", 7ULL), &graph);
    if (st != GMI_OK) throw std::runtime_error(gmi_last_error());
    return graph;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graphmi: GCN edge-reconstruction attacks, defenses, and evaluation"};
    app.require_subcommand(1);

    CommonFlags train_f, attack_f, defend_f, sweep_f, eval_f, report_f;
    std::string train_out_model, eval_recon_dir, report_dir;

    CLI::App* cmd_train = app.add_subcommand("train", "train the target model and save it");
    add_common_flags(cmd_train, train_f);
    cmd_train->add_option("--save-model", train_out_model, "checkpoint path to write");

    CLI::App* cmd_attack =
        app.add_subcommand("attack", "run an edge-reconstruction attack pipeline");
    add_common_flags(cmd_attack, attack_f);
    cmd_attack->add_option("--method", attack_f.method, "graphmi | ge | rl")->required();

    CLI::App* cmd_defend =
        app.add_subcommand("defend", "train with a defense, then attack the defended model");
    add_common_flags(cmd_defend, defend_f);
    cmd_defend->add_option("--strategy", defend_f.strategy, "dp | rewire | add | flip")
        ->required();

    CLI::App* cmd_sweep = app.add_subcommand("sweep", "defense sweep: one run per grid value");
    add_common_flags(cmd_sweep, sweep_f);

    CLI::App* cmd_eval =
        app.add_subcommand("eval", "graph-level statistics between a dataset and an edge list");
    add_common_flags(cmd_eval, eval_f);
    cmd_eval->add_option("--recon", eval_recon_dir, "directory holding the reconstruction")
        ->required();

    CLI::App* cmd_report = app.add_subcommand("report", "verify and summarize a report.json");
    cmd_report->add_option("--dir", report_dir, "pipeline output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_train->parsed()) {
            const json cfg = build_config(train_f);
            gmi_graph* graph = open_graph(cfg);
            json opts = cfg.value("model", json::object());
            opts.erase("checkpoint");
            if (!cfg["seeds"].empty()) opts["seed"] = cfg["seeds"][0];
            if (cfg.value("defense", json::object()).value("strategy", "none") == "dp") {
                const json& d = cfg["defense"];
                opts["dp"] = {{"clip_norm", d.value("clip_norm", 1.0)},
                              {"noise_multiplier", d.value("noise_multiplier", 1.0)},
                              {"delta", d.value("delta", 1e-5)},
                              {"iterations", d.value("iterations", 200)}};
            }
            gmi_model* model = nullptr;
            gmi_status st = gmi_model_train(graph, opts.dump().c_str(), &model);
            if (st != GMI_OK) {
                gmi_graph_free(graph);
                return fail_with_error(st, "train");
            }
            double acc = 0.0, eps = 0.0;
            gmi_model_accuracy(model, graph, &acc);
            gmi_model_epsilon(model, &eps);
            json out = {{"accuracy_all_nodes", acc}};
            if (eps == eps) out["dp_epsilon"] = eps;  // NaN -> not DP-trained
            if (!train_out_model.empty()) {
                st = gmi_model_save(model, train_out_model.c_str());
                if (st != GMI_OK) return fail_with_error(st, "save-model");
                out["checkpoint"] = train_out_model;
            }
            std::printf("%s\n", out.dump(2).c_str());
            gmi_model_free(model);
            gmi_graph_free(graph);
            return 0;
        }
        if (cmd_attack->parsed()) return run_pipeline_command(attack_f);
        if (cmd_defend->parsed()) return run_pipeline_command(defend_f);
        if (cmd_sweep->parsed()) {
            const json cfg = build_config(sweep_f);
            char* summary = nullptr;
            const gmi_status st =
                gmi_run_sweep(cfg.dump().c_str(), sweep_f.out_dir.c_str(), &summary);
            if (st != GMI_OK) return fail_with_error(st, "sweep");
            std::printf("%s\n", summary);
            gmi_string_free(summary);
            return 0;
        }
        if (cmd_eval->parsed()) {
            const json cfg = build_config(eval_f);
            gmi_graph* truth = open_graph(cfg);
            gmi_graph* recon = nullptr;
            gmi_status st = gmi_graph_load(eval_recon_dir.c_str(), &recon);
            if (st != GMI_OK) {
                gmi_graph_free(truth);
                return fail_with_error(st, "eval");
            }
            char* stats = nullptr;
            st = gmi_eval_graphs(truth, recon, &stats);
            if (st != GMI_OK) return fail_with_error(st, "eval");
            std::printf("%s\n", stats);
            gmi_string_free(stats);
            gmi_graph_free(truth);
            gmi_graph_free(recon);
            return 0;
        }
        if (cmd_report->parsed()) {
            std::ifstream in(report_dir + "/report.json");
            if (!in) throw std::runtime_error("cannot open " + report_dir + "/report.json");
            std::stringstream buf;
            buf << in.rdbuf();
            const gmi_status st = gmi_verify_report(buf.str().c_str());
            if (st != GMI_OK) return fail_with_error(st, "report");
            const json report = json::parse(buf.str());
            json summary = {{"status", report.value("status", "unknown")},
                            {"aggregate", report.value("aggregate", json::object())}};
            std::printf("%s\n", summary.dump(2).c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        json err = {{"status", "error"}, {"message", e.what()}};
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 1;
    }
    return 0;
}
