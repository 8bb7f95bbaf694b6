#include "graphmi.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "graphmi/checkpoint.hpp"
#include "graphmi/defense.hpp"
#include "graphmi/metrics.hpp"
#include "graphmi/pipeline.hpp"

using nlohmann::json;

struct gmi_graph {
    gmi::Graph graph;
};
struct gmi_model {
    gmi::GcnModel model;
};
struct gmi_result {
    gmi::ReconstructionResult result;
};

namespace {

thread_local std::string g_last_error;

gmi_status fail(gmi_status code, const char* message) {
    g_last_error = message;
    return code;
}

// Runs the body, translating exceptions into status codes.
template <typename Fn>
gmi_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const gmi::ShapeError& e) {
        return fail(GMI_ERR_INVALID_ARGUMENT, e.what());
    } catch (const gmi::Error& e) {
        return fail(GMI_ERR_RUNTIME, e.what());
    } catch (const std::exception& e) {
        return fail(GMI_ERR_RUNTIME, e.what());
    } catch (...) {
        return fail(GMI_ERR_RUNTIME, "unknown error");
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

extern "C" {

const char* gmi_version(void) { return "1.0.0"; }

const char* gmi_last_error(void) { return g_last_error.c_str(); }

gmi_status gmi_graph_load(const char* dir, gmi_graph** out) {
    if (!dir || !out) return fail(GMI_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        auto handle = std::make_unique<gmi_graph>();
        try {
            handle->graph = gmi::load_dataset(dir);
        } catch (const gmi::Error& e) {
            if (!std::filesystem::is_directory(dir)) return fail(GMI_ERR_IO, e.what());
            throw;
        }
        *out = handle.release();
        return GMI_OK;
    });
}

gmi_status gmi_graph_save(const gmi_graph* graph, const char* dir) {
    if (!graph || !dir) return fail(GMI_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        gmi::save_dataset(graph->graph, dir);
        return GMI_OK;
    });
}

gmi_status gmi_graph_sbm(int blocks, int nodes_per_block, double p_in, double p_out,
                         double feature_noise, uint64_t seed, gmi_graph** out) {
    if (!out) return fail(GMI_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        gmi::SbmParams params;
        params.blocks = blocks;
        params.nodes_per_block = nodes_per_block;
        params.p_in = p_in;
        params.p_out = p_out;
        params.feature_noise = feature_noise;
        auto handle = std::make_unique<gmi_graph>();
        handle->graph = gmi::generate_sbm(params, seed);
        *out = handle.release();
        return GMI_OK;
    });
}

gmi_status gmi_graph_num_nodes(const gmi_graph* graph, size_t* out) {
    if (!graph || !out) return fail(GMI_ERR_INVALID_ARGUMENT, "null argument");
    *out = graph->graph.num_nodes;
    return GMI_OK;
}

gmi_status gmi_graph_num_edges(const gmi_graph* graph, size_t* out) {
    if (!graph || !out) return fail(GMI_ERR_INVALID_ARGUMENT, "null argument");
    *out = graph->graph.num_edges();
    return GMI_OK;
}

gmi_status gmi_graph_density(const gmi_graph* graph, double* out) {
    if (!graph || !out) return fail(GMI_ERR_INVALID_ARGUMENT, "null argument");
    *out = gmi::density(graph->graph.adjacency);
    return GMI_OK;
}

gmi_status gmi_graph_perturb(const gmi_graph* graph, const char* strategy, double p,
                             uint64_t seed, gmi_graph** out, double* epsilon_out) {
    if (!graph || !strategy || !out) return fail(GMI_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        gmi::PerturbConfig cfg;
        cfg.strategy = gmi::parse_strategy(strategy);
        cfg.p = p;
        cfg.seed = seed;
        double epsilon = 0.0;
        auto handle = std::make_unique<gmi_graph>();
        handle->graph = gmi::apply_perturbation(graph->graph, cfg, &epsilon);
        if (epsilon_out) *epsilon_out = epsilon;
        *out = handle.release();
        return GMI_OK;
    });
}

void gmi_graph_free(gmi_graph* graph) { delete graph; }

gmi_status gmi_model_train(const gmi_graph* graph, const char* options_json, gmi_model** out) {
    if (!graph || !options_json || !out) return fail(GMI_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const gmi::TrainSpec spec = gmi::parse_train_spec(options_json);
        auto handle = std::make_unique<gmi_model>();
        handle->model = gmi::train_from_spec(graph->graph, spec).model;
        *out = handle.release();
        return GMI_OK;
    });
}

gmi_status gmi_model_save(const gmi_model* model, const char* path) {
    if (!model || !path) return fail(GMI_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        gmi::save_model(model->model, path);
        return GMI_OK;
    });
}

gmi_status gmi_model_load(const char* path, gmi_model** out) {
    if (!path || !out) return fail(GMI_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        auto handle = std::make_unique<gmi_model>();
        try {
            handle->model = gmi::load_model(path);
        } catch (const gmi::Error& e) {
            if (!std::filesystem::exists(path)) return fail(GMI_ERR_IO, e.what());
            throw;
        }
        *out = handle.release();
        return GMI_OK;
    });
}

gmi_status gmi_model_accuracy(const gmi_model* model, const gmi_graph* graph, double* out) {
    if (!model || !graph || !out) return fail(GMI_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const gmi::Graph& g = graph->graph;
        const std::vector<std::uint8_t> all(g.num_nodes, 1);
        *out = gmi::accuracy(gmi::predict_hard(model->model, g.adjacency, g.features), g.labels,
                             all);
        return GMI_OK;
    });
}

gmi_status gmi_model_epsilon(const gmi_model* model, double* out) {
    if (!model || !out) return fail(GMI_ERR_INVALID_ARGUMENT, "null argument");
    *out = model->model.dp_epsilon;
    return GMI_OK;
}

void gmi_model_free(gmi_model* model) { delete model; }

gmi_status gmi_attack_run(const gmi_model* model, const gmi_graph* graph,
                          const char* attack_json, uint64_t seed, gmi_result** out) {
    if (!model || !graph || !attack_json || !out)
        return fail(GMI_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const gmi::AttackSpec spec = gmi::parse_attack_spec(attack_json);
        auto handle = std::make_unique<gmi_result>();
        handle->result = gmi::run_attack(model->model, graph->graph, spec, seed);
        *out = handle.release();
        return GMI_OK;
    });
}

gmi_status gmi_result_num_pairs(const gmi_result* result, size_t* out) {
    if (!result || !out) return fail(GMI_ERR_INVALID_ARGUMENT, "null argument");
    *out = result->result.probabilities.size();
    return GMI_OK;
}

gmi_status gmi_result_scores(const gmi_result* result, double* buffer, size_t length) {
    if (!result || !buffer) return fail(GMI_ERR_INVALID_ARGUMENT, "null argument");
    const auto& values = result->result.probabilities.values;
    if (length < values.size())
        return fail(GMI_ERR_INVALID_ARGUMENT, "buffer shorter than N(N-1)/2");
    std::memcpy(buffer, values.data(), values.size() * sizeof(double));
    return GMI_OK;
}

gmi_status gmi_result_queries(const gmi_result* result, uint64_t* out) {
    if (!result || !out) return fail(GMI_ERR_INVALID_ARGUMENT, "null argument");
    *out = result->result.query_count;
    return GMI_OK;
}

gmi_status gmi_result_metrics_json(const gmi_result* result, const gmi_graph* truth,
                                   uint64_t seed, char** json_out) {
    if (!result || !truth || !json_out) return fail(GMI_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const gmi::Graph& g = truth->graph;
        const gmi::EdgeScoreSet set =
            gmi::make_edge_score_set(g.adjacency, result->result.probabilities, seed);
        const gmi::GraphStatsReport stats =
            gmi::macro_stats_similarity(g.adjacency, result->result.sampled);
        json j = {{"auc", gmi::auc(set)},
                  {"ap", gmi::average_precision(set)},
                  {"queries", result->result.query_count},
                  {"wall_time_seconds", result->result.wall_time_seconds},
                  {"stats",
                   {{"wl", stats.wl_similarity},
                    {"degree_cos", stats.degree_cos},
                    {"lcc_cos", stats.lcc_cos},
                    {"bc_cos", stats.bc_cos},
                    {"cc_cos", stats.cc_cos}}}};
        *json_out = dup_string(j.dump(2));
        return GMI_OK;
    });
}

void gmi_result_free(gmi_result* result) { delete result; }

gmi_status gmi_default_config(char** config_out) {
    if (!config_out) return fail(GMI_ERR_INVALID_ARGUMENT, "null argument");
    *config_out = dup_string(gmi::default_config_json());
    return GMI_OK;
}

gmi_status gmi_run_pipeline(const char* config_json, const char* out_dir, char** report_out) {
    if (!config_json || !out_dir) return fail(GMI_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const std::string report = gmi::run_pipeline(config_json, out_dir);
        if (report_out) *report_out = dup_string(report);
        return GMI_OK;
    });
}

gmi_status gmi_run_sweep(const char* config_json, const char* out_dir, char** summary_out) {
    if (!config_json || !out_dir) return fail(GMI_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const std::string summary = gmi::run_sweep(config_json, out_dir);
        if (summary_out) *summary_out = dup_string(summary);
        return GMI_OK;
    });
}

gmi_status gmi_verify_report(const char* report_json) {
    if (!report_json) return fail(GMI_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        gmi::verify_report(report_json);
        return GMI_OK;
    });
}

gmi_status gmi_eval_graphs(const gmi_graph* truth, const gmi_graph* reconstruction,
                           char** stats_out) {
    if (!truth || !reconstruction || !stats_out)
        return fail(GMI_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const gmi::GraphStatsReport stats = gmi::macro_stats_similarity(
            truth->graph.adjacency, reconstruction->graph.adjacency);
        json j = {{"wl", stats.wl_similarity},
                  {"degree_cos", stats.degree_cos},
                  {"lcc_cos", stats.lcc_cos},
                  {"bc_cos", stats.bc_cos},
                  {"cc_cos", stats.cc_cos}};
        *stats_out = dup_string(j.dump(2));
        return GMI_OK;
    });
}

void gmi_string_free(char* s) { std::free(s); }

}  // extern "C"
