/*
 * graphmi C API: train a small GCN on a node-classification graph, run
 * model-inversion attacks that reconstruct its edges, and measure defenses.
 *
 * All functions return GMI_OK on success; on failure they return an error
 * code and gmi_last_error() carries a thread-local message. Objects returned
 * through out-parameters are owned by the caller and released with the
 * matching *_free function. Strings returned through char** out-parameters
 * are released with gmi_string_free.
 */
#ifndef GRAPHMI_H
#define GRAPHMI_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gmi_status {
    GMI_OK = 0,
    GMI_ERR_INVALID_ARGUMENT = 1,
    GMI_ERR_IO = 2,
    GMI_ERR_RUNTIME = 3
} gmi_status;

const char* gmi_version(void);
const char* gmi_last_error(void);

typedef struct gmi_graph gmi_graph;
typedef struct gmi_model gmi_model;
typedef struct gmi_result gmi_result;

/* Graphs ------------------------------------------------------------------ */

/* Directory layout: edges.tsv, labels.csv, optional features.csv. */
gmi_status gmi_graph_load(const char* dir, gmi_graph** out);
gmi_status gmi_graph_save(const gmi_graph* graph, const char* dir);
gmi_status gmi_graph_sbm(int blocks, int nodes_per_block, double p_in, double p_out,
                         double feature_noise, uint64_t seed, gmi_graph** out);
gmi_status gmi_graph_num_nodes(const gmi_graph* graph, size_t* out);
gmi_status gmi_graph_num_edges(const gmi_graph* graph, size_t* out);
gmi_status gmi_graph_density(const gmi_graph* graph, double* out);
/* strategy: "rewire" | "add_similar" | "flip". For "flip", *epsilon_out gets
 * the edge-DP budget ln(2/p - 1). */
gmi_status gmi_graph_perturb(const gmi_graph* graph, const char* strategy, double p,
                             uint64_t seed, gmi_graph** out, double* epsilon_out);
void gmi_graph_free(gmi_graph* graph);

/* Models ------------------------------------------------------------------ */

/* options_json keys: hidden, epochs, lr, train_fraction, val_fraction,
 * patience, seed, and optional dp{clip_norm, noise_multiplier, delta,
 * iterations} for differentially private training. */
gmi_status gmi_model_train(const gmi_graph* graph, const char* options_json, gmi_model** out);
gmi_status gmi_model_save(const gmi_model* model, const char* path);
gmi_status gmi_model_load(const char* path, gmi_model** out);
/* Hard-label accuracy over all nodes of the given graph. */
gmi_status gmi_model_accuracy(const gmi_model* model, const gmi_graph* graph, double* out);
/* DP epsilon; +infinity when trained without noise, NaN when not DP-trained. */
gmi_status gmi_model_epsilon(const gmi_model* model, double* out);
void gmi_model_free(gmi_model* model);

/* Attacks ------------------------------------------------------------------ */

/* attack_json keys: method ("graphmi" | "ge" | "rl"), alpha, beta, lr,
 * iterations, trials, density (0 = ground truth), label_fraction, mu, q,
 * and optional rl{...}. The graph provides features/labels and the ground
 * truth; its edges are never shown to the attack. */
gmi_status gmi_attack_run(const gmi_model* model, const gmi_graph* graph,
                          const char* attack_json, uint64_t seed, gmi_result** out);
gmi_status gmi_result_num_pairs(const gmi_result* result, size_t* out);
/* Continuous edge scores, length N(N-1)/2, row-major upper triangle. */
gmi_status gmi_result_scores(const gmi_result* result, double* buffer, size_t length);
gmi_status gmi_result_queries(const gmi_result* result, uint64_t* out);
/* AUC/AP against the true edges plus graph-level statistics, as JSON. */
gmi_status gmi_result_metrics_json(const gmi_result* result, const gmi_graph* truth,
                                   uint64_t seed, char** json_out);
void gmi_result_free(gmi_result* result);

/* Pipelines ---------------------------------------------------------------- */

gmi_status gmi_default_config(char** config_out);
gmi_status gmi_run_pipeline(const char* config_json, const char* out_dir, char** report_out);
gmi_status gmi_run_sweep(const char* config_json, const char* out_dir, char** summary_out);
gmi_status gmi_verify_report(const char* report_json);
/* WL-kernel and macro-statistics similarity between two graphs, as JSON. */
gmi_status gmi_eval_graphs(const gmi_graph* truth, const gmi_graph* reconstruction,
                           char** stats_out);

void gmi_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* GRAPHMI_H */
