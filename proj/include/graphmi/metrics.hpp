#pragma once

#include <cstdint>
#include <vector>

#include "graphmi/gcn.hpp"
#include "graphmi/graph.hpp"

namespace gmi {

// Scores of the true edges plus an equal number of sampled non-edges.
struct EdgeScoreSet {
    std::vector<double> positives;
    std::vector<double> negatives;
    std::uint64_t seed = 0;
};

EdgeScoreSet make_edge_score_set(const Tensor& true_adjacency, const AdjVector& scores,
                                 std::uint64_t seed);

// Mann-Whitney statistic: P(pos > neg) + 1/2 P(pos == neg).
double auc(const EdgeScoreSet& s);

// Mean precision at each positive's rank, ties resolved negatives-first.
double average_precision(const EdgeScoreSet& s);

// Pairwise cosine similarity over node attributes / penultimate embeddings,
// as edge scores.
AdjVector baseline_attr_similarity(const Graph& g);
AdjVector baseline_emb_similarity(const GcnModel& model, const Graph& g);

// Normalized Weisfeiler-Lehman subtree kernel with degree-initialized labels.
double wl_similarity(const Tensor& a1, const Tensor& a2, int iterations = 3);

struct GraphStatsReport {
    double wl_similarity = 0.0;
    double degree_cos = 0.0;
    double lcc_cos = 0.0;
    double bc_cos = 0.0;
    double cc_cos = 0.0;
};

// Degree / local clustering / betweenness / closeness distributions, each
// histogrammed into 10 equal-width bins over the union range and compared by
// cosine similarity; plus the WL kernel value.
GraphStatsReport macro_stats_similarity(const Tensor& a1, const Tensor& a2);

// Exact leave-one-edge-out accuracy drop over all labeled nodes.
double edge_influence(const GcnModel& model, const Graph& g, std::size_t i, std::size_t j);

struct InfluenceStratum {
    int index = 0;          // 0 = lowest influence
    double influence_lo = 0.0;
    double influence_hi = 0.0;
    std::size_t edge_count = 0;
    double auc = 0.0;
};

// Splits edges into rank-based influence strata and reports recovery AUC per
// stratum against matched sampled non-edges.
std::vector<InfluenceStratum> influence_stratified_auc(const GcnModel& model, const Graph& g,
                                                       const AdjVector& scores, int quantiles,
                                                       std::uint64_t seed);

// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Per-node statistics, exposed for tests.
std::vector<double> degree_sequence(const Tensor& a);
std::vector<double> local_clustering(const Tensor& a);
std::vector<double> betweenness_centrality(const Tensor& a);
std::vector<double> closeness_centrality(const Tensor& a);
double binned_cosine(const std::vector<double>& v1, const std::vector<double>& v2, int bins = 10);

}  // namespace gmi
