#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "graphmi/graph.hpp"
#include "graphmi/rng.hpp"
#include "graphmi/tensor.hpp"

namespace gmi {

// Which hidden representation counts as the "penultimate" embedding of the
// two-layer model. Propagated (after the second neighborhood aggregation,
// before the classifier weights) is the default.
enum class EmbeddingLayer { kPropagated, kPrePropagation };

// Two-layer GCN: logits = An * relu(An * X * W0) * W1.
struct GcnModel {
    Tensor w0;  // l x h
    Tensor w1;  // h x c
    std::uint64_t seed = 0;
    std::uint64_t dataset_hash = 0;
    double dp_epsilon = std::numeric_limits<double>::quiet_NaN();  // NaN: not DP-trained

    std::size_t feature_dim() const { return w0.shape[0]; }
    std::size_t hidden_dim() const { return w0.shape[1]; }
    std::size_t num_classes() const { return w1.shape[1]; }

    static GcnModel init(std::size_t feature_dim, std::size_t hidden, std::size_t classes,
                         std::uint64_t seed);
};

struct GcnOutput {
    Tensor logits;       // N x c
    Tensor penultimate;  // N x h
};

// Plain forward under a relaxed adjacency matrix.
GcnOutput gcn_forward(const GcnModel& m, const Tensor& a_relaxed, const Tensor& x,
                      EmbeddingLayer layer = EmbeddingLayer::kPropagated);

// Tape forward; a_matrix/x/w0/w1 may each be constants or differentiable leaves.
struct GcnVars {
    Var logits;
    Var penultimate;
};
GcnVars gcn_forward(Tape& t, Var a_matrix, Var x, Var w0, Var w1,
                    EmbeddingLayer layer = EmbeddingLayer::kPropagated);

std::vector<int> predict_hard(const GcnModel& m, const Tensor& a_relaxed, const Tensor& x);

Tensor node_embeddings(const GcnModel& m, const AdjVector& a, const Tensor& x,
                       EmbeddingLayer layer = EmbeddingLayer::kPropagated);

double accuracy(const std::vector<int>& predicted, const std::vector<int>& labels,
                const std::vector<std::uint8_t>& mask);

struct TrainOptions {
    int epochs = 200;
    double lr = 0.01;
    int hidden = 16;
    std::uint64_t seed = 0;
    int patience = 20;  // early-stopping patience on validation accuracy; <= 0 disables
};

struct TrainResult {
    GcnModel model;
    std::vector<double> train_loss;
    std::vector<double> val_accuracy;
    int epochs_run = 0;
};

// Full-batch gradient descent on the masked cross-entropy. Early stopping
// tracks validation accuracy and restores the best weights.
TrainResult train_gcn(const Graph& g, const std::vector<std::uint8_t>& train_mask,
                      const std::vector<std::uint8_t>& val_mask, const TrainOptions& opt);

struct DpConfig {
    double clip_norm = 1.0;        // C
    double noise_multiplier = 1.0; // sigma; noise stddev is sigma * C
    double delta = 1e-5;
    int iterations = 200;          // T, also the composition length
};

struct DpTrainResult {
    GcnModel model;
    double epsilon = 0.0;  // +inf when noise_multiplier == 0
    std::vector<double> clipped_norms;  // pre-noise gradient norms, one per iteration
    std::vector<double> train_loss;
};

// Gradient clipped to global L2 norm <= clip_norm, Gaussian noise added each
// iteration; epsilon from Renyi-DP composition of the Gaussian mechanism.
DpTrainResult train_gcn_dp(const Graph& g, const std::vector<std::uint8_t>& train_mask,
                           const DpConfig& dp, double lr, std::uint64_t seed);

// min over integer alpha in [2, 256] of T * alpha / (2 sigma^2) + log(1/delta)/(alpha-1).
double rdp_epsilon_gaussian(double noise_multiplier, int steps, double delta);

}  // namespace gmi
