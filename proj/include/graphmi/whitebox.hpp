#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "graphmi/gcn.hpp"
#include "graphmi/graph.hpp"

namespace gmi {

// Labels available to the attacker: full-length vector plus a known mask.
struct KnownLabels {
    std::vector<int> labels;
    std::vector<std::uint8_t> mask;

    static KnownLabels all(std::vector<int> labels);
};

// Uniform per-class subsample of the label set.
KnownLabels sample_known_labels(const std::vector<int>& labels, double fraction, Rng& rng);

struct GraphMiConfig {
    double alpha = 1e-3;   // feature-smoothness weight
    double beta = 1e-4;    // sparsity weight
    double lr = 0.1;       // eta
    int iterations = 100;  // T
    int trials = 20;       // K
    DensityEstimate density;
    double label_fraction = 1.0;

    void validate() const;
};

struct ReconstructionResult {
    AdjVector probabilities;  // continuous edge scores
    Tensor sampled;           // binary N x N with exactly floor(rho * n) edges
    std::vector<double> attack_loss_trace;
    double wall_time_seconds = 0.0;
    std::uint64_t query_count = 0;                           // black-box attacks
    std::vector<double> rectified_norm_trace;                // gradient estimation
    std::vector<std::pair<std::size_t, std::size_t>> selection_order;  // RL rollout
};

// L_attack(a) = mean cross-entropy on known labels + alpha * smoothness + beta * ||a||_2,
// assembled on the tape so PGD can differentiate it in a.
Var attack_loss(Tape& t, Var a_vec, std::size_t num_nodes, const Tensor& x,
                const KnownLabels& y, const GcnModel& model, double alpha, double beta);

double attack_loss(const AdjVector& a, const Tensor& x, const KnownLabels& y,
                   const GcnModel& model, double alpha, double beta);

struct PgdTrace {
    std::vector<double> loss;           // L_attack at each iterate (plus final)
    std::vector<double> iterate_min;    // per-step bounds, for projection checks
    std::vector<double> iterate_max;
};

// Projected gradient descent from a = 0 with elementwise clamp to [0,1].
AdjVector pgd_optimize(const GcnModel& model, const Tensor& x, const KnownLabels& y,
                       const GraphMiConfig& cfg, std::size_t num_nodes,
                       PgdTrace* trace = nullptr);

// Edge probabilities sigmoid(Z Z^T) from the model's penultimate embeddings.
AdjVector gae_postprocess(const GcnModel& model, const AdjVector& a, const Tensor& x);

// K trials of weighted sampling without replacement down to floor(rho * n)
// edges; returns the candidate with the smallest loss. The loss functional
// lets the black-box attacks reuse the sampler with their own objective.
using LossFn = std::function<double(const AdjVector&)>;
Tensor random_sample(const AdjVector& probs, double rho, int trials, const LossFn& loss,
                     std::uint64_t seed, std::vector<double>* candidate_losses = nullptr);

// Convenience overload scoring candidates with the white-box attack loss.
Tensor random_sample(const AdjVector& probs, const GraphMiConfig& cfg, const GcnModel& model,
                     const Tensor& x, const KnownLabels& y, std::uint64_t seed,
                     std::vector<double>* candidate_losses = nullptr);

// Full pipeline: PGD -> graph auto-encoder -> random sampling.
ReconstructionResult run_graphmi(const GcnModel& model, const Tensor& x,
                                 const std::vector<int>& labels, const GraphMiConfig& cfg,
                                 std::uint64_t seed);

// Elementwise clamp to [0,1] (the PGD projection).
void project_unit_box(std::vector<double>& v);

}  // namespace gmi
