#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <utility>
#include <vector>

#include "graphmi/gcn.hpp"
#include "graphmi/whitebox.hpp"

namespace gmi {

// Hard-label query interface with accounting. Each predict call is one query.
class HardLabelOracle {
public:
    HardLabelOracle(const GcnModel& model, Tensor features);

    std::vector<int> predict(const Tensor& adjacency) const;

    std::uint64_t query_count() const { return queries_.load(); }
    double elapsed_seconds() const { return static_cast<double>(elapsed_ns_.load()) * 1e-9; }
    const Tensor& features() const { return x_; }
    std::size_t num_nodes() const { return x_.rows(); }

private:
    const GcnModel& model_;
    Tensor x_;
    mutable std::atomic<std::uint64_t> queries_{0};
    mutable std::atomic<std::int64_t> elapsed_ns_{0};
};

// Error rate on known labels + alpha * smoothness + beta * ||a||_2.
// Exactly one oracle query per call. The adjacency vector may leave [0,1]
// while probing finite differences.
double blackbox_loss(const AdjVector& a, const Tensor& x, const KnownLabels& y,
                     const HardLabelOracle& oracle, double alpha, double beta);

// Two-sided sphere-sampling estimator:
//   (d/q) sum_j (L(a + mu u_j) - L(a - mu u_j)) / (2 mu) * u_j.
// Consumes exactly 2q evaluations of the loss.
std::vector<double> estimate_gradient(const std::function<double(const AdjVector&)>& loss,
                                      const AdjVector& a, double mu, int q, Rng& rng);

struct GeConfig {
    GraphMiConfig base;
    double mu = 0.01;
    int q = 100;

    void validate() const;
};

// PGD with estimated gradients; records the rectified-gradient norm
// ||(a - P(a - eta g)) / eta|| per iteration, then samples a binary matrix.
ReconstructionResult run_gradient_estimation(const HardLabelOracle& oracle, const Tensor& x,
                                             const std::vector<int>& labels, const GeConfig& cfg,
                                             std::uint64_t seed);

// ---------------------------------------------------------------------------
// RL-GraphMI
// ---------------------------------------------------------------------------

struct RlConfig {
    double gamma = 0.95;
    int max_edges = 1;       // Delta: edges added per episode
    int target_update = 10;  // C: sync period in action steps
    int episodes = 20;       // T
    double eps_start = 1.0;  // epsilon-greedy linear decay ...
    double eps_end = 0.05;   // ... over the first half of the episodes
    std::size_t buffer_capacity = 10000;
    int batch_size = 64;
    int embed_dim = 64;  // m per encoder; node embeddings are 2m wide
    double lr = 0.01;    // TD gradient-descent step
    bool reward_on_all_labels = false;  // default: score accuracy on known labels only

    void validate() const;
};

// Structure encoder (2-layer GCN), label encoder (2-layer MLP) and the two
// Q heads. Weight layout is row-vector convention: score = relu(in * w_in) * w_out.
struct QNetworks {
    Tensor enc_w0, enc_w1;  // l x m, m x m
    Tensor lab_w0, lab_w1;  // c x m, m x m
    Tensor q1_in, q1_out;   // 4m x h, h x 1
    Tensor q2_in, q2_out;   // 6m x h, h x 1

    static QNetworks init(std::size_t feature_dim, std::size_t classes, int embed_dim,
                          std::uint64_t seed);
    bool same_weights(const QNetworks& o) const;  // bitwise equality
};

struct StateEmbedding {
    Tensor per_node;  // N x 2m
    Tensor state;     // 1 x 2m (mean over nodes)
};

StateEmbedding state_embedding(const QNetworks& nets, const Tensor& a_partial, const Tensor& x,
                               const KnownLabels& y);

// Q1 scores every node; Q2 scores every node as a partner of first_node.
Tensor q1_scores(const QNetworks& nets, const StateEmbedding& s);
Tensor q2_scores(const QNetworks& nets, const StateEmbedding& s, std::size_t first_node);

struct RlTransition {
    std::vector<std::pair<std::size_t, std::size_t>> edges_before;
    std::size_t a1 = 0, a2 = 0;
    double reward = 0.0;
    bool terminal = false;
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}
    void push(RlTransition t);
    const RlTransition& sample(Rng& rng) const;
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }

private:
    std::size_t capacity_;
    std::deque<RlTransition> items_;
};

// Trainer exposing step-level hooks so the DQN mechanics are testable.
class RlGraphMi {
public:
    RlGraphMi(const HardLabelOracle& oracle, Tensor x, KnownLabels y, RlConfig cfg,
              std::uint64_t seed);

    void run_episode(int episode_index);  // one training episode of Delta actions
    void train();                         // all episodes
    std::vector<std::pair<std::size_t, std::size_t>> greedy_rollout() const;
    ReconstructionResult reconstruct();   // train if needed, then greedy rollout

    double epsilon_at(int episode_index) const;  // linear decay schedule
    void sync_target() { target_ = online_; }

    const QNetworks& online() const { return online_; }
    const QNetworks& target() const { return target_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    // Diagnostics for the mechanics checks.
    bool target_matched_after_every_sync() const { return sync_ok_; }
    int sync_count() const { return syncs_; }
    double max_abs_clipped_td() const { return max_clipped_td_; }
    double max_abs_raw_td() const { return max_raw_td_; }

private:
    void update_from_replay();
    double graph_accuracy(const Tensor& adjacency) const;

    const HardLabelOracle& oracle_;
    Tensor x_;
    KnownLabels y_;
    RlConfig cfg_;
    Rng rng_;
    QNetworks online_;
    QNetworks target_;
    ReplayBuffer buffer_;
    int global_step_ = 0;
    int syncs_ = 0;
    bool sync_ok_ = true;
    bool trained_ = false;
    double max_clipped_td_ = 0.0;
    double max_raw_td_ = 0.0;
};

double clip_td_error(double err);  // clamp to [-1, 1]

ReconstructionResult run_rl_graphmi(const HardLabelOracle& oracle, const Tensor& x,
                                    const std::vector<int>& labels, const RlConfig& cfg,
                                    double label_fraction, std::uint64_t seed);

}  // namespace gmi
