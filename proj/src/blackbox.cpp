#include "graphmi/blackbox.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace gmi {

HardLabelOracle::HardLabelOracle(const GcnModel& model, Tensor features)
    : model_(model), x_(std::move(features)) {}

std::vector<int> HardLabelOracle::predict(const Tensor& adjacency) const {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<int> out = predict_hard(model_, adjacency, x_);
    queries_.fetch_add(1, std::memory_order_relaxed);
    elapsed_ns_.fetch_add(
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0)
            .count(),
        std::memory_order_relaxed);
    return out;
}

double blackbox_loss(const AdjVector& a, const Tensor& x, const KnownLabels& y,
                     const HardLabelOracle& oracle, double alpha, double beta) {
    const std::vector<int> pred = oracle.predict(vec_to_matrix(a));
    std::size_t wrong = 0, total = 0;
    for (std::size_t i = 0; i < y.labels.size(); ++i) {
        if (!y.mask[i]) continue;
        ++total;
        if (pred[i] != y.labels[i]) ++wrong;
    }
    if (total == 0) throw Error("blackbox_loss: no known labels");
    double loss = static_cast<double>(wrong) / static_cast<double>(total);
    if (alpha != 0.0) loss += alpha * normalized_laplacian_smoothness(a, x);
    if (beta != 0.0) loss += beta * l2_norm(Tensor::from_vector(a.values));
    return loss;
}

std::vector<double> estimate_gradient(const std::function<double(const AdjVector&)>& loss,
                                      const AdjVector& a, double mu, int q, Rng& rng) {
    if (mu <= 0.0) throw Error("estimate_gradient: mu must be positive");
    if (q < 1) throw Error("estimate_gradient: q must be >= 1");
    const std::size_t n = a.values.size();
    std::vector<double> grad(n, 0.0);
    std::vector<double> u(n);
    AdjVector probe;
    probe.num_nodes = a.num_nodes;
    probe.values.resize(n);
    for (int j = 0; j < q; ++j) {
        double norm = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            u[k] = rng.normal();
            norm += u[k] * u[k];
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;  // astronomically unlikely; skip the direction
        for (double& v : u) v /= norm;
        for (std::size_t k = 0; k < n; ++k) probe.values[k] = a.values[k] + mu * u[k];
        const double lp = loss(probe);
        for (std::size_t k = 0; k < n; ++k) probe.values[k] = a.values[k] - mu * u[k];
        const double lm = loss(probe);
        const double coeff = (lp - lm) / (2.0 * mu);
        for (std::size_t k = 0; k < n; ++k) grad[k] += coeff * u[k];
    }
    const double scale = static_cast<double>(n) / static_cast<double>(q);
    for (double& v : grad) v *= scale;
    return grad;
}

void GeConfig::validate() const {
    base.validate();
    if (mu <= 0.0) throw Error("GeConfig: mu must be positive");
    if (q < 1) throw Error("GeConfig: q must be >= 1");
}

ReconstructionResult run_gradient_estimation(const HardLabelOracle& oracle, const Tensor& x,
                                             const std::vector<int>& labels, const GeConfig& cfg,
                                             std::uint64_t seed) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t q0 = oracle.query_count();
    Rng rng(seed);
    Rng label_rng = rng.fork("labels");
    const KnownLabels y = sample_known_labels(labels, cfg.base.label_fraction, label_rng);
    auto loss = [&](const AdjVector& v) {
        return blackbox_loss(v, x, y, oracle, cfg.base.alpha, cfg.base.beta);
    };

    const std::size_t num_nodes = x.rows();
    AdjVector a = AdjVector::zeros(num_nodes);
    ReconstructionResult res;
    Rng dir_rng = rng.fork("directions");
    for (int it = 0; it < cfg.base.iterations; ++it) {
        res.attack_loss_trace.push_back(loss(a));
        const std::vector<double> g = estimate_gradient(loss, a, cfg.mu, cfg.q, dir_rng);
        std::vector<double> next = a.values;
        for (std::size_t k = 0; k < next.size(); ++k) next[k] -= cfg.base.lr * g[k];
        project_unit_box(next);
        double rect = 0.0;
        for (std::size_t k = 0; k < next.size(); ++k) {
            const double r = (a.values[k] - next[k]) / cfg.base.lr;
            rect += r * r;
        }
        res.rectified_norm_trace.push_back(std::sqrt(rect));
        a.values = std::move(next);
    }
    res.attack_loss_trace.push_back(loss(a));

    // No white-box embeddings in this setting, so the PGD output itself is the
    // probability vector fed to the sampler.
    res.sampled = random_sample(a, cfg.base.density.rho, cfg.base.trials, loss,
                                rng.fork("sampling").next_u64());
    res.probabilities = std::move(a);
    res.query_count = oracle.query_count() - q0;
    res.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

// ---------------------------------------------------------------------------
// RL-GraphMI
// ---------------------------------------------------------------------------

void RlConfig::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw Error("RlConfig: gamma must be in (0,1)");
    if (max_edges < 1) throw Error("RlConfig: max_edges must be >= 1");
    if (target_update < 1) throw Error("RlConfig: target_update must be >= 1");
    if (episodes < 0) throw Error("RlConfig: episodes must be >= 0");
    if (buffer_capacity < 1) throw Error("RlConfig: buffer_capacity must be >= 1");
    if (batch_size < 1) throw Error("RlConfig: batch_size must be >= 1");
    if (embed_dim < 1) throw Error("RlConfig: embed_dim must be >= 1");
    if (lr <= 0.0) throw Error("RlConfig: lr must be positive");
}

namespace {

Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor w({fan_in, fan_out});
    for (double& v : w.data) v = rng.uniform(-bound, bound);
    return w;
}

Tensor label_onehot(const KnownLabels& y, std::size_t classes) {
    Tensor oh({y.labels.size(), classes});
    for (std::size_t i = 0; i < y.labels.size(); ++i)
        if (y.mask[i]) oh(i, static_cast<std::size_t>(y.labels[i])) = 1.0;
    return oh;
}

Tensor edges_to_matrix(const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                       std::size_t n) {
    Tensor a({n, n});
    for (auto [i, j] : edges) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
    }
    return a;
}

}  // namespace

QNetworks QNetworks::init(std::size_t feature_dim, std::size_t classes, int embed_dim,
                          std::uint64_t seed) {
    Rng rng = Rng(seed).fork("q_init");
    const std::size_t m = static_cast<std::size_t>(embed_dim);
    QNetworks q;
    q.enc_w0 = glorot(feature_dim, m, rng);
    q.enc_w1 = glorot(m, m, rng);
    q.lab_w0 = glorot(classes, m, rng);
    q.lab_w1 = glorot(m, m, rng);
    q.q1_in = glorot(4 * m, m, rng);
    q.q1_out = glorot(m, 1, rng);
    q.q2_in = glorot(6 * m, m, rng);
    q.q2_out = glorot(m, 1, rng);
    return q;
}

bool QNetworks::same_weights(const QNetworks& o) const {
    auto eq = [](const Tensor& a, const Tensor& b) { return a.shape == b.shape && a.data == b.data; };
    return eq(enc_w0, o.enc_w0) && eq(enc_w1, o.enc_w1) && eq(lab_w0, o.lab_w0) &&
           eq(lab_w1, o.lab_w1) && eq(q1_in, o.q1_in) && eq(q1_out, o.q1_out) &&
           eq(q2_in, o.q2_in) && eq(q2_out, o.q2_out);
}

StateEmbedding state_embedding(const QNetworks& nets, const Tensor& a_partial, const Tensor& x,
                               const KnownLabels& y) {
    const Tensor an = normalized_adjacency(a_partial);
    const Tensor structure = matmul(matmul(an, relu(matmul(matmul(an, x), nets.enc_w0))), nets.enc_w1);
    const Tensor oh = label_onehot(y, nets.lab_w0.shape[0]);
    const Tensor label = matmul(relu(matmul(oh, nets.lab_w0)), nets.lab_w1);
    StateEmbedding s;
    s.per_node = hconcat(structure, label);
    const std::size_t n = s.per_node.shape[0], w = s.per_node.shape[1];
    s.state = Tensor({1, w});
    for (std::size_t j = 0; j < w; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += s.per_node(i, j);
        s.state(0, j) = sum / static_cast<double>(n);
    }
    return s;
}

Tensor q1_scores(const QNetworks& nets, const StateEmbedding& s) {
    const std::size_t n = s.per_node.shape[0], w = s.per_node.shape[1];
    Tensor in({n, 2 * w});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < w; ++j) in(i, j) = s.per_node(i, j);
        for (std::size_t j = 0; j < w; ++j) in(i, w + j) = s.state(0, j);
    }
    return matmul(relu(matmul(in, nets.q1_in)), nets.q1_out);
}

Tensor q2_scores(const QNetworks& nets, const StateEmbedding& s, std::size_t first_node) {
    const std::size_t n = s.per_node.shape[0], w = s.per_node.shape[1];
    Tensor in({n, 3 * w});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < w; ++j) in(i, j) = s.per_node(i, j);
        for (std::size_t j = 0; j < w; ++j) in(i, w + j) = s.per_node(first_node, j);
        for (std::size_t j = 0; j < w; ++j) in(i, 2 * w + j) = s.state(0, j);
    }
    return matmul(relu(matmul(in, nets.q2_in)), nets.q2_out);
}

void ReplayBuffer::push(RlTransition t) {
    items_.push_back(std::move(t));
    if (items_.size() > capacity_) items_.pop_front();
}

const RlTransition& ReplayBuffer::sample(Rng& rng) const {
    if (items_.empty()) throw Error("ReplayBuffer: empty");
    return items_[rng.below(items_.size())];
}

double clip_td_error(double err) { return std::clamp(err, -1.0, 1.0); }

RlGraphMi::RlGraphMi(const HardLabelOracle& oracle, Tensor x, KnownLabels y, RlConfig cfg,
                     std::uint64_t seed)
    : oracle_(oracle),
      x_(std::move(x)),
      y_(std::move(y)),
      cfg_(cfg),
      rng_(Rng(seed).fork("rl")),
      online_(QNetworks::init(x_.cols(),
                              [&] {
                                  int c = 0;
                                  for (int v : y_.labels) c = std::max(c, v + 1);
                                  return static_cast<std::size_t>(c);
                              }(),
                              cfg.embed_dim, seed)),
      target_(online_),
      buffer_(cfg.buffer_capacity) {
    cfg_.validate();
    const std::size_t pairs = x_.rows() * (x_.rows() - 1) / 2;
    if (static_cast<std::size_t>(cfg_.max_edges) > pairs)
        throw Error("RlGraphMi: max_edges exceeds the number of node pairs");
}

double RlGraphMi::epsilon_at(int episode_index) const {
    const int half = std::max(1, cfg_.episodes / 2);
    const double f = std::min(1.0, static_cast<double>(episode_index) / half);
    return cfg_.eps_start + (cfg_.eps_end - cfg_.eps_start) * f;
}

double RlGraphMi::graph_accuracy(const Tensor& adjacency) const {
    const std::vector<int> pred = oracle_.predict(adjacency);
    std::vector<std::uint8_t> mask = y_.mask;
    if (cfg_.reward_on_all_labels) mask.assign(y_.labels.size(), 1);
    return accuracy(pred, y_.labels, mask);
}

namespace {

// Nodes that still have at least one unconnected partner.
std::vector<std::uint8_t> valid_first_nodes(const Tensor& a) {
    const std::size_t n = a.shape[0];
    std::vector<std::uint8_t> valid(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t deg = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i && a(i, j) != 0.0) ++deg;
        valid[i] = deg + 1 < n ? 1 : 0;
    }
    return valid;
}

std::size_t masked_argmax(const Tensor& scores, const std::vector<std::uint8_t>& valid) {
    std::size_t best = scores.numel();
    for (std::size_t i = 0; i < scores.numel(); ++i) {
        if (!valid[i]) continue;
        if (best == scores.numel() || scores.data[i] > scores.data[best]) best = i;
    }
    if (best == scores.numel()) throw Error("masked_argmax: no valid action");
    return best;
}

std::size_t random_valid(const std::vector<std::uint8_t>& valid, Rng& rng) {
    std::size_t count = 0;
    for (std::uint8_t v : valid) count += v;
    if (count == 0) throw Error("random_valid: no valid action");
    std::size_t pick = rng.below(count);
    for (std::size_t i = 0; i < valid.size(); ++i) {
        if (!valid[i]) continue;
        if (pick == 0) return i;
        --pick;
    }
    throw Error("random_valid: unreachable");
}

std::pair<std::size_t, std::size_t> select_action(const QNetworks& nets, const StateEmbedding& s,
                                                  const Tensor& a_partial, double epsilon,
                                                  Rng& rng) {
    const std::size_t n = a_partial.shape[0];
    const std::vector<std::uint8_t> first_valid = valid_first_nodes(a_partial);
    std::size_t a1;
    if (epsilon > 0.0 && rng.uniform() < epsilon)
        a1 = random_valid(first_valid, rng);
    else
        a1 = masked_argmax(q1_scores(nets, s), first_valid);
    std::vector<std::uint8_t> second_valid(n, 0);
    for (std::size_t j = 0; j < n; ++j)
        second_valid[j] = (j != a1 && a_partial(a1, j) == 0.0) ? 1 : 0;
    std::size_t a2;
    if (epsilon > 0.0 && rng.uniform() < epsilon)
        a2 = random_valid(second_valid, rng);
    else
        a2 = masked_argmax(q2_scores(nets, s, a1), second_valid);
    return {a1, a2};
}

}  // namespace

void RlGraphMi::run_episode(int episode_index) {
    const double epsilon = epsilon_at(episode_index);
    const std::size_t n = x_.rows();
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    Tensor a = edges_to_matrix(edges, n);
    double prev_acc = graph_accuracy(a);
    for (int t = 0; t < cfg_.max_edges; ++t) {
        const StateEmbedding s = state_embedding(online_, a, x_, y_);
        const auto [a1, a2] = select_action(online_, s, a, epsilon, rng_);
        RlTransition tr;
        tr.edges_before = edges;
        tr.a1 = a1;
        tr.a2 = a2;
        tr.terminal = t + 1 == cfg_.max_edges;
        edges.emplace_back(std::min(a1, a2), std::max(a1, a2));
        a(a1, a2) = 1.0;
        a(a2, a1) = 1.0;
        const double acc = graph_accuracy(a);
        tr.reward = acc >= prev_acc ? 1.0 : -1.0;
        prev_acc = acc;
        buffer_.push(std::move(tr));
        update_from_replay();
        ++global_step_;
        if (global_step_ % cfg_.target_update == 0) {
            sync_target();
            ++syncs_;
            if (!target_.same_weights(online_)) sync_ok_ = false;
        }
    }
}

void RlGraphMi::update_from_replay() {
    if (buffer_.size() == 0) return;
    const std::size_t n = x_.rows();
    Tensor g_enc_w0(online_.enc_w0.shape), g_enc_w1(online_.enc_w1.shape);
    Tensor g_lab_w0(online_.lab_w0.shape), g_lab_w1(online_.lab_w1.shape);
    Tensor g_q1_in(online_.q1_in.shape), g_q1_out(online_.q1_out.shape);
    Tensor g_q2_in(online_.q2_in.shape), g_q2_out(online_.q2_out.shape);

    const Tensor label_oh = label_onehot(y_, online_.lab_w0.shape[0]);
    for (int b = 0; b < cfg_.batch_size; ++b) {
        const RlTransition& tr = buffer_.sample(rng_);
        const Tensor a_before = edges_to_matrix(tr.edges_before, n);

        double y = tr.reward;
        if (!tr.terminal) {
            auto next_edges = tr.edges_before;
            next_edges.emplace_back(tr.a1, tr.a2);
            const Tensor a_after = edges_to_matrix(next_edges, n);
            const StateEmbedding sn = state_embedding(target_, a_after, x_, y_);
            const Tensor qn = q1_scores(target_, sn);
            const std::vector<std::uint8_t> valid = valid_first_nodes(a_after);
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i)
                if (valid[i]) best = std::max(best, qn.data[i]);
            if (std::isfinite(best)) y += cfg_.gamma * best;
        }

        // Online forward on the tape; both heads regress toward the target.
        Tape t;
        Var an = normalized_adjacency(t, t.leaf(a_before));
        Var xv = t.leaf(x_);
        Var enc_w0 = t.leaf(online_.enc_w0, true);
        Var enc_w1 = t.leaf(online_.enc_w1, true);
        Var lab_w0 = t.leaf(online_.lab_w0, true);
        Var lab_w1 = t.leaf(online_.lab_w1, true);
        Var q1_in = t.leaf(online_.q1_in, true);
        Var q1_out = t.leaf(online_.q1_out, true);
        Var q2_in = t.leaf(online_.q2_in, true);
        Var q2_out = t.leaf(online_.q2_out, true);

        Var structure = t.matmul(t.matmul(an, t.relu(t.matmul(t.matmul(an, xv), enc_w0))), enc_w1);
        Var label = t.matmul(t.relu(t.matmul(t.leaf(label_oh), lab_w0)), lab_w1);
        Var per_node = t.hconcat(structure, label);
        Var state = t.scalar_mul(t.transpose(t.row_sum(t.transpose(per_node))),
                                 1.0 / static_cast<double>(n));

        Tensor pick1({1, n}), pick2({1, n});
        pick1(0, tr.a1) = 1.0;
        pick2(0, tr.a2) = 1.0;
        Var e1 = t.matmul(t.leaf(pick1), per_node);
        Var e2 = t.matmul(t.leaf(pick2), per_node);
        Var q1 = t.matmul(t.relu(t.matmul(t.hconcat(e1, state), q1_in)), q1_out);
        Var q2 = t.matmul(t.relu(t.matmul(t.hconcat(t.hconcat(e2, e1), state), q2_in)), q2_out);

        const double err1 = clip_td_error(y - t.value(q1).scalar());
        const double err2 = clip_td_error(y - t.value(q2).scalar());
        max_raw_td_ = std::max({max_raw_td_, std::abs(y - t.value(q1).scalar()),
                                std::abs(y - t.value(q2).scalar())});
        max_clipped_td_ = std::max({max_clipped_td_, std::abs(err1), std::abs(err2)});

        // d/dw [(y - q)^2] with the clipped error treated as constant.
        Var objective = t.add(t.scalar_mul(q1, -2.0 * err1), t.scalar_mul(q2, -2.0 * err2));
        t.backward(objective, Tensor::full({1, 1}, 1.0));

        auto addg = [&t](Tensor& acc, Var v) {
            const Tensor& g = t.grad(v);
            for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += g.data[i];
        };
        addg(g_enc_w0, enc_w0);
        addg(g_enc_w1, enc_w1);
        addg(g_lab_w0, lab_w0);
        addg(g_lab_w1, lab_w1);
        addg(g_q1_in, q1_in);
        addg(g_q1_out, q1_out);
        addg(g_q2_in, q2_in);
        addg(g_q2_out, q2_out);
    }

    const double step = cfg_.lr / static_cast<double>(cfg_.batch_size);
    auto apply = [step](Tensor& w, const Tensor& g) {
        for (std::size_t i = 0; i < w.data.size(); ++i) w.data[i] -= step * g.data[i];
    };
    apply(online_.enc_w0, g_enc_w0);
    apply(online_.enc_w1, g_enc_w1);
    apply(online_.lab_w0, g_lab_w0);
    apply(online_.lab_w1, g_lab_w1);
    apply(online_.q1_in, g_q1_in);
    apply(online_.q1_out, g_q1_out);
    apply(online_.q2_in, g_q2_in);
    apply(online_.q2_out, g_q2_out);
}

void RlGraphMi::train() {
    for (int e = 0; e < cfg_.episodes; ++e) run_episode(e);
    trained_ = true;
}

std::vector<std::pair<std::size_t, std::size_t>> RlGraphMi::greedy_rollout() const {
    const std::size_t n = x_.rows();
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    Tensor a = edges_to_matrix(edges, n);
    Rng rollout_rng(0);  // unused: epsilon is 0
    for (int t = 0; t < cfg_.max_edges; ++t) {
        const StateEmbedding s = state_embedding(online_, a, x_, y_);
        const auto [a1, a2] = select_action(online_, s, a, 0.0, rollout_rng);
        edges.emplace_back(std::min(a1, a2), std::max(a1, a2));
        a(a1, a2) = 1.0;
        a(a2, a1) = 1.0;
    }
    return edges;
}

ReconstructionResult RlGraphMi::reconstruct() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t q0 = oracle_.query_count();
    if (!trained_) train();
    const auto order = greedy_rollout();
    const std::size_t n = x_.rows();
    ReconstructionResult res;
    res.sampled = edges_to_matrix(order, n);
    res.probabilities = AdjVector::zeros(n);
    // Selection order is the only ranking signal: earlier picks score higher,
    // unselected pairs share the bottom rank at zero.
    const double denom = static_cast<double>(order.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto [i, j] = order[r];
        res.probabilities.values[AdjVector::pair_index(i, j, n)] =
            (denom - static_cast<double>(r)) / denom;
    }
    res.selection_order = order;
    res.query_count = oracle_.query_count() - q0;
    res.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

ReconstructionResult run_rl_graphmi(const HardLabelOracle& oracle, const Tensor& x,
                                    const std::vector<int>& labels, const RlConfig& cfg,
                                    double label_fraction, std::uint64_t seed) {
    Rng rng(seed);
    Rng label_rng = rng.fork("labels");
    const KnownLabels y = sample_known_labels(labels, label_fraction, label_rng);
    RlGraphMi agent(oracle, x, y, cfg, seed);
    return agent.reconstruct();
}

}  // namespace gmi
