#include "graphmi/whitebox.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <thread>

namespace gmi {

KnownLabels KnownLabels::all(std::vector<int> labels) {
    KnownLabels y;
    y.mask.assign(labels.size(), 1);
    y.labels = std::move(labels);
    return y;
}

KnownLabels sample_known_labels(const std::vector<int>& labels, double fraction, Rng& rng) {
    if (fraction >= 1.0) return KnownLabels::all(labels);
    if (fraction <= 0.0) throw Error("sample_known_labels: fraction must be positive");
    int num_classes = 0;
    for (int y : labels) num_classes = std::max(num_classes, y + 1);
    KnownLabels out;
    out.labels = labels;
    out.mask.assign(labels.size(), 0);
    for (int c = 0; c < num_classes; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == c) members.push_back(i);
        if (members.empty()) continue;
        std::size_t want = static_cast<std::size_t>(
            std::lround(fraction * static_cast<double>(members.size())));
        want = std::clamp<std::size_t>(want, 1, members.size());
        // Partial Fisher-Yates over the class members.
        for (std::size_t k = 0; k < want; ++k) {
            const std::size_t j = k + rng.below(members.size() - k);
            std::swap(members[k], members[j]);
            out.mask[members[k]] = 1;
        }
    }
    return out;
}

void GraphMiConfig::validate() const {
    if (alpha < 0.0 || beta < 0.0) throw Error("GraphMiConfig: alpha/beta must be >= 0");
    if (lr <= 0.0) throw Error("GraphMiConfig: lr must be positive");
    if (iterations < 0) throw Error("GraphMiConfig: iterations must be >= 0");
    if (trials < 1) throw Error("GraphMiConfig: trials must be >= 1");
    if (!(density.rho > 0.0 && density.rho <= 1.0))
        throw Error("GraphMiConfig: density must be in (0,1]");
    if (!(label_fraction > 0.0 && label_fraction <= 1.0))
        throw Error("GraphMiConfig: label_fraction must be in (0,1]");
}

Var attack_loss(Tape& t, Var a_vec, std::size_t num_nodes, const Tensor& x,
                const KnownLabels& y, const GcnModel& model, double alpha, double beta) {
    Var a_mat = t.sym_from_vec(a_vec, num_nodes);
    Var xv = t.leaf(x);
    Var w0 = t.leaf(model.w0);
    Var w1 = t.leaf(model.w1);
    GcnVars fwd = gcn_forward(t, a_mat, xv, w0, w1);
    Var loss = t.softmax_cross_entropy(fwd.logits, y.labels, y.mask);
    if (alpha != 0.0)
        loss = t.add(loss, t.scalar_mul(normalized_laplacian_smoothness(t, a_mat, xv), alpha));
    if (beta != 0.0) loss = t.add(loss, t.scalar_mul(t.l2_norm(a_vec), beta));
    return loss;
}

double attack_loss(const AdjVector& a, const Tensor& x, const KnownLabels& y,
                   const GcnModel& model, double alpha, double beta) {
    Tape t;
    Var av = t.leaf(Tensor::from_vector(a.values));
    return t.value(attack_loss(t, av, a.num_nodes, x, y, model, alpha, beta)).scalar();
}

void project_unit_box(std::vector<double>& v) {
    for (double& x : v) x = std::clamp(x, 0.0, 1.0);
}

AdjVector pgd_optimize(const GcnModel& model, const Tensor& x, const KnownLabels& y,
                       const GraphMiConfig& cfg, std::size_t num_nodes, PgdTrace* trace) {
    cfg.validate();
    AdjVector a = AdjVector::zeros(num_nodes);
    for (int it = 0; it < cfg.iterations; ++it) {
        Tape t;
        Var av = t.leaf(Tensor::from_vector(a.values), true);
        Var loss = attack_loss(t, av, num_nodes, x, y, model, cfg.alpha, cfg.beta);
        t.backward(loss);
        const Tensor& g = t.grad(av);
        if (!g.all_finite())
            throw Error("pgd_optimize: non-finite gradient at iteration " + std::to_string(it));
        if (trace) trace->loss.push_back(t.value(loss).scalar());
        for (std::size_t k = 0; k < a.values.size(); ++k) a.values[k] -= cfg.lr * g.data[k];
        project_unit_box(a.values);
        if (trace) {
            const auto [mn, mx] = std::minmax_element(a.values.begin(), a.values.end());
            trace->iterate_min.push_back(a.values.empty() ? 0.0 : *mn);
            trace->iterate_max.push_back(a.values.empty() ? 0.0 : *mx);
        }
    }
    if (trace) trace->loss.push_back(attack_loss(a, x, y, model, cfg.alpha, cfg.beta));
    return a;
}

AdjVector gae_postprocess(const GcnModel& model, const AdjVector& a, const Tensor& x) {
    const Tensor z = node_embeddings(model, a, x);
    const Tensor scores = sigmoid(matmul(z, transpose(z)));
    AdjVector out = upper_triangle(scores);
    out.num_nodes = a.num_nodes;
    return out;
}

namespace {

int thread_pool_size() {
    if (const char* env = std::getenv("GRAPHMI_THREADS")) {
        const int n = std::atoi(env);
        if (n > 1) return n;
    }
    return 1;
}

// One weighted without-replacement draw of m items via exponential keys
// (smallest key wins); zero-weight entries are used only when the positive
// support is exhausted.
std::vector<std::size_t> sample_edges(const std::vector<double>& weights, std::size_t m,
                                      Rng& rng) {
    const std::size_t n = weights.size();
    std::vector<std::pair<double, std::size_t>> keys(n);
    std::vector<std::size_t> zeros;
    for (std::size_t k = 0; k < n; ++k) {
        if (weights[k] > 0.0) {
            double u;
            do {
                u = rng.uniform();
            } while (u <= 0.0);
            keys[k] = {-std::log(u) / weights[k], k};
        } else {
            keys[k] = {std::numeric_limits<double>::infinity(), k};
            zeros.push_back(k);
        }
    }
    std::nth_element(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(m - 1), keys.end());
    std::vector<std::size_t> chosen;
    chosen.reserve(m);
    std::size_t infinite = 0;
    for (std::size_t k = 0; k < m; ++k) {
        if (std::isinf(keys[k].first))
            ++infinite;
        else
            chosen.push_back(keys[k].second);
    }
    if (infinite > 0) {
        // Not enough positive-weight entries; fill uniformly from the rest.
        for (std::size_t k = 0; k < infinite; ++k) {
            const std::size_t j = k + rng.below(zeros.size() - k);
            std::swap(zeros[k], zeros[j]);
            chosen.push_back(zeros[k]);
        }
    }
    return chosen;
}

}  // namespace

Tensor random_sample(const AdjVector& probs, double rho, int trials, const LossFn& loss,
                     std::uint64_t seed, std::vector<double>* candidate_losses) {
    if (!(rho > 0.0 && rho <= 1.0)) throw Error("random_sample: rho must be in (0,1]");
    if (trials < 1) throw Error("random_sample: trials must be >= 1");
    const std::size_t n = probs.size();
    const std::size_t m = static_cast<std::size_t>(rho * static_cast<double>(n));
    if (m == 0) throw Error("random_sample: floor(rho*n) is zero");
    if (m > n) throw Error("random_sample: floor(rho*n) exceeds pair count");

    double total = 0.0;
    for (double v : probs.values) {
        if (v < 0.0) throw Error("random_sample: negative probability");
        total += v;
    }
    std::vector<double> weights = probs.values;
    if (total == 0.0) {
        std::fprintf(stderr, "graphmi: all-zero probabilities, sampling uniformly\n");
        weights.assign(n, 1.0);
        total = static_cast<double>(n);
    }
    for (double& w : weights) w /= total;

    Rng root(seed);
    std::vector<std::uint64_t> trial_seeds(static_cast<std::size_t>(trials));
    for (auto& s : trial_seeds) s = root.next_u64();

    std::vector<double> losses(static_cast<std::size_t>(trials));
    std::vector<std::vector<std::size_t>> picks(static_cast<std::size_t>(trials));
    auto run_trial = [&](std::size_t k) {
        Rng rng(trial_seeds[k]);
        picks[k] = sample_edges(weights, m, rng);
        AdjVector cand = AdjVector::zeros(probs.num_nodes);
        for (std::size_t idx : picks[k]) cand.values[idx] = 1.0;
        losses[k] = loss(cand);
    };

    const int threads = std::min<int>(thread_pool_size(), trials);
    if (threads <= 1) {
        for (std::size_t k = 0; k < static_cast<std::size_t>(trials); ++k) run_trial(k);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t k = static_cast<std::size_t>(w);
                     k < static_cast<std::size_t>(trials); k += static_cast<std::size_t>(threads))
                    run_trial(k);
            });
        for (auto& th : pool) th.join();
    }

    std::size_t best = 0;
    for (std::size_t k = 1; k < losses.size(); ++k)
        if (losses[k] < losses[best]) best = k;
    if (candidate_losses) *candidate_losses = losses;

    AdjVector chosen = AdjVector::zeros(probs.num_nodes);
    for (std::size_t idx : picks[best]) chosen.values[idx] = 1.0;
    return vec_to_matrix(chosen);
}

Tensor random_sample(const AdjVector& probs, const GraphMiConfig& cfg, const GcnModel& model,
                     const Tensor& x, const KnownLabels& y, std::uint64_t seed,
                     std::vector<double>* candidate_losses) {
    return random_sample(
        probs, cfg.density.rho, cfg.trials,
        [&](const AdjVector& cand) { return attack_loss(cand, x, y, model, cfg.alpha, cfg.beta); },
        seed, candidate_losses);
}

ReconstructionResult run_graphmi(const GcnModel& model, const Tensor& x,
                                 const std::vector<int>& labels, const GraphMiConfig& cfg,
                                 std::uint64_t seed) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(seed);
    Rng label_rng = rng.fork("labels");
    const KnownLabels y = sample_known_labels(labels, cfg.label_fraction, label_rng);

    const std::size_t num_nodes = x.rows();
    PgdTrace trace;
    AdjVector a = pgd_optimize(model, x, y, cfg, num_nodes, &trace);
    AdjVector probs = gae_postprocess(model, a, x);
    ReconstructionResult res;
    res.sampled = random_sample(probs, cfg, model, x, y, rng.fork("sampling").next_u64());
    res.probabilities = std::move(probs);
    res.attack_loss_trace = std::move(trace.loss);
    res.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace gmi
