#include "graphmi/gcn.hpp"

#include <algorithm>
#include <cmath>

namespace gmi {

namespace {

Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor w({fan_in, fan_out});
    for (double& v : w.data) v = rng.uniform(-bound, bound);
    return w;
}

}  // namespace

GcnModel GcnModel::init(std::size_t feature_dim, std::size_t hidden, std::size_t classes,
                        std::uint64_t seed) {
    Rng rng = Rng(seed).fork("gcn_init");
    GcnModel m;
    m.w0 = glorot(feature_dim, hidden, rng);
    m.w1 = glorot(hidden, classes, rng);
    m.seed = seed;
    return m;
}

GcnOutput gcn_forward(const GcnModel& m, const Tensor& a_relaxed, const Tensor& x,
                      EmbeddingLayer layer) {
    const Tensor an = normalized_adjacency(a_relaxed);
    const Tensor hidden = relu(matmul(matmul(an, x), m.w0));
    const Tensor propagated = matmul(an, hidden);
    GcnOutput out;
    out.logits = matmul(propagated, m.w1);
    out.penultimate = layer == EmbeddingLayer::kPropagated ? propagated : hidden;
    return out;
}

GcnVars gcn_forward(Tape& t, Var a_matrix, Var x, Var w0, Var w1, EmbeddingLayer layer) {
    Var an = normalized_adjacency(t, a_matrix);
    Var hidden = t.relu(t.matmul(t.matmul(an, x), w0));
    Var propagated = t.matmul(an, hidden);
    GcnVars out;
    out.logits = t.matmul(propagated, w1);
    out.penultimate = layer == EmbeddingLayer::kPropagated ? propagated : hidden;
    return out;
}

std::vector<int> predict_hard(const GcnModel& m, const Tensor& a_relaxed, const Tensor& x) {
    return argmax_rows(gcn_forward(m, a_relaxed, x).logits);
}

Tensor node_embeddings(const GcnModel& m, const AdjVector& a, const Tensor& x,
                       EmbeddingLayer layer) {
    return gcn_forward(m, vec_to_matrix(a), x, layer).penultimate;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& labels,
                const std::vector<std::uint8_t>& mask) {
    std::size_t hit = 0, total = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!mask[i]) continue;
        ++total;
        if (predicted[i] == labels[i]) ++hit;
    }
    if (total == 0) throw Error("accuracy: empty mask");
    return static_cast<double>(hit) / static_cast<double>(total);
}

namespace {

struct EpochGrads {
    double loss = 0.0;
    Tensor g0, g1;
};

// One forward/backward of the masked cross-entropy. an_x = An * X and an are
// fixed during training, so they enter the tape as constants.
EpochGrads loss_and_grads(const Tensor& an, const Tensor& an_x, const GcnModel& m,
                          const std::vector<int>& labels,
                          const std::vector<std::uint8_t>& mask) {
    Tape t;
    Var an_v = t.leaf(an);
    Var anx_v = t.leaf(an_x);
    Var w0 = t.leaf(m.w0, true);
    Var w1 = t.leaf(m.w1, true);
    Var hidden = t.relu(t.matmul(anx_v, w0));
    Var logits = t.matmul(t.matmul(an_v, hidden), w1);
    Var loss = t.softmax_cross_entropy(logits, labels, mask);
    t.backward(loss);
    EpochGrads out;
    out.loss = t.value(loss).scalar();
    out.g0 = t.grad(w0);
    out.g1 = t.grad(w1);
    return out;
}

}  // namespace

TrainResult train_gcn(const Graph& g, const std::vector<std::uint8_t>& train_mask,
                      const std::vector<std::uint8_t>& val_mask, const TrainOptions& opt) {
    if (std::find(train_mask.begin(), train_mask.end(), std::uint8_t{1}) == train_mask.end())
        throw Error("train_gcn: empty training mask");
    TrainResult res;
    res.model = GcnModel::init(g.features.cols(), static_cast<std::size_t>(opt.hidden),
                               g.num_classes(), opt.seed);
    res.model.dataset_hash = g.content_hash();

    const Tensor an = normalized_adjacency(g.adjacency);
    const Tensor an_x = matmul(an, g.features);
    const bool has_val =
        std::find(val_mask.begin(), val_mask.end(), std::uint8_t{1}) != val_mask.end();

    GcnModel best = res.model;
    double best_val = -1.0;
    int wait = 0;
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        EpochGrads eg = loss_and_grads(an, an_x, res.model, g.labels, train_mask);
        res.train_loss.push_back(eg.loss);
        for (std::size_t i = 0; i < res.model.w0.data.size(); ++i)
            res.model.w0.data[i] -= opt.lr * eg.g0.data[i];
        for (std::size_t i = 0; i < res.model.w1.data.size(); ++i)
            res.model.w1.data[i] -= opt.lr * eg.g1.data[i];
        ++res.epochs_run;
        if (has_val) {
            const double va =
                accuracy(predict_hard(res.model, g.adjacency, g.features), g.labels, val_mask);
            res.val_accuracy.push_back(va);
            if (va > best_val) {
                best_val = va;
                best = res.model;
                wait = 0;
            } else if (opt.patience > 0 && ++wait >= opt.patience) {
                break;
            }
        }
    }
    if (has_val && best_val >= 0.0) res.model = best;
    if (!res.model.w0.all_finite() || !res.model.w1.all_finite())
        throw Error("train_gcn: non-finite weights after training");
    return res;
}

DpTrainResult train_gcn_dp(const Graph& g, const std::vector<std::uint8_t>& train_mask,
                           const DpConfig& dp, double lr, std::uint64_t seed) {
    if (std::find(train_mask.begin(), train_mask.end(), std::uint8_t{1}) == train_mask.end())
        throw Error("train_gcn_dp: empty training mask");
    if (dp.clip_norm <= 0.0) throw Error("train_gcn_dp: clip_norm must be positive");
    if (dp.noise_multiplier < 0.0) throw Error("train_gcn_dp: noise_multiplier must be >= 0");

    DpTrainResult res;
    res.model = GcnModel::init(g.features.cols(), 16, g.num_classes(), seed);
    res.model.dataset_hash = g.content_hash();
    Rng noise = Rng(seed).fork("dp_noise");

    const Tensor an = normalized_adjacency(g.adjacency);
    const Tensor an_x = matmul(an, g.features);
    for (int it = 0; it < dp.iterations; ++it) {
        EpochGrads eg = loss_and_grads(an, an_x, res.model, g.labels, train_mask);
        res.train_loss.push_back(eg.loss);
        double sq = 0.0;
        for (double v : eg.g0.data) sq += v * v;
        for (double v : eg.g1.data) sq += v * v;
        const double norm = std::sqrt(sq);
        const double scale = norm > dp.clip_norm ? dp.clip_norm / norm : 1.0;
        res.clipped_norms.push_back(norm * scale);
        const double sigma = dp.noise_multiplier * dp.clip_norm;
        auto step = [&](Tensor& w, const Tensor& grad) {
            for (std::size_t i = 0; i < w.data.size(); ++i)
                w.data[i] -= lr * (grad.data[i] * scale + sigma * noise.normal());
        };
        step(res.model.w0, eg.g0);
        step(res.model.w1, eg.g1);
    }
    res.epsilon = rdp_epsilon_gaussian(dp.noise_multiplier, dp.iterations, dp.delta);
    res.model.dp_epsilon = res.epsilon;
    return res;
}

double rdp_epsilon_gaussian(double noise_multiplier, int steps, double delta) {
    if (noise_multiplier <= 0.0) return std::numeric_limits<double>::infinity();
    if (delta <= 0.0 || delta >= 1.0) throw Error("rdp_epsilon_gaussian: delta must be in (0,1)");
    const double sigma2 = noise_multiplier * noise_multiplier;
    double best = std::numeric_limits<double>::infinity();
    for (int alpha = 2; alpha <= 256; ++alpha) {
        const double rdp = static_cast<double>(steps) * alpha / (2.0 * sigma2);
        const double eps = rdp + std::log(1.0 / delta) / (alpha - 1);
        best = std::min(best, eps);
    }
    return best;
}

}  // namespace gmi
