#include "graphmi/defense.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "graphmi/rng.hpp"

namespace gmi {

PerturbStrategy parse_strategy(const std::string& name) {
    if (name == "rewire") return PerturbStrategy::kRewire;
    if (name == "add_similar" || name == "add") return PerturbStrategy::kAddSimilar;
    if (name == "flip") return PerturbStrategy::kFlip;
    throw Error("unknown perturbation strategy: " + name);
}

Graph rewire(const Graph& g, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error("rewire: p must be in [0,1]");
    if (g.num_nodes < 3) throw Error("rewire: graph must have at least 3 nodes");
    Graph out = g;
    Rng rng = Rng(seed).fork("rewire");
    const std::size_t n = g.num_nodes;
    for (auto [i, j] : g.edge_list()) {
        if (!rng.bernoulli(p)) continue;
        out.adjacency(i, j) = 0.0;
        out.adjacency(j, i) = 0.0;
        const std::size_t keep = rng.bernoulli(0.5) ? i : j;
        const std::size_t other = keep == i ? j : i;
        bool placed = false;
        for (int attempt = 0; attempt < 10 && !placed; ++attempt) {
            std::size_t k = rng.below(n);
            if (k == keep || k == other) continue;
            if (out.adjacency(keep, k) != 0.0) continue;
            out.adjacency(keep, k) = 1.0;
            out.adjacency(k, keep) = 1.0;
            placed = true;
        }
        // All attempts collided: the edge is dropped rather than duplicated.
    }
    return out;
}

namespace {

double cosine(const Tensor& x, std::size_t i, std::size_t j) {
    const std::size_t l = x.cols();
    double dot = 0.0, ni = 0.0, nj = 0.0;
    for (std::size_t f = 0; f < l; ++f) {
        dot += x(i, f) * x(j, f);
        ni += x(i, f) * x(i, f);
        nj += x(j, f) * x(j, f);
    }
    if (ni == 0.0 || nj == 0.0) return 0.0;
    return dot / std::sqrt(ni * nj);
}

}  // namespace

Graph add_similar_edges(const Graph& g, double budget_fraction, std::uint64_t seed) {
    if (budget_fraction < 0.0) throw Error("add_similar_edges: budget must be >= 0");
    if (g.features.cols() == 0) throw Error("add_similar_edges: graph has no features");
    (void)seed;  // selection is deterministic; kept for interface symmetry
    Graph out = g;
    const std::size_t budget =
        static_cast<std::size_t>(budget_fraction * static_cast<double>(g.num_edges()));
    if (budget == 0) return out;
    struct Cand {
        double sim;
        std::size_t i, j;
    };
    std::vector<Cand> cands;
    for (std::size_t i = 0; i < g.num_nodes; ++i)
        for (std::size_t j = i + 1; j < g.num_nodes; ++j)
            if (g.adjacency(i, j) == 0.0) cands.push_back({cosine(g.features, i, j), i, j});
    const std::size_t take = std::min(budget, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(take),
                      cands.end(), [](const Cand& a, const Cand& b) {
                          if (a.sim != b.sim) return a.sim > b.sim;
                          return std::tie(a.i, a.j) < std::tie(b.i, b.j);
                      });
    for (std::size_t k = 0; k < take; ++k) {
        out.adjacency(cands[k].i, cands[k].j) = 1.0;
        out.adjacency(cands[k].j, cands[k].i) = 1.0;
    }
    return out;
}

double flip_epsilon(double p) {
    if (!(p > 0.0 && p <= 1.0)) throw Error("flip: p must be in (0,1]");
    return std::log(2.0 / p - 1.0);
}

FlipResult flip(const Graph& g, double p, std::uint64_t seed) {
    FlipResult res;
    res.epsilon = flip_epsilon(p);
    res.graph = g;
    Rng rng = Rng(seed).fork("flip");
    const std::size_t n = g.num_nodes;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!rng.bernoulli(p)) continue;
            const double v = rng.bernoulli(0.5) ? 1.0 : 0.0;
            res.graph.adjacency(i, j) = v;
            res.graph.adjacency(j, i) = v;
        }
    return res;
}

Graph apply_perturbation(const Graph& g, const PerturbConfig& cfg, double* epsilon_out) {
    if (epsilon_out) *epsilon_out = std::numeric_limits<double>::quiet_NaN();
    switch (cfg.strategy) {
        case PerturbStrategy::kRewire:
            return rewire(g, cfg.p, cfg.seed);
        case PerturbStrategy::kAddSimilar:
            return add_similar_edges(g, cfg.p, cfg.seed);
        case PerturbStrategy::kFlip: {
            FlipResult r = flip(g, cfg.p, cfg.seed);
            if (epsilon_out) *epsilon_out = r.epsilon;
            return std::move(r.graph);
        }
    }
    throw Error("apply_perturbation: invalid strategy");
}

}  // namespace gmi
