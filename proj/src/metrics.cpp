#include "graphmi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>

#include "graphmi/rng.hpp"

namespace gmi {

namespace {

std::vector<double> ranks_with_ties(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based average rank
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }
    return rank;
}

}  // namespace

EdgeScoreSet make_edge_score_set(const Tensor& true_adjacency, const AdjVector& scores,
                                 std::uint64_t seed) {
    const std::size_t n = true_adjacency.shape[0];
    if (scores.num_nodes != n) throw Error("make_edge_score_set: node count mismatch");
    EdgeScoreSet out;
    out.seed = seed;
    std::vector<std::size_t> non_edges;
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j, ++k) {
            if (true_adjacency(i, j) != 0.0)
                out.positives.push_back(scores.values[k]);
            else
                non_edges.push_back(k);
        }
    if (out.positives.empty()) throw Error("make_edge_score_set: graph has no edges");
    if (non_edges.size() < out.positives.size())
        throw Error("make_edge_score_set: not enough non-edges to match the edge count");
    Rng rng = Rng(seed).fork("non_edges");
    for (std::size_t i = 0; i < out.positives.size(); ++i) {
        const std::size_t j = i + rng.below(non_edges.size() - i);
        std::swap(non_edges[i], non_edges[j]);
        out.negatives.push_back(scores.values[non_edges[i]]);
    }
    return out;
}

double auc(const EdgeScoreSet& s) {
    if (s.positives.empty() || s.negatives.empty()) throw Error("auc: empty score set");
    std::vector<double> all = s.positives;
    all.insert(all.end(), s.negatives.begin(), s.negatives.end());
    const std::vector<double> rank = ranks_with_ties(all);
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < s.positives.size(); ++i) rank_sum += rank[i];
    const double p = static_cast<double>(s.positives.size());
    const double m = static_cast<double>(s.negatives.size());
    return (rank_sum - p * (p + 1.0) / 2.0) / (p * m);
}

double average_precision(const EdgeScoreSet& s) {
    if (s.positives.empty() || s.negatives.empty())
        throw Error("average_precision: empty score set");
    struct Item {
        double score;
        bool positive;
    };
    std::vector<Item> items;
    items.reserve(s.positives.size() + s.negatives.size());
    for (double v : s.positives) items.push_back({v, true});
    for (double v : s.negatives) items.push_back({v, false});
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.positive < b.positive;  // pessimistic: negatives first on ties
    });
    double ap = 0.0;
    std::size_t hits = 0;
    for (std::size_t r = 0; r < items.size(); ++r) {
        if (!items[r].positive) continue;
        ++hits;
        ap += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
    return ap / static_cast<double>(s.positives.size());
}

namespace {

AdjVector cosine_pairs(const Tensor& rows) {
    const std::size_t n = rows.shape[0], l = rows.shape[1];
    std::vector<double> norm(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < l; ++f) norm[i] += rows(i, f) * rows(i, f);
        norm[i] = std::sqrt(norm[i]);
    }
    AdjVector out = AdjVector::zeros(n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j, ++k) {
            if (norm[i] == 0.0 || norm[j] == 0.0) continue;  // zero rows score 0
            double dot = 0.0;
            for (std::size_t f = 0; f < l; ++f) dot += rows(i, f) * rows(j, f);
            out.values[k] = dot / (norm[i] * norm[j]);
        }
    return out;
}

}  // namespace

AdjVector baseline_attr_similarity(const Graph& g) {
    if (g.features.cols() == 0) throw Error("baseline_attr_similarity: graph has no features");
    return cosine_pairs(g.features);
}

AdjVector baseline_emb_similarity(const GcnModel& model, const Graph& g) {
    return cosine_pairs(node_embeddings(model, matrix_to_vec(g.adjacency), g.features));
}

// ---------------------------------------------------------------------------
// Weisfeiler-Lehman subtree kernel
// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<std::size_t>> neighbor_lists(const Tensor& a) {
    const std::size_t n = a.shape[0];
    std::vector<std::vector<std::size_t>> nb(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (j != i && a(i, j) != 0.0) nb[i].push_back(j);
    return nb;
}

}  // namespace

double wl_similarity(const Tensor& a1, const Tensor& a2, int iterations) {
    if (a1.shape != a2.shape) throw Error("wl_similarity: graphs must have equal node counts");
    const auto nb1 = neighbor_lists(a1);
    const auto nb2 = neighbor_lists(a2);
    const std::size_t n = nb1.size();

    // Shared label dictionary across both graphs and all refinement rounds.
    std::map<std::vector<long long>, long long> dictionary;
    auto compress = [&dictionary](const std::vector<long long>& key) {
        auto [it, inserted] = dictionary.emplace(key, static_cast<long long>(dictionary.size()));
        return it->second;
    };

    std::vector<long long> lab1(n), lab2(n);
    for (std::size_t i = 0; i < n; ++i) {
        lab1[i] = compress({static_cast<long long>(nb1[i].size())});
        lab2[i] = compress({static_cast<long long>(nb2[i].size())});
    }

    std::map<long long, double> h1, h2;
    auto absorb = [](std::map<long long, double>& h, const std::vector<long long>& lab) {
        for (long long v : lab) h[v] += 1.0;
    };
    absorb(h1, lab1);
    absorb(h2, lab2);

    for (int it = 0; it < iterations; ++it) {
        auto refine = [&compress](const std::vector<std::vector<std::size_t>>& nb,
                                  std::vector<long long>& lab) {
            std::vector<long long> next(lab.size());
            for (std::size_t i = 0; i < lab.size(); ++i) {
                std::vector<long long> key;
                key.reserve(nb[i].size() + 1);
                key.push_back(lab[i]);
                std::vector<long long> ns;
                for (std::size_t j : nb[i]) ns.push_back(lab[j]);
                std::sort(ns.begin(), ns.end());
                key.insert(key.end(), ns.begin(), ns.end());
                next[i] = compress(key);
            }
            lab = std::move(next);
        };
        refine(nb1, lab1);
        refine(nb2, lab2);
        absorb(h1, lab1);
        absorb(h2, lab2);
    }

    double k12 = 0.0, k11 = 0.0, k22 = 0.0;
    for (const auto& [key, c] : h1) {
        k11 += c * c;
        auto it = h2.find(key);
        if (it != h2.end()) k12 += c * it->second;
    }
    for (const auto& [key, c] : h2) k22 += c * c;
    if (k11 == 0.0 || k22 == 0.0) return 0.0;
    return k12 / std::sqrt(k11 * k22);
}

// ---------------------------------------------------------------------------
// Macro-level statistics
// ---------------------------------------------------------------------------

std::vector<double> degree_sequence(const Tensor& a) {
    const auto nb = neighbor_lists(a);
    std::vector<double> d(nb.size());
    for (std::size_t i = 0; i < nb.size(); ++i) d[i] = static_cast<double>(nb[i].size());
    return d;
}

std::vector<double> local_clustering(const Tensor& a) {
    const auto nb = neighbor_lists(a);
    const std::size_t n = nb.size();
    std::vector<double> lcc(n, 0.0);
    for (std::size_t v = 0; v < n; ++v) {
        const std::size_t deg = nb[v].size();
        if (deg < 2) continue;
        std::size_t links = 0;
        for (std::size_t x = 0; x < deg; ++x)
            for (std::size_t y = x + 1; y < deg; ++y)
                if (a(nb[v][x], nb[v][y]) != 0.0) ++links;
        lcc[v] = 2.0 * static_cast<double>(links) / static_cast<double>(deg * (deg - 1));
    }
    return lcc;
}

// Brandes' algorithm on the unweighted graph.
std::vector<double> betweenness_centrality(const Tensor& a) {
    const auto nb = neighbor_lists(a);
    const std::size_t n = nb.size();
    std::vector<double> bc(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<std::vector<std::size_t>> pred(n);
        std::vector<double> sigma(n, 0.0), delta(n, 0.0);
        std::vector<long long> dist(n, -1);
        sigma[s] = 1.0;
        dist[s] = 0;
        std::deque<std::size_t> queue{s};
        std::vector<std::size_t> order;
        while (!queue.empty()) {
            const std::size_t v = queue.front();
            queue.pop_front();
            order.push_back(v);
            for (std::size_t w : nb[v]) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if (dist[w] == dist[v] + 1) {
                    sigma[w] += sigma[v];
                    pred[w].push_back(v);
                }
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const std::size_t w = *it;
            for (std::size_t v : pred[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            if (w != s) bc[w] += delta[w];
        }
    }
    for (double& v : bc) v /= 2.0;  // undirected: each pair counted twice
    return bc;
}

std::vector<double> closeness_centrality(const Tensor& a) {
    const auto nb = neighbor_lists(a);
    const std::size_t n = nb.size();
    std::vector<double> cc(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<long long> dist(n, -1);
        dist[s] = 0;
        std::deque<std::size_t> queue{s};
        double total = 0.0;
        std::size_t reachable = 1;
        while (!queue.empty()) {
            const std::size_t v = queue.front();
            queue.pop_front();
            for (std::size_t w : nb[v]) {
                if (dist[w] >= 0) continue;
                dist[w] = dist[v] + 1;
                total += static_cast<double>(dist[w]);
                ++reachable;
                queue.push_back(w);
            }
        }
        if (reachable < 2 || total == 0.0) continue;  // isolated node scores 0
        const double r = static_cast<double>(reachable - 1);
        // Wasserman-Faust correction so disconnected graphs stay comparable.
        cc[s] = (r / total) * (r / static_cast<double>(n - 1));
    }
    return cc;
}

double binned_cosine(const std::vector<double>& v1, const std::vector<double>& v2, int bins) {
    if (v1.empty() || v2.empty()) throw Error("binned_cosine: empty input");
    double lo = v1[0], hi = v1[0];
    for (double v : v1) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double v : v2) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo) return 1.0;  // all values identical on both graphs
    std::vector<double> h1(static_cast<std::size_t>(bins), 0.0), h2(h1);
    auto fill = [&](std::vector<double>& h, const std::vector<double>& vals) {
        for (double v : vals) {
            auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * bins);
            h[std::min(b, static_cast<std::size_t>(bins - 1))] += 1.0;
        }
    };
    fill(h1, v1);
    fill(h2, v2);
    double dot = 0.0, n1 = 0.0, n2 = 0.0;
    for (int b = 0; b < bins; ++b) {
        dot += h1[b] * h2[b];
        n1 += h1[b] * h1[b];
        n2 += h2[b] * h2[b];
    }
    if (n1 == 0.0 || n2 == 0.0) return 0.0;
    return dot / std::sqrt(n1 * n2);
}

GraphStatsReport macro_stats_similarity(const Tensor& a1, const Tensor& a2) {
    GraphStatsReport r;
    r.wl_similarity = wl_similarity(a1, a2);
    r.degree_cos = binned_cosine(degree_sequence(a1), degree_sequence(a2));
    r.lcc_cos = binned_cosine(local_clustering(a1), local_clustering(a2));
    r.bc_cos = binned_cosine(betweenness_centrality(a1), betweenness_centrality(a2));
    r.cc_cos = binned_cosine(closeness_centrality(a1), closeness_centrality(a2));
    return r;
}

// ---------------------------------------------------------------------------
// Edge influence
// ---------------------------------------------------------------------------

double edge_influence(const GcnModel& model, const Graph& g, std::size_t i, std::size_t j) {
    if (g.adjacency(i, j) == 0.0) throw Error("edge_influence: (i,j) is not an edge");
    const std::vector<std::uint8_t> all(g.num_nodes, 1);
    const double base =
        accuracy(predict_hard(model, g.adjacency, g.features), g.labels, all);
    Tensor removed = g.adjacency;
    removed(i, j) = 0.0;
    removed(j, i) = 0.0;
    const double dropped = accuracy(predict_hard(model, removed, g.features), g.labels, all);
    return base - dropped;
}

std::vector<InfluenceStratum> influence_stratified_auc(const GcnModel& model, const Graph& g,
                                                       const AdjVector& scores, int quantiles,
                                                       std::uint64_t seed) {
    if (quantiles < 1) throw Error("influence_stratified_auc: quantiles must be >= 1");
    const auto edges = g.edge_list();
    if (edges.empty()) throw Error("influence_stratified_auc: graph has no edges");
    struct Scored {
        double influence;
        std::size_t edge_index;
    };
    std::vector<Scored> by_influence(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e)
        by_influence[e] = {edge_influence(model, g, edges[e].first, edges[e].second), e};
    std::stable_sort(by_influence.begin(), by_influence.end(),
                     [](const Scored& a, const Scored& b) { return a.influence < b.influence; });

    std::vector<std::size_t> non_edges;
    for (std::size_t i = 0; i < g.num_nodes; ++i)
        for (std::size_t j = i + 1; j < g.num_nodes; ++j)
            if (g.adjacency(i, j) == 0.0) non_edges.push_back(AdjVector::pair_index(i, j, g.num_nodes));

    Rng rng = Rng(seed).fork("strata");
    std::vector<InfluenceStratum> table;
    const std::size_t total = edges.size();
    for (int s = 0; s < quantiles; ++s) {
        const std::size_t begin = total * static_cast<std::size_t>(s) / quantiles;
        const std::size_t end = total * static_cast<std::size_t>(s + 1) / quantiles;
        if (begin >= end) continue;
        InfluenceStratum row;
        row.index = s;
        row.influence_lo = by_influence[begin].influence;
        row.influence_hi = by_influence[end - 1].influence;
        row.edge_count = end - begin;
        EdgeScoreSet set;
        set.seed = seed;
        for (std::size_t k = begin; k < end; ++k) {
            const auto [i, j] = edges[by_influence[k].edge_index];
            set.positives.push_back(scores.values[AdjVector::pair_index(i, j, g.num_nodes)]);
        }
        if (non_edges.size() < set.positives.size())
            throw Error("influence_stratified_auc: not enough non-edges");
        std::vector<std::size_t> pool = non_edges;
        for (std::size_t k = 0; k < set.positives.size(); ++k) {
            const std::size_t j = k + rng.below(pool.size() - k);
            std::swap(pool[k], pool[j]);
            set.negatives.push_back(scores.values[pool[k]]);
        }
        row.auc = auc(set);
        table.push_back(row);
    }
    return table;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw Error("spearman: need >= 2 paired values");
    const std::vector<double> rx = ranks_with_ties(x);
    const std::vector<double> ry = ranks_with_ties(y);
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double cov = 0.0, vx = 0.0, vy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        cov += (rx[i] - mx) * (ry[i] - my);
        vx += (rx[i] - mx) * (rx[i] - mx);
        vy += (ry[i] - my) * (ry[i] - my);
    }
    if (vx == 0.0 || vy == 0.0) return 0.0;
    return cov / std::sqrt(vx * vy);
}

}  // namespace gmi
