#pragma once

// Shared fixtures and independent oracles for the test suites. The oracles
// here (finite differences, brute-force double sums) deliberately avoid the
// library's own computation paths.

#include <cmath>
#include <functional>
#include <vector>

#include "graphmi/gcn.hpp"
#include "graphmi/graph.hpp"
#include "graphmi/rng.hpp"

namespace testutil {

// Central finite differences of a scalar function of a flat vector.
inline std::vector<double> finite_difference(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
    double h = 1e-4) {
    std::vector<double> g(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double saved = x[k];
        x[k] = saved + h;
        const double fplus = f(x);
        x[k] = saved - h;
        const double fminus = f(x);
        x[k] = saved;
        g[k] = (fplus - fminus) / (2.0 * h);
    }
    return g;
}

// rtol/atol agreement check between two gradients.
inline bool gradients_match(const std::vector<double>& a, const std::vector<double>& b,
                            double rtol = 1e-4, double atol = 1e-7) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > atol + rtol * std::abs(b[i])) return false;
    return true;
}

// Direct double-sum evaluation of the degree-normalized smoothness:
// 1/2 sum_ij A_ij ||x_i/sqrt(d_i) - x_j/sqrt(d_j)||^2 with the same
// degree floor the library documents.
inline double smoothness_double_sum(const gmi::Tensor& adj, const gmi::Tensor& x) {
    const std::size_t n = adj.shape[0], l = x.cols();
    std::vector<double> deg(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) deg[i] += adj(i, j);
        deg[i] = std::max(deg[i], 0.0) + gmi::kDegreeEpsilon;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (adj(i, j) == 0.0) continue;
            double dist = 0.0;
            for (std::size_t f = 0; f < l; ++f) {
                const double d = x(i, f) / std::sqrt(deg[i]) - x(j, f) / std::sqrt(deg[j]);
                dist += d * d;
            }
            total += adj(i, j) * dist;
        }
    return 0.5 * total;
}

// Trace form x^T L x with L = D^{-1/2} (D0 - A) D^{-1/2}, the second
// algebraic route for the same quantity.
inline double smoothness_trace_form(const gmi::Tensor& adj, const gmi::Tensor& x) {
    const std::size_t n = adj.shape[0], l = x.cols();
    std::vector<double> d0(n, 0.0), deg(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) d0[i] += adj(i, j);
        deg[i] = std::max(d0[i], 0.0) + gmi::kDegreeEpsilon;
    }
    // L_ij = (d0_i delta_ij - A_ij) / sqrt(deg_i deg_j)
    double total = 0.0;
    for (std::size_t f = 0; f < l; ++f)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double lij =
                    ((i == j ? d0[i] : 0.0) - adj(i, j)) / std::sqrt(deg[i] * deg[j]);
                total += x(i, f) * lij * x(j, f);
            }
    return total;
}

// Random weighted symmetric matrix with zero diagonal, entries in [lo, hi].
inline gmi::AdjVector random_adj_vector(std::size_t n, gmi::Rng& rng, double lo = 0.05,
                                        double hi = 0.95) {
    gmi::AdjVector a = gmi::AdjVector::zeros(n);
    for (double& v : a.values) v = rng.uniform(lo, hi);
    return a;
}

inline gmi::Tensor random_features(std::size_t n, std::size_t l, gmi::Rng& rng) {
    gmi::Tensor x({n, l});
    for (double& v : x.data) v = rng.normal();
    return x;
}

// Tiny trained-free model with random weights for gradient checks.
inline gmi::GcnModel random_model(std::size_t feature_dim, std::size_t hidden,
                                  std::size_t classes, std::uint64_t seed) {
    return gmi::GcnModel::init(feature_dim, hidden, classes, seed);
}

inline std::vector<int> random_labels(std::size_t n, int classes, gmi::Rng& rng) {
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
    return y;
}

}  // namespace testutil
