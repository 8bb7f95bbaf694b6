#include "graphmi/graph.hpp"

#include <algorithm>
#include <cmath>

#include "graphmi/rng.hpp"

namespace gmi {

AdjVector::AdjVector(std::size_t n_nodes, std::vector<double> v)
    : num_nodes(n_nodes), values(std::move(v)) {
    validate();
}

AdjVector AdjVector::zeros(std::size_t n_nodes) {
    AdjVector a;
    a.num_nodes = n_nodes;
    a.values.assign(n_nodes * (n_nodes - 1) / 2, 0.0);
    return a;
}

std::pair<std::size_t, std::size_t> AdjVector::index_pair(std::size_t k, std::size_t n_nodes) {
    std::size_t i = 0;
    std::size_t row_len = n_nodes - 1;
    while (k >= row_len) {
        k -= row_len;
        ++i;
        --row_len;
    }
    return {i, i + 1 + k};
}

void AdjVector::validate() const {
    if (values.size() != num_nodes * (num_nodes - 1) / 2)
        throw Error("AdjVector: length != N(N-1)/2");
    for (double v : values)
        if (!(v >= 0.0 && v <= 1.0)) throw Error("AdjVector: entry outside [0,1]");
}

std::size_t Graph::num_classes() const {
    int m = -1;
    for (int y : labels) m = std::max(m, y);
    return static_cast<std::size_t>(m + 1);
}

std::size_t Graph::num_edges() const {
    std::size_t e = 0;
    for (std::size_t i = 0; i < num_nodes; ++i)
        for (std::size_t j = i + 1; j < num_nodes; ++j)
            if (adjacency(i, j) != 0.0) ++e;
    return e;
}

std::vector<std::pair<std::size_t, std::size_t>> Graph::edge_list() const {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < num_nodes; ++i)
        for (std::size_t j = i + 1; j < num_nodes; ++j)
            if (adjacency(i, j) != 0.0) edges.emplace_back(i, j);
    return edges;
}

void Graph::validate() const {
    if (num_nodes == 0) throw Error("Graph: empty");
    if (adjacency.shape != std::vector<std::size_t>{num_nodes, num_nodes})
        throw Error("Graph: adjacency shape mismatch");
    if (features.rows() != num_nodes) throw Error("Graph: feature rows != num_nodes");
    if (labels.size() != num_nodes) throw Error("Graph: labels length != num_nodes");
    const std::size_t c = num_classes();
    for (int y : labels)
        if (y < 0 || static_cast<std::size_t>(y) >= c) throw Error("Graph: label out of range");
    for (std::size_t i = 0; i < num_nodes; ++i) {
        if (adjacency(i, i) != 0.0) throw Error("Graph: nonzero diagonal");
        for (std::size_t j = i + 1; j < num_nodes; ++j) {
            const double v = adjacency(i, j);
            if (v != adjacency(j, i)) throw Error("Graph: adjacency not symmetric");
            if (v != 0.0 && v != 1.0) throw Error("Graph: adjacency not binary");
        }
    }
}

std::uint64_t Graph::content_hash() const {
    std::uint64_t h = fnv1a64("graph");
    auto mix = [&h](const void* p, std::size_t len) { h = fnv1a64(p, len, h); };
    const std::uint64_t n = num_nodes;
    mix(&n, sizeof n);
    mix(labels.data(), labels.size() * sizeof(int));
    mix(features.data.data(), features.data.size() * sizeof(double));
    mix(adjacency.data.data(), adjacency.data.size() * sizeof(double));
    return h;
}

Tensor vec_to_matrix(const AdjVector& a) {
    const std::size_t n = a.num_nodes;
    Tensor m({n, n});
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j, ++k) {
            m(i, j) = a.values[k];
            m(j, i) = a.values[k];
        }
    return m;
}

AdjVector matrix_to_vec(const Tensor& A) {
    if (A.shape.size() != 2 || A.shape[0] != A.shape[1])
        throw ShapeError("matrix_to_vec: square matrix required");
    const std::size_t n = A.shape[0];
    AdjVector a;
    a.num_nodes = n;
    a.values.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        if (A(i, i) != 0.0) throw Error("matrix_to_vec: nonzero diagonal");
        for (std::size_t j = i + 1; j < n; ++j) {
            if (A(i, j) != A(j, i)) throw Error("matrix_to_vec: matrix not symmetric");
            a.values.push_back(A(i, j));
        }
    }
    return a;
}

AdjVector upper_triangle(const Tensor& A) {
    if (A.shape.size() != 2 || A.shape[0] != A.shape[1])
        throw ShapeError("upper_triangle: square matrix required");
    const std::size_t n = A.shape[0];
    AdjVector a;
    a.num_nodes = n;
    a.values.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) a.values.push_back(A(i, j));
    return a;
}

Tensor normalized_adjacency(const Tensor& A) {
    if (A.shape.size() != 2 || A.shape[0] != A.shape[1])
        throw ShapeError("normalized_adjacency: square matrix required");
    const std::size_t n = A.shape[0];
    Tensor hat = A;
    for (std::size_t i = 0; i < n; ++i) hat(i, i) += 1.0;
    std::vector<double> dinv(n);
    for (std::size_t i = 0; i < n; ++i) {
        double d = 0.0;
        for (std::size_t j = 0; j < n; ++j) d += hat(i, j);
        // Self-loops keep d >= 1 on valid input; the floor only matters for
        // off-constraint probes (zeroth-order finite differences).
        dinv[i] = 1.0 / std::sqrt(std::max(d, kDegreeEpsilon));
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) hat(i, j) *= dinv[i] * dinv[j];
    return hat;
}

Var normalized_adjacency(Tape& t, Var a_matrix) {
    const std::size_t n = t.value(a_matrix).shape[0];
    Var hat = t.add(a_matrix, t.leaf(Tensor::identity(n)));
    Var deg = t.row_sum(hat);
    Var dinv = t.rsqrt(deg);
    return t.mul(t.mul(hat, dinv), t.transpose(dinv));
}

Var normalized_laplacian_smoothness(Tape& t, Var a_matrix, Var x) {
    // 1/2 sum_ij A_ij ||u_i - u_j||^2 = sum_i d0_i ||u_i||^2 - sum(U o (A U))
    // with u_i = x_i / sqrt(d_i), d_i = relu(d0_i) + eps.
    Var d0 = t.row_sum(a_matrix);
    Var deg = t.add(t.relu(d0), t.leaf(Tensor::full(t.value(d0).shape, kDegreeEpsilon)));
    Var u = t.mul(x, t.rsqrt(deg));
    Var sq = t.row_sum(t.mul(u, u));            // ||u_i||^2 as N x 1
    Var lhs = t.reduce_sum(t.mul(sq, d0));
    Var rhs = t.reduce_sum(t.mul(u, t.matmul(a_matrix, u)));
    return t.sub(lhs, rhs);
}

double normalized_laplacian_smoothness(const AdjVector& a, const Tensor& x) {
    if (x.rows() != a.num_nodes) throw ShapeError("smoothness: feature rows != num_nodes");
    Tape t;
    Var am = t.leaf(vec_to_matrix(a));
    Var xv = t.leaf(x);
    return t.value(normalized_laplacian_smoothness(t, am, xv)).scalar();
}

double density(const Tensor& A) {
    const std::size_t n = A.shape[0];
    const std::size_t pairs = n * (n - 1) / 2;
    if (pairs == 0) return 0.0;
    std::size_t e = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (A(i, j) != 0.0) ++e;
    return static_cast<double>(e) / static_cast<double>(pairs);
}

}  // namespace gmi
