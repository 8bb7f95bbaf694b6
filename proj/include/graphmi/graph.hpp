#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "graphmi/tensor.hpp"

namespace gmi {

// Relaxed adjacency in vector form: the n = N(N-1)/2 upper-triangle entries,
// each in [0,1], row-major order.
struct AdjVector {
    std::size_t num_nodes = 0;
    std::vector<double> values;

    AdjVector() = default;
    AdjVector(std::size_t n_nodes, std::vector<double> v);
    static AdjVector zeros(std::size_t n_nodes);

    std::size_t size() const { return values.size(); }

    // Index of pair (i, j), i < j, in row-major upper-triangle order.
    static std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n_nodes) {
        return i * n_nodes - i * (i + 1) / 2 + (j - i - 1);
    }
    std::size_t pair_index(std::size_t i, std::size_t j) const {
        return pair_index(i, j, num_nodes);
    }
    static std::pair<std::size_t, std::size_t> index_pair(std::size_t k, std::size_t n_nodes);

    void validate() const;  // throws Error when entries leave [0,1] or n mismatches
};

// Undirected attributed graph with a dense binary adjacency.
struct Graph {
    std::size_t num_nodes = 0;
    Tensor features;           // N x l
    std::vector<int> labels;   // class ids in [0, num_classes)
    Tensor adjacency;          // N x N symmetric, zero diagonal, {0,1}

    std::size_t num_classes() const;
    std::size_t num_edges() const;  // upper-triangle count
    std::vector<std::pair<std::size_t, std::size_t>> edge_list() const;
    void validate() const;
    std::uint64_t content_hash() const;
};

struct DensityEstimate {
    double rho = 0.0;
    bool is_ground_truth = false;
};

inline constexpr double kDegreeEpsilon = 1e-8;  // floor for isolated-node degrees

// Expand a to the full symmetric matrix (zero diagonal).
Tensor vec_to_matrix(const AdjVector& a);

// Inverse of vec_to_matrix; rejects asymmetric input or a nonzero diagonal.
AdjVector matrix_to_vec(const Tensor& A);

// Strict upper triangle of an arbitrary square matrix (diagonal discarded,
// no symmetry check). Used where scores are symmetric by construction.
AdjVector upper_triangle(const Tensor& A);

// D^{-1/2} (A + I) D^{-1/2} with D the row sums of A + I.
Tensor normalized_adjacency(const Tensor& A);
// Tape version, differentiable in the adjacency.
Var normalized_adjacency(Tape& t, Var a_matrix);

// 1/2 sum_ij A_ij || x_i/sqrt(d_i) - x_j/sqrt(d_j) ||^2 with
// d_i = max(sum_j A_ij, 0) + kDegreeEpsilon.
double normalized_laplacian_smoothness(const AdjVector& a, const Tensor& x);
// Tape version over an already-expanded adjacency matrix var.
Var normalized_laplacian_smoothness(Tape& t, Var a_matrix, Var x);

// |E| / n over the upper triangle of a binary matrix.
double density(const Tensor& A);

}  // namespace gmi
