#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace gmi {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape-incompatible operands. Thrown instead of any implicit broadcast.
struct ShapeError : Error {
    using Error::Error;
};

// Dense row-major tensor of doubles; rank 1 or 2 in practice.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s);

    static Tensor zeros(std::vector<std::size_t> s) { return Tensor(std::move(s)); }
    static Tensor full(std::vector<std::size_t> s, double v);
    static Tensor scalar_value(double v);
    static Tensor identity(std::size_t n);
    static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Tensor from_vector(std::vector<double> v);  // shape {v.size()}

    std::size_t numel() const { return data.size(); }
    std::size_t rows() const { return shape.empty() ? 1 : shape[0]; }
    std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
    bool is_scalar() const { return numel() == 1; }
    double scalar() const;

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }
    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    bool all_finite() const;
};

// ---------------------------------------------------------------------------
// Plain kernels (no gradient tracking). The tape ops below reuse these, and
// hot paths such as the hard-label oracle call them directly.
// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scalar_mul(const Tensor& a, double s);
// Elementwise product. b must have a's shape, or be an N x 1 column (scales
// rows) or 1 x M row (scales columns) against an N x M first argument.
Tensor mul(const Tensor& a, const Tensor& b);
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
// Column-wise concatenation of two matrices with equal row counts.
Tensor hconcat(const Tensor& a, const Tensor& b);
Tensor rsqrt(const Tensor& a);   // requires strictly positive entries
Tensor row_sum(const Tensor& a); // N x M -> N x 1
double reduce_sum(const Tensor& a);
double l2_norm(const Tensor& a);
// Mean cross-entropy over rows where mask is nonzero.
double softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels,
                             const std::vector<std::uint8_t>& mask);
// Per-row argmax with ties broken toward the lowest index.
std::vector<int> argmax_rows(const Tensor& logits);

// ---------------------------------------------------------------------------
// Reverse-mode tape
// ---------------------------------------------------------------------------

struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

class Tape {
public:
    Var leaf(Tensor value, bool requires_grad = false);

    Var matmul(Var a, Var b);
    Var transpose(Var a);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var scalar_mul(Var a, double s);
    Var mul(Var a, Var b);
    Var relu(Var a);
    Var sigmoid(Var a);
    Var hconcat(Var a, Var b);
    Var rsqrt(Var a);
    Var row_sum(Var a);
    Var reduce_sum(Var a);  // -> scalar
    Var l2_norm(Var a);     // -> scalar
    Var softmax_cross_entropy(Var logits, std::vector<int> labels,
                              std::vector<std::uint8_t> mask);
    // Scatter a length-n vector (n = N(N-1)/2) into a symmetric N x N matrix
    // with zero diagonal, row-major upper-triangle order.
    Var sym_from_vec(Var a, std::size_t num_nodes);

    const Tensor& value(Var v) const { return node(v.id).value; }
    bool requires_grad(Var v) const { return node(v.id).requires_grad; }

    // Standard entry point: loss must be scalar; seeds with 1.
    void backward(Var loss);
    // Seeded variant used when the scalar objective lives outside the tape
    // (e.g. clipped TD errors).
    void backward(Var out, const Tensor& seed);

    // Valid after backward; zero tensor for vars the loss does not reach.
    const Tensor& grad(Var v) const;

    std::size_t size() const { return nodes_.size(); }

private:
    enum class Op {
        kLeaf,
        kMatMul,
        kTranspose,
        kAdd,
        kSub,
        kScalarMul,
        kMul,
        kRelu,
        kSigmoid,
        kHConcat,
        kRsqrt,
        kRowSum,
        kReduceSum,
        kL2Norm,
        kSoftmaxXent,
        kSymFromVec,
    };

    struct Node {
        Op op = Op::kLeaf;
        int a = -1;
        int b = -1;
        double scalar = 0.0;
        std::size_t num_nodes = 0;  // kSymFromVec
        std::vector<int> labels;    // kSoftmaxXent
        std::vector<std::uint8_t> mask;
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
    };

    const Node& node(int id) const;
    Node& node(int id);
    Var push(Node n);
    void backward_node(int id);

    std::vector<Node> nodes_;
    bool grads_ready_ = false;
};

}  // namespace gmi
