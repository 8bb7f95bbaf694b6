#include "graphmi/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gmi {

namespace {

std::size_t shape_numel(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

std::string shape_str(const Tensor& t) {
    std::string out = "[";
    for (std::size_t i = 0; i < t.shape.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(t.shape[i]);
    }
    return out + "]";
}

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
    throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " +
                     shape_str(b));
}

// Stable sigmoid, no overflow in exp.
double sigmoid1(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
    data.assign(shape_numel(shape), 0.0);
}

Tensor Tensor::full(std::vector<std::size_t> s, double v) {
    Tensor t(std::move(s));
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
}

Tensor Tensor::scalar_value(double v) {
    Tensor t({1});
    t.data[0] = v;
    return t;
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t({n, n});
    for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
    return t;
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    Tensor t({r, c});
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) throw ShapeError("from_rows: ragged rows");
        for (double v : row) t.data[i++] = v;
    }
    return t;
}

Tensor Tensor::from_vector(std::vector<double> v) {
    Tensor t;
    t.shape = {v.size()};
    t.data = std::move(v);
    return t;
}

double Tensor::scalar() const {
    if (!is_scalar()) throw ShapeError("scalar() on tensor with numel != 1");
    return data[0];
}

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.shape.size() != 2 || b.shape.size() != 2 || a.shape[1] != b.shape[0])
        shape_fail("matmul", a, b);
    const std::size_t m = a.shape[0], k = a.shape[1], n = b.shape[1];
    Tensor c({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        double* ci = &c.data[i * n];
        const double* ai = &a.data[i * k];
        for (std::size_t p = 0; p < k; ++p) {
            const double av = ai[p];
            if (av == 0.0) continue;
            const double* bp = &b.data[p * n];
            for (std::size_t j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
    return c;
}

Tensor transpose(const Tensor& a) {
    if (a.shape.size() != 2) throw ShapeError("transpose: rank-2 tensor required");
    const std::size_t r = a.shape[0], c = a.shape[1];
    Tensor t({c, r});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) t(j, i) = a(i, j);
    return t;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) shape_fail("add", a, b);
    Tensor c = a;
    for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] += b.data[i];
    return c;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) shape_fail("sub", a, b);
    Tensor c = a;
    for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] -= b.data[i];
    return c;
}

Tensor scalar_mul(const Tensor& a, double s) {
    Tensor c = a;
    for (double& v : c.data) v *= s;
    return c;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    Tensor c = a;
    if (a.same_shape(b)) {
        for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] *= b.data[i];
        return c;
    }
    if (a.shape.size() == 2 && b.shape.size() == 2) {
        const std::size_t r = a.shape[0], col = a.shape[1];
        if (b.shape[0] == r && b.shape[1] == 1) {
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < col; ++j) c(i, j) *= b.data[i];
            return c;
        }
        if (b.shape[0] == 1 && b.shape[1] == col) {
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < col; ++j) c(i, j) *= b.data[j];
            return c;
        }
    }
    shape_fail("mul", a, b);
}

Tensor relu(const Tensor& a) {
    Tensor c = a;
    for (double& v : c.data) v = v > 0.0 ? v : 0.0;
    return c;
}

Tensor hconcat(const Tensor& a, const Tensor& b) {
    if (a.shape.size() != 2 || b.shape.size() != 2 || a.shape[0] != b.shape[0])
        shape_fail("hconcat", a, b);
    const std::size_t r = a.shape[0], ca = a.shape[1], cb = b.shape[1];
    Tensor c({r, ca + cb});
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < ca; ++j) c(i, j) = a(i, j);
        for (std::size_t j = 0; j < cb; ++j) c(i, ca + j) = b(i, j);
    }
    return c;
}

Tensor sigmoid(const Tensor& a) {
    Tensor c = a;
    for (double& v : c.data) v = sigmoid1(v);
    return c;
}

Tensor rsqrt(const Tensor& a) {
    Tensor c = a;
    for (double& v : c.data) {
        if (!(v > 0.0)) throw Error("rsqrt: input must be strictly positive");
        v = 1.0 / std::sqrt(v);
    }
    return c;
}

Tensor row_sum(const Tensor& a) {
    if (a.shape.size() != 2) throw ShapeError("row_sum: rank-2 tensor required");
    const std::size_t r = a.shape[0], c = a.shape[1];
    Tensor out({r, 1});
    for (std::size_t i = 0; i < r; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) s += a(i, j);
        out.data[i] = s;
    }
    return out;
}

double reduce_sum(const Tensor& a) {
    double s = 0.0;
    for (double v : a.data) s += v;
    return s;
}

double l2_norm(const Tensor& a) {
    double s = 0.0;
    for (double v : a.data) s += v * v;
    return std::sqrt(s);
}

double softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels,
                             const std::vector<std::uint8_t>& mask) {
    if (logits.shape.size() != 2) throw ShapeError("softmax_cross_entropy: logits must be N x C");
    const std::size_t n = logits.shape[0], c = logits.shape[1];
    if (labels.size() != n || mask.size() != n)
        throw ShapeError("softmax_cross_entropy: labels/mask length mismatch");
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask[i]) continue;
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= c)
            throw Error("softmax_cross_entropy: label out of range");
        double m = logits(i, 0);
        for (std::size_t j = 1; j < c; ++j) m = std::max(m, logits(i, j));
        double lse = 0.0;
        for (std::size_t j = 0; j < c; ++j) lse += std::exp(logits(i, j) - m);
        total += m + std::log(lse) - logits(i, static_cast<std::size_t>(y));
        ++count;
    }
    if (count == 0) throw Error("softmax_cross_entropy: empty mask");
    return total / static_cast<double>(count);
}

std::vector<int> argmax_rows(const Tensor& logits) {
    if (logits.shape.size() != 2) throw ShapeError("argmax_rows: rank-2 tensor required");
    const std::size_t n = logits.shape[0], c = logits.shape[1];
    std::vector<int> out(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < c; ++j)
            if (logits(i, j) > logits(i, best)) best = j;
        out[i] = static_cast<int>(best);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tape
// ---------------------------------------------------------------------------

const Tape::Node& Tape::node(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
        throw Error("Tape: invalid var id");
    return nodes_[static_cast<std::size_t>(id)];
}

Tape::Node& Tape::node(int id) {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
        throw Error("Tape: invalid var id");
    return nodes_[static_cast<std::size_t>(id)];
}

Var Tape::push(Node n) {
    grads_ready_ = false;
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Tensor value, bool requires_grad) {
    Node n;
    n.op = Op::kLeaf;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    return push(std::move(n));
}

#define GMI_BINARY(NAME, OPK, KERNEL)                                      \
    Var Tape::NAME(Var a, Var b) {                                         \
        Node n;                                                            \
        n.op = Op::OPK;                                                    \
        n.a = a.id;                                                        \
        n.b = b.id;                                                        \
        n.value = KERNEL(node(a.id).value, node(b.id).value);              \
        n.requires_grad = node(a.id).requires_grad || node(b.id).requires_grad; \
        return push(std::move(n));                                         \
    }

GMI_BINARY(matmul, kMatMul, gmi::matmul)
GMI_BINARY(add, kAdd, gmi::add)
GMI_BINARY(sub, kSub, gmi::sub)
GMI_BINARY(mul, kMul, gmi::mul)
GMI_BINARY(hconcat, kHConcat, gmi::hconcat)
#undef GMI_BINARY

#define GMI_UNARY(NAME, OPK, KERNEL)                    \
    Var Tape::NAME(Var a) {                             \
        Node n;                                         \
        n.op = Op::OPK;                                 \
        n.a = a.id;                                     \
        n.value = KERNEL(node(a.id).value);             \
        n.requires_grad = node(a.id).requires_grad;     \
        return push(std::move(n));                      \
    }

GMI_UNARY(transpose, kTranspose, gmi::transpose)
GMI_UNARY(relu, kRelu, gmi::relu)
GMI_UNARY(sigmoid, kSigmoid, gmi::sigmoid)
GMI_UNARY(rsqrt, kRsqrt, gmi::rsqrt)
GMI_UNARY(row_sum, kRowSum, gmi::row_sum)
#undef GMI_UNARY

Var Tape::scalar_mul(Var a, double s) {
    Node n;
    n.op = Op::kScalarMul;
    n.a = a.id;
    n.scalar = s;
    n.value = gmi::scalar_mul(node(a.id).value, s);
    n.requires_grad = node(a.id).requires_grad;
    return push(std::move(n));
}

Var Tape::reduce_sum(Var a) {
    Node n;
    n.op = Op::kReduceSum;
    n.a = a.id;
    n.value = Tensor::scalar_value(gmi::reduce_sum(node(a.id).value));
    n.requires_grad = node(a.id).requires_grad;
    return push(std::move(n));
}

Var Tape::l2_norm(Var a) {
    Node n;
    n.op = Op::kL2Norm;
    n.a = a.id;
    n.value = Tensor::scalar_value(gmi::l2_norm(node(a.id).value));
    n.requires_grad = node(a.id).requires_grad;
    return push(std::move(n));
}

Var Tape::softmax_cross_entropy(Var logits, std::vector<int> labels,
                                std::vector<std::uint8_t> mask) {
    Node n;
    n.op = Op::kSoftmaxXent;
    n.a = logits.id;
    n.value =
        Tensor::scalar_value(gmi::softmax_cross_entropy(node(logits.id).value, labels, mask));
    n.labels = std::move(labels);
    n.mask = std::move(mask);
    n.requires_grad = node(logits.id).requires_grad;
    return push(std::move(n));
}

Var Tape::sym_from_vec(Var a, std::size_t num_nodes) {
    const Tensor& v = node(a.id).value;
    const std::size_t n = num_nodes * (num_nodes - 1) / 2;
    if (v.numel() != n) throw ShapeError("sym_from_vec: vector length != N(N-1)/2");
    Node nd;
    nd.op = Op::kSymFromVec;
    nd.a = a.id;
    nd.num_nodes = num_nodes;
    Tensor m({num_nodes, num_nodes});
    std::size_t k = 0;
    for (std::size_t i = 0; i < num_nodes; ++i)
        for (std::size_t j = i + 1; j < num_nodes; ++j, ++k) {
            m(i, j) = v.data[k];
            m(j, i) = v.data[k];
        }
    nd.value = std::move(m);
    nd.requires_grad = node(a.id).requires_grad;
    return push(std::move(nd));
}

void Tape::backward(Var loss) {
    if (!value(loss).is_scalar()) throw Error("backward: loss must be scalar");
    backward(loss, Tensor::scalar_value(1.0));
}

void Tape::backward(Var out, const Tensor& seed) {
    if (!node(out.id).value.same_shape(seed))
        throw ShapeError("backward: seed shape must match output shape");
    for (auto& n : nodes_) n.grad = Tensor::zeros(n.value.shape);
    node(out.id).grad = seed;
    for (int id = out.id; id >= 0; --id) {
        if (!nodes_[static_cast<std::size_t>(id)].requires_grad) continue;
        backward_node(id);
    }
    grads_ready_ = true;
}

const Tensor& Tape::grad(Var v) const {
    if (!grads_ready_) throw Error("grad: backward has not run");
    return node(v.id).grad;
}

void Tape::backward_node(int id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    const Tensor& g = n.grad;
    auto acc = [this](int target, const Tensor& delta) {
        Node& t = node(target);
        if (!t.requires_grad) return;
        for (std::size_t i = 0; i < t.grad.data.size(); ++i) t.grad.data[i] += delta.data[i];
    };
    switch (n.op) {
        case Op::kLeaf:
            break;
        case Op::kMatMul: {
            const Tensor& av = node(n.a).value;
            const Tensor& bv = node(n.b).value;
            if (node(n.a).requires_grad) acc(n.a, gmi::matmul(g, gmi::transpose(bv)));
            if (node(n.b).requires_grad) acc(n.b, gmi::matmul(gmi::transpose(av), g));
            break;
        }
        case Op::kTranspose:
            acc(n.a, gmi::transpose(g));
            break;
        case Op::kAdd:
            acc(n.a, g);
            acc(n.b, g);
            break;
        case Op::kSub:
            acc(n.a, g);
            if (node(n.b).requires_grad) acc(n.b, gmi::scalar_mul(g, -1.0));
            break;
        case Op::kScalarMul:
            acc(n.a, gmi::scalar_mul(g, n.scalar));
            break;
        case Op::kMul: {
            const Tensor& av = node(n.a).value;
            const Tensor& bv = node(n.b).value;
            if (node(n.a).requires_grad) acc(n.a, gmi::mul(g, bv));
            if (node(n.b).requires_grad) {
                if (av.same_shape(bv)) {
                    acc(n.b, gmi::mul(g, av));
                } else {
                    // b broadcast over rows or columns: sum the products back.
                    const std::size_t r = av.shape[0], c = av.shape[1];
                    Tensor db(bv.shape);
                    if (bv.shape[0] == r && bv.shape[1] == 1) {
                        for (std::size_t i = 0; i < r; ++i) {
                            double s = 0.0;
                            for (std::size_t j = 0; j < c; ++j) s += g(i, j) * av(i, j);
                            db.data[i] = s;
                        }
                    } else {
                        for (std::size_t j = 0; j < c; ++j) {
                            double s = 0.0;
                            for (std::size_t i = 0; i < r; ++i) s += g(i, j) * av(i, j);
                            db.data[j] = s;
                        }
                    }
                    acc(n.b, db);
                }
            }
            break;
        }
        case Op::kRelu: {
            const Tensor& av = node(n.a).value;
            Tensor d = g;
            for (std::size_t i = 0; i < d.data.size(); ++i)
                if (av.data[i] <= 0.0) d.data[i] = 0.0;
            acc(n.a, d);
            break;
        }
        case Op::kHConcat: {
            const Tensor& av = node(n.a).value;
            const Tensor& bv = node(n.b).value;
            const std::size_t r = av.shape[0], ca = av.shape[1], cb = bv.shape[1];
            if (node(n.a).requires_grad) {
                Tensor da(av.shape);
                for (std::size_t i = 0; i < r; ++i)
                    for (std::size_t j = 0; j < ca; ++j) da(i, j) = g(i, j);
                acc(n.a, da);
            }
            if (node(n.b).requires_grad) {
                Tensor db(bv.shape);
                for (std::size_t i = 0; i < r; ++i)
                    for (std::size_t j = 0; j < cb; ++j) db(i, j) = g(i, ca + j);
                acc(n.b, db);
            }
            break;
        }
        case Op::kSigmoid: {
            Tensor d = g;
            for (std::size_t i = 0; i < d.data.size(); ++i) {
                const double y = n.value.data[i];
                d.data[i] *= y * (1.0 - y);
            }
            acc(n.a, d);
            break;
        }
        case Op::kRsqrt: {
            Tensor d = g;
            for (std::size_t i = 0; i < d.data.size(); ++i) {
                const double y = n.value.data[i];
                d.data[i] *= -0.5 * y * y * y;
            }
            acc(n.a, d);
            break;
        }
        case Op::kRowSum: {
            const Tensor& av = node(n.a).value;
            Tensor d(av.shape);
            const std::size_t r = av.shape[0], c = av.shape[1];
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < c; ++j) d(i, j) = g.data[i];
            acc(n.a, d);
            break;
        }
        case Op::kReduceSum: {
            const Tensor& av = node(n.a).value;
            acc(n.a, Tensor::full(av.shape, g.data[0]));
            break;
        }
        case Op::kL2Norm: {
            const Tensor& av = node(n.a).value;
            const double norm = n.value.data[0];
            Tensor d(av.shape);
            if (norm > 0.0) {
                const double s = g.data[0] / norm;
                for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] = s * av.data[i];
            }
            acc(n.a, d);
            break;
        }
        case Op::kSoftmaxXent: {
            const Tensor& lv = node(n.a).value;
            const std::size_t rows = lv.shape[0], c = lv.shape[1];
            std::size_t count = 0;
            for (std::size_t i = 0; i < rows; ++i)
                if (n.mask[i]) ++count;
            Tensor d(lv.shape);
            const double scale = g.data[0] / static_cast<double>(count);
            for (std::size_t i = 0; i < rows; ++i) {
                if (!n.mask[i]) continue;
                double m = lv(i, 0);
                for (std::size_t j = 1; j < c; ++j) m = std::max(m, lv(i, j));
                double z = 0.0;
                for (std::size_t j = 0; j < c; ++j) z += std::exp(lv(i, j) - m);
                for (std::size_t j = 0; j < c; ++j) {
                    double p = std::exp(lv(i, j) - m) / z;
                    if (static_cast<int>(j) == n.labels[i]) p -= 1.0;
                    d(i, j) = scale * p;
                }
            }
            acc(n.a, d);
            break;
        }
        case Op::kSymFromVec: {
            const std::size_t num_nodes = n.num_nodes;
            Tensor d({num_nodes * (num_nodes - 1) / 2});
            std::size_t k = 0;
            for (std::size_t i = 0; i < num_nodes; ++i)
                for (std::size_t j = i + 1; j < num_nodes; ++j, ++k)
                    d.data[k] = g(i, j) + g(j, i);
            acc(n.a, d);
            break;
        }
    }
}

}  // namespace gmi
