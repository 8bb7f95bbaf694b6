#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "graphmi/tensor.hpp"

#include <cmath>

#include "graphmi/rng.hpp"
#include "testutil.hpp"

using namespace gmi;

TEST_CASE("forward op semantics") {
    SUBCASE("relu") {
        const Tensor r = relu(Tensor::from_rows({{-1.0, 0.0, 2.0}}));
        CHECK(r.data == std::vector<double>{0.0, 0.0, 2.0});
    }
    SUBCASE("sigmoid at zero") {
        CHECK(sigmoid(Tensor::scalar_value(0.0)).scalar() == doctest::Approx(0.5));
    }
    SUBCASE("sigmoid is stable at extremes") {
        CHECK(sigmoid(Tensor::scalar_value(800.0)).scalar() == doctest::Approx(1.0));
        CHECK(sigmoid(Tensor::scalar_value(-800.0)).scalar() == doctest::Approx(0.0));
        CHECK(sigmoid(Tensor::from_rows({{-800.0, 800.0}})).all_finite());
    }
    SUBCASE("matmul") {
        const Tensor c = matmul(Tensor::from_rows({{1.0, 2.0}, {3.0, 4.0}}),
                                Tensor::from_rows({{5.0}, {6.0}}));
        CHECK(c(0, 0) == doctest::Approx(17.0));
        CHECK(c(1, 0) == doctest::Approx(39.0));
    }
    SUBCASE("mul broadcasts rows and columns only") {
        const Tensor m = Tensor::from_rows({{1.0, 2.0}, {3.0, 4.0}});
        const Tensor col = Tensor::from_rows({{10.0}, {100.0}});
        const Tensor row = Tensor::from_rows({{10.0, 100.0}});
        CHECK(mul(m, col)(1, 0) == doctest::Approx(300.0));
        CHECK(mul(m, row)(1, 1) == doctest::Approx(400.0));
        CHECK_THROWS_AS(mul(m, Tensor::from_rows({{1.0, 2.0, 3.0}})), ShapeError);
    }
    SUBCASE("shape mismatch is a typed failure") {
        CHECK_THROWS_AS(add(Tensor({2, 2}), Tensor({2, 3})), ShapeError);
        CHECK_THROWS_AS(matmul(Tensor({2, 2}), Tensor({3, 2})), ShapeError);
    }
    SUBCASE("rsqrt rejects non-positive input") {
        CHECK_THROWS_AS(rsqrt(Tensor::scalar_value(0.0)), Error);
        CHECK(rsqrt(Tensor::scalar_value(4.0)).scalar() == doctest::Approx(0.5));
    }
    SUBCASE("argmax ties break to the lowest index") {
        CHECK(argmax_rows(Tensor::from_rows({{0.5, 0.5}})) == std::vector<int>{0});
        CHECK(argmax_rows(Tensor::from_rows({{0.1, 0.9}})) == std::vector<int>{1});
    }
}

TEST_CASE("softmax cross entropy") {
    const std::vector<int> labels{0, 1};
    const std::vector<std::uint8_t> mask{1, 1};
    SUBCASE("confident correct logits give near-zero loss") {
        const Tensor logits = Tensor::from_rows({{10.0, 0.0, 0.0}, {0.0, 10.0, 0.0}});
        CHECK(softmax_cross_entropy(logits, labels, mask) ==
              doctest::Approx(std::log(1.0 + 2.0 * std::exp(-10.0))).epsilon(1e-9));
    }
    SUBCASE("masked rows are excluded") {
        const Tensor logits = Tensor::from_rows({{0.0, 3.0}, {100.0, 0.0}});
        const double only_first = softmax_cross_entropy(logits, labels, {1, 0});
        CHECK(only_first == doctest::Approx(std::log(1.0 + std::exp(3.0))));
    }
    SUBCASE("empty mask rejected") {
        CHECK_THROWS_AS(softmax_cross_entropy(Tensor({2, 2}), labels, {0, 0}), Error);
    }
}

TEST_CASE("backward matches finite differences on composite expressions") {
    Rng rng(42);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t n = 3, m = 4;
        Tensor x0({n, m});
        for (double& v : x0.data) v = rng.uniform(0.2, 2.0);

        auto value_of = [&](const std::vector<double>& flat) {
            Tape t;
            Tensor xt({n, m});
            xt.data = flat;
            Var x = t.leaf(xt, true);
            Var w = t.leaf(Tensor::full({m, 2}, 0.3));
            Var h = t.relu(t.matmul(x, w));
            Var s = t.sigmoid(t.row_sum(h));
            Var obj = t.add(t.reduce_sum(t.mul(s, s)), t.l2_norm(x));
            return t.value(obj).scalar();
        };

        Tape t;
        Var x = t.leaf(x0, true);
        Var w = t.leaf(Tensor::full({m, 2}, 0.3));
        Var h = t.relu(t.matmul(x, w));
        Var s = t.sigmoid(t.row_sum(h));
        Var obj = t.add(t.reduce_sum(t.mul(s, s)), t.l2_norm(x));
        t.backward(obj);
        const std::vector<double> fd = testutil::finite_difference(value_of, x0.data);
        CHECK(testutil::gradients_match(t.grad(x).data, fd));
    }
}

TEST_CASE("backward basics") {
    SUBCASE("d/dx x*x at 3 is 6") {
        Tape t;
        Var x = t.leaf(Tensor::scalar_value(3.0), true);
        Var y = t.reduce_sum(t.mul(x, x));
        t.backward(y);
        CHECK(t.grad(x).scalar() == doctest::Approx(6.0));
    }
    SUBCASE("gradient of sum(sigmoid(x)) at 0 is 1/4 per element") {
        Tape t;
        Var x = t.leaf(Tensor({2, 3}), true);
        t.backward(t.reduce_sum(t.sigmoid(x)));
        for (double g : t.grad(x).data) CHECK(g == doctest::Approx(0.25));
    }
    SUBCASE("backward on a non-scalar is rejected") {
        Tape t;
        Var x = t.leaf(Tensor({2, 2}), true);
        CHECK_THROWS_AS(t.backward(t.relu(x)), Error);
    }
    SUBCASE("hconcat splits gradients") {
        Tape t;
        Var a = t.leaf(Tensor::full({2, 1}, 1.0), true);
        Var b = t.leaf(Tensor::full({2, 2}, 1.0), true);
        Var c = t.hconcat(a, b);
        t.backward(t.reduce_sum(t.mul(c, t.leaf(Tensor::from_rows({{1.0, 2.0, 3.0},
                                                                   {4.0, 5.0, 6.0}})))));
        CHECK(t.grad(a).data == std::vector<double>{1.0, 4.0});
        CHECK(t.grad(b).data == std::vector<double>{2.0, 3.0, 5.0, 6.0});
    }
    SUBCASE("sym_from_vec gathers both triangle copies") {
        Tape t;
        Var a = t.leaf(Tensor::from_vector({0.5, 0.25, 0.75}), true);
        Var m = t.sym_from_vec(a, 3);
        t.backward(t.reduce_sum(m));
        for (double g : t.grad(a).data) CHECK(g == doctest::Approx(2.0));
    }
}

TEST_CASE("backward is deterministic") {
    auto run = [] {
        Tape t;
        Rng rng(7);
        Tensor x0({4, 4});
        for (double& v : x0.data) v = rng.uniform(0.1, 1.0);
        Var x = t.leaf(x0, true);
        Var y = t.l2_norm(t.sigmoid(t.matmul(x, x)));
        t.backward(y);
        return t.grad(x).data;
    };
    const auto g1 = run();
    const auto g2 = run();
    CHECK(g1 == g2);  // bitwise
}
