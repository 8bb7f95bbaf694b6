#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "graphmi/graph.hpp"

#include <cmath>

#include "graphmi/rng.hpp"
#include "testutil.hpp"

using namespace gmi;

TEST_CASE("pair indexing is row-major upper triangle") {
    CHECK(AdjVector::pair_index(0, 1, 4) == 0);
    CHECK(AdjVector::pair_index(0, 3, 4) == 2);
    CHECK(AdjVector::pair_index(1, 2, 4) == 3);
    CHECK(AdjVector::pair_index(2, 3, 4) == 5);
    for (std::size_t k = 0; k < 6; ++k) {
        const auto [i, j] = AdjVector::index_pair(k, 4);
        CHECK(AdjVector::pair_index(i, j, 4) == k);
    }
}

TEST_CASE("vec_to_matrix examples") {
    SUBCASE("N=3 path") {
        const Tensor m = vec_to_matrix(AdjVector(3, {1.0, 0.0, 1.0}));
        CHECK(m(0, 1) == 1.0);
        CHECK(m(1, 0) == 1.0);
        CHECK(m(0, 2) == 0.0);
        CHECK(m(1, 2) == 1.0);
        for (std::size_t i = 0; i < 3; ++i) CHECK(m(i, i) == 0.0);
    }
    SUBCASE("N=2 empty graph") {
        const Tensor m = vec_to_matrix(AdjVector(2, {0.0}));
        for (double v : m.data) CHECK(v == 0.0);
    }
    SUBCASE("fractional entries stay symmetric") {
        AdjVector a = AdjVector::zeros(4);
        a.values[0] = 0.5;
        const Tensor m = vec_to_matrix(a);
        CHECK(m(0, 1) == 0.5);
        CHECK(m(1, 0) == 0.5);
    }
}

TEST_CASE("matrix_to_vec examples and validation") {
    SUBCASE("triangle graph") {
        AdjVector a = matrix_to_vec(vec_to_matrix(AdjVector(3, {1.0, 1.0, 1.0})));
        CHECK(a.values == std::vector<double>{1.0, 1.0, 1.0});
    }
    SUBCASE("zero matrix") {
        const AdjVector a = matrix_to_vec(Tensor({3, 3}));
        for (double v : a.values) CHECK(v == 0.0);
    }
    SUBCASE("asymmetric input rejected") {
        Tensor m({2, 2});
        m(0, 1) = 1.0;
        CHECK_THROWS_AS(matrix_to_vec(m), Error);
    }
    SUBCASE("nonzero diagonal rejected") {
        Tensor m({2, 2});
        m(0, 0) = 1.0;
        CHECK_THROWS_AS(matrix_to_vec(m), Error);
    }
}

TEST_CASE("round trip is the identity on random symmetric matrices") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.below(19);
        const AdjVector a = testutil::random_adj_vector(n, rng, 0.0, 1.0);
        const AdjVector back = matrix_to_vec(vec_to_matrix(a));
        CHECK(back.values == a.values);  // exact
    }
}

TEST_CASE("normalized adjacency") {
    SUBCASE("no edges gives the identity") {
        const Tensor an = normalized_adjacency(Tensor({2, 2}));
        CHECK(an(0, 0) == doctest::Approx(1.0));
        CHECK(an(0, 1) == doctest::Approx(0.0));
    }
    SUBCASE("single edge on two nodes gives all one-half") {
        Tensor a({2, 2});
        a(0, 1) = a(1, 0) = 1.0;
        const Tensor an = normalized_adjacency(a);
        for (double v : an.data) CHECK(v == doctest::Approx(0.5));
    }
    SUBCASE("row sums are one on a regular graph") {
        // 4-cycle: every node has degree 2, so D-hat is 3I.
        AdjVector c4 = AdjVector::zeros(4);
        c4.values[AdjVector::pair_index(0, 1, 4)] = 1.0;
        c4.values[AdjVector::pair_index(1, 2, 4)] = 1.0;
        c4.values[AdjVector::pair_index(2, 3, 4)] = 1.0;
        c4.values[AdjVector::pair_index(0, 3, 4)] = 1.0;
        const Tensor an = normalized_adjacency(vec_to_matrix(c4));
        for (std::size_t i = 0; i < 4; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < 4; ++j) s += an(i, j);
            CHECK(s == doctest::Approx(1.0));
        }
    }
    SUBCASE("output is symmetric for symmetric input") {
        Rng rng(3);
        const Tensor a = vec_to_matrix(testutil::random_adj_vector(6, rng));
        const Tensor an = normalized_adjacency(a);
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = 0; j < 6; ++j) CHECK(an(i, j) == doctest::Approx(an(j, i)));
    }
}

TEST_CASE("smoothness term") {
    SUBCASE("no edges gives zero") {
        Rng rng(5);
        const Tensor x = testutil::random_features(4, 3, rng);
        CHECK(normalized_laplacian_smoothness(AdjVector::zeros(4), x) == doctest::Approx(0.0));
    }
    SUBCASE("identical features on a regular graph give zero") {
        AdjVector c4 = AdjVector::zeros(4);
        c4.values[AdjVector::pair_index(0, 1, 4)] = 1.0;
        c4.values[AdjVector::pair_index(1, 2, 4)] = 1.0;
        c4.values[AdjVector::pair_index(2, 3, 4)] = 1.0;
        c4.values[AdjVector::pair_index(0, 3, 4)] = 1.0;
        const Tensor x = Tensor::full({4, 2}, 3.0);
        CHECK(normalized_laplacian_smoothness(c4, x) == doctest::Approx(0.0).epsilon(1e-9));
    }
    SUBCASE("3-node path with scalar features matches the direct double sum") {
        AdjVector path = AdjVector::zeros(3);
        path.values[AdjVector::pair_index(0, 1, 3)] = 1.0;
        path.values[AdjVector::pair_index(1, 2, 3)] = 1.0;
        Tensor x({3, 1});
        x.data = {0.0, 1.0, 2.0};
        const double expected = testutil::smoothness_double_sum(vec_to_matrix(path), x);
        CHECK(normalized_laplacian_smoothness(path, x) == doctest::Approx(expected).epsilon(1e-12));
        // Hand value: d = (1, 2, 1); 1/2 * 2 * [(0 - 1/sqrt(2))^2 + (1/sqrt(2) - 2)^2]
        const double hand = std::pow(0.0 - 1.0 / std::sqrt(2.0), 2.0) +
                            std::pow(1.0 / std::sqrt(2.0) - 2.0, 2.0);
        CHECK(expected == doctest::Approx(hand).epsilon(1e-9));
    }
    SUBCASE("agrees with both oracle routes on random weighted graphs") {
        Rng rng(17);
        for (int trial = 0; trial < 10; ++trial) {
            const std::size_t n = 3 + rng.below(8);
            const AdjVector a = testutil::random_adj_vector(n, rng);
            const Tensor x = testutil::random_features(n, 1 + rng.below(4), rng);
            const Tensor adj = vec_to_matrix(a);
            const double got = normalized_laplacian_smoothness(a, x);
            const double direct = testutil::smoothness_double_sum(adj, x);
            const double trace = testutil::smoothness_trace_form(adj, x);
            CHECK(got == doctest::Approx(direct).epsilon(1e-8));
            CHECK(got == doctest::Approx(trace).epsilon(1e-8));
            CHECK(got >= 0.0);
        }
    }
}

TEST_CASE("density") {
    SUBCASE("complete graph") {
        AdjVector a = AdjVector::zeros(4);
        for (double& v : a.values) v = 1.0;
        CHECK(density(vec_to_matrix(a)) == doctest::Approx(1.0));
    }
    SUBCASE("empty graph") { CHECK(density(Tensor({4, 4})) == doctest::Approx(0.0)); }
    SUBCASE("triangle inside N=4") {
        AdjVector a = AdjVector::zeros(4);
        a.values[AdjVector::pair_index(0, 1, 4)] = 1.0;
        a.values[AdjVector::pair_index(0, 2, 4)] = 1.0;
        a.values[AdjVector::pair_index(1, 2, 4)] = 1.0;
        CHECK(density(vec_to_matrix(a)) == doctest::Approx(0.5));
    }
}

TEST_CASE("AdjVector validation") {
    CHECK_THROWS_AS(AdjVector(3, {0.5, 0.5}), Error);        // wrong length
    CHECK_THROWS_AS(AdjVector(3, {0.5, 1.5, 0.0}), Error);   // out of range
    CHECK_NOTHROW(AdjVector(3, {0.0, 1.0, 0.5}));
}
