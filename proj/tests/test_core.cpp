#include "spinlab/core.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace spinlab;

namespace {

Matrix random_matrix(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Matrix M(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) M(i, j) = cplx(g(rng), g(rng));
    return M;
}

Matrix from_rows(std::initializer_list<std::initializer_list<cplx>> rows) {
    Matrix M(rows.size(), rows.begin()->size());
    Index i = 0;
    for (const auto& r : rows) {
        Index j = 0;
        for (cplx v : r) M(i, j++) = v;
        ++i;
    }
    return M;
}

const Tolerance tol;

}  // namespace

TEST(SchurProduct, Examples) {
    EXPECT_TRUE(approx_equal(schur_product(identity(2), ones(2)), identity(2), tol));
    Matrix M = from_rows({{1, 2}, {3, 4}});
    EXPECT_TRUE(approx_equal(schur_product(ones(2), M), M, tol));
    EXPECT_TRUE(approx_equal(schur_product(M, from_rows({{2, 0}, {0, 2}})), from_rows({{2, 0}, {0, 8}}), tol));
    EXPECT_THROW(schur_product(identity(2), identity(3)), Error);
}

TEST(SchurProduct, AlgebraicLaws) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix A = random_matrix(4, rng), B = random_matrix(4, rng), C = random_matrix(4, rng);
        EXPECT_TRUE(approx_equal(schur_product(A, B), schur_product(B, A), tol));
        EXPECT_TRUE(approx_equal(schur_product(schur_product(A, B), C), schur_product(A, schur_product(B, C)), tol));
        EXPECT_TRUE(approx_equal(schur_product(A, schur_inverse(A)), ones(4), tol));
    }
}

TEST(SchurInverse, Examples) {
    EXPECT_TRUE(approx_equal(schur_inverse(ones(3)), ones(3), tol));
    try {
        schur_inverse(from_rows({{1, 0}, {2, 3}}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), "ZeroEntry");
    }
    EXPECT_TRUE(approx_equal(schur_inverse(from_rows({{1, 2}, {4, 1}})), from_rows({{1, 0.5}, {0.25, 1}}), tol));
}

TEST(TypeII, Examples) {
    EXPECT_TRUE(is_type_ii(from_rows({{1, 1}, {1, -1}})));
    EXPECT_FALSE(is_type_ii(identity(3)));
    const double t = (-3 + std::sqrt(5.0)) / 2;
    EXPECT_TRUE(is_type_ii(t * identity(5) + (ones(5) - identity(5))));
    EXPECT_FALSE(is_type_ii(from_rows({{1, 0}, {0, 1}})));
}

TEST(TypeII, ClosedUnderMonomialMaps) {
    Matrix H = from_rows({{1, 1}, {1, -1}});
    Matrix A = kron(H, H);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    Vector d1(4), d2(4);
    for (Index i = 0; i < 4; ++i) {
        d1(i) = cplx(g(rng), g(rng));
        d2(i) = cplx(g(rng), g(rng));
    }
    Matrix P = permutation_matrix({2, 0, 3, 1});
    EXPECT_TRUE(is_type_ii(A.transpose()));
    EXPECT_TRUE(is_type_ii(diag(d1) * A * diag(d2)));
    EXPECT_TRUE(is_type_ii(P * A * P.transpose() * P));
}

TEST(Endomorphism, Basics) {
    std::mt19937_64 rng(3);
    Matrix M = random_matrix(3, rng);
    EXPECT_TRUE(approx_equal(X(identity(3))(M), M, tol));
    EXPECT_TRUE(approx_equal(Delta(ones(3))(M), M, tol));
    Matrix C = random_matrix(3, rng);
    EXPECT_TRUE(approx_equal(Y(C)(M), M * C.transpose(), tol));
    EXPECT_THROW(X(C)(identity(4)), Error);
}

TEST(Endomorphism, CompositionAppliesRightToLeft) {
    std::mt19937_64 rng(4);
    Matrix A = random_matrix(3, rng), B = random_matrix(3, rng);
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 3; ++j) {
            Matrix E = unit(3, i, j);
            Matrix expect = A * B.cwiseProduct(A * E);
            EXPECT_TRUE(approx_equal(xdx(A, B, A)(E), expect, tol));
        }
    EXPECT_TRUE(operators_equal(X(A) * X(B), X(A * B), tol).ok);
}

TEST(Endomorphism, CommutationRules) {
    std::mt19937_64 rng(5);
    Matrix B = random_matrix(4, rng), C = random_matrix(4, rng);
    Matrix D = random_matrix(4, rng).diagonal().asDiagonal();
    EXPECT_TRUE(operators_equal(Delta(B) * Delta(C), Delta(C) * Delta(B), tol).ok);
    EXPECT_TRUE(operators_equal(X(D) * Delta(C), Delta(C) * X(D), tol).ok);
    EXPECT_FALSE(operators_equal(X(B) * Delta(C), Delta(C) * X(B), tol).ok);
}

TEST(Endomorphism, MaterializeMatchesKronecker) {
    std::mt19937_64 rng(6);
    Matrix C = random_matrix(3, rng);
    EXPECT_TRUE(approx_equal(materialize(X(C)), kron(identity(3), C), tol));
    Matrix D = materialize(Delta(C));
    EXPECT_TRUE(approx_equal(D, Matrix(Eigen::Map<const Vector>(C.data(), 9).asDiagonal()), tol));
}

TEST(Exchange, PottsWitness) {
    // W = -I + (J - I) is a spin model with d = -2, so (W/d, W) is one-sided.
    Matrix W = ones(4) - 2.0 * identity(4);
    Matrix A = W / -2.0;
    Matrix B = schur_inverse(W).transpose();
    auto rep = verify_exchange(A, B, A, B, A, B, tol);
    EXPECT_TRUE(rep.first.ok);
    EXPECT_TRUE(rep.second.ok);
    EXPECT_TRUE(rep.consistent);
}

TEST(Exchange, RandomSextupleVacuous) {
    std::mt19937_64 rng(8);
    std::vector<Matrix> m;
    for (int k = 0; k < 6; ++k) m.push_back(random_matrix(3, rng));
    auto rep = verify_exchange(m[0], m[1], m[2], m[3], m[4], m[5], tol);
    EXPECT_FALSE(rep.first.ok);
    EXPECT_FALSE(rep.second.ok);
    EXPECT_TRUE(rep.consistent);
}

TEST(EigvecTable, Examples) {
    auto t = eigvec_table(identity(3), ones(3));
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 3; ++j) EXPECT_TRUE(approx_equal(t[i][j], identity(3).col(i), tol));
    auto u = eigvec_table(ones(2), ones(2));
    EXPECT_TRUE(approx_equal(u[1][0], Vector::Ones(2), tol));
    Matrix H = from_rows({{1, 1}, {1, -1}});
    auto h = eigvec_table(H, schur_inverse(H));
    Vector same(2), alt(2);
    same << 1, 1;
    alt << 1, -1;
    EXPECT_TRUE(approx_equal(h[0][0], same, tol));
    EXPECT_TRUE(approx_equal(h[1][1], same, tol));
    EXPECT_TRUE(approx_equal(h[0][1], alt, tol));
    EXPECT_TRUE(approx_equal(h[1][0], alt, tol));
}

TEST(Permutation, OrderAndDetection) {
    Matrix P = permutation_matrix({1, 2, 0, 4, 3});
    auto p = as_permutation(P, 1e-9);
    ASSERT_TRUE(p.has_value());
    EXPECT_EQ(permutation_order(*p), 6);
    EXPECT_FALSE(as_permutation(ones(2), 1e-9).has_value());
}

TEST(ToleranceTest, Validation) {
    Tolerance t;
    t.rank_eps = 0;
    EXPECT_THROW(t.validate(), Error);
    EXPECT_TRUE(close(1.0, 1.0 + 1e-12, Tolerance{}));
    EXPECT_FALSE(close(1.0, 1.0 + 1e-6, Tolerance{}));
}
