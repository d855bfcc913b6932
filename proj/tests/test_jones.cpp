#include "spinlab/jones.hpp"
#include "spinlab/nomura.hpp"
#include "spinlab/spin.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace spinlab;

namespace {

const Tolerance tol;

JonesPair bridge(const SpinModel& m) { return check_jones_pair(m.W / m.d, schur_inverse(m.W).transpose(), tol); }

Matrix sylvester4() {
    Matrix H(2, 2);
    H << 1, 1, 1, -1;
    return kron(H, H);
}

std::vector<SpinModel> sample_models() {
    return {potts(4), potts(5), cyclic_spin_model(5), cyclic_spin_model(3),
            hadamard_spin_model(sylvester4(), -1, std::polar(1.0, M_PI / 4), 1.0, tol)};
}

template <class F>
void expect_kind(F&& f, const std::string& kind) {
    try {
        f();
        ADD_FAILURE() << "expected " << kind;
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), kind) << e.what();
    }
}

}  // namespace

TEST(OneSided, Examples) {
    EXPECT_TRUE(check_one_sided(identity(4), ones(4), tol).ok);
    SpinModel p = potts(4);
    EXPECT_TRUE(check_one_sided(p.W / p.d, schur_inverse(p.W).transpose(), tol).ok);
    // (A, D_j J) with (D_j)_ii = B_ij
    SpinModel c = cyclic_spin_model(5);
    Matrix A = c.W / c.d, B = schur_inverse(c.W).transpose();
    for (Index j = 0; j < 5; ++j) {
        Matrix DJ = B.col(j).asDiagonal() * ones(5);
        EXPECT_TRUE(check_one_sided(A, DJ, tol).ok);
    }
    EXPECT_LT(oracle::one_sided_residual(A, B), 1e-9);
}

TEST(OneSided, MatchesTripleSumOracle) {
    std::mt19937_64 rng(3);
    Matrix A = oracle::random_matrix(4, rng), B = oracle::random_matrix(4, rng);
    Check c = check_one_sided(A, B, tol);
    EXPECT_FALSE(c.ok);
    EXPECT_NEAR(c.residual, oracle::one_sided_residual(A, B), 1e-9);
}

TEST(OneSided, Preconditions) {
    expect_kind([] { check_one_sided(ones(3), ones(3), tol); }, "NotInvertible");
    expect_kind([] { check_one_sided(identity(3), identity(3), tol); }, "NotSchurInvertible");
}

TEST(JonesPairCheck, Examples) {
    JonesPair ij = check_jones_pair(identity(3), ones(3), tol);
    EXPECT_TRUE(ij.one_sided);
    EXPECT_TRUE(ij.two_sided);
    EXPECT_FALSE(ij.invertible);

    JonesPair c = bridge(cyclic_spin_model(5));
    EXPECT_TRUE(c.invertible);
    EXPECT_NEAR(std::abs(c.d * c.d - 5.0), 0, 1e-12);

    JonesPair p = bridge(potts(4));
    JonesPair t = check_jones_pair(kron(p.A, c.A), kron(p.B, c.B), tol);
    EXPECT_TRUE(t.two_sided);
    EXPECT_TRUE(t.invertible);
}

TEST(FourWeight, FromPottsIsJonesType) {
    SpinModel p = potts(4);
    JonesPair jp = check_jones_pair(p.W / p.d, schur_inverse(p.W).transpose(), tol, p.d.real() < 0 ? -1 : 1);
    ASSERT_TRUE(jp.invertible);
    FourWeightSpinModel m = to_four_weight(jp, tol);
    EXPECT_TRUE(approx_equal(m.W1, p.W, tol));
    EXPECT_TRUE(approx_equal(m.W4, schur_inverse(p.W).transpose(), tol));
    EXPECT_TRUE(approx_equal(m.W2, schur_inverse(p.W).transpose(), tol));
    EXPECT_TRUE(approx_equal(m.W3, p.W, tol));
    JonesPair back = from_four_weight(m, tol);
    EXPECT_TRUE(approx_equal(back.A, jp.A, tol));
    EXPECT_TRUE(approx_equal(back.B, jp.B, tol));
}

TEST(FourWeight, RoundTripOnModels) {
    for (const auto& s : sample_models()) {
        JonesPair jp = bridge(s);
        ASSERT_TRUE(jp.invertible);
        for (int sign : {1, -1}) {
            JonesPair js = check_jones_pair(jp.A, jp.B, tol, sign);
            FourWeightSpinModel m = to_four_weight(js, tol);
            EXPECT_TRUE(validate_four_weight(m, tol).ok);
            JonesPair back = from_four_weight(m, tol);
            EXPECT_LE(max_abs_diff(back.A, js.A), 1e-10);
            EXPECT_LE(max_abs_diff(back.B, js.B), 1e-10);
        }
    }
}

TEST(FourWeight, PseudoJonesType) {
    SpinModel p = potts(4);
    Matrix A = p.W / p.d;
    JonesPair jp = check_jones_pair(A, p.d * A, tol);
    ASSERT_TRUE(jp.invertible);
    JonesPair back = from_four_weight(to_four_weight(jp, tol), tol);
    EXPECT_TRUE(approx_equal(back.B, p.d * back.A, tol));
}

TEST(FourWeight, Errors) {
    JonesPair ij = check_jones_pair(identity(3), ones(3), tol);
    expect_kind([&] { to_four_weight(ij, tol); }, "NotInvertiblePair");
    FourWeightSpinModel m = to_four_weight(bridge(cyclic_spin_model(5)), tol);
    m.W1(0, 0) *= 1.001;
    expect_kind([&] { from_four_weight(m, tol); }, "ValidationFailure");
    Check c = validate_four_weight(m, tol);
    EXPECT_NE(c.detail.find("(I)"), std::string::npos);
}

TEST(Gauge, Odd) {
    std::mt19937_64 rng(9);
    JonesPair jp = bridge(potts(5));
    JonesPair same = odd_gauge(jp, identity(5), tol);
    EXPECT_TRUE(approx_equal(same.A, jp.A, tol));
    Matrix D = oracle::random_diagonal(5, rng);
    JonesPair g = odd_gauge(jp, D, tol);
    EXPECT_TRUE(g.invertible);
    auto rec = recover_odd_gauge(jp.A, g.A, tol);
    ASSERT_TRUE(rec.has_value());
    EXPECT_TRUE(approx_equal(jp.A, *rec * g.A * rec->inverse(), tol));
    Matrix Z = identity(5);
    Z(2, 2) = 0;
    expect_kind([&] { odd_gauge(jp, Z, tol); }, "SingularD");
}

TEST(Gauge, Even) {
    JonesPair jp = bridge(cyclic_spin_model(5));
    JonesPair same = even_gauge(jp, identity(5), tol);
    EXPECT_TRUE(approx_equal(same.B, jp.B, tol));
    Matrix P = permutation_matrix({1, 2, 3, 4, 0});
    JonesPair g = even_gauge(jp, P, tol);
    EXPECT_TRUE(g.one_sided);
    auto rec = recover_even_gauge(jp.B, g.B, tol);
    ASSERT_TRUE(rec.has_value());
    EXPECT_TRUE(approx_equal(*rec, P, tol));
    expect_kind([&] { even_gauge(jp, ones(5), tol); }, "NotPermutation");
}

TEST(Gauge, SymmetrizeOdd) {
    JonesPair jp = bridge(potts(4));
    auto s = symmetrize_odd(jp, tol);
    EXPECT_TRUE(approx_equal(s.D, identity(4), tol));
    EXPECT_TRUE(approx_equal(s.pair.A, jp.A, tol));

    std::mt19937_64 rng(4);
    Matrix D = oracle::random_diagonal(5, rng);
    JonesPair c = bridge(cyclic_spin_model(5));
    JonesPair g = odd_gauge(c, D, tol);
    ASSERT_FALSE(approx_equal(g.A, g.A.transpose(), tol));
    auto sg = symmetrize_odd(g, tol);
    EXPECT_TRUE(approx_equal(sg.pair.A, sg.pair.A.transpose(), tol));
    EXPECT_TRUE(approx_equal(g.A, sg.D * g.A.transpose() * sg.D.inverse(), tol));
    EXPECT_TRUE(approx_equal(sg.D1 * sg.D1, sg.D, tol));
    EXPECT_TRUE(sg.pair.invertible);
}

TEST(Gauge, SymmetrizeEven) {
    // B P with B symmetric and P of order 5: B^{-1}B^T has odd order.
    JonesPair c = bridge(cyclic_spin_model(5));
    Matrix P = permutation_matrix({1, 2, 3, 4, 0});
    JonesPair g = even_gauge(c, P, tol);
    auto s = symmetrize_even(g, tol);
    EXPECT_EQ(s.order % 2, 1);
    EXPECT_TRUE(approx_equal(s.pair.B, s.pair.B.transpose(), tol));
    EXPECT_TRUE(s.pair.one_sided);

    JonesPair h = bridge(hadamard_spin_model(sylvester4(), -1, std::polar(1.0, M_PI / 4), 1.0, tol));
    expect_kind([&] { symmetrize_even(h, tol); }, "EvenOrder");
}

TEST(Properties, ClosureFamily) {
    std::mt19937_64 rng(21);
    for (const auto& s : sample_models()) {
        JonesPair jp = bridge(s);
        const Matrix &A = jp.A, &B = jp.B;
        const Index n = A.rows();
        Matrix D = oracle::random_diagonal(n, rng);
        std::vector<Index> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Matrix P = permutation_matrix(perm);
        const cplx lambda(0.7, -1.3);
        EXPECT_TRUE(check_one_sided(A.transpose(), B, tol).ok);
        EXPECT_TRUE(check_one_sided(A.inverse(), schur_inverse(B), tol).ok);
        EXPECT_TRUE(check_one_sided(D.inverse() * A * D, B, tol).ok);
        EXPECT_TRUE(check_one_sided(A, B * P, tol).ok);
        EXPECT_TRUE(check_one_sided(P * A * P.transpose(), P * B * P.transpose(), tol).ok);
        EXPECT_TRUE(check_one_sided(lambda * A, lambda * B, tol).ok);
    }
}

TEST(Properties, SumsAndInverses) {
    for (const auto& s : sample_models()) {
        JonesPair jp = bridge(s);
        const Matrix &A = jp.A, &B = jp.B;
        const Index n = A.rows();
        const cplx tr = A.trace();
        EXPECT_TRUE(approx_equal(B.transpose() * ones(n), tr * ones(n), tol));
        EXPECT_TRUE(approx_equal(B * ones(n), tr * ones(n), tol));
        EXPECT_TRUE(
            operators_equal(dxd(schur_inverse(A), A, A), xdx(B, B.transpose(), B.inverse()), tol).ok);
        Matrix AI = A.diagonal().asDiagonal();
        EXPECT_TRUE(approx_equal(B.inverse(), schur_inverse(B).transpose() * AI / tr, tol));
    }
}

TEST(Properties, TypeIIWithAInAlgebra) {
    // W spin model: A = W, B = inv_s(W)^T gives (A, a b^{-1} n B) one-sided.
    for (const auto& s : sample_models()) {
        const Matrix& A = s.W;
        Matrix B = schur_inverse(A).transpose();
        auto nd = nomura_algebra(A, B, tol);
        ASSERT_TRUE(nd.space.contains(A, tol));
        const Index n = A.rows();
        cplx a = A(0, 0), b = (B.transpose() * ones(n))(0, 0);
        EXPECT_TRUE(check_one_sided(A, a / b * double(n) * B, tol).ok);
    }
}

TEST(Properties, InvertiblePairAlgebras) {
    for (const auto& s : sample_models()) {
        JonesPair jp = bridge(s);
        const Matrix &A = jp.A, &B = jp.B;
        auto nA = nomura_algebra_of(A, tol);
        auto nAt = nomura_algebra_of(A.transpose(), tol);
        auto nB = nomura_algebra_of(B, tol);
        auto nBt = nomura_algebra_of(B.transpose(), tol);
        EXPECT_TRUE(nA.space.same_as(nAt.space, tol));
        EXPECT_TRUE(nA.space.same_as(nB.space, tol));
        EXPECT_TRUE(nA.space.same_as(nBt.space, tol));
        for (const Matrix& F : nA.space.basis())
            EXPECT_TRUE(approx_equal(duality_map(nB, F).transpose(), B.inverse() * duality_map(nA, F) * B, tol));

        auto nAB = nomura_algebra(A, B, tol);
        auto nABt = nomura_algebra(A, B.transpose(), tol);
        EXPECT_TRUE(nAB.space.same_as(nABt.space, tol));
        Matrix Binv = B.inverse();
        auto conj = nAB.dual_space.map([&](const Matrix& M) { return Matrix(Binv * M * B.transpose()); }, A.rows(), tol);
        EXPECT_TRUE(nABt.dual_space.same_as(conj, tol));
        for (const Matrix& R : nAB.space.basis())
            EXPECT_TRUE(approx_equal(duality_map(nAB, R) * B.transpose(), duality_map(nABt, R) * B, tol));
    }
}
