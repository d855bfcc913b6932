#include "spinlab/construct.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace spinlab;

namespace {

const Tolerance tol;

template <class F>
void expect_kind(F&& f, const std::string& kind) {
    try {
        f();
        ADD_FAILURE() << "expected " << kind;
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), kind) << e.what();
    }
}

JonesPair potts_pair(Index n) { return jones_pair_of(potts(n), tol); }
JonesPair cyclic_pair(Index n) { return jones_pair_of(cyclic_spin_model(n), tol); }

// (D^{-1} A D, B) for a fixed random diagonal D.
JonesPair conjugated_pair(const JonesPair& jp, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return odd_gauge(jp, oracle::random_diagonal(jp.n(), rng), tol);
}

Index brute_dim(const Matrix& W) { return oracle::nomura_brute_force(W, W.cwiseInverse()).cols(); }

}  // namespace

TEST(BuildW, SymmetricPairUsesIdentityGauge) {
    JonesPair jp = potts_pair(4);
    ASSERT_TRUE(jp.invertible);
    WBundle wb = build_W(jp, tol);
    EXPECT_EQ(wb.W.rows(), 8);
    EXPECT_TRUE(approx_equal(wb.C, identity(4), tol));
    EXPECT_TRUE(is_type_ii(wb.W, tol));
}

TEST(BuildW, ConjugatedPairRecoversGauge) {
    JonesPair jp = conjugated_pair(cyclic_pair(5), 7);
    ASSERT_TRUE(jp.invertible);
    ASSERT_FALSE(approx_equal(jp.A, jp.A.transpose(), tol));
    WBundle wb = build_W(jp, tol);
    Vector c2 = wb.C.diagonal().cwiseProduct(wb.C.diagonal());
    EXPECT_TRUE(approx_equal(c2.cwiseInverse().asDiagonal() * jp.A * c2.asDiagonal(), jp.A.transpose(), tol));
    EXPECT_TRUE(is_type_ii(wb.W, tol));
}

TEST(BuildW, RejectsNonInvertiblePair) {
    // one-sided condition fails for a Potts A with a Fourier B
    JonesPair jp = check_jones_pair(potts_pair(5).A, abelian_character_matrix({5}), tol);
    ASSERT_FALSE(jp.invertible);
    expect_kind([&] { build_W(jp, tol); }, "NotInvertiblePair");
}

TEST(NWStructure, PottsAndCyclic) {
    // every Potts model of order 4 is a multiple of J - 2I, whose Nomura algebra has dim 4
    NWReport p = verify_NW_structure(build_W(potts_pair(4), tol), tol);
    EXPECT_EQ(p.dim_A, 4);
    EXPECT_EQ(p.dim_W, 8);
    EXPECT_TRUE(p.ok());
    NWReport g = verify_NW_structure(build_W(potts_pair(5), tol), tol);
    EXPECT_EQ(g.dim_A, 2);
    EXPECT_EQ(g.dim_W, 4);
    EXPECT_TRUE(g.ok());
    NWReport c = verify_NW_structure(build_W(cyclic_pair(5), tol), tol);
    EXPECT_EQ(c.dim_W, 2 * c.dim_A);
    EXPECT_EQ(c.dim_WT, 2 * c.dim_A);
    EXPECT_TRUE(c.ok());
}

TEST(NWStructure, DimensionMatchesBruteForce) {
    for (const JonesPair& jp : {potts_pair(3), potts_pair(4), potts_pair(5), cyclic_pair(3)}) {
        EXPECT_EQ(nomura_algebra_of(jp.A, tol).space.dim(), brute_dim(jp.A));
        WBundle wb = build_W(jp, tol);
        NWReport r = verify_NW_structure(wb, tol);
        EXPECT_EQ(r.dim_W, brute_dim(wb.W));
        Matrix Wt = wb.W.transpose();
        EXPECT_EQ(r.dim_WT, brute_dim(Wt));
    }
}

TEST(NWStructure, NonSymmetricSource) {
    NWReport r = verify_NW_structure(build_W(conjugated_pair(potts_pair(3), 3), tol), tol);
    EXPECT_TRUE(r.ok());
    EXPECT_EQ(r.dim_W, 2 * r.dim_A);
}

TEST(NWStructure, EqualAlgebrasForceSpinModelB) {
    // Spin-model pairs have B = inv_s(W)^T, itself a rescaled spin model.
    for (const JonesPair& jp : {potts_pair(4), cyclic_pair(5), potts_pair(5)}) {
        NWReport r = verify_NW_structure(build_W(jp, tol), tol);
        EXPECT_TRUE(r.spin_scalar.has_value());
        if (r.w_equals_wt) EXPECT_TRUE(r.self_dual_consequence.ok);
    }
}

TEST(BuildV, PottsAndCyclic) {
    VBundle p = build_V(potts_pair(4), tol);
    EXPECT_EQ(p.V.rows(), 16);
    EXPECT_TRUE(approx_equal(p.V, p.V.transpose(), tol));
    EXPECT_NEAR(std::abs(2.0 * p.d), 4.0, 1e-12);
    EXPECT_TRUE(p.verification.ok);
    // independent condition (III) for V with loop 2d and V' with loop -2d
    EXPECT_LT(oracle::type_iii_residual(p.V, 2.0 * p.d), 1e-9);
    EXPECT_LT(oracle::type_iii_residual(p.Vprime, -2.0 * p.d), 1e-9);

    VBundle c = build_V(cyclic_pair(5), tol);
    EXPECT_EQ(c.V.rows(), 20);
    EXPECT_LT(oracle::type_iii_residual(c.V, 2.0 * c.d), 1e-9);
}

TEST(BuildV, RequiresSymmetricA) {
    expect_kind([] { build_V(conjugated_pair(potts_pair(4), 1), tol); }, "NotSymmetricA");
}

TEST(NVStructure, PottsPair) {
    VBundle vb = build_V(potts_pair(4), tol);
    NVReport r = verify_NV_structure(vb, tol);
    EXPECT_TRUE(r.ok());
    EXPECT_TRUE(r.lower_bound);
    EXPECT_GE(r.dim_V, 3 * r.r);
    EXPECT_EQ(r.subscheme_dim, 2 * r.r + 1);
    EXPECT_EQ(r.dim_V, brute_dim(vb.V));
}

TEST(NVStructure, CyclicPair) {
    NVReport r = verify_NV_structure(build_V(cyclic_pair(5), tol), tol);
    EXPECT_TRUE(r.ok());
    EXPECT_GE(r.dim_V, 3 * r.r);
    EXPECT_EQ(r.subscheme_dim, 2 * r.r + 1);
}

TEST(Extract, RoundTrip) {
    for (const JonesPair& jp : {potts_pair(4), cyclic_pair(5), potts_pair(3)}) {
        VBundle vb = build_V(jp, tol);
        JonesPair back = extract_pair_from_V(vb.V, vb.d, tol);
        EXPECT_LE(max_abs_diff(back.A, jp.A), 1e-10);
        EXPECT_LE(max_abs_diff(back.B, jp.B), 1e-10);
        EXPECT_TRUE(back.invertible);
        EXPECT_TRUE(approx_equal(build_V(back, tol).V, vb.V, tol));
    }
}

TEST(Extract, PrimePattern) {
    JonesPair jp = potts_pair(4);
    VBundle vb = build_V(jp, tol);
    JonesPair back = extract_pair_from_V(vb.Vprime, -vb.d, tol);
    EXPECT_LE(max_abs_diff(back.A, -jp.A), 1e-10);
    EXPECT_LE(max_abs_diff(back.B, -jp.B), 1e-10);
    EXPECT_TRUE(back.invertible);
}

TEST(Extract, WrongShape) {
    VBundle vb = build_V(potts_pair(4), tol);
    Matrix bad = vb.V;
    bad.block(4, 8, 4, 4) *= -1.0;
    expect_kind([&] { extract_pair_from_V(bad, vb.d, tol); }, "WrongShape");
    try {
        extract_pair_from_V(bad, vb.d, tol);
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("block (1,2)"), std::string::npos) << e.what();
    }
    expect_kind([&] { extract_pair_from_V(Matrix(vb.V.topLeftCorner(6, 6)), vb.d, tol); }, "WrongShape");
}

TEST(Quotient, WTransposeToA) {
    for (const JonesPair& jp : {potts_pair(4), cyclic_pair(5)}) {
        WBundle wb = build_W(jp, tol);
        const Index n = jp.n();
        auto nwt = nomura_algebra_of(Matrix(wb.W.transpose()), tol);
        MatrixSubspace q = quotient_algebra(nwt.space, pairing_partition(2 * n, n), tol);
        EXPECT_TRUE(q.same_as(nomura_algebra_of(jp.A, tol).space, tol));
    }
}

TEST(Quotient, VToW) {
    for (const JonesPair& jp : {potts_pair(4), potts_pair(5), cyclic_pair(5)}) {
        const Index n = jp.n();
        auto nv = nomura_algebra_of(build_V(jp, tol).V, tol);
        MatrixSubspace q = quotient_algebra(nv.space, pairing_partition(4 * n, n), tol);
        EXPECT_TRUE(q.same_as(nomura_algebra_of(build_W(jp, tol).W, tol).space, tol));
    }
}

TEST(Quotient, NotEquitable) {
    auto nv = nomura_algebra_of(build_V(potts_pair(4), tol).V, tol);
    EquitablePartition p = make_partition(16, {{0, 5}, {1, 2, 3, 4}, index_range(6, 16)});
    expect_kind([&] { quotient_algebra(nv.space, p, tol); }, "NotEquitable");
    expect_kind([] { make_partition(3, {{0, 1}, {1, 2}}); }, "BadPartition");
    expect_kind([] { make_partition(3, {{0, 1}}); }, "BadPartition");
}

TEST(Induced, RelationsAmongAlgebras) {
    for (const JonesPair& jp : {potts_pair(4), cyclic_pair(5)}) {
        const Index n = jp.n();
        auto nA = nomura_algebra_of(jp.A, tol);
        auto nW = nomura_algebra_of(build_W(jp, tol).W, tol);
        auto nWT = nomura_algebra_of(Matrix(build_W(jp, tol).W.transpose()), tol);
        auto nV = nomura_algebra_of(build_V(jp, tol).V, tol);

        InducedSpace a = induced_space(nW.space, index_range(0, n), tol);
        EXPECT_TRUE(a.space.same_as(nA.space, tol));
        EXPECT_TRUE(a.bose_mesner.ok);
        InducedSpace lower = induced_space(nW.space, index_range(n, 2 * n), tol);
        EXPECT_TRUE(lower.space.same_as(nA.space, tol));

        InducedSpace top = induced_space(nV.space, index_range(0, 2 * n), tol);
        EXPECT_TRUE(top.space.same_as(nWT.space, tol));
        InducedSpace bottom = induced_space(nV.space, index_range(2 * n, 4 * n), tol);
        EXPECT_TRUE(bottom.space.same_as(nWT.space, tol));
        EXPECT_TRUE(bottom.bose_mesner.ok);
    }
    expect_kind([] { induced_space(MatrixSubspace::span({identity(2)}, 2, tol), {}, tol); }, "EmptySubset");
}

TEST(Dim2, PottsPairs) {
    for (Index n : {5, 6, 7}) {
        Dim2Report r = dim2_classify(potts_pair(n), tol);
        EXPECT_TRUE(r.design.ok);
        EXPECT_EQ(r.k, n - 1);
        EXPECT_EQ(r.lambda, n - 2);
        EXPECT_TRUE(approx_equal(r.N, ones(n) - identity(n), tol));
        EXPECT_TRUE(r.symmetric_A);
        EXPECT_TRUE(r.two_graph.ok);
        EXPECT_TRUE(r.ok());
        // B = a(J - N) + bN reconstructs B
        EXPECT_TRUE(approx_equal(r.a * (ones(n) - r.N) + r.b * r.N, potts_pair(n).B, tol));
    }
}

TEST(Dim2, OtherRoots) {
    for (int choice = 0; choice < 8; ++choice) {
        Dim2Report r = dim2_classify(jones_pair_of(potts(6, choice), tol), tol);
        EXPECT_TRUE(r.ok());
        EXPECT_EQ(r.k, 5);
        EXPECT_EQ(r.lambda, 4);
    }
}

TEST(Dim2, Errors) {
    expect_kind([] { dim2_classify(cyclic_pair(5), tol); }, "NotDimensionTwo");
    expect_kind([] { dim2_classify(potts_pair(4), tol); }, "NotDimensionTwo");
    expect_kind([] { dim2_classify(potts_pair(3), tol); }, "NotDimensionTwo");
}

TEST(Properties, ExtractInvertsBuildOnGaugeOrbit) {
    // symmetrize a conjugated pair, then build and extract
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        JonesPair jp = symmetrize_odd(conjugated_pair(cyclic_pair(3), seed), tol).pair;
        ASSERT_TRUE(jp.invertible);
        VBundle vb = build_V(jp, tol);
        JonesPair back = extract_pair_from_V(vb.V, vb.d, tol);
        EXPECT_LE(max_abs_diff(back.A, jp.A), 1e-10);
        EXPECT_LE(max_abs_diff(back.B, jp.B), 1e-10);
    }
}
