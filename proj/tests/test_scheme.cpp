#include "spinlab/scheme.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace spinlab;

namespace {

const Tolerance tol;

template <class F>
void expect_kind(F&& f, const std::string& kind, const std::string& fragment = "") {
    try {
        f();
        ADD_FAILURE() << "expected " << kind;
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), kind) << e.what();
        EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
}

Matrix shift(Index n, Index k) {
    Matrix C = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) C(i, (i + k) % n) = 1.0;
    return C;
}

RawScheme pentagon() {
    return {{identity(5), shift(5, 1) + shift(5, 4), shift(5, 2) + shift(5, 3)}};
}

RawScheme trivial(Index n) { return {{identity(n), ones(n) - identity(n)}}; }

// Cayley graph on Z4 x Z4; the scheme is {I, graph, complement}
RawScheme cayley16(const std::vector<std::pair<int, int>>& gens) {
    Matrix G = Matrix::Zero(16, 16);
    for (int a = 0; a < 16; ++a)
        for (const auto& [u, v] : gens) {
            int b = ((a / 4 + u + 4) % 4) * 4 + (a % 4 + v + 4) % 4;
            G(a, b) = 1.0;
        }
    return {{identity(16), G, ones(16) - identity(16) - G}};
}

RawScheme lattice4() {
    return cayley16({{1, 0}, {2, 0}, {3, 0}, {0, 1}, {0, 2}, {0, 3}});
}
RawScheme shrikhande() { return cayley16({{1, 0}, {3, 0}, {0, 1}, {0, 3}, {1, 1}, {3, 3}}); }

}  // namespace

TEST(Validate, Examples) {
    SchemeData p = validate_scheme(pentagon(), tol);
    EXPECT_EQ(p.classes(), 2);
    SchemeData t = validate_scheme(trivial(4), tol);
    EXPECT_EQ(t.classes(), 1);
    EXPECT_NEAR(std::abs(t.P(1, 1) + 1.0), 0, 1e-12);
    EXPECT_EQ(validate_scheme(lattice4(), tol).classes(), 2);
    // the directed 3-cycle scheme is non-symmetric but valid
    EXPECT_EQ(validate_scheme({{identity(3), shift(3, 1), shift(3, 2)}}, tol).T, (std::vector<Index>{0, 2, 1}));
}

TEST(Validate, AxiomFailures) {
    expect_kind([] { validate_scheme({{identity(5), shift(5, 1), shift(5, 2) + shift(5, 3) + shift(5, 4)}}, tol); },
                "AxiomFailure", "(c)");
    expect_kind([] { validate_scheme({{ones(3) - identity(3), identity(3)}}, tol); }, "AxiomFailure", "(a)");
    expect_kind([] { validate_scheme({{identity(3), ones(3)}}, tol); }, "AxiomFailure", "(b)");
    Matrix half = ones(3) - identity(3);
    half(0, 1) = 0.5;
    expect_kind([&] { validate_scheme({{identity(3), half}}, tol); }, "AxiomFailure", "(01)");
    // path graph on 4 vertices split by distance: products leave the span
    Matrix P1 = Matrix::Zero(4, 4), P2 = Matrix::Zero(4, 4), P3 = Matrix::Zero(4, 4);
    for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 4; ++j) {
            Index dist = std::abs(i - j);
            if (dist == 1) P1(i, j) = 1;
            if (dist == 2) P2(i, j) = 1;
            if (dist == 3) P3(i, j) = 1;
        }
    expect_kind([&] { validate_scheme({{identity(4), P1, P2, P3}}, tol); }, "AxiomFailure", "(d)");
}

TEST(Validate, NomuraAlgebrasGiveSchemes) {
    for (const auto& W : {Matrix(potts(4).W), Matrix(cyclic_spin_model(5).W), abelian_character_matrix({2, 3})}) {
        auto nd = nomura_algebra_of(W, tol);
        SchemeData sd = scheme_from_space(nd.space, tol);
        SchemeData again = validate_scheme({sd.schur_basis}, tol);
        EXPECT_EQ(again.classes(), sd.classes());
        EXPECT_EQ(again.T, sd.T);
        EXPECT_EQ(again.p, sd.p);
    }
}

TEST(Triply, PentagonAndTrivial) {
    SchemeData p = validate_scheme(pentagon(), tol);
    TriplyReport r = triply_regular_check(p);
    EXPECT_TRUE(r.triply_regular);
    EXPECT_FALSE(r.kappa.empty());
    // the pentagon scheme carries the cyclic spin model with t_1 != t_2
    SpinModel m = cyclic_spin_model(5);
    EXPECT_NE(m.W(0, 1), m.W(0, 2));
    EXPECT_TRUE(approx_equal(m.W, m.W(0, 0) * p.schur_basis[0] + m.W(0, 1) * p.schur_basis[1] +
                                      m.W(0, 2) * p.schur_basis[2],
                             tol));
    EXPECT_TRUE(triply_regular_check(validate_scheme(trivial(6), tol)).triply_regular);
}

TEST(Triply, KappaReproducesCounts) {
    SchemeData p = validate_scheme(pentagon(), tol);
    TriplyReport r = triply_regular_check(p);
    const Index c = 3;
    const auto& A = p.schur_basis;
    for (Index x = 0; x < 5; ++x)
        for (Index y = 0; y < 5; ++y)
            for (Index z = 0; z < 5; ++z)
                for (Index i = 0; i < c; ++i)
                    for (Index j = 0; j < c; ++j)
                        for (Index k = 0; k < c; ++k) {
                            long direct = 0;
                            for (Index w = 0; w < 5; ++w)
                                direct += std::lround((A[i](w, x) * A[j](w, y) * A[k](w, z)).real());
                            double sum = 0;
                            for (const auto& [rst, table] : r.kappa) {
                                auto [rr, ss, tt] = rst;
                                sum += double(table[(i * c + j) * c + k]) *
                                       (A[rr](x, y) * A[ss](x, z) * A[tt](y, z)).real();
                            }
                            EXPECT_EQ(direct, std::lround(sum));
                        }
}

TEST(Triply, SpanConditionByLinearSolve) {
    EXPECT_LT(oracle::triple_span_residual(validate_scheme(pentagon(), tol).schur_basis), 1e-9);
    EXPECT_LT(oracle::triple_span_residual(validate_scheme(trivial(4), tol).schur_basis), 1e-9);
}

TEST(Triply, SixteenVertexGraphs) {
    // both are srg(16,6,2,2); only the lattice has strongly regular neighbourhoods
    EXPECT_TRUE(triply_regular_check(validate_scheme(lattice4(), tol)).triply_regular);
    TriplyReport s = triply_regular_check(validate_scheme(shrikhande(), tol));
    EXPECT_FALSE(s.triply_regular);
    EXPECT_FALSE(s.witness.empty());
    EXPECT_TRUE(s.kappa.empty());
}

TEST(Hyper, SpinModels) {
    for (const auto& m : {potts(4), cyclic_spin_model(5), potts(3, 1)}) {
        HyperReport r = hyper_duality_check(m.W, m.d, tol);
        EXPECT_TRUE(r.lambda_forms.ok);
        EXPECT_TRUE(r.x_to_delta.ok) << r.x_to_delta.detail;
        EXPECT_TRUE(r.delta_to_x.ok) << r.delta_to_x.detail;
        EXPECT_TRUE(r.psi_squared.ok);
        EXPECT_LE(r.x_to_delta.residual, 1e-8);
    }
}

TEST(Hyper, NonSpinModelFails) {
    Matrix L = type_ii_examples(4, 2.0)[0];
    HyperReport r = hyper_duality_check(L, 2.0, tol);
    EXPECT_FALSE(r.ok());
    EXPECT_FALSE(r.lambda_forms.ok);
    expect_kind([] { hyper_duality_check(potts(13).W, potts(13).d, tol); }, "TooLarge");
}
