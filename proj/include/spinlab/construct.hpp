#pragma once

#include "spinlab/spin.hpp"

#include <random>

namespace spinlab {

// ---------------------------------------------------------------- W

struct WBundle {
    Matrix W;  // 2n x 2n
    Matrix C;  // diagonal, A^T = C^{-2} A C^2
    JonesPair source;
};

/// W = [[A^T, -A^T], [inv_s(B)^T C, inv_s(B)^T C]].
inline WBundle build_W(const JonesPair& jp, const Tolerance& tol = {}) {
    if (!jp.invertible) throw Error("NotInvertiblePair", "build_W needs an invertible Jones pair");
    const Matrix& A = jp.A;
    const Index n = jp.n();
    WBundle wb;
    wb.source = jp;
    if (approx_equal(A, A.transpose(), tol)) {
        wb.C = identity(n);
    } else {
        // A = D A^T D^{-1}, so C^2 = D.
        wb.C = symmetrize_odd(jp, tol).D1;
    }
    const Vector c2 = wb.C.diagonal().cwiseProduct(wb.C.diagonal());
    if (!approx_equal(Matrix(c2.cwiseInverse().asDiagonal() * A * c2.asDiagonal()), A.transpose(), tol))
        throw Error("InconsistentGauge", "no diagonal C with A^T = C^-2 A C^2");
    const Matrix At = A.transpose();
    const Matrix BC = schur_inverse(jp.B, tol).transpose() * wb.C;
    wb.W = block_matrix({{At, -At}, {BC, BC}});
    Check t = type_ii_check(wb.W, tol);
    if (!t.ok) throw Error("VerificationFailure", "W is not type II: " + t.detail);
    return wb;
}

namespace detail {

inline Check check_membership(const MatrixSubspace& S, const Matrix& M, const Tolerance& tol) {
    double r = S.residual(M);
    if (S.contains(M, tol)) return {true, r, {}};
    return {false, r, "residual " + std::to_string(r)};
}

inline Check zero_one(const Matrix& M, const Tolerance& tol) { return compare(M.cwiseProduct(M), M, tol); }

/// Runs f and turns a thrown Error into a failed check.
template <class F>
Check guarded(F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        return {false, INFINITY, e.kind() + ": " + e.what()};
    }
}

}  // namespace detail

struct NWReport {
    Index dim_A = 0, dim_AB = 0, dim_W = 0, dim_WT = 0;
    Check dimension;        // dim N_W = dim N_{W^T} = 2 dim N_A
    Check schur_basis;      // predicted Schur idempotents are the basis of N_W
    Check principal_basis;  // predicted principal idempotents are the basis of N_{W^T}
    Check memberships;      // [[0,B],[B^T,0]] and diag(J,J) in N_W, the A-block matrix in N_{W^T}
    bool w_equals_wt = false;
    std::optional<cplx> spin_scalar;  // alpha with alpha*B a spin model
    Check self_dual_consequence;      // N_W = N_{W^T} forces alpha*B to be a spin model

    bool ok() const {
        return dimension.ok && schur_basis.ok && principal_basis.ok && memberships.ok && self_dual_consequence.ok;
    }
};

/// Compares N_W and N_{W^T} with the bases predicted from the source pair.
inline NWReport verify_NW_structure(const WBundle& wb, const Tolerance& tol = {}, bool strict = true) {
    const Matrix& A = wb.source.A;
    const Matrix& B = wb.source.B;
    const Index n = A.rows();
    const Vector c = wb.C.diagonal();
    const Matrix C = c.asDiagonal(), Ci = c.cwiseInverse().asDiagonal();
    const Matrix C2 = C * C, C2i = Ci * Ci;
    const Matrix Z = Matrix::Zero(n, n);
    NWReport r;

    NomuraData nA = nomura_algebra_of(A, tol);
    NomuraData nB = nomura_algebra_of(B, tol);
    NomuraData nAB = nomura_algebra(A, B, tol);
    NomuraData nW = nomura_algebra_of(wb.W, tol);
    NomuraData nWT = nomura_algebra_of(wb.W.transpose(), tol);
    r.dim_A = nA.space.dim();
    r.dim_AB = nAB.space.dim();
    r.dim_W = nW.space.dim();
    r.dim_WT = nWT.space.dim();
    if (r.dim_W != 2 * r.dim_A || r.dim_WT != 2 * r.dim_A || r.dim_AB != r.dim_A)
        r.dimension = {false, 0.0,
                       "dims A=" + std::to_string(r.dim_A) + " AB=" + std::to_string(r.dim_AB) +
                           " W=" + std::to_string(r.dim_W) + " W^T=" + std::to_string(r.dim_WT)};

    r.schur_basis = detail::guarded([&] {
        Check ch;
        std::vector<Matrix> predicted;
        for (const Matrix& E : principal_idempotents(nA.space, tol))
            predicted.push_back(block_matrix({{duality_map(nA, E), Z}, {Z, duality_map(nB, E).transpose()}}));
        for (const Matrix& F : algebra_idempotents(nAB.space, tol)) {
            Matrix top = duality_map(nAB, F);
            Matrix bottom = duality_map(nAB, Matrix(C2 * F.transpose() * C2i)).transpose();
            predicted.push_back(block_matrix({{Z, top}, {bottom, Z}}));
        }
        Matrix sum = Matrix::Zero(2 * n, 2 * n);
        for (std::size_t k = 0; k < predicted.size(); ++k) {
            const std::string label = "element " + std::to_string(k);
            merge(ch, detail::zero_one(predicted[k], tol), label + " not 01");
            merge(ch, detail::check_membership(nW.space, predicted[k], tol), label + " not in N_W");
            sum += predicted[k];
        }
        merge(ch, compare(sum, ones(2 * n), tol), "sum is not J");
        if (static_cast<Index>(predicted.size()) != r.dim_W) merge(ch, Check{false, 0.0, "count differs from dim N_W"});
        return ch;
    });

    r.principal_basis = detail::guarded([&] {
        Check ch;
        std::vector<Matrix> predicted;
        for (const Matrix& E : principal_idempotents(nA.space, tol)) {
            Matrix Et = E.transpose();
            predicted.push_back(0.5 * block_matrix({{Et, Et}, {Et, Et}}));
        }
        for (const Matrix& F : algebra_idempotents(nAB.space, tol)) {
            Matrix G = C * F.transpose() * Ci;
            predicted.push_back(0.5 * block_matrix({{G, -G}, {-G, G}}));
        }
        Matrix sum = Matrix::Zero(2 * n, 2 * n);
        for (std::size_t i = 0; i < predicted.size(); ++i) {
            const std::string label = "element " + std::to_string(i);
            merge(ch, detail::check_membership(nWT.space, predicted[i], tol), label + " not in N_W^T");
            for (std::size_t j = 0; j < predicted.size(); ++j) {
                Matrix expect = i == j ? predicted[i] : Matrix::Zero(2 * n, 2 * n);
                merge(ch, compare(predicted[i] * predicted[j], expect, tol), label + " product");
            }
            sum += predicted[i];
        }
        merge(ch, compare(sum, identity(2 * n), tol), "sum is not I");
        if (static_cast<Index>(predicted.size()) != r.dim_WT)
            merge(ch, Check{false, 0.0, "count differs from dim N_W^T"});
        return ch;
    });

    merge(r.memberships, detail::check_membership(nW.space, block_matrix({{Z, B}, {B.transpose(), Z}}), tol),
          "[[0,B],[B^T,0]]");
    merge(r.memberships, detail::check_membership(nW.space, block_matrix({{ones(n), Z}, {Z, ones(n)}}), tol),
          "diag(J,J)");
    const Matrix K = Ci * A * C;
    merge(r.memberships, detail::check_membership(nWT.space, block_matrix({{K, -K}, {-K, K}}), tol),
          "[[K,-K],[-K,K]]");

    r.w_equals_wt = nW.space.same_as(nWT.space, tol);
    if (auto s = normalize_to_spin_model(B, tol)) r.spin_scalar = s->first;
    if (r.w_equals_wt && !r.spin_scalar) r.self_dual_consequence = {false, 0.0, "N_W = N_W^T but no alpha*B is a spin model"};

    if (strict && !r.ok()) {
        for (const auto& [name, ch] : {std::pair<const char*, const Check*>{"dimension", &r.dimension},
                                       {"Schur basis", &r.schur_basis},
                                       {"principal basis", &r.principal_basis},
                                       {"memberships", &r.memberships},
                                       {"self-duality", &r.self_dual_consequence}})
            if (!ch->ok) throw Error("StructureMismatch", std::string(name) + ": " + ch->detail);
    }
    return r;
}

// ---------------------------------------------------------------- V

struct VBundle {
    Matrix V, Vprime;  // 4n x 4n
    cplx d = 0.0;      // loop variable of the source pair; V has loop 2d
    JonesPair source;
    Check verification;
};

inline Matrix v_matrix(const Matrix& A, const Matrix& B, cplx d, const Tolerance& tol = {}) {
    const Matrix dA = d * A;
    const Matrix Bs = schur_inverse(B, tol);
    const Matrix Bt = Bs.transpose();
    return block_matrix({{dA, -dA, Bs, Bs}, {-dA, dA, Bs, Bs}, {Bt, Bt, dA, -dA}, {Bt, Bt, -dA, dA}});
}

/// D V D with D = diag(I_2n, -I_2n).
inline Matrix v_prime(const Matrix& V) {
    const Index h = V.rows() / 2;
    Matrix P = V;
    P.topRightCorner(h, h) *= -1.0;
    P.bottomLeftCorner(h, h) *= -1.0;
    return P;
}

/// Builds V and V' and checks that they are symmetric spin models with loops 2d and -2d.
inline VBundle build_V(const JonesPair& jp, const Tolerance& tol = {}) {
    if (!jp.invertible) throw Error("NotInvertiblePair", "build_V needs an invertible Jones pair");
    if (!approx_equal(jp.A, jp.A.transpose(), tol))
        throw Error("NotSymmetricA", "A is not symmetric; apply symmetrize_odd first");
    VBundle vb;
    vb.source = jp;
    vb.d = jp.d;
    vb.V = v_matrix(jp.A, jp.B, jp.d, tol);
    vb.Vprime = v_prime(vb.V);

    Check& ch = vb.verification;
    merge(ch, compare(vb.V, vb.V.transpose(), tol), "V symmetric");
    SpinReport sv = spin_model_report(vb.V, 2.0 * vb.d, tol);
    merge(ch, Check{sv.ok(), std::max({sv.cond_I.residual, sv.cond_II.residual, sv.cond_III.residual}),
                    sv.cond_I.detail + sv.cond_II.detail + sv.cond_III.detail + sv.bridge.detail},
          "V spin model");
    SpinReport sp = spin_model_report(vb.Vprime, -2.0 * vb.d, tol);
    merge(ch, Check{sp.ok(), std::max({sp.cond_I.residual, sp.cond_II.residual, sp.cond_III.residual}),
                    sp.cond_I.detail + sp.cond_II.detail + sp.cond_III.detail + sp.bridge.detail},
          "V' spin model");
    if (ch.ok) {
        const Matrix Vs = vb.V.cwiseInverse();
        const Matrix Ps = vb.Vprime.cwiseInverse();
        auto [theta, res] = eigenvalue_readout(vb.V, Vs, vb.V);
        merge(ch, Check{res <= tol.rank_eps, res, "eigenvector residual"}, "Theta_V(V)");
        merge(ch, compare(theta, 2.0 * vb.d * Vs, tol), "Theta_V(V) = 2d inv_s(V)");
        NomuraData nv = nomura_algebra_of(vb.V, tol);
        for (Index k = 0; k < nv.space.dim(); ++k) {
            const Matrix M = nv.space.element(k);
            auto [tp, rp] = eigenvalue_readout(vb.Vprime, Ps, M);
            merge(ch, Check{rp <= tol.rank_eps, rp, "basis element not in N_V'"}, "Theta_V'");
            merge(ch, compare(tp, nv.theta_images[static_cast<std::size_t>(k)], tol), "Theta_V' = Theta_V");
        }
    }
    if (!ch.ok) throw Error("VerificationFailure", ch.detail);
    return vb;
}

/// Blocks of a matrix in the shape of the general element of N_V.
struct NVBlocks {
    Matrix F, R, G, H, H1, R1;
    Check pattern;
};

inline NVBlocks decompose_nv(const Matrix& Zm, const Matrix& B, const Tolerance& tol = {}) {
    auto z = [&](Index i, Index j) { return Matrix(block_of(Zm, 4, i, j)); };
    NVBlocks b;
    b.F = (z(0, 0) + z(0, 1)) / 2.0;
    b.R = (z(0, 0) - z(0, 1)) / 2.0;
    b.G = (z(0, 2) + z(0, 3)) / 2.0;
    b.H = (z(0, 2) - z(0, 3)) / 2.0;
    b.H1 = (z(2, 0) - z(2, 1)) / 2.0;
    b.R1 = (z(2, 2) - z(2, 3)) / 2.0;
    const Matrix Binv = B.inverse();
    const Matrix K = (z(2, 0) + z(2, 1)) / 2.0;
    const Matrix L = (z(2, 2) + z(2, 3)) / 2.0;
    merge(b.pattern, compare(z(1, 1), z(0, 0), tol), "(1,1)");
    merge(b.pattern, compare(z(1, 0), z(0, 1), tol), "(1,0)");
    merge(b.pattern, compare(z(1, 2), z(0, 3), tol), "(1,2)");
    merge(b.pattern, compare(z(1, 3), z(0, 2), tol), "(1,3)");
    merge(b.pattern, compare(z(3, 0), z(2, 1), tol), "(3,0)");
    merge(b.pattern, compare(z(3, 1), z(2, 0), tol), "(3,1)");
    merge(b.pattern, compare(z(3, 2), z(2, 3), tol), "(3,2)");
    merge(b.pattern, compare(z(3, 3), z(2, 2), tol), "(3,3)");
    merge(b.pattern, compare(K, Binv * b.G * B.transpose(), tol), "B^-1 G B^T");
    merge(b.pattern, compare(L, Binv * b.F * B, tol), "B^-1 F B");
    return b;
}

/// S with op = Delta_S, if op maps every E_ij to a multiple of itself.
inline std::optional<Matrix> diagonal_symbol(const Endomorphism& op, const Tolerance& tol) {
    const Index n = op.order();
    Matrix S(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            Matrix img = op(unit(n, i, j));
            S(i, j) = img(i, j);
            img(i, j) = 0.0;
            if (img.cwiseAbs().maxCoeff() > tol.abs_eps + tol.rel_eps * std::abs(S(i, j))) return std::nullopt;
        }
    return S;
}

struct NVReport {
    Index n = 0, r = 0, dim_V = 0;
    bool lower_bound = false;  // 3r <= dim N_V
    bool upper_bound = false;  // dim N_V <= 3r + n
    bool equals_4r = false;
    Check pairing_element;     // I_2 (x) J_2n, its image and the image's membership
    Check pattern;             // block shape of each basis element
    Check side_conditions;     // F, R, G and R_1 conditions
    Check h_conditions;        // diagonal operator identities for H and H_1
    Check theta_blocks;        // Theta_V on the zero-off-diagonal part
    Check image_membership;    // image block matrix in N_{V^T} for random F, R
    Check transpose_relation;  // Theta_{A,B}(R)^T against Theta_{A,B}(R^T)
    Check self_duality;        // Theta_V^2 = 4n transpose
    Check subscheme;           // span of S-hat and J-hat
    Index subscheme_dim = 0;

    bool ok() const {
        return lower_bound && pairing_element.ok && pattern.ok && side_conditions.ok && h_conditions.ok &&
               theta_blocks.ok && image_membership.ok && transpose_relation.ok && self_duality.ok && subscheme.ok;
    }
};

/// Computes N_V and checks its block structure against the source pair.
inline NVReport verify_NV_structure(const VBundle& vb, const Tolerance& tol = {}, bool strict = true,
                                    std::uint64_t seed = 0) {
    const Matrix& A = vb.source.A;
    const Matrix& B = vb.source.B;
    const Index n = A.rows();
    const Matrix Z = Matrix::Zero(n, n), I = identity(n), J = ones(n);
    const Matrix Ainv = A.inverse(), Binv = B.inverse(), BTinv = B.transpose().inverse();
    const Matrix As = schur_inverse(A, tol), Bs = schur_inverse(B, tol);
    NVReport r;
    r.n = n;

    NomuraData nv = nomura_algebra_of(vb.V, tol);
    NomuraData nA = nomura_algebra_of(A, tol);
    NomuraData nB = nomura_algebra_of(B, tol);
    NomuraData nBT = nomura_algebra_of(B.transpose(), tol);
    NomuraData nAB = nomura_algebra(A, B, tol);
    r.r = nA.space.dim();
    r.dim_V = nv.space.dim();
    r.lower_bound = 3 * r.r <= r.dim_V;
    r.upper_bound = r.dim_V <= 3 * r.r + n;
    r.equals_4r = r.dim_V == 4 * r.r;

    r.pairing_element = detail::guarded([&] {
        Check ch;
        Matrix IJ = kron(identity(2), ones(2 * n));
        merge(ch, detail::check_membership(nv.space, IJ, tol), "I_2 (x) J_2n");
        if (!ch.ok) return ch;
        Matrix expect = double(2 * n) * kron(identity(2), kron(ones(2), I));
        merge(ch, compare(duality_map(nv, IJ), expect, tol), "image");
        merge(ch, detail::check_membership(nv.space, expect, tol), "image in N_V^T");
        return ch;
    });

    for (Index k = 0; k < r.dim_V; ++k) {
        const std::string label = "basis element " + std::to_string(k);
        const Matrix M = nv.space.element(k);
        NVBlocks b = decompose_nv(M, B, tol);
        merge(r.pattern, b.pattern, label);
        merge(r.side_conditions, detail::check_membership(nA.space, b.F, tol), label + " F");
        merge(r.side_conditions, detail::check_membership(nAB.space, b.R, tol), label + " R");
        merge(r.side_conditions, detail::check_membership(nAB.dual_space, b.G, tol), label + " G");
        merge(r.side_conditions, detail::guarded([&] {
                  return compare(duality_map(nBT, A.cwiseProduct(b.R1)).transpose(),
                                 duality_map(nA, A.cwiseProduct(b.R)), tol);
              }),
              label + " R_1");

        auto s1 = diagonal_symbol(Endomorphism::compose({X(Ainv), Delta(Bs), X(b.H), Delta(As), X(Binv)}), tol);
        auto s1b = diagonal_symbol(Endomorphism::compose({X(B), Delta(A), X(b.H1), Delta(B), X(A)}), tol);
        auto s2 = diagonal_symbol(Endomorphism::compose({X(B.transpose()), Delta(A), X(b.H), Delta(B.transpose()), X(A)}), tol);
        auto s2b = diagonal_symbol(Endomorphism::compose({X(Ainv), Delta(Bs.transpose()), X(b.H1), Delta(As), X(BTinv)}), tol);
        if (!s1 || !s1b || !s2 || !s2b) {
            merge(r.h_conditions, Check{false, INFINITY, "operator is not diagonal"}, label);
        } else {
            merge(r.h_conditions, compare(*s1, *s1b, tol), label + " S");
            merge(r.h_conditions, compare(*s2, *s2b, tol), label + " S_1");
        }

        merge(r.self_duality, detail::guarded([&] {
                  Matrix t = duality_map(nv, M);
                  return compare(duality_map(nv, t), double(4 * n) * M.transpose(), tol);
              }),
              label);
    }

    // Zero-off-diagonal part: R_1 is determined by R through Theta_B(Theta_{B^T}(X)) = n X^T.
    auto r1_of = [&](const Matrix& R) {
        Matrix Y = duality_map(nA, A.cwiseProduct(R)).transpose();
        return Matrix((duality_map(nB, Y).transpose() / double(n)).cwiseProduct(As));
    };
    auto diag_part = [&](const Matrix& F, const Matrix& R, const Matrix& R1) {
        const Matrix L = Binv * F * B;
        return block_matrix({{F + R, F - R, Z, Z}, {F - R, F + R, Z, Z}, {Z, Z, L + R1, L - R1}, {Z, Z, L - R1, L + R1}});
    };
    auto image_of = [&](const Matrix& F, const Matrix& R) {
        const Matrix tF = F.isZero() ? Z : duality_map(nA, F);
        const Matrix tR = R.isZero() ? Z : duality_map(nAB, R);
        const Matrix tRt = R.isZero() ? Z : Matrix(duality_map(nAB, R.transpose()).transpose());
        const Matrix L = Binv * tF * B;
        return block_matrix({{tF, tF, tR, tR}, {tF, tF, tR, tR}, {tRt, tRt, L, L}, {tRt, tRt, L, L}});
    };

    std::vector<Matrix> hat = {block_matrix({{Z, Z, J, J}, {Z, Z, J, J}, {J, J, Z, Z}, {J, J, Z, Z}})};
    for (Index k = 0; k < nA.space.dim(); ++k) {
        const Matrix F = nA.space.element(k);
        const Matrix Zd = diag_part(F, Z, Z);
        hat.push_back(Zd);
        merge(r.theta_blocks,
              detail::guarded([&] { return compare(duality_map(nv, Zd), 2.0 * image_of(F, Z), tol); }),
              "F element " + std::to_string(k));
    }
    for (Index k = 0; k < nAB.space.dim(); ++k) {
        const Matrix R = nAB.space.element(k);
        merge(r.theta_blocks, detail::guarded([&] {
                  Check ch;
                  const Matrix R1 = r1_of(R);
                  merge(ch, compare(duality_map(nBT, A.cwiseProduct(R1)).transpose(),
                                    duality_map(nA, A.cwiseProduct(R)), tol),
                        "R_1 condition");
                  const Matrix Zd = diag_part(Z, R, R1);
                  hat.push_back(Zd);
                  merge(ch, compare(duality_map(nv, Zd), 2.0 * image_of(Z, R), tol), "image");
                  return ch;
              }),
              "R element " + std::to_string(k));
        merge(r.transpose_relation, detail::guarded([&] {
                  Check ch;
                  const Matrix lhs = duality_map(nAB, R).transpose();
                  const Matrix t = duality_map(nAB, R.transpose());
                  merge(ch, compare(lhs, Binv * t * B.transpose(), tol), "B^-1 . B^T");
                  merge(ch, compare(lhs, B.transpose() * t * Binv, tol), "B^T . B^-1");
                  return ch;
              }),
              "R element " + std::to_string(k));
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    auto random_element = [&](const MatrixSubspace& S) {
        Matrix M = Matrix::Zero(S.n(), S.n());
        for (Index k = 0; k < S.dim(); ++k) M += cplx(g(rng), g(rng)) * S.element(k);
        return M;
    };
    for (int trial = 0; trial < 3; ++trial) {
        const Matrix F = random_element(nA.space), R = random_element(nAB.space);
        merge(r.image_membership,
              detail::guarded([&] { return detail::check_membership(nv.space, image_of(F, R), tol); }),
              "trial " + std::to_string(trial));
    }

    r.subscheme = detail::guarded([&] {
        Check ch;
        MatrixSubspace S = MatrixSubspace::span(hat, 4 * n, tol);
        r.subscheme_dim = S.dim();
        if (S.dim() != 2 * r.r + 1)
            merge(ch, Check{false, 0.0, "dim " + std::to_string(S.dim()) + " != 2r+1"});
        if (!nv.space.contains_all(S, tol)) merge(ch, Check{false, 0.0, "not contained in N_V"});
        BoseMesnerReport bm = is_bose_mesner(S, tol);
        if (!bm.ok) merge(ch, Check{false, 0.0, "not Bose-Mesner: " + bm.failure});
        return ch;
    });

    if (strict && !r.ok()) {
        std::string what = !r.lower_bound ? "dim N_V below 3r"
                           : !r.pairing_element.ok ? "I_2 (x) J_2n: " + r.pairing_element.detail
                           : !r.pattern.ok ? "block pattern: " + r.pattern.detail
                           : !r.side_conditions.ok ? "side conditions: " + r.side_conditions.detail
                           : !r.h_conditions.ok ? "H conditions: " + r.h_conditions.detail
                           : !r.theta_blocks.ok ? "Theta_V blocks: " + r.theta_blocks.detail
                           : !r.image_membership.ok ? "image membership: " + r.image_membership.detail
                           : !r.transpose_relation.ok ? "transpose relation: " + r.transpose_relation.detail
                           : !r.self_duality.ok ? "Theta_V^2: " + r.self_duality.detail
                                                : "subscheme: " + r.subscheme.detail;
        throw Error("StructureMismatch", what);
    }
    return r;
}

/// Reads (A, B) off the block pattern of V built with loop parameter d.
inline JonesPair extract_pair_from_V(const Matrix& V, cplx d, const Tolerance& tol = {}) {
    require_square(V, "V");
    if (V.rows() == 0 || V.rows() % 4 != 0)
        throw Error("WrongShape", "order: " + std::to_string(V.rows()) + " is not a positive multiple of 4");
    if (std::abs(d) <= tol.abs_eps) throw Error("WrongShape", "d is zero");
    const Matrix A = block_of(V, 4, 0, 0) / d;
    const Matrix Bs = block_of(V, 4, 0, 2);
    if (!is_schur_invertible(Bs, tol)) throw Error("WrongShape", "block (0,2): zero entry");
    const Matrix B = Bs.cwiseInverse();
    const Matrix expect = v_matrix(A, B, d, tol);
    for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 4; ++j) {
            Check c = compare(block_of(V, 4, i, j), block_of(expect, 4, i, j), tol);
            if (!c.ok)
                throw Error("WrongShape", "block (" + std::to_string(i) + "," + std::to_string(j) +
                                              "): sign or transpose pattern fails at " + c.detail);
        }
    return check_jones_pair(A, B, tol, d.real() < 0 ? -1 : 1);
}

// ---------------------------------------------------------------- quotients and induced spaces

struct EquitablePartition {
    Index m = 0;
    std::vector<std::vector<Index>> classes;
    Matrix S;  // m x r characteristic matrix
};

inline EquitablePartition make_partition(Index m, std::vector<std::vector<Index>> classes) {
    std::vector<int> seen(static_cast<std::size_t>(m), 0);
    for (const auto& c : classes) {
        if (c.empty()) throw Error("BadPartition", "empty class");
        for (Index i : c) {
            if (i < 0 || i >= m) throw Error("BadPartition", "index " + std::to_string(i) + " out of range");
            if (seen[static_cast<std::size_t>(i)]++) throw Error("BadPartition", "index " + std::to_string(i) + " repeated");
        }
    }
    for (Index i = 0; i < m; ++i)
        if (!seen[static_cast<std::size_t>(i)]) throw Error("BadPartition", "index " + std::to_string(i) + " uncovered");
    EquitablePartition p;
    p.m = m;
    p.S = Matrix::Zero(m, static_cast<Index>(classes.size()));
    for (std::size_t k = 0; k < classes.size(); ++k)
        for (Index i : classes[k]) p.S(i, static_cast<Index>(k)) = 1.0;
    p.classes = std::move(classes);
    return p;
}

/// Classes {b + i, b + n + i} for each block pair starting at b = 0, 2n, 4n, ...
inline EquitablePartition pairing_partition(Index m, Index n) {
    if (n <= 0 || m % (2 * n) != 0) throw Error("BadPartition", "order is not a multiple of 2n");
    std::vector<std::vector<Index>> classes;
    for (Index b = 0; b < m; b += 2 * n)
        for (Index i = 0; i < n; ++i) classes.push_back({b + i, b + n + i});
    return make_partition(m, std::move(classes));
}

/// Span of the quotients B_M = (S^T S)^{-1} S^T M S.
inline MatrixSubspace quotient_algebra(const MatrixSubspace& space, const EquitablePartition& part,
                                       const Tolerance& tol = {}) {
    if (part.m != space.n()) throw Error("OrderMismatch", "partition and space orders differ");
    const Matrix& S = part.S;
    const Matrix L = (S.transpose() * S).inverse() * S.transpose();
    std::vector<Matrix> q;
    for (Index k = 0; k < space.dim(); ++k) {
        const Matrix M = space.element(k);
        const Matrix BM = L * M * S;
        const double res = (M * S - S * BM).norm();
        if (res > tol.abs_eps + tol.rank_eps * M.norm())
            throw Error("NotEquitable", "basis element " + std::to_string(k) + ", residual " + std::to_string(res));
        q.push_back(BM);
    }
    MatrixSubspace out = MatrixSubspace::span(q, S.cols(), tol);
    out.flags = compute_flags(out, tol);
    return out;
}

struct InducedSpace {
    MatrixSubspace space;
    BoseMesnerReport bose_mesner;
};

/// Span of the principal submatrices M_Y.
inline InducedSpace induced_space(const MatrixSubspace& space, const std::vector<Index>& Y, const Tolerance& tol = {}) {
    if (Y.empty()) throw Error("EmptySubset", "Y is empty");
    for (Index y : Y)
        if (y < 0 || y >= space.n()) throw Error("BadParameters", "index " + std::to_string(y) + " out of range");
    const Index m = static_cast<Index>(Y.size());
    std::vector<Matrix> mats;
    for (Index k = 0; k < space.dim(); ++k) {
        const Matrix M = space.element(k);
        Matrix R(m, m);
        for (Index i = 0; i < m; ++i)
            for (Index j = 0; j < m; ++j) R(i, j) = M(Y[i], Y[j]);
        mats.push_back(R);
    }
    InducedSpace out;
    out.space = MatrixSubspace::span(mats, m, tol);
    out.bose_mesner = is_bose_mesner(out.space, tol);
    out.space.flags = out.bose_mesner.flags;
    return out;
}

inline std::vector<Index> index_range(Index from, Index to) {
    std::vector<Index> v;
    for (Index i = from; i < to; ++i) v.push_back(i);
    return v;
}

// ---------------------------------------------------------------- dimension two

struct Dim2Report {
    cplx a = 0.0, b = 0.0;  // B = a(J - N) + bN
    Matrix N;
    Index k = 0, lambda = 0;  // N N^T = lambda (J - I) + k I
    Check design;
    bool symmetric_A = false;
    cplx c = 0.0, scale = 0.0;  // A = cI + scale M
    Matrix M;
    Check two_graph;  // M o I = 0, M o M = J - I, quadratic minimal polynomial

    bool ok() const { return design.ok && (!symmetric_A || two_graph.ok); }
};

inline Dim2Report dim2_classify(const JonesPair& jp, const Tolerance& tol = {}) {
    const Matrix& A = jp.A;
    const Matrix& B = jp.B;
    const Index n = A.rows();
    NomuraData nd = nomura_algebra(A, B, tol);
    if (nd.space.dim() != 2) throw Error("NotDimensionTwo", "dim N_{A,B} = " + std::to_string(nd.space.dim()));
    Dim2Report r;
    r.a = B(0, 0);
    bool have_b = false;
    r.N = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            if (close(B(i, j), r.a, tol)) continue;
            if (!have_b) {
                r.b = B(i, j);
                have_b = true;
            } else if (!close(B(i, j), r.b, tol)) {
                throw Error("NotTwoValued", "B has a third value at (" + std::to_string(i) + "," + std::to_string(j) + ")");
            }
            r.N(i, j) = 1.0;
        }
    if (!have_b) throw Error("NotTwoValued", "B is constant");

    const Matrix NN = r.N * r.N.transpose();
    r.k = std::lround(NN(0, 0).real());
    r.lambda = n > 1 ? std::lround(NN(0, 1).real()) : 0;
    merge(r.design, compare(NN, double(r.lambda) * (ones(n) - identity(n)) + double(r.k) * identity(n), tol),
          "N N^T");

    r.symmetric_A = approx_equal(A, A.transpose(), tol);
    if (r.symmetric_A && n > 1) {
        r.c = A(0, 0);
        r.scale = A(0, 1);
        r.M = (A - r.c * identity(n)) / r.scale;
        merge(r.two_graph, compare(Matrix(r.M.diagonal().asDiagonal()), Matrix::Zero(n, n), tol), "M o I");
        merge(r.two_graph, compare(r.M.cwiseProduct(r.M), ones(n) - identity(n), tol), "M o M");
        // M^2 = alpha M + beta I
        Matrix basis(n * n, 2);
        basis << vec(r.M), vec(identity(n));
        const Matrix M2 = r.M * r.M;
        Vector coef = basis.colPivHouseholderQr().solve(vec(M2));
        merge(r.two_graph, compare(M2, coef(0) * r.M + coef(1) * identity(n), tol), "minimal polynomial");
    }
    return r;
}

}  // namespace spinlab
