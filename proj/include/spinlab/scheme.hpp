#pragma once

#include "spinlab/spin.hpp"

#include <map>
#include <tuple>

namespace spinlab {

struct RawScheme {
    std::vector<Matrix> matrices;  // A_0 .. A_d, 01-valued
};

/// Scheme axioms (a)-(e) on a set of 01-matrices; AxiomFailure names the axiom and a witness.
inline SchemeData validate_scheme(const RawScheme& rs, const Tolerance& tol = {}) {
    const auto& A = rs.matrices;
    auto fail = [](const std::string& axiom, const std::string& witness) {
        throw Error("AxiomFailure", "(" + axiom + ") " + witness);
    };
    if (A.empty()) fail("a", "no matrices");
    const Index n = A[0].rows();
    const Index m = static_cast<Index>(A.size());
    for (Index i = 0; i < m; ++i) {
        if (A[i].rows() != n || A[i].cols() != n) throw Error("OrderMismatch", "A_" + std::to_string(i) + " has the wrong shape");
        for (Index x = 0; x < n; ++x)
            for (Index y = 0; y < n; ++y)
                if (!close(A[i](x, y), 0.0, tol) && !close(A[i](x, y), 1.0, tol))
                    fail("01", "A_" + std::to_string(i) + "(" + std::to_string(x) + "," + std::to_string(y) + ") is not 0 or 1");
    }
    if (!approx_equal(A[0], identity(n), tol)) fail("a", "A_0 != I");
    Matrix sum = Matrix::Zero(n, n);
    for (const auto& Ai : A) sum += Ai;
    Check b = compare(sum, ones(n), tol);
    if (!b.ok) fail("b", "sum of the A_i differs from J at " + b.detail);
    for (Index i = 0; i < m; ++i) {
        bool hit = false;
        for (Index k = 0; k < m && !hit; ++k) hit = approx_equal(A[i].transpose(), A[k], tol);
        if (!hit) fail("c", "A_" + std::to_string(i) + "^T is not in the set");
    }
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < m; ++j) {
            const Matrix prod = A[i] * A[j];
            Matrix rebuilt = Matrix::Zero(n, n);
            for (Index k = 0; k < m; ++k) {
                cplx v = prod.cwiseProduct(A[k]).sum() / A[k].sum();
                double r = std::round(v.real());
                if (std::abs(v - r) > 1e-6 || r < 0)
                    fail("d", "A_" + std::to_string(i) + " A_" + std::to_string(j) + " has coefficient " +
                                  std::to_string(v.real()) + " on A_" + std::to_string(k));
                rebuilt += r * A[k];
            }
            if (!approx_equal(rebuilt, prod, tol))
                fail("d", "A_" + std::to_string(i) + " A_" + std::to_string(j) + " is not in the span");
            if (!approx_equal(prod, A[j] * A[i], tol))
                fail("e", "A_" + std::to_string(i) + " and A_" + std::to_string(j) + " do not commute");
        }
    MatrixSubspace S = MatrixSubspace::span(A, n, tol);
    S.flags = compute_flags(S, tol);
    return assemble_scheme(A, principal_idempotents(S, tol), tol);
}

/// Reorders the principal basis so that E'_i = E_{pairing[i]}.
inline SchemeData apply_pairing(const SchemeData& sd, const std::vector<Index>& pairing, const Tolerance& tol = {}) {
    const Index m = static_cast<Index>(sd.principal_basis.size());
    if (static_cast<Index>(pairing.size()) != m) throw Error("BadParameters", "pairing needs one index per class");
    std::vector<Matrix> E;
    std::vector<bool> used(static_cast<std::size_t>(m), false);
    for (Index k : pairing) {
        if (k < 0 || k >= m || used[static_cast<std::size_t>(k)])
            throw Error("BadParameters", "pairing must be a permutation of 0.." + std::to_string(m - 1));
        used[static_cast<std::size_t>(k)] = true;
        E.push_back(sd.principal_basis[static_cast<std::size_t>(k)]);
    }
    return assemble_scheme(sd.schur_basis, E, tol);
}

/// Pairing that turns base (same Schur basis) into ordered.
inline std::vector<Index> pairing_between(const SchemeData& base, const SchemeData& ordered, const Tolerance& tol = {}) {
    std::vector<Index> out;
    for (const auto& E : ordered.principal_basis) {
        Index hit = -1;
        for (std::size_t k = 0; k < base.principal_basis.size(); ++k)
            if (approx_equal(E, base.principal_basis[k], tol)) hit = static_cast<Index>(k);
        if (hit < 0) throw Error("BadParameters", "principal idempotent not found in the base scheme");
        out.push_back(hit);
    }
    return out;
}

// ---------------------------------------------------------------- triple regularity

struct TriplyReport {
    bool triply_regular = false;
    /// kappa[(r,s,t)][(i*(d+1) + j)*(d+1) + k] = |{w : (A_i)_{w,x} = (A_j)_{w,y} = (A_k)_{w,z} = 1}|
    /// for any (x,y,z) of type (r,s,t); only realized types appear.
    std::map<std::tuple<Index, Index, Index>, std::vector<long>> kappa;
    std::string witness;  // first pair of triples with the same type and different counts
};

constexpr Index kTriplyCap = 150;

/// Relation index matrix: R(x,y) = i where (A_i)_{x,y} = 1.
inline std::vector<std::vector<Index>> relation_table(const SchemeData& sd) {
    const Index n = sd.n;
    std::vector<std::vector<Index>> R(n, std::vector<Index>(n, -1));
    for (std::size_t i = 0; i < sd.schur_basis.size(); ++i)
        for (Index x = 0; x < n; ++x)
            for (Index y = 0; y < n; ++y)
                if (std::abs(sd.schur_basis[i](x, y)) > 0.5) R[x][y] = static_cast<Index>(i);
    return R;
}

inline TriplyReport triply_regular_check(const SchemeData& sd) {
    const Index n = sd.n;
    if (n > kTriplyCap) throw Error("TooLarge", "triple counting is capped at n = " + std::to_string(kTriplyCap));
    const Index c = static_cast<Index>(sd.schur_basis.size());
    const auto R = relation_table(sd);
    TriplyReport rep;
    rep.triply_regular = true;
    std::vector<long> counts(static_cast<std::size_t>(c * c * c));
    for (Index x = 0; x < n; ++x)
        for (Index y = 0; y < n; ++y)
            for (Index z = 0; z < n; ++z) {
                std::fill(counts.begin(), counts.end(), 0);
                for (Index w = 0; w < n; ++w) ++counts[static_cast<std::size_t>((R[w][x] * c + R[w][y]) * c + R[w][z])];
                auto key = std::make_tuple(R[x][y], R[x][z], R[y][z]);
                auto [it, inserted] = rep.kappa.emplace(key, counts);
                if (!inserted && it->second != counts && rep.triply_regular) {
                    rep.triply_regular = false;
                    rep.witness = "type (" + std::to_string(std::get<0>(key)) + "," + std::to_string(std::get<1>(key)) +
                                  "," + std::to_string(std::get<2>(key)) + ") at (x,y,z) = (" + std::to_string(x) +
                                  "," + std::to_string(y) + "," + std::to_string(z) + ")";
                }
            }
    if (!rep.triply_regular) rep.kappa.clear();
    return rep;
}

// ---------------------------------------------------------------- hyper-duality

struct HyperReport {
    Check lambda_forms;  // X_{W^T} D_{W^-} X_W = D_{W^-} X_W D_{d W^-T}
    Check x_to_delta;    // Lambda^{-1} X_R Lambda = D_{Theta(R)}, R in N_{W, W^-}
    Check delta_to_x;    // Lambda^{-1} D_S Lambda = X_R, R in N_{W^-, W}, S = Theta(R)
    Check psi_squared;   // Psi^2(X_M) = X_{M^T}

    bool ok() const { return lambda_forms.ok && x_to_delta.ok && delta_to_x.ok && psi_squared.ok; }
};

/// Dense check of the conjugation identities of Lambda; cap bounds n^2.
inline HyperReport hyper_duality_check(const Matrix& W, cplx d, const Tolerance& tol = {}, Index cap = 144) {
    require_square(W, "W");
    const Index n = W.rows();
    if (n * n > cap) throw Error("TooLarge", "n^2 = " + std::to_string(n * n) + " exceeds " + std::to_string(cap));
    const Matrix Ws = schur_inverse(W, tol);
    HyperReport rep;
    const Matrix L = materialize(xdx(W.transpose(), Ws, W));
    const Matrix L2 = materialize(dxd(Ws, W, d * Ws.transpose()));
    rep.lambda_forms = compare(L, L2, tol);
    if (!is_invertible(L, tol)) {
        rep.x_to_delta = rep.delta_to_x = rep.psi_squared = {false, INFINITY, "Lambda is singular"};
        return rep;
    }
    const Matrix Li = L.inverse();
    auto psi = [&](const Matrix& op) { return Matrix(Li * op * L); };

    NomuraData n1 = nomura_algebra(W, Ws, tol);
    for (const auto& R : n1.space.basis()) {
        const Matrix S = duality_map(n1, R);
        merge(rep.x_to_delta, compare(psi(materialize(X(R))), materialize(Delta(S)), tol));
        merge(rep.psi_squared, compare(psi(psi(materialize(X(R)))), materialize(X(R.transpose())), tol));
    }
    NomuraData n2 = nomura_algebra(Ws, W, tol);
    for (const auto& R : n2.space.basis()) {
        const Matrix S = duality_map(n2, R);
        merge(rep.delta_to_x, compare(psi(materialize(Delta(S))), materialize(X(R)), tol));
    }
    return rep;
}

}  // namespace spinlab
