#pragma once

#include "spinlab/core.hpp"

#include <queue>

namespace spinlab {

struct JonesPair {
    Matrix A, B;
    bool one_sided = false;   // (A, B)
    bool two_sided = false;   // (A, B) and (A, B^T)
    bool invertible = false;  // two-sided with B invertible
    cplx d = 0.0;             // d^2 = n, set when invertible
    cplx a = 0.0;             // d * tr(A) / n, set when invertible
    Check residual;           // worst of the one-sided checks
    Check consequences;       // type II, constant diagonal, row sums (invertible only)

    Index n() const { return A.rows(); }
};

struct FourWeightSpinModel {
    Matrix W1, W2, W3, W4;
    cplx d = 0.0;
    cplx a = 0.0;
};

namespace detail {

inline void require_pair_inputs(const Matrix& A, const Matrix& B, const Tolerance& tol) {
    require_same_order(A, B, "Jones pair");
    if (!is_invertible(A, tol)) throw Error("NotInvertible", "A is not invertible");
    if (!is_schur_invertible(B, tol)) throw Error("NotSchurInvertible", "B has an entry below abs_eps");
}

inline bool is_diagonal(const Matrix& D, double eps) {
    for (Index i = 0; i < D.rows(); ++i)
        for (Index j = 0; j < D.cols(); ++j)
            if (i != j && std::abs(D(i, j)) > eps) return false;
    return D.rows() == D.cols();
}

}  // namespace detail

/// sum_x A_kx A_xi B_xj = B_ij A_ki B_kj for all i, j, k.
inline Check check_one_sided(const Matrix& A, const Matrix& B, const Tolerance& tol = {}) {
    detail::require_pair_inputs(A, B, tol);
    const Index n = A.rows();
    Check c;
    for (Index i = 0; i < n; ++i) {
        Matrix lhs = A * A.col(i).asDiagonal() * B;  // (k, j)
        Matrix rhs(n, n);
        for (Index k = 0; k < n; ++k)
            for (Index j = 0; j < n; ++j) rhs(k, j) = B(i, j) * A(k, i) * B(k, j);
        Check ci = compare(lhs, rhs, tol);
        if (!ci.ok) ci.detail = "i=" + std::to_string(i) + " " + ci.detail;
        merge(c, ci);
    }
    return c;
}

/// Consequences that an invertible Jones pair must satisfy.
inline Check invertible_pair_consequences(const Matrix& A, const Matrix& B, const Tolerance& tol) {
    const Index n = A.rows();
    const cplx trA = A.trace();
    Check c;
    merge(c, type_ii_check(A, tol), "A type II");
    merge(c, type_ii_check(B, tol), "B type II");
    merge(c, compare(Matrix(A.diagonal().asDiagonal()), (trA / double(n)) * identity(n), tol), "A o I");
    merge(c, compare(B * ones(n), trA * ones(n), tol), "BJ");
    merge(c, compare(B.transpose() * ones(n), trA * ones(n), tol), "B^T J");
    return c;
}

/// Certifies (A,B) and (A,B^T); d = d_sign * sqrt(n) when the pair is invertible.
inline JonesPair check_jones_pair(const Matrix& A, const Matrix& B, const Tolerance& tol = {}, int d_sign = 1) {
    JonesPair jp;
    jp.A = A;
    jp.B = B;
    Check c1 = check_one_sided(A, B, tol);
    Check c2 = check_one_sided(A, B.transpose(), tol);
    jp.one_sided = c1.ok;
    jp.two_sided = c1.ok && c2.ok;
    merge(jp.residual, c1, "(A,B)");
    merge(jp.residual, c2, "(A,B^T)");
    if (jp.two_sided && is_invertible(B, tol)) {
        jp.consequences = invertible_pair_consequences(A, B, tol);
        jp.invertible = jp.consequences.ok;
        const double n = double(A.rows());
        jp.d = (d_sign < 0 ? -1.0 : 1.0) * std::sqrt(n);
        jp.a = jp.d * A.trace() / n;
    }
    return jp;
}

// ---------------------------------------------------------------- four-weight models

/// Conditions (I)-(III); detail names the first failing condition.
inline Check validate_four_weight(const FourWeightSpinModel& m, const Tolerance& tol = {}) {
    for (const Matrix* W : {&m.W2, &m.W3, &m.W4}) require_same_order(m.W1, *W, "four-weight model");
    const Index n = m.W1.rows();
    const cplx d = m.d, a = m.a;
    Check c;
    if (!close(d * d, double(n), tol)) return {false, std::abs(d * d - double(n)), "d^2 != n"};
    if (std::abs(a) <= tol.abs_eps) return {false, INFINITY, "(I): a = 0"};
    const Matrix I = identity(n), J = ones(n);
    merge(c, compare(Matrix(m.W1.diagonal().asDiagonal()), a * I, tol), "(I) W1 o I");
    merge(c, compare(Matrix(m.W3.diagonal().asDiagonal()), I / a, tol), "(I) W3 o I");
    merge(c, compare(m.W2 * J, d / a * J, tol), "(I) W2 J");
    merge(c, compare(m.W2.transpose() * J, d / a * J, tol), "(I) W2^T J");
    merge(c, compare(m.W4 * J, d * a * J, tol), "(I) W4 J");
    merge(c, compare(m.W4.transpose() * J, d * a * J, tol), "(I) W4^T J");
    for (const Matrix* W : {&m.W1, &m.W2, &m.W3, &m.W4})
        if (!is_schur_invertible(*W, tol)) {
            merge(c, Check{false, INFINITY, "zero entry"}, "(II)");
            return c;
        }
    for (const Matrix* W : {&m.W1, &m.W2, &m.W3, &m.W4}) merge(c, type_ii_check(*W, tol), "(II) type II");
    merge(c, compare(m.W3, schur_inverse(m.W1, tol).transpose(), tol), "(II) W3");
    merge(c, compare(m.W2, schur_inverse(m.W4, tol).transpose(), tol), "(II) W2");
    const Matrix& W1 = m.W1;
    const Matrix& W4 = m.W4;
    for (Index b = 0; b < n; ++b) {
        Matrix lhs = W1 * W1.col(b).asDiagonal() * W4.transpose();  // (a, c)
        Matrix rhs(n, n);
        for (Index x = 0; x < n; ++x)
            for (Index y = 0; y < n; ++y) rhs(x, y) = d * W1(x, b) * W4(y, x) * W4(y, b);
        merge(c, compare(lhs, rhs, tol), "(III) first, b=" + std::to_string(b));
    }
    for (Index a2 = 0; a2 < n; ++a2) {
        Matrix lhs = W1 * W1.col(a2).asDiagonal() * W4;  // (b, c)
        Matrix rhs(n, n);
        for (Index x = 0; x < n; ++x)
            for (Index y = 0; y < n; ++y) rhs(x, y) = d * W1(x, a2) * W4(a2, y) * W4(x, y);
        merge(c, compare(lhs, rhs, tol), "(III) second, a=" + std::to_string(a2));
    }
    return c;
}

/// (dA, n B^{-1}, d A^{-1}, B; d).
inline FourWeightSpinModel to_four_weight(const JonesPair& jp, const Tolerance& tol = {}) {
    if (!jp.invertible) throw Error("NotInvertiblePair", "pair is not a certified invertible Jones pair");
    const double n = double(jp.n());
    FourWeightSpinModel m;
    m.d = jp.d;
    m.a = jp.a;
    m.W1 = jp.d * jp.A;
    m.W2 = n * jp.B.inverse();
    m.W3 = jp.d * jp.A.inverse();
    m.W4 = jp.B;
    Check c = validate_four_weight(m, tol);
    if (!c.ok) throw Error("ValidationFailure", c.detail);
    return m;
}

/// (W1/d, W4), certified invertible.
inline JonesPair from_four_weight(const FourWeightSpinModel& m, const Tolerance& tol = {}) {
    Check c = validate_four_weight(m, tol);
    if (!c.ok) throw Error("ValidationFailure", c.detail);
    JonesPair jp = check_jones_pair(m.W1 / m.d, m.W4, tol);
    if (!jp.invertible) throw Error("ValidationFailure", "(W1/d, W4) is not an invertible Jones pair: " + jp.residual.detail);
    jp.d = m.d;
    jp.a = m.a;
    return jp;
}

// ---------------------------------------------------------------- gauge

inline JonesPair recertify(const Matrix& A, const Matrix& B, const JonesPair& like, const Tolerance& tol) {
    int sign = like.invertible && like.d.real() < 0 ? -1 : 1;
    return check_jones_pair(A, B, tol, sign);
}

/// (D^{-1} A D, B).
inline JonesPair odd_gauge(const JonesPair& jp, const Matrix& D, const Tolerance& tol = {}) {
    if (D.rows() != jp.n() || !detail::is_diagonal(D, tol.abs_eps) || !is_schur_invertible(Vector(D.diagonal()), tol))
        throw Error("SingularD", "D must be an invertible diagonal matrix of matching order");
    Vector dd = D.diagonal();
    return recertify(dd.cwiseInverse().asDiagonal() * jp.A * dd.asDiagonal(), jp.B, jp, tol);
}

/// (A, BP).
inline JonesPair even_gauge(const JonesPair& jp, const Matrix& P, const Tolerance& tol = {}) {
    if (P.rows() != jp.n() || !as_permutation(P, tol.abs_eps)) throw Error("NotPermutation", "P is not a permutation matrix");
    return recertify(jp.A, jp.B * P, jp, tol);
}

/// Diagonal D with A = D C D^{-1} and D_00 = 1, if one exists.
inline std::optional<Matrix> recover_odd_gauge(const Matrix& A, const Matrix& C, const Tolerance& tol = {}) {
    require_same_order(A, C, "recover_odd_gauge");
    const Index n = A.rows();
    Vector d(n);
    for (Index i = 0; i < n; ++i) {
        if (std::abs(C(i, 0)) <= tol.abs_eps) return std::nullopt;
        d(i) = A(i, 0) / C(i, 0);
    }
    if (!close(d(0), 1.0, tol) || !is_schur_invertible(Matrix(d), tol)) return std::nullopt;
    Matrix D = d.asDiagonal();
    if (!approx_equal(A, D * C * d.cwiseInverse().asDiagonal(), tol)) return std::nullopt;
    return D;
}

/// Permutation P with C = BP, if one exists.
inline std::optional<Matrix> recover_even_gauge(const Matrix& B, const Matrix& C, const Tolerance& tol = {}) {
    require_same_order(B, C, "recover_even_gauge");
    if (!is_invertible(B, tol)) return std::nullopt;
    Matrix P = B.inverse() * C;
    auto perm = as_permutation(P, 1e-6);
    if (!perm) return std::nullopt;
    Matrix Pr = permutation_matrix(*perm);
    if (!approx_equal(C, B * Pr, tol)) return std::nullopt;
    return Pr;
}

struct OddSymmetrization {
    JonesPair pair;  // (D1^{-1} A D1, B)
    Matrix D;        // A = D A^T D^{-1}
    Matrix D1;       // principal square root of D
};

/// Conjugates A by a diagonal matrix to make it symmetric.
inline OddSymmetrization symmetrize_odd(const JonesPair& jp, const Tolerance& tol = {}) {
    const Matrix& A = jp.A;
    const Index n = A.rows();
    auto edge = [&](Index i, Index j) {
        return std::abs(A(i, j)) > tol.abs_eps && std::abs(A(j, i)) > tol.abs_eps;
    };
    // D_ii / D_jj = A_ij / A_ji, propagated along a BFS tree from vertex 0.
    Vector d = Vector::Zero(n);
    std::vector<bool> seen(n, false);
    for (Index root = 0; root < n; ++root) {
        if (seen[root]) continue;
        seen[root] = true;
        d(root) = 1.0;
        std::queue<Index> q;
        q.push(root);
        while (!q.empty()) {
            Index j = q.front();
            q.pop();
            for (Index i = 0; i < n; ++i)
                if (!seen[i] && edge(i, j)) {
                    d(i) = d(j) * A(i, j) / A(j, i);
                    seen[i] = true;
                    q.push(i);
                }
        }
    }
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            bool zi = std::abs(A(i, j)) <= tol.abs_eps, zj = std::abs(A(j, i)) <= tol.abs_eps;
            if (zi != zj) throw Error("InconsistentGauge", "zero pattern of A is not symmetric");
            if (!zi && !close(d(i) * A(j, i), d(j) * A(i, j), tol))
                throw Error("InconsistentGauge", "ratio cocycle fails on edge (" + std::to_string(i) + "," +
                                                     std::to_string(j) + ")");
        }
    OddSymmetrization out;
    out.D = d.asDiagonal();
    Vector r = d.cwiseSqrt();
    out.D1 = r.asDiagonal();
    Matrix As = r.cwiseInverse().asDiagonal() * A * r.asDiagonal();
    As = (As + As.transpose()) / 2.0;  // remove round-off asymmetry
    out.pair = recertify(As, jp.B, jp, tol);
    return out;
}

struct EvenSymmetrization {
    JonesPair pair;  // (A, BQ)
    Matrix P;        // B^{-1} B^T
    long order = 0;  // order of P
    Matrix Q;        // P^r with 2r - 1 = order
};

/// Replaces B by the symmetric BQ, Q a power of P = B^{-1} B^T. Only odd orders are handled.
inline EvenSymmetrization symmetrize_even(const JonesPair& jp, const Tolerance& tol = {}) {
    if (!is_invertible(jp.B, tol)) throw Error("NotInvertible", "B is not invertible");
    EvenSymmetrization out;
    out.P = jp.B.inverse() * jp.B.transpose();
    auto perm = as_permutation(out.P, 1e-6);
    if (!perm) throw Error("NotPermutation", "B^{-1} B^T is not a permutation matrix");
    out.P = permutation_matrix(*perm);
    out.order = permutation_order(*perm);
    if (out.order % 2 == 0)
        throw Error("EvenOrder", "B^{-1} B^T has even order " + std::to_string(out.order));
    const long r = (out.order + 1) / 2;
    out.Q = identity(jp.n());
    for (long k = 0; k < r; ++k) out.Q = out.Q * out.P;
    Matrix Bs = jp.B * out.Q;
    if (!approx_equal(Bs, Bs.transpose(), tol)) throw Error("VerificationFailure", "BQ is not symmetric");
    out.pair = recertify(jp.A, Bs, jp, tol);
    return out;
}

}  // namespace spinlab
