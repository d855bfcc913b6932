#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <initializer_list>
#include <memory>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spinlab {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Error carrying a short machine-readable kind (e.g. "ZeroEntry").
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct Tolerance {
    double abs_eps = 1e-9;
    double rel_eps = 1e-9;
    double rank_eps = 1e-8;  // relative to the largest singular value

    void validate() const {
        if (!(abs_eps >= 0 && rel_eps >= 0 && rank_eps > 0))
            throw Error("BadTolerance", "abs/rel must be >= 0 and rank_eps > 0");
    }

    /// Same tolerance with abs_eps and rel_eps replaced by eps.
    Tolerance with_eps(double eps) const {
        Tolerance t = *this;
        t.abs_eps = eps;
        t.rel_eps = eps;
        return t;
    }

    /// Defaults, with abs_eps/rel_eps overridden by SPINLAB_TOL when set.
    static Tolerance from_env() {
        Tolerance t;
        if (const char* s = std::getenv("SPINLAB_TOL")) {
            char* end = nullptr;
            double v = std::strtod(s, &end);
            if (end == s || *end != '\0' || !(v >= 0))
                throw Error("BadTolerance", std::string("SPINLAB_TOL is not a non-negative number: ") + s);
            t.abs_eps = t.rel_eps = v;
        }
        return t;
    }
};

/// Outcome of a numerical check; residual is the largest absolute deviation seen.
struct Check {
    bool ok = true;
    double residual = 0.0;
    std::string detail;

    explicit operator bool() const { return ok; }
};

// ---------------------------------------------------------------- basics

inline Matrix identity(Index n) { return Matrix::Identity(n, n); }
inline Matrix ones(Index n) { return Matrix::Ones(n, n); }

inline Matrix unit(Index n, Index i, Index j) {
    Matrix E = Matrix::Zero(n, n);
    E(i, j) = 1.0;
    return E;
}

inline Matrix diag(const Vector& v) { return v.asDiagonal(); }

inline bool close(cplx x, cplx y, const Tolerance& tol) {
    return std::abs(x - y) <= tol.abs_eps + tol.rel_eps * std::max(std::abs(x), std::abs(y));
}

inline void require_square(const Matrix& A, const char* what) {
    if (A.rows() != A.cols() || A.rows() == 0)
        throw Error("OrderMismatch", std::string(what) + " must be a non-empty square matrix");
    if (!A.allFinite()) throw Error("NonFinite", std::string(what) + " has NaN or Inf entries");
}

inline void require_same_order(const Matrix& A, const Matrix& B, const char* what) {
    require_square(A, what);
    require_square(B, what);
    if (A.rows() != B.rows())
        throw Error("OrderMismatch", std::string(what) + ": orders " + std::to_string(A.rows()) +
                                         " and " + std::to_string(B.rows()) + " differ");
}

inline double max_abs_diff(const Matrix& A, const Matrix& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols()) return INFINITY;
    if (A.size() == 0) return 0.0;
    return (A - B).cwiseAbs().maxCoeff();
}

/// Entrywise comparison |x-y| <= abs + rel*max(|x|,|y|).
inline Check compare(const Matrix& A, const Matrix& B, const Tolerance& tol) {
    Check c;
    if (A.rows() != B.rows() || A.cols() != B.cols()) {
        c.ok = false;
        c.residual = INFINITY;
        c.detail = "shape mismatch";
        return c;
    }
    for (Index j = 0; j < A.cols(); ++j)
        for (Index i = 0; i < A.rows(); ++i) {
            double r = std::abs(A(i, j) - B(i, j));
            c.residual = std::max(c.residual, r);
            if (c.ok && !close(A(i, j), B(i, j), tol)) {
                c.ok = false;
                c.detail = "entry (" + std::to_string(i) + "," + std::to_string(j) + ")";
            }
        }
    return c;
}

inline bool approx_equal(const Matrix& A, const Matrix& B, const Tolerance& tol) {
    return compare(A, B, tol).ok;
}

/// Merge two checks, keeping the first failure message.
inline Check& merge(Check& into, const Check& other, const std::string& label = {}) {
    into.residual = std::max(into.residual, other.residual);
    if (into.ok && !other.ok) {
        into.ok = false;
        into.detail = label.empty() ? other.detail : label + (other.detail.empty() ? "" : ": " + other.detail);
    }
    return into;
}

inline Matrix kron(const Matrix& A, const Matrix& B) {
    Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

/// Assemble a block matrix from rows of equally sized square blocks.
inline Matrix block_matrix(std::initializer_list<std::initializer_list<Matrix>> rows) {
    const Index nb = static_cast<Index>(rows.size());
    const Index n = rows.begin()->begin()->rows();
    Matrix M(nb * n, nb * n);
    Index bi = 0;
    for (const auto& row : rows) {
        if (static_cast<Index>(row.size()) != nb) throw Error("OrderMismatch", "block_matrix needs a square grid");
        Index bj = 0;
        for (const auto& blk : row) {
            if (blk.rows() != n || blk.cols() != n) throw Error("OrderMismatch", "block sizes differ");
            M.block(bi * n, bj * n, n, n) = blk;
            ++bj;
        }
        ++bi;
    }
    return M;
}

inline Matrix block_of(const Matrix& M, Index nb, Index bi, Index bj) {
    const Index n = M.rows() / nb;
    return M.block(bi * n, bj * n, n, n);
}

inline Eigen::VectorXd singular_values(const Matrix& A) {
    return Eigen::JacobiSVD<Matrix>(A).singularValues();
}

inline bool is_invertible(const Matrix& A, const Tolerance& tol) {
    if (A.rows() != A.cols() || A.size() == 0) return false;
    Eigen::VectorXd s = singular_values(A);
    return s(0) > 0 && s(s.size() - 1) > tol.rank_eps * s(0);
}

inline double condition_number(const Matrix& A) {
    Eigen::VectorXd s = singular_values(A);
    if (s(s.size() - 1) == 0) return INFINITY;
    return s(0) / s(s.size() - 1);
}

/// Numerical rank with cutoff rank_eps * sigma_max.
inline Index numerical_rank(const Matrix& A, const Tolerance& tol) {
    if (A.size() == 0) return 0;
    Eigen::VectorXd s = singular_values(A);
    if (s(0) == 0) return 0;
    Index r = 0;
    for (Index i = 0; i < s.size(); ++i)
        if (s(i) > tol.rank_eps * s(0)) ++r;
    return r;
}

// ---------------------------------------------------------------- Schur calculus

inline Matrix schur_product(const Matrix& A, const Matrix& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols())
        throw Error("OrderMismatch", "schur_product operands differ in shape");
    return A.cwiseProduct(B);
}

inline bool is_schur_invertible(const Matrix& A, const Tolerance& tol) {
    return A.size() > 0 && A.cwiseAbs().minCoeff() > tol.abs_eps;
}

inline Matrix schur_inverse(const Matrix& A, const Tolerance& tol = {}) {
    for (Index j = 0; j < A.cols(); ++j)
        for (Index i = 0; i < A.rows(); ++i)
            if (!(std::abs(A(i, j)) > tol.abs_eps))
                throw Error("ZeroEntry", "entry (" + std::to_string(i) + "," + std::to_string(j) +
                                             ") is below the Schur-invertibility threshold");
    return A.cwiseInverse();
}

/// A * (Schur inverse of A)^T compared with nI.
inline Check type_ii_check(const Matrix& A, const Tolerance& tol = {}) {
    Check c;
    if (A.rows() != A.cols() || A.size() == 0) return {false, INFINITY, "not square"};
    if (!is_schur_invertible(A, tol)) return {false, INFINITY, "not Schur invertible"};
    const Index n = A.rows();
    Matrix prod = A * A.cwiseInverse().transpose();
    c = compare(prod, static_cast<double>(n) * identity(n), tol);
    if (!c.ok) c.detail = "A*inv_s(A)^T != nI at " + c.detail;
    return c;
}

inline bool is_type_ii(const Matrix& A, const Tolerance& tol = {}) { return type_ii_check(A, tol).ok; }

// ---------------------------------------------------------------- permutations

/// Reads a 01 permutation matrix as the map column j -> row perm[j]; empty if not a permutation.
inline std::optional<std::vector<Index>> as_permutation(const Matrix& P, double eps) {
    const Index n = P.rows();
    if (P.cols() != n) return std::nullopt;
    std::vector<Index> perm(n, -1);
    std::vector<bool> hit(n, false);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            cplx v = P(i, j);
            if (std::abs(v - 1.0) <= eps) {
                if (perm[j] != -1 || hit[i]) return std::nullopt;
                perm[j] = i;
                hit[i] = true;
            } else if (std::abs(v) > eps) {
                return std::nullopt;
            }
        }
        if (perm[j] == -1) return std::nullopt;
    }
    return perm;
}

inline Matrix permutation_matrix(const std::vector<Index>& perm) {
    const Index n = static_cast<Index>(perm.size());
    Matrix P = Matrix::Zero(n, n);
    for (Index j = 0; j < n; ++j) P(perm[j], j) = 1.0;
    return P;
}

inline long permutation_order(const std::vector<Index>& perm) {
    long order = 1;
    std::vector<bool> seen(perm.size(), false);
    for (std::size_t s = 0; s < perm.size(); ++s) {
        if (seen[s]) continue;
        long len = 0;
        for (std::size_t x = s; !seen[x]; x = static_cast<std::size_t>(perm[x])) {
            seen[x] = true;
            ++len;
        }
        order = std::lcm(order, len);
    }
    return order;
}

// ---------------------------------------------------------------- endomorphisms

/// Linear maps of n x n matrices: X_C(M)=CM, Delta_C(M)=C o M, Y_C(M)=M C^T, and composites.
class Endomorphism {
public:
    enum class Kind { LeftMult, SchurMult, RightMultTranspose, Composite };

    static Endomorphism X(Matrix C) { return Endomorphism(Kind::LeftMult, std::move(C)); }
    static Endomorphism Delta(Matrix C) { return Endomorphism(Kind::SchurMult, std::move(C)); }
    static Endomorphism Y(Matrix C) { return Endomorphism(Kind::RightMultTranspose, std::move(C)); }

    /// parts are written left to right and applied right to left.
    static Endomorphism compose(std::vector<Endomorphism> parts) {
        if (parts.empty()) throw Error("OrderMismatch", "empty composite");
        Endomorphism e(Kind::Composite, Matrix());
        e.order_ = parts.front().order();
        for (const auto& p : parts)
            if (p.order() != e.order_) throw Error("OrderMismatch", "composite parts differ in order");
        e.parts_ = std::make_shared<std::vector<Endomorphism>>(std::move(parts));
        return e;
    }

    Kind kind() const { return kind_; }
    Index order() const { return order_; }
    const Matrix& matrix() const { return C_; }

    Matrix operator()(const Matrix& M) const {
        if (M.rows() != order_ || M.cols() != order_)
            throw Error("OrderMismatch", "endomorphism of order " + std::to_string(order_) +
                                             " applied to a " + std::to_string(M.rows()) + "x" +
                                             std::to_string(M.cols()) + " matrix");
        switch (kind_) {
            case Kind::LeftMult: return C_ * M;
            case Kind::SchurMult: return C_.cwiseProduct(M);
            case Kind::RightMultTranspose: return M * C_.transpose();
            case Kind::Composite: {
                Matrix R = M;
                for (auto it = parts_->rbegin(); it != parts_->rend(); ++it) R = (*it)(R);
                return R;
            }
        }
        return M;
    }

    /// this after other.
    Endomorphism operator*(const Endomorphism& other) const { return compose({*this, other}); }

private:
    Endomorphism(Kind k, Matrix C) : kind_(k), C_(std::move(C)), order_(C_.rows()) {
        if (k != Kind::Composite) require_square(C_, "endomorphism matrix");
    }

    Kind kind_;
    Matrix C_;
    Index order_ = 0;
    std::shared_ptr<const std::vector<Endomorphism>> parts_;
};

inline Matrix apply_endomorphism(const Endomorphism& e, const Matrix& M) { return e(M); }

inline Endomorphism X(const Matrix& C) { return Endomorphism::X(C); }
inline Endomorphism Delta(const Matrix& C) { return Endomorphism::Delta(C); }
inline Endomorphism Y(const Matrix& C) { return Endomorphism::Y(C); }

/// X_A Delta_B X_C
inline Endomorphism xdx(const Matrix& A, const Matrix& B, const Matrix& C) {
    return Endomorphism::compose({X(A), Delta(B), X(C)});
}
/// Delta_A X_B Delta_C
inline Endomorphism dxd(const Matrix& A, const Matrix& B, const Matrix& C) {
    return Endomorphism::compose({Delta(A), X(B), Delta(C)});
}

/// Compares two endomorphisms on every elementary matrix E_ij.
inline Check operators_equal(const Endomorphism& L, const Endomorphism& R, const Tolerance& tol) {
    if (L.order() != R.order()) return {false, INFINITY, "orders differ"};
    const Index n = L.order();
    Check c;
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) {
            Matrix E = unit(n, i, j);
            Check e = compare(L(E), R(E), tol);
            if (!e.ok) e.detail = "on E(" + std::to_string(i) + "," + std::to_string(j) + ") " + e.detail;
            merge(c, e);
        }
    return c;
}

/// n^2 x n^2 matrix of an endomorphism in the column-major vec basis.
inline Matrix materialize(const Endomorphism& e) {
    const Index n = e.order();
    Matrix L(n * n, n * n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) {
            Matrix img = e(unit(n, i, j));
            L.col(j * n + i) = Eigen::Map<const Vector>(img.data(), n * n);
        }
    return L;
}

struct ExchangeReport {
    Check first;   // X_A D_B X_C = D_Q X_R D_S
    Check second;  // X_A D_C X_B = D_R X_Q D_{S^T}
    bool consistent = true;  // first holds <=> second holds
};

inline ExchangeReport verify_exchange(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& Q,
                                      const Matrix& R, const Matrix& S, const Tolerance& tol = {}) {
    for (const Matrix* M : {&B, &C, &Q, &R, &S}) require_same_order(A, *M, "verify_exchange");
    ExchangeReport rep;
    rep.first = operators_equal(xdx(A, B, C), dxd(Q, R, S), tol);
    rep.second = operators_equal(xdx(A, C, B), dxd(R, Q, S.transpose()), tol);
    rep.consistent = rep.first.ok == rep.second.ok;
    return rep;
}

/// Y_ij = A e_i o B e_j.
inline Vector eigvec(const Matrix& A, const Matrix& B, Index i, Index j) {
    return A.col(i).cwiseProduct(B.col(j));
}

/// table[i][j] = A e_i o B e_j.
inline std::vector<std::vector<Vector>> eigvec_table(const Matrix& A, const Matrix& B) {
    require_same_order(A, B, "eigvec_table");
    const Index n = A.rows();
    std::vector<std::vector<Vector>> t(n, std::vector<Vector>(n));
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) t[i][j] = eigvec(A, B, i, j);
    return t;
}

}  // namespace spinlab
