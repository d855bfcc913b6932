#pragma once

#include "spinlab/core.hpp"

#include <functional>
#include <map>
#include <numeric>
#include <random>

namespace spinlab {

struct SubspaceFlags {
    bool contains_identity = false;
    bool contains_all_ones = false;
    bool schur_closed = false;
    bool transpose_closed = false;
    bool mult_closed = false;
    bool commutative = false;
};

inline Vector vec(const Matrix& M) { return Eigen::Map<const Vector>(M.data(), M.size()); }

inline Matrix unvec(const Vector& v, Index n) {
    Matrix M(n, n);
    Eigen::Map<Vector>(M.data(), n * n) = v;
    return M;
}

/// Orthonormal basis (columns) of the span of the given columns, rank cutoff rank_eps * sigma_max.
inline Matrix orthonormal_columns(const Matrix& V, const Tolerance& tol) {
    if (V.cols() == 0) return Matrix(V.rows(), 0);
    Eigen::JacobiSVD<Matrix> svd(V, Eigen::ComputeThinU);
    const Eigen::VectorXd& s = svd.singularValues();
    Index r = 0;
    if (s.size() > 0 && s(0) > 0)
        for (Index i = 0; i < s.size(); ++i)
            if (s(i) > tol.rank_eps * s(0)) ++r;
    return svd.matrixU().leftCols(r);
}

/// Null space of C (orthonormal columns); singular values at or below cutoff count as zero.
inline Matrix null_space(const Matrix& C, double cutoff) {
    const Index k = C.cols();
    if (C.rows() == 0) return Matrix::Identity(k, k);
    Eigen::JacobiSVD<Matrix> svd(C, Eigen::ComputeFullV);
    const Eigen::VectorXd& s = svd.singularValues();
    Index r = 0;
    for (Index i = 0; i < s.size(); ++i)
        if (s(i) > cutoff) ++r;
    return svd.matrixV().rightCols(k - r);
}

/// Subspace of n x n matrices, stored as orthonormal n^2-vectors (column-major vec).
class MatrixSubspace {
public:
    MatrixSubspace() = default;
    MatrixSubspace(Index n, Matrix Q) : n_(n), Q_(std::move(Q)) {}

    static MatrixSubspace span(const std::vector<Matrix>& mats, Index n, const Tolerance& tol) {
        Matrix V(n * n, static_cast<Index>(mats.size()));
        for (std::size_t k = 0; k < mats.size(); ++k) {
            if (mats[k].rows() != n || mats[k].cols() != n) throw Error("OrderMismatch", "span: wrong order");
            V.col(static_cast<Index>(k)) = vec(mats[k]);
        }
        return MatrixSubspace(n, orthonormal_columns(V, tol));
    }

    Index n() const { return n_; }
    Index dim() const { return Q_.cols(); }
    const Matrix& coords() const { return Q_; }
    Matrix element(Index k) const { return unvec(Q_.col(k), n_); }

    std::vector<Matrix> basis() const {
        std::vector<Matrix> b;
        for (Index k = 0; k < dim(); ++k) b.push_back(element(k));
        return b;
    }

    Matrix project(const Matrix& M) const {
        Vector v = vec(M);
        return unvec(Q_ * (Q_.adjoint() * v), n_);
    }

    /// Frobenius distance from M to the subspace.
    double residual(const Matrix& M) const {
        if (M.rows() != n_ || M.cols() != n_) return INFINITY;
        Vector v = vec(M);
        return (v - Q_ * (Q_.adjoint() * v)).norm();
    }

    /// Membership: residual <= abs_eps + rank_eps * ||M||_F.
    bool contains(const Matrix& M, const Tolerance& tol) const {
        return residual(M) <= tol.abs_eps + tol.rank_eps * M.norm();
    }

    bool contains_all(const MatrixSubspace& other, const Tolerance& tol) const {
        if (other.n() != n_) return false;
        for (Index k = 0; k < other.dim(); ++k)
            if (!contains(other.element(k), tol)) return false;
        return true;
    }

    bool same_as(const MatrixSubspace& other, const Tolerance& tol) const {
        return dim() == other.dim() && contains_all(other, tol) && other.contains_all(*this, tol);
    }

    MatrixSubspace intersect(const MatrixSubspace& other, const Tolerance& tol) const {
        if (other.n() != n_) throw Error("OrderMismatch", "intersect: orders differ");
        Matrix stacked(n_ * n_, dim() + other.dim());
        stacked << Q_, -other.Q_;
        Matrix N = null_space(stacked, tol.rank_eps * std::sqrt(2.0));
        return MatrixSubspace(n_, orthonormal_columns(Q_ * N.topRows(dim()), tol));
    }

    /// {f(M) : M in this}, for a linear map f.
    MatrixSubspace map(const std::function<Matrix(const Matrix&)>& f, Index out_n, const Tolerance& tol) const {
        std::vector<Matrix> imgs;
        for (Index k = 0; k < dim(); ++k) imgs.push_back(f(element(k)));
        return span(imgs, out_n, tol);
    }

    SubspaceFlags flags;

private:
    Index n_ = 0;
    Matrix Q_;
};

inline SubspaceFlags compute_flags(const MatrixSubspace& S, const Tolerance& tol) {
    SubspaceFlags f;
    const Index n = S.n();
    f.contains_identity = S.contains(identity(n), tol);
    f.contains_all_ones = S.contains(ones(n), tol);
    const auto b = S.basis();
    f.schur_closed = f.transpose_closed = f.mult_closed = f.commutative = true;
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (f.transpose_closed && !S.contains(b[i].transpose(), tol)) f.transpose_closed = false;
        for (std::size_t j = i; j < b.size(); ++j) {
            if (f.schur_closed && !S.contains(b[i].cwiseProduct(b[j]), tol)) f.schur_closed = false;
            Matrix ij = b[i] * b[j];
            Matrix ji = b[j] * b[i];
            if (f.mult_closed && (!S.contains(ij, tol) || !S.contains(ji, tol))) f.mult_closed = false;
            if (f.commutative && (ij - ji).norm() > tol.abs_eps + tol.rank_eps * ij.norm()) f.commutative = false;
        }
    }
    return f;
}

struct BoseMesnerReport {
    bool ok = false;
    SubspaceFlags flags;
    std::string failure;  // first failing axiom, empty when ok
};

inline BoseMesnerReport is_bose_mesner(const MatrixSubspace& S, const Tolerance& tol = {}) {
    BoseMesnerReport r;
    r.flags = compute_flags(S, tol);
    const auto& f = r.flags;
    if (!f.contains_identity) r.failure = "missing I";
    else if (!f.contains_all_ones) r.failure = "missing J";
    else if (!f.schur_closed) r.failure = "not Schur closed";
    else if (!f.mult_closed) r.failure = "not closed under multiplication";
    else if (!f.transpose_closed) r.failure = "not closed under transpose";
    else if (!f.commutative) r.failure = "not commutative";
    r.ok = r.failure.empty();
    return r;
}

// ---------------------------------------------------------------- Nomura algebra

struct NomuraData {
    Matrix A, B;
    MatrixSubspace space;              // N_{A,B}
    std::vector<Matrix> theta_images;  // Theta of each basis element of space
    MatrixSubspace dual_space;         // N'_{A,B}
    Tolerance tol;
};

/// Eigenvalue table of M on the vectors Y_ij = A e_i o B e_j, with the worst relative residual.
inline std::pair<Matrix, double> eigenvalue_readout(const Matrix& A, const Matrix& B, const Matrix& M) {
    const Index n = A.rows();
    Matrix S(n, n);
    double worst = 0.0;
    const double mnorm = M.norm();
    for (Index j = 0; j < n; ++j) {
        Matrix P = B.col(j).asDiagonal() * A;  // columns Y_{1j}..Y_{nj}
        Matrix MP = M * P;
        for (Index i = 0; i < n; ++i) {
            cplx yy = P.col(i).squaredNorm();
            cplx th = P.col(i).dot(MP.col(i)) / yy;
            S(i, j) = th;
            double r = (MP.col(i) - th * P.col(i)).norm();
            double scale = mnorm * std::sqrt(std::abs(yy));
            worst = std::max(worst, scale > 0 ? r / scale : r);
        }
    }
    return {S, worst};
}

inline void require_nomura_inputs(const Matrix& A, const Matrix& B, const Tolerance& tol) {
    require_same_order(A, B, "nomura_algebra");
    if (!is_invertible(A, tol)) throw Error("NotInvertible", "A is not invertible");
    if (!is_schur_invertible(B, tol)) throw Error("NotSchurInvertible", "B has an entry below abs_eps");
}

/// N_{A,B}: the matrices having every Y_ij = A e_i o B e_j as an eigenvector.
inline NomuraData nomura_algebra(const Matrix& A, const Matrix& B, const Tolerance& tol = {}) {
    tol.validate();
    require_nomura_inputs(A, B, tol);
    const Index n = A.rows();

    std::vector<Matrix> P(n), Pinv(n);
    for (Index j = 0; j < n; ++j) {
        P[j] = B.col(j).asDiagonal() * A;
        double c = condition_number(P[j]);
        if (!(c <= 1.0 / tol.rank_eps))
            throw Error("IllConditioned", "P_" + std::to_string(j) + " has condition number " + std::to_string(c));
        Pinv[j] = P[j].inverse();
    }

    // M = P_0 diag(x) P_0^{-1}; x ranges over the column span of N.
    Matrix N = Matrix::Identity(n, n);
    for (Index j = 1; j < n && N.cols() > 0; ++j) {
        Matrix K = Pinv[j] * P[0];
        Matrix L = Pinv[0] * P[j];
        double scale = 0.0;
        for (Index k = 0; k < n; ++k) scale = std::max(scale, K.col(k).norm() * L.row(k).norm());
        Matrix C(n * (n - 1), n);
        Index row = 0;
        for (Index a = 0; a < n; ++a)
            for (Index b = 0; b < n; ++b) {
                if (a == b) continue;
                for (Index k = 0; k < n; ++k) C(row, k) = K(a, k) * L(k, b);
                ++row;
            }
        Matrix CN = C * N;
        Matrix Z = null_space(CN, tol.rank_eps * scale);
        N = N * Z;
    }

    std::vector<Matrix> mats;
    for (Index k = 0; k < N.cols(); ++k) mats.push_back(P[0] * N.col(k).asDiagonal() * Pinv[0]);

    NomuraData nd;
    nd.A = A;
    nd.B = B;
    nd.tol = tol;
    nd.space = MatrixSubspace::span(mats, n, tol);
    for (Index k = 0; k < nd.space.dim(); ++k)
        nd.theta_images.push_back(eigenvalue_readout(A, B, nd.space.element(k)).first);
    nd.dual_space = MatrixSubspace::span(nd.theta_images, n, tol);
    return nd;
}

/// Nomura algebra of a type-II matrix: N_A = N_{A, inv_s(A)}.
inline NomuraData nomura_algebra_of(const Matrix& A, const Tolerance& tol = {}) {
    return nomura_algebra(A, schur_inverse(A, tol), tol);
}

/// Theta_{A,B}(M) for M in N_{A,B}; verifies X_M D_B X_A = D_B X_A D_S on all E_ij.
inline Matrix duality_map(const NomuraData& nd, const Matrix& M) {
    const Tolerance& tol = nd.tol;
    double res = nd.space.residual(M);
    if (!nd.space.contains(M, tol))
        throw Error("NotInAlgebra", "projection residual " + std::to_string(res));
    auto [S, rel] = eigenvalue_readout(nd.A, nd.B, M);
    Check c = operators_equal(xdx(M, nd.B, nd.A), dxd(nd.B, nd.A, S), tol);
    if (!c.ok)
        throw Error("NotInAlgebra", "eigenvector identity fails (residual " + std::to_string(c.residual) + ", " +
                                        c.detail + ")");
    return S;
}

// ---------------------------------------------------------------- idempotents

/// Indicator matrices of the classes of positions sharing the same tuple of basis values.
inline std::vector<Matrix> schur_idempotent_basis(const MatrixSubspace& S, const Tolerance& tol = {}) {
    const Index n = S.n();
    const Matrix& Q = S.coords();
    if (!S.contains(ones(n), tol)) throw Error("NotSchurClosed", "space does not contain J");
    // Distinct classes of an orthonormal basis differ by at least sqrt(2)/n in tuple distance.
    const double eps = 1e-3 / static_cast<double>(n);
    std::vector<Index> reps;
    std::vector<std::vector<Index>> classes;
    for (Index p = 0; p < n * n; ++p) {
        bool placed = false;
        for (std::size_t c = 0; c < reps.size(); ++c)
            if ((Q.row(p) - Q.row(reps[c])).norm() <= eps) {
                classes[c].push_back(p);
                placed = true;
                break;
            }
        if (!placed) {
            reps.push_back(p);
            classes.push_back({p});
        }
    }
    if (static_cast<Index>(classes.size()) != S.dim())
        throw Error("NotSchurClosed", std::to_string(classes.size()) + " entry classes for dimension " +
                                          std::to_string(S.dim()));
    std::vector<Matrix> out;
    for (const auto& cls : classes) {
        Matrix E = Matrix::Zero(n, n);
        for (Index p : cls) E(p % n, p / n) = 1.0;
        if (!S.contains(E, tol)) throw Error("NotSchurClosed", "class indicator lies outside the space");
        out.push_back(E);
    }
    return out;
}

namespace detail {

/// Single-linkage clustering of points into exactly k groups.
inline std::vector<std::vector<Index>> cluster_eigenvalues(const Eigen::VectorXcd& ev, Index k) {
    const Index m = ev.size();
    std::vector<std::tuple<double, Index, Index>> edges;
    for (Index a = 0; a < m; ++a)
        for (Index b = a + 1; b < m; ++b) edges.emplace_back(std::abs(ev(a) - ev(b)), a, b);
    std::sort(edges.begin(), edges.end());
    std::vector<Index> parent(m);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<Index(Index)> find = [&](Index x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    Index comps = m;
    for (const auto& [dist, a, b] : edges) {
        if (comps <= k) break;
        Index ra = find(a), rb = find(b);
        if (ra != rb) {
            parent[std::max(ra, rb)] = std::min(ra, rb);
            --comps;
        }
    }
    std::map<Index, std::vector<Index>> groups;
    for (Index a = 0; a < m; ++a) groups[find(a)].push_back(a);
    std::vector<std::vector<Index>> out;
    for (auto& [r, g] : groups) out.push_back(std::move(g));
    return out;
}

inline bool idempotents_valid(const std::vector<Matrix>& E, const MatrixSubspace& S, const Tolerance& tol) {
    const Index n = S.n();
    Matrix sum = Matrix::Zero(n, n);
    for (std::size_t a = 0; a < E.size(); ++a) {
        sum += E[a];
        if (!S.contains(E[a], tol)) return false;
        for (std::size_t b = 0; b < E.size(); ++b) {
            Matrix expect = a == b ? E[a] : Matrix::Zero(n, n);
            if (!approx_equal(E[a] * E[b], expect, tol)) return false;
        }
    }
    return approx_equal(sum, identity(n), tol);
}

}  // namespace detail

/// Primitive idempotents of a commutative matrix algebra, by diagonalizing a random element.
/// J/n comes first when present; the rest are ordered by rank and then by their (0,0) entry.
/// Transpose closure is not required; algebras that are not diagonalizable fail with NotClosed.
inline std::vector<Matrix> algebra_idempotents(const MatrixSubspace& S, const Tolerance& tol = {},
                                               std::uint64_t seed = 0) {
    const Index n = S.n();
    SubspaceFlags f = compute_flags(S, tol);
    if (!f.commutative) throw Error("NotCommutative", "space is not commutative");
    if (!f.contains_identity || !f.mult_closed)
        throw Error("NotClosed", "space must contain I and be closed under products");
    const auto basis = S.basis();
    for (int attempt = 0; attempt < 8; ++attempt) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(attempt));
        std::normal_distribution<double> g;
        Matrix M = Matrix::Zero(n, n);
        for (const auto& b : basis) M += cplx(g(rng), g(rng)) * b;
        Eigen::ComplexEigenSolver<Matrix> es(M);
        if (es.info() != Eigen::Success) continue;
        const Matrix& V = es.eigenvectors();
        if (!is_invertible(V, tol)) continue;
        Matrix Vinv = V.inverse();
        auto groups = detail::cluster_eigenvalues(es.eigenvalues(), S.dim());
        std::vector<Matrix> E;
        for (const auto& g2 : groups) {
            Matrix Eg = Matrix::Zero(n, n);
            for (Index c : g2) Eg += V.col(c) * Vinv.row(c);
            E.push_back(Eg);
        }
        if (static_cast<Index>(E.size()) != S.dim() || !detail::idempotents_valid(E, S, tol)) continue;
        const Matrix Jn = ones(n) / static_cast<double>(n);
        auto key = [&](const Matrix& X) {
            bool isJ = approx_equal(X, Jn, tol);
            long rank = std::lround(X.trace().real());
            return std::make_tuple(!isJ, rank, -X(0, 0).real(), X(0, 0).imag());
        };
        std::stable_sort(E.begin(), E.end(), [&](const Matrix& x, const Matrix& y) { return key(x) < key(y); });
        return E;
    }
    throw Error("NotClosed", "could not separate the joint eigenspaces");
}

/// Primitive idempotents of a Bose-Mesner style algebra (also requires transpose closure).
inline std::vector<Matrix> principal_idempotents(const MatrixSubspace& S, const Tolerance& tol = {},
                                                 std::uint64_t seed = 0) {
    SubspaceFlags f = compute_flags(S, tol);
    if (!f.commutative) throw Error("NotCommutative", "space is not commutative");
    if (!f.transpose_closed) throw Error("NotClosed", "space is not closed under transpose");
    return algebra_idempotents(S, tol, seed);
}

// ---------------------------------------------------------------- schemes

struct SchemeData {
    Index n = 0;
    std::vector<Matrix> schur_basis;      // A_0 = I, ...
    std::vector<Matrix> principal_basis;  // E_0 = J/n, ...
    Matrix P;                             // P(j,i): eigenvalue of A_i on E_j
    Matrix Q;                             // n P^{-1}
    std::vector<Index> T;                 // A_i^T = A_{T[i]}
    std::vector<std::vector<std::vector<long>>> p;  // p[i][j][k]: A_i A_j = sum_k p_ij^k A_k

    Index classes() const { return static_cast<Index>(schur_basis.size()) - 1; }
};

inline Matrix transpose_permutation_matrix(const std::vector<Index>& T) {
    const Index m = static_cast<Index>(T.size());
    Matrix M = Matrix::Zero(m, m);
    for (Index i = 0; i < m; ++i) M(i, T[i]) = 1.0;
    return M;
}

/// Fills P, Q, T, p from the two bases and validates the scheme axioms.
inline SchemeData assemble_scheme(std::vector<Matrix> A, std::vector<Matrix> E, const Tolerance& tol) {
    SchemeData sd;
    if (A.empty() || A.size() != E.size()) throw Error("NotBoseMesner", "basis sizes differ");
    const Index n = A[0].rows();
    const Index m = static_cast<Index>(A.size());
    sd.n = n;
    auto fail = [](const std::string& s) { throw Error("NotBoseMesner", s); };

    if (!approx_equal(A[0], identity(n), tol)) fail("A_0 is not I");
    Matrix sumA = Matrix::Zero(n, n), sumE = Matrix::Zero(n, n);
    for (Index i = 0; i < m; ++i) {
        sumA += A[i];
        sumE += E[i];
    }
    if (!approx_equal(sumA, ones(n), tol)) fail("Schur idempotents do not sum to J");
    if (!approx_equal(sumE, identity(n), tol)) fail("principal idempotents do not sum to I");

    sd.T.assign(m, -1);
    for (Index i = 0; i < m; ++i) {
        for (Index k = 0; k < m; ++k)
            if (approx_equal(A[i].transpose(), A[k], tol)) sd.T[i] = k;
        if (sd.T[i] < 0) fail("not closed under transpose");
        for (Index j = 0; j < m; ++j) {
            Matrix expect = i == j ? E[i] : Matrix::Zero(n, n);
            if (!approx_equal(E[i] * E[j], expect, tol)) fail("principal idempotents are not orthogonal");
        }
    }

    sd.P.resize(m, m);
    for (Index j = 0; j < m; ++j) {
        cplx rank = E[j].trace();
        for (Index i = 0; i < m; ++i) sd.P(j, i) = (A[i] * E[j]).trace() / rank;
    }
    for (Index i = 0; i < m; ++i) {
        Matrix rebuilt = Matrix::Zero(n, n);
        for (Index j = 0; j < m; ++j) rebuilt += sd.P(j, i) * E[j];
        if (!approx_equal(rebuilt, A[i], tol)) fail("A_" + std::to_string(i) + " is not a combination of the E_j");
    }
    if (!is_invertible(sd.P, tol)) fail("eigenmatrix is singular");
    sd.Q = static_cast<double>(n) * sd.P.inverse();

    sd.p.assign(m, std::vector<std::vector<long>>(m, std::vector<long>(m, 0)));
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < m; ++j) {
            Matrix prod = A[i] * A[j];
            Matrix rebuilt = Matrix::Zero(n, n);
            for (Index k = 0; k < m; ++k) {
                cplx v = prod.cwiseProduct(A[k]).sum() / A[k].sum();
                double r = std::round(v.real());
                if (std::abs(v - r) > 1e-6 || r < 0)
                    fail("intersection number p_" + std::to_string(i) + std::to_string(j) + "^" + std::to_string(k) +
                         " is not a non-negative integer");
                sd.p[i][j][k] = static_cast<long>(r);
                rebuilt += r * A[k];
            }
            if (!approx_equal(rebuilt, prod, tol)) fail("not closed under multiplication");
        }
    sd.schur_basis = std::move(A);
    sd.principal_basis = std::move(E);
    return sd;
}

/// Scheme structure of a Bose-Mesner algebra. A_0 = I; the other A_i are ordered by first
/// row-major position.
inline SchemeData scheme_from_space(const MatrixSubspace& S, const Tolerance& tol = {}) {
    auto rep = is_bose_mesner(S, tol);
    if (!rep.ok) throw Error("NotBoseMesner", rep.failure);
    const Index n = S.n();
    auto A = schur_idempotent_basis(S, tol);
    auto first = [n](const Matrix& M) {
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j)
                if (std::abs(M(i, j)) > 0.5) return i * n + j;
        return n * n;
    };
    auto isI = [&](const Matrix& M) { return approx_equal(M, identity(n), tol); };
    std::stable_sort(A.begin(), A.end(), [&](const Matrix& x, const Matrix& y) {
        if (isI(x) != isI(y)) return isI(x);
        return first(x) < first(y);
    });
    auto E = principal_idempotents(S, tol);
    return assemble_scheme(std::move(A), std::move(E), tol);
}

/// P^2 = nT in the stored ordering.
inline Check p_squared_check(const SchemeData& sd, const Tolerance& tol = {}) {
    Matrix lhs = sd.P * sd.P;
    Matrix rhs = static_cast<double>(sd.n) * transpose_permutation_matrix(sd.T);
    Check c = compare(lhs, rhs, tol);
    if (!c.ok) c.detail = "P^2 != nT at " + c.detail;
    return c;
}

struct SelfDualityReport {
    bool ok = false;
    Check product_to_schur;  // Theta(A_i A_j) = Theta(A_i) o Theta(A_j)
    Check schur_to_product;  // Theta(A_i o A_j) = Theta(A_i) Theta(A_j) / n
    Check involution;        // Theta^2(A_i) = n A_i^T
    Check p_squared;         // P^2 = nT after reordering
    std::vector<Index> pairing;  // pairing[i] = index of the principal idempotent E with Theta(E) = A_i
    SchemeData reordered;        // principal basis reordered by the pairing
};

/// Linear extension over the Schur basis of the images Theta(A_i).
inline Matrix extend_theta(const SchemeData& sd, const std::vector<Matrix>& theta, const Matrix& M) {
    Matrix out = Matrix::Zero(sd.n, sd.n);
    for (std::size_t i = 0; i < sd.schur_basis.size(); ++i) {
        const Matrix& Ai = sd.schur_basis[i];
        cplx coeff = M.cwiseProduct(Ai).sum() / Ai.sum();
        out += coeff * theta[i];
    }
    return out;
}

/// Formal self-duality of a scheme under a map given on its Schur basis.
inline SelfDualityReport check_formal_self_duality(const SchemeData& sd, const std::vector<Matrix>& theta,
                                                   const Tolerance& tol = {}) {
    SelfDualityReport r;
    const Index m = static_cast<Index>(sd.schur_basis.size());
    const double n = static_cast<double>(sd.n);
    if (static_cast<Index>(theta.size()) != m) throw Error("OrderMismatch", "one image per Schur idempotent needed");
    const auto& A = sd.schur_basis;
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < m; ++j) {
            merge(r.product_to_schur,
                  compare(extend_theta(sd, theta, A[i] * A[j]), theta[i].cwiseProduct(theta[j]), tol));
            merge(r.schur_to_product,
                  compare(extend_theta(sd, theta, A[i].cwiseProduct(A[j])), theta[i] * theta[j] / n, tol));
        }
        merge(r.involution, compare(extend_theta(sd, theta, theta[i]), n * A[i].transpose(), tol));
    }

    // Theta(E_k) = A_k gives E_k = Theta(A_k)^T / n.
    r.pairing.assign(m, -1);
    std::vector<bool> used(m, false);
    for (Index i = 0; i < m; ++i) {
        Matrix target = theta[i].transpose() / n;
        Index hit = -1;
        for (Index k = 0; k < m; ++k)
            if (approx_equal(target, sd.principal_basis[k], tol)) {
                if (hit >= 0) throw Error("AmbiguousPairing", "two principal idempotents match Theta(A_" +
                                                                  std::to_string(i) + ")");
                hit = k;
            }
        if (hit < 0 || used[hit]) {
            r.p_squared = {false, INFINITY, "Theta(A_" + std::to_string(i) + ")^T/n is not a distinct principal idempotent"};
            r.ok = false;
            return r;
        }
        used[hit] = true;
        r.pairing[i] = hit;
    }
    r.reordered = sd;
    for (Index i = 0; i < m; ++i) r.reordered.principal_basis[i] = sd.principal_basis[r.pairing[i]];
    r.reordered = assemble_scheme(r.reordered.schur_basis, r.reordered.principal_basis, tol);
    r.p_squared = p_squared_check(r.reordered, tol);
    r.ok = r.product_to_schur.ok && r.schur_to_product.ok && r.involution.ok && r.p_squared.ok;
    return r;
}

/// Theta images of a scheme's Schur basis under the duality map of nd.
inline std::vector<Matrix> theta_on_schur_basis(const NomuraData& nd, const SchemeData& sd) {
    std::vector<Matrix> out;
    for (const auto& Ai : sd.schur_basis) out.push_back(duality_map(nd, Ai));
    return out;
}

// ---------------------------------------------------------------- transform checks

struct MonomialReport {
    Check scaling;      // N_{DAE, D^{-1} B F} = N_{A,B}
    Check permutation;  // N_{PAQ, PBR} = P N_{A,B} P^{-1}
    bool ok() const { return scaling.ok && permutation.ok; }
};

/// D, E, F invertible diagonal; P, Q, R permutation matrices.
inline MonomialReport monomial_transform_check(const Matrix& A, const Matrix& B, const Matrix& D, const Matrix& E,
                                               const Matrix& F, const Matrix& P, const Matrix& Q, const Matrix& R,
                                               const Tolerance& tol = {}) {
    MonomialReport rep;
    auto base = nomura_algebra(A, B, tol);
    auto scaled = nomura_algebra(D * A * E, D.inverse() * B * F, tol);
    rep.scaling.ok = base.space.same_as(scaled.space, tol);
    if (!rep.scaling.ok) rep.scaling.detail = "scaled pair gives a different algebra";
    for (const Matrix* M : {&P, &Q, &R})
        if (!as_permutation(*M, tol.abs_eps)) throw Error("NotPermutation", "expected a permutation matrix");
    auto permuted = nomura_algebra(P * A * Q, P * B * R, tol);
    Matrix Pinv = P.transpose();
    auto conj = base.space.map([&](const Matrix& M) { return Matrix(P * M * Pinv); }, A.rows(), tol);
    rep.permutation.ok = permuted.space.same_as(conj, tol);
    if (!rep.permutation.ok) rep.permutation.detail = "permuted pair does not give the conjugated algebra";
    return rep;
}

/// N_{A1 (x) A2, B1 (x) B2} = N_{A1,B1} (x) N_{A2,B2}.
inline Check tensor_nomura_check(const Matrix& A1, const Matrix& B1, const Matrix& A2, const Matrix& B2,
                                 const Tolerance& tol = {}) {
    auto n1 = nomura_algebra(A1, B1, tol);
    auto n2 = nomura_algebra(A2, B2, tol);
    auto nt = nomura_algebra(kron(A1, A2), kron(B1, B2), tol);
    std::vector<Matrix> prods;
    for (const auto& x : n1.space.basis())
        for (const auto& y : n2.space.basis()) prods.push_back(kron(x, y));
    auto expect = MatrixSubspace::span(prods, A1.rows() * A2.rows(), tol);
    Check c;
    c.ok = nt.space.same_as(expect, tol);
    if (!c.ok)
        c.detail = "dim " + std::to_string(nt.space.dim()) + " vs " + std::to_string(n1.space.dim()) + "*" +
                   std::to_string(n2.space.dim());
    return c;
}

}  // namespace spinlab
