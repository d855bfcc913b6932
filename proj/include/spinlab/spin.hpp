#pragma once

#include "spinlab/jones.hpp"
#include "spinlab/nomura.hpp"

namespace spinlab {

struct SpinModel {
    Matrix W;
    cplx d = 0.0;  // loop variable
    cplx a = 0.0;  // diagonal constant

    Index n() const { return W.rows(); }
};

struct SpinReport {
    Check cond_I, cond_II, cond_III;
    Check bridge;  // (W/d, inv_s(W)^T) is an invertible Jones pair, and (W/d, inv_s(W)) one-sided
    bool ok() const { return cond_I.ok && cond_II.ok && cond_III.ok && bridge.ok; }
};

/// Conditions (I)-(III) and the Jones-pair bridge, without throwing.
inline SpinReport spin_model_report(const Matrix& W, cplx d, const Tolerance& tol = {}) {
    require_square(W, "W");
    SpinReport r;
    const Index n = W.rows();
    const cplx a = W(0, 0);
    if (std::abs(a) <= tol.abs_eps || !is_schur_invertible(W, tol)) {
        r.cond_I = {false, INFINITY, "zero entry"};
        r.cond_II = r.cond_III = r.bridge = r.cond_I;
        return r;
    }
    merge(r.cond_I, compare(Matrix(W.diagonal().asDiagonal()), a * identity(n), tol), "W o I");
    merge(r.cond_I, compare(W * ones(n), d / a * ones(n), tol), "WJ");
    merge(r.cond_I, compare(W.transpose() * ones(n), d / a * ones(n), tol), "W^T J");
    r.cond_II = type_ii_check(W, tol);
    const Matrix Ws = W.cwiseInverse();
    for (Index j = 0; j < n; ++j) {
        Matrix lhs = W * Ws.row(j).transpose().asDiagonal() * W;  // (k, i)
        Matrix rhs(n, n);
        for (Index k = 0; k < n; ++k)
            for (Index i = 0; i < n; ++i) rhs(k, i) = d * W(k, i) * Ws(j, i) * Ws(j, k);
        merge(r.cond_III, compare(lhs, rhs, tol), "j=" + std::to_string(j));
    }
    if (std::abs(d) > tol.abs_eps && is_invertible(W, tol)) {
        JonesPair jp = check_jones_pair(W / d, Ws.transpose(), tol);
        r.bridge.residual = jp.residual.residual;
        r.bridge.ok = jp.invertible;
        if (!jp.invertible) r.bridge.detail = "bridge pair not invertible Jones: " + jp.residual.detail;
        Check other = check_one_sided(W / d, Ws, tol);
        if (other.ok != jp.one_sided) merge(r.bridge, Check{false, other.residual, "one-sided equivalence fails"});
    } else {
        r.bridge = {false, INFINITY, "W or d degenerate"};
    }
    return r;
}

/// Certified spin model; throws ConditionFailure naming the first failing condition.
inline SpinModel verify_spin_model(const Matrix& W, cplx d, const Tolerance& tol = {}) {
    SpinReport r = spin_model_report(W, d, tol);
    if (!r.cond_I.ok) throw Error("ConditionFailure", "(I) " + r.cond_I.detail);
    if (!r.cond_II.ok) throw Error("ConditionFailure", "(II) " + r.cond_II.detail);
    if (!r.cond_III.ok) throw Error("ConditionFailure", "(III) " + r.cond_III.detail);
    if (!r.bridge.ok) throw Error("ConditionFailure", "Jones bridge: " + r.bridge.detail);
    return {W, d, W(0, 0)};
}

/// Finds c and d = +-sqrt(n) with cW a spin model: c^2 = d / (a * rowsum).
inline std::optional<std::pair<cplx, SpinModel>> normalize_to_spin_model(const Matrix& W, const Tolerance& tol = {}) {
    const Index n = W.rows();
    const cplx prod = W(0, 0) * W.row(0).sum();
    if (std::abs(prod) <= tol.abs_eps) return std::nullopt;
    for (double sd : {1.0, -1.0}) {
        cplx d = sd * std::sqrt(double(n));
        cplx c = std::sqrt(d / prod);
        Matrix cW = c * W;
        if (spin_model_report(cW, d, tol).ok()) return std::make_pair(c, SpinModel{cW, d, cW(0, 0)});
    }
    return std::nullopt;
}

/// The invertible Jones pair (W/d, inv_s(W)^T) of a spin model, with the pair's d equal to the model's.
inline JonesPair jones_pair_of(const SpinModel& m, const Tolerance& tol = {}) {
    return check_jones_pair(m.W / m.d, schur_inverse(m.W, tol).transpose(), tol, m.d.real() < 0 ? -1 : 1);
}

// ---------------------------------------------------------------- constructions

/// W = -u^3 I + u^{-1}(J - I), loop variable computed from row sums and checked.
inline SpinModel potts_from_u(Index n, cplx u, const Tolerance& tol = {}) {
    if (n < 2) throw Error("BadParameters", "Potts model needs n >= 2");
    Matrix W = -std::pow(u, 3) * identity(n) + (ones(n) - identity(n)) / u;
    const cplx a = W(0, 0);
    const cplx d = a * W.row(0).sum();
    if (!close(d * d, double(n), tol.with_eps(1e-8)))
        throw Error("BadParameters", "u does not give a Potts model of order " + std::to_string(n));
    return verify_spin_model(W, d, tol);
}

/// root_choice in 0..7: bit 2 picks the root t of t^2 + (n-2)t + 1 = 0, the low bits the fourth root u of -t.
inline SpinModel potts(Index n, int root_choice = 0, const Tolerance& tol = {}) {
    if (n < 2) throw Error("BadParameters", "Potts model needs n >= 2");
    if (root_choice < 0 || root_choice > 7) throw Error("BadParameters", "root_choice must be in 0..7");
    const cplx b = double(n) - 2.0;
    const cplx disc = std::sqrt(b * b - 4.0);
    const cplx t = (root_choice & 4) ? (-b - disc) / 2.0 : (-b + disc) / 2.0;
    const cplx u = std::pow(-t, 0.25) * std::pow(cplx(0, 1), root_choice & 3);
    return potts_from_u(n, u, tol);
}

/// Character table of Z_{m1} x ... x Z_{mk}: Kronecker product of Fourier matrices.
inline Matrix abelian_character_matrix(const std::vector<Index>& orders) {
    Matrix P = Matrix::Ones(1, 1);
    for (Index m : orders) {
        if (m < 1) throw Error("BadParameters", "cyclic orders must be >= 1");
        Matrix F(m, m);
        for (Index x = 0; x < m; ++x)
            for (Index y = 0; y < m; ++y) F(x, y) = std::polar(1.0, 2 * M_PI * double((x * y) % m) / double(m));
        P = kron(P, F);
    }
    return P;
}

/// W_xy = omega^{(x-y)^2} for odd n, rescaled so that it satisfies (I)-(III).
inline SpinModel cyclic_spin_model(Index n, std::optional<cplx> omega = std::nullopt, const Tolerance& tol = {}) {
    if (n < 1 || n % 2 == 0) throw Error("BadParameters", "cyclic model is only provided for odd n");
    cplx w = omega.value_or(std::polar(1.0, 2 * M_PI / double(n)));
    if (!close(std::pow(w, double(n)), 1.0, tol.with_eps(1e-8)))
        throw Error("BadParameters", "omega is not an n-th root of unity");
    for (Index k = 1; k < n; ++k)
        if (close(std::pow(w, double(k)), 1.0, tol.with_eps(1e-8))) throw Error("BadParameters", "omega is not primitive");
    Matrix W(n, n);
    for (Index x = 0; x < n; ++x)
        for (Index y = 0; y < n; ++y) {
            Index e = ((x - y) * (x - y)) % n;
            W(x, y) = std::pow(w, double(e));
        }
    auto found = normalize_to_spin_model(W, tol);
    if (!found) throw Error("VerificationFailure", "no scalar multiple of the cyclic matrix is a spin model");
    auto nw = nomura_algebra_of(found->second.W, tol);
    if (!nw.space.contains(found->second.W, tol)) throw Error("VerificationFailure", "W is not in N_W");
    return found->second;
}

inline bool is_hadamard(const Matrix& H, const Tolerance& tol = {}) {
    if (H.rows() != H.cols() || H.size() == 0) return false;
    for (Index i = 0; i < H.rows(); ++i)
        for (Index j = 0; j < H.cols(); ++j)
            if (!close(H(i, j), 1.0, tol) && !close(H(i, j), -1.0, tol)) return false;
    return approx_equal(H * H.transpose(), double(H.rows()) * identity(H.rows()), tol);
}

/// [[A,A,B,-B],[A,A,-B,B],[eB^T,-eB^T,C,C],[-eB^T,eB^T,C,C]].
inline Matrix hadamard_block_matrix(const Matrix& A, const Matrix& B, const Matrix& C, int eps) {
    const Matrix Bt = double(eps) * B.transpose();
    return block_matrix({{A, A, B, -B}, {A, A, -B, B}, {Bt, -Bt, C, C}, {-Bt, Bt, C, C}});
}

/// 4n x 4n model from a Hadamard matrix H, eps = +-1, omega^4 = eps, Potts block with parameter u.
inline SpinModel hadamard_spin_model(const Matrix& H, int eps, cplx omega, cplx u, const Tolerance& tol = {}) {
    if (!is_hadamard(H, tol)) throw Error("NotHadamard", "H H^T != nI or entries are not +-1");
    const Index n = H.rows();
    if (eps != 1 && eps != -1) throw Error("BadParameters", "eps must be +1 or -1");
    if (!close(std::pow(omega, 4.0), double(eps), tol.with_eps(1e-8))) throw Error("BadParameters", "omega^4 != eps");
    const cplx s = u * u + 1.0 / (u * u);
    if (!close(s * s, double(n), tol.with_eps(1e-8))) throw Error("BadParameters", "(u^2 + u^-2)^2 != n");
    SpinModel A = potts_from_u(n, u, tol);
    Matrix W = hadamard_block_matrix(A.W, omega * H, A.W, eps);
    return verify_spin_model(W, 2.0 * A.d, tol);
}

struct HadamardBlockReport {
    Check a, b, c, d;  // the four block conditions
    Check assembled;   // the 4n x 4n matrix is a spin model with loop 2d
    bool conditions_hold() const { return a.ok && b.ok && c.ok && d.ok; }
    bool consistent() const { return conditions_hold() == assembled.ok; }
};

inline HadamardBlockReport general_hadamard_block_check(const Matrix& A, const Matrix& B, const Matrix& C, int eps,
                                                        cplx d, const Tolerance& tol = {}) {
    require_same_order(A, B, "hadamard blocks");
    require_same_order(A, C, "hadamard blocks");
    HadamardBlockReport r;
    r.a = type_ii_check(B, tol);
    for (const Matrix* M : {&A, &C}) {
        merge(r.b, compare(*M, M->transpose(), tol), "symmetry");
        SpinReport s = spin_model_report(*M, d, tol);
        merge(r.b, s.cond_I, "(I)");
        merge(r.b, s.cond_II, "(II)");
        merge(r.b, s.cond_III, "(III)");
    }
    if (is_schur_invertible(A, tol) && is_schur_invertible(B, tol)) {
        const Matrix Bt = B.transpose(), Bst = B.cwiseInverse().transpose(), As = A.cwiseInverse();
        r.c = operators_equal(xdx(C, Bst, Bt), dxd(Bst, Bt, As) * X(d * identity(A.rows())), tol);
        r.d = operators_equal(xdx(C, Bst, Bst), dxd(Bt, Bt, As) * X(double(eps) * d * identity(A.rows())), tol);
    } else {
        r.c = r.d = {false, INFINITY, "zero entry"};
    }
    Matrix W = hadamard_block_matrix(A, B, C, eps);
    SpinReport s = spin_model_report(W, 2.0 * d, tol);
    r.assembled = {s.ok(), std::max({s.cond_I.residual, s.cond_II.residual, s.cond_III.residual}),
                   s.ok() ? "" : "assembled matrix is not a spin model"};
    return r;
}

// ---------------------------------------------------------------- membership and index

struct WInNomuraReport {
    bool in_algebra = false;
    double residual = 0;
    std::optional<cplx> c;  // scalar with cW a spin model
    std::optional<SpinModel> model;
    bool consistent() const { return in_algebra == model.has_value(); }
};

inline WInNomuraReport w_in_nomura_check(const Matrix& W, const Tolerance& tol = {}) {
    if (!is_type_ii(W, tol)) throw Error("NotTypeII", "W is not type II");
    WInNomuraReport r;
    auto nd = nomura_algebra_of(W, tol);
    r.residual = nd.space.residual(W);
    r.in_algebra = nd.space.contains(W, tol);
    if (auto found = normalize_to_spin_model(W, tol)) {
        r.c = found->first;
        r.model = found->second;
    }
    return r;
}

struct IndexReport {
    long index = 0;
    Matrix P;    // inv_s(W) W / n
    Matrix D;    // inv_s(W)^T o W = D J D^{-1}
    Check djd;
};

inline IndexReport spin_index(const SpinModel& m, const Tolerance& tol = {}) {
    SpinReport sr = spin_model_report(m.W, m.d, tol);
    if (!sr.ok()) throw Error("NotSpinModel", "index needs a certified spin model");
    const Index n = m.n();
    IndexReport r;
    Matrix Ws = m.W.cwiseInverse();
    Matrix P = Ws * m.W / double(n);
    auto perm = as_permutation(P, 1e-6);
    if (!perm) throw Error("NotPermutation", "inv_s(W) W / n is not a permutation matrix");
    r.P = permutation_matrix(*perm);
    r.index = permutation_order(*perm);
    Matrix M = Ws.transpose().cwiseProduct(m.W);
    Vector dv = M.col(0);
    r.D = dv.asDiagonal();
    r.djd = compare(M, dv * dv.cwiseInverse().transpose(), tol);
    return r;
}

// ---------------------------------------------------------------- type-II catalogue

/// Small type-II examples of orders 2 to 5; lambda is the free parameter at n = 4.
inline std::vector<Matrix> type_ii_examples(Index n, cplx lambda = 2.0) {
    std::vector<Matrix> out;
    const cplx w = std::polar(1.0, 2 * M_PI / 3);
    switch (n) {
        case 2: {
            Matrix H(2, 2);
            H << 1, 1, 1, -1;
            out.push_back(H);
            break;
        }
        case 3: {
            Matrix M(3, 3);
            M << 1, 1, w, w, 1, 1, 1, w, 1;
            out.push_back(M);
            break;
        }
        case 4: {
            Matrix M(4, 4);
            M << 1, 1, 1, 1, 1, 1, -1, -1, 1, -1, lambda, -lambda, 1, -1, -lambda, lambda;
            out.push_back(M);
            break;
        }
        case 5: {
            out.push_back(abelian_character_matrix({5}));
            for (double s : {1.0, -1.0}) out.push_back((-5 + s * std::sqrt(5.0)) / 2 * identity(5) + ones(5));
            break;
        }
        default: throw Error("BadParameters", "catalogue covers orders 2 to 5");
    }
    return out;
}

}  // namespace spinlab
