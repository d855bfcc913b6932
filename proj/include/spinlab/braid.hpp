#pragma once

#include "spinlab/jones.hpp"

#include <random>
#include <sstream>

namespace spinlab {

/// Letters are signed generator indices: +i is sigma_i, -i its inverse.
struct BraidWord {
    int strands = 2;
    std::vector<int> letters;
};

inline void validate_word(const BraidWord& w) {
    if (w.strands < 2) throw Error("BadParameters", "a braid needs at least 2 strands");
    for (int l : w.letters)
        if (l == 0 || std::abs(l) >= w.strands)
            throw Error("BadParameters", "letter " + std::to_string(l) + " out of range for " +
                                             std::to_string(w.strands) + " strands");
}

/// Whitespace or comma separated signed indices, e.g. "1 -2 1".
inline BraidWord parse_braid_word(const std::string& text, int strands) {
    BraidWord w{strands, {}};
    std::string s = text;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size()) throw Error("BadParameters", "bad braid letter '" + tok + "'");
        w.letters.push_back(v);
    }
    validate_word(w);
    return w;
}

struct BraidRep {
    Matrix A, B;
    Matrix A_inv, B_sinv;
    int m = 2;
    Index k = 1;  // ceil(m / 2) tensor factors
    Index n = 0;

    Index dim() const {
        Index d = 1;
        for (Index i = 0; i < k; ++i) d *= n;
        return d;
    }
};

constexpr Index kBraidDimensionCap = Index(1) << 18;

inline BraidRep build_rep(const Matrix& A, const Matrix& B, int m, const Tolerance& tol = {},
                          Index cap = kBraidDimensionCap) {
    require_square(A, "A");
    require_same_order(A, B, "B");
    if (m < 2) throw Error("BadParameters", "a braid needs at least 2 strands");
    if (!is_invertible(A, tol)) throw Error("NotInvertible", "A is singular");
    if (!is_schur_invertible(B, tol)) throw Error("NotSchurInvertible", "B has a zero entry");
    BraidRep rep{A, B, A.inverse(), schur_inverse(B, tol), m, (m + 1) / 2, A.rows()};
    double coords = 1;
    for (Index i = 0; i < rep.k; ++i) coords *= double(rep.n);
    if (coords > double(cap))
        throw Error("DimensionTooLarge", "n^k = " + std::to_string(coords) + " exceeds " + std::to_string(cap));
    return rep;
}

/// Applies g_letter to x in place. Factor 1 is the most significant index.
inline void apply_generator(const BraidRep& rep, int letter, Vector& x) {
    const int g = std::abs(letter);
    if (g < 1 || g >= rep.m) throw Error("BadParameters", "generator " + std::to_string(letter) + " out of range");
    const Index n = rep.n;
    const Index h = (g + 1) / 2;  // 1-based factor
    Index stride = 1;
    for (Index i = h; i < rep.k; ++i) stride *= n;
    const Index total = rep.dim();
    if (g % 2 == 1) {
        const Matrix& M = letter > 0 ? rep.A : rep.A_inv;
        Vector in(n);
        for (Index hi = 0; hi < total; hi += stride * n)
            for (Index lo = 0; lo < stride; ++lo) {
                for (Index r = 0; r < n; ++r) in(r) = x(hi + r * stride + lo);
                Vector out = M * in;
                for (Index r = 0; r < n; ++r) x(hi + r * stride + lo) = out(r);
            }
    } else {
        const Matrix& M = letter > 0 ? rep.B : rep.B_sinv;
        const Index next = stride / n;  // factor h+1
        for (Index idx = 0; idx < total; ++idx) x(idx) *= M((idx / stride) % n, (idx / next) % n);
    }
}

/// rep(sigma_{a_1} ... sigma_{a_l}) x; the rightmost letter acts first.
inline Vector apply_word(const BraidRep& rep, const std::vector<int>& letters, Vector x) {
    for (auto it = letters.rbegin(); it != letters.rend(); ++it) apply_generator(rep, *it, x);
    return x;
}

namespace detail {

/// Standard basis up to 1024 coordinates, otherwise 8 seeded random vectors.
inline std::vector<Vector> probe_vectors(Index dim) {
    std::vector<Vector> out;
    if (dim <= 1024) {
        for (Index i = 0; i < dim; ++i) out.push_back(Vector::Unit(dim, i));
        return out;
    }
    std::mt19937_64 rng(0);
    std::normal_distribution<double> g;
    for (int k = 0; k < 8; ++k) {
        Vector v(dim);
        for (Index i = 0; i < dim; ++i) v(i) = cplx(g(rng), g(rng));
        out.push_back(v);
    }
    return out;
}

inline Check words_agree(const BraidRep& rep, const std::vector<int>& u, const std::vector<int>& v, const Tolerance& tol) {
    Check c;
    c.residual = 0;
    for (const Vector& x : probe_vectors(rep.dim())) {
        Vector a = apply_word(rep, u, x), b = apply_word(rep, v, x);
        const double diff = (a - b).cwiseAbs().maxCoeff();
        const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
        c.residual = std::max(c.residual, diff);
        if (diff > tol.abs_eps + tol.rel_eps * scale) c.ok = false;
    }
    return c;
}

}  // namespace detail

struct BraidReport {
    std::vector<Check> adjacent;  // adjacent[i-1]: g_i g_{i+1} g_i = g_{i+1} g_i g_{i+1}
    std::vector<std::pair<std::pair<int, int>, Check>> far;  // |i-j| >= 2
    Check one_sided_AB;
    Check one_sided_ABT;
    bool consistent = true;  // (1,2) iff (A,B) one-sided, (2,3) iff (A,B^T) one-sided

    bool ok() const {
        bool r = true;
        for (const auto& c : adjacent) r = r && c.ok;
        for (const auto& f : far) r = r && f.second.ok;
        return r;
    }
};

inline BraidReport verify_braid_relations(const BraidRep& rep, const Tolerance& tol = {}) {
    BraidReport r;
    for (int i = 1; i + 1 < rep.m; ++i) {
        Check c = detail::words_agree(rep, {i, i + 1, i}, {i + 1, i, i + 1}, tol);
        c.detail = c.ok ? "" : "g_" + std::to_string(i) + " g_" + std::to_string(i + 1) + " relation fails";
        r.adjacent.push_back(c);
    }
    for (int i = 1; i < rep.m; ++i)
        for (int j = i + 2; j < rep.m; ++j) r.far.push_back({{i, j}, detail::words_agree(rep, {i, j}, {j, i}, tol)});
    r.one_sided_AB = check_one_sided(rep.A, rep.B, tol);
    r.one_sided_ABT = check_one_sided(rep.A, rep.B.transpose(), tol);
    if (r.adjacent.size() >= 1) r.consistent = r.consistent && r.adjacent[0].ok == r.one_sided_AB.ok;
    if (r.adjacent.size() >= 2) r.consistent = r.consistent && r.adjacent[1].ok == r.one_sided_ABT.ok;
    return r;
}

/// (sqrt(n) / tr A) (A, B), which makes A o I = A^{-1} o I = I / sqrt(n) for an invertible Jones pair.
inline std::pair<Matrix, Matrix> link_normalized(const Matrix& A, const Matrix& B) {
    const cplx tr = A.trace();
    if (std::abs(tr) < 1e-14) throw Error("BadParameters", "tr(A) = 0, the pair cannot be normalized");
    const cplx c = std::sqrt(double(A.rows())) / tr;
    return {c * A, c * B};
}

inline BraidRep link_normalized(const BraidRep& rep) {
    BraidRep out = rep;
    std::tie(out.A, out.B) = link_normalized(rep.A, rep.B);
    const cplx c = out.A.trace() / rep.A.trace();
    out.A_inv = rep.A_inv / c;
    out.B_sinv = rep.B_sinv / c;
    return out;
}

/// A o I = A^{-1} o I = I / sqrt(n) and B J = B^{(-)} J = sqrt(n) J.
inline Check link_conditions(const Matrix& A, const Matrix& B, const Tolerance& tol = {}) {
    const Index n = A.rows();
    const double rn = std::sqrt(double(n));
    const Matrix I = identity(n);
    Check c;
    merge(c, compare(Matrix(A.diagonal().asDiagonal()), I / rn, tol), "A o I");
    if (is_invertible(A, tol)) merge(c, compare(Matrix(Matrix(A.inverse()).diagonal().asDiagonal()), I / rn, tol), "A^-1 o I");
    else c = {false, INFINITY, "A is singular"};
    merge(c, compare(B * ones(n), rn * ones(n), tol), "BJ");
    if (is_schur_invertible(B, tol)) merge(c, compare(schur_inverse(B, tol) * ones(n), rn * ones(n), tol), "B^(-)J");
    else c = {false, INFINITY, "B has a zero entry"};
    return c;
}

/// Trace of rep(w), summed over basis tensors in index order.
inline cplx braid_trace(const BraidRep& rep, const BraidWord& w, bool normalize = false) {
    validate_word(w);
    if (w.strands != rep.m) throw Error("BadParameters", "word and representation have different strand counts");
    const BraidRep* use = &rep;
    BraidRep scaled;
    if (normalize) {
        scaled = link_normalized(rep);
        use = &scaled;
    }
    const Index dim = use->dim();
    cplx sum = 0.0;
    for (Index i = 0; i < dim; ++i) sum += apply_word(*use, w.letters, Vector::Unit(dim, i))(i);
    return sum;
}

struct MarkovCheck {
    cplx lhs, rhs;  // tr(h g_{m-1}) vs tr(h) tr(A) / n, or tr(h g_{m-1}^{-1}) vs tr(h) tr(A^{-1}) / n
    bool ok = false;
};

/// Markov identity for h over g_1 .. g_{m-2}; inverse selects g_{m-1}^{-1}.
inline MarkovCheck markov_check(const BraidRep& rep, const BraidWord& h, bool normalize, bool inverse = false,
                                const Tolerance& tol = {}) {
    for (int l : h.letters)
        if (std::abs(l) >= rep.m - 1) throw Error("BadParameters", "h must avoid g_{m-1}");
    BraidWord hg = h;
    hg.letters.push_back(inverse ? -(rep.m - 1) : rep.m - 1);
    const BraidRep used = normalize ? link_normalized(rep) : rep;
    MarkovCheck mc;
    mc.lhs = braid_trace(used, hg, false);
    mc.rhs = braid_trace(used, h, false) * (inverse ? used.A_inv.trace() : used.A.trace()) / double(rep.n);
    mc.ok = close(mc.lhs, mc.rhs, tol);
    return mc;
}

}  // namespace spinlab
