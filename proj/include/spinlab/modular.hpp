#pragma once

#include "spinlab/construct.hpp"

#include <random>

namespace spinlab {

struct IndexSets {
    std::vector<Index> I, J;  // classes inside / outside the diagonal 2n-blocks
};

struct ModularInvarianceProblem {
    Matrix P;              // P(j,i): eigenvalue of A_i on E_j, with Theta(E_i) = A_i
    cplx d = 0.0;          // +-sqrt(order)
    std::vector<Index> T;  // A_i^T = A_{T[i]}
    std::optional<IndexSets> index_sets;
    Index order = 0;

    Index size() const { return P.rows(); }
};

struct MISolution {
    Vector t;             // weights, (PD)^3 = t_0 d^3 I
    Vector s;             // t / t_0
    cplx scale = 0.0;     // t_0
    double residual = 0;  // max-abs residual of the equation(s) for t
};

/// Checks P^2 = nT and d^2 = n; index sets must partition 0..m when given.
inline ModularInvarianceProblem make_mi_problem(const Matrix& P, cplx d, std::vector<Index> T, Index order,
                                                std::optional<IndexSets> sets = std::nullopt,
                                                const Tolerance& tol = {}) {
    require_square(P, "P");
    const Index m = P.rows();
    if (static_cast<Index>(T.size()) != m) throw Error("OrderMismatch", "T needs one entry per class");
    if (!close(d * d, double(order), tol)) throw Error("BadParameters", "d^2 differs from the order");
    Check c = compare(P * P, double(order) * transpose_permutation_matrix(T), tol);
    if (!c.ok) throw Error("NotFormallySelfDual", "P^2 != nT at " + c.detail);
    if (sets) {
        std::vector<int> seen(static_cast<std::size_t>(m), 0);
        for (const auto* part : {&sets->I, &sets->J})
            for (Index i : *part) {
                if (i < 0 || i >= m || seen[static_cast<std::size_t>(i)]++)
                    throw Error("BadParameters", "index sets must partition 0..m");
            }
        for (int v : seen)
            if (!v) throw Error("BadParameters", "index sets must partition 0..m");
        if (std::find(sets->I.begin(), sets->I.end(), Index(0)) == sets->I.end())
            throw Error("BadParameters", "class 0 must lie in I");
    }
    return {P, d, std::move(T), std::move(sets), order};
}

inline ModularInvarianceProblem make_mi_problem(const SchemeData& sd, cplx d, std::optional<IndexSets> sets = std::nullopt,
                                                const Tolerance& tol = {}) {
    return make_mi_problem(sd.P, d, sd.T, sd.n, std::move(sets), tol);
}

namespace detail {

inline void require_nonzero_weights(const Vector& t, const Tolerance& tol) {
    for (Index i = 0; i < t.size(); ++i)
        if (std::abs(t(i)) <= tol.abs_eps) throw Error("ZeroWeight", "t_" + std::to_string(i) + " is zero");
}

inline double cube_residual(const Matrix& P, const Vector& t, cplx rhs) {
    Matrix M = P * t.asDiagonal();
    Matrix R = M * M * M;
    R.diagonal().array() -= rhs;
    return R.cwiseAbs().maxCoeff();
}

inline Vector twisted(const Vector& t, const IndexSets& sets) {
    Vector u = t;
    for (Index j : sets.J) u(j) = -u(j);
    return u;
}

/// One equation (P diag(eps o s))^3 = sigma I.
struct CubeEquation {
    Vector eps;
    double sigma = 1.0;
};

/// Levenberg-Marquardt on all of s with the cube scale fixed to 1; fixing s_0 instead lets
/// starts drift to nilpotent PD. Returns s normalized to s_0 = 1 together with c = s_0^{-3}.
inline std::optional<std::pair<Vector, cplx>> newton_cube(const Matrix& P, const std::vector<CubeEquation>& eqs,
                                                          Vector s) {
    const Index m = P.rows();
    const Index neq = static_cast<Index>(eqs.size());
    auto evaluate = [&](const Vector& sv) {
        Vector F(neq * m * m);
        for (Index e = 0; e < neq; ++e) {
            Matrix M = P * eqs[e].eps.cwiseProduct(sv).asDiagonal();
            Matrix R = M * M * M;
            R.diagonal().array() -= eqs[e].sigma;
            F.segment(e * m * m, m * m) = vec(R);
        }
        return F;
    };
    auto jacobian = [&](const Vector& sv) {
        Matrix Jac(neq * m * m, m);
        for (Index e = 0; e < neq; ++e) {
            Matrix M = P * eqs[e].eps.cwiseProduct(sv).asDiagonal();
            Matrix M2 = M * M;
            for (Index k = 0; k < m; ++k) {
                Matrix PE = Matrix::Zero(m, m);
                PE.col(k) = eqs[e].eps(k) * P.col(k);
                Jac.block(e * m * m, k, m * m, 1) = vec(Matrix(PE * M2 + M * PE * M + M2 * PE));
            }
        }
        return Jac;
    };

    Vector F = evaluate(s);
    double r = F.squaredNorm();
    double mu = 1e-3;
    bool converged = false;
    for (int iter = 0; iter < 500; ++iter) {
        if (F.cwiseAbs().maxCoeff() < 1e-12) {
            converged = true;
            break;
        }
        Matrix Jac = jacobian(s);
        Matrix H = Jac.adjoint() * Jac;
        Vector g = Jac.adjoint() * F;
        bool improved = false;
        for (int k = 0; k < 40 && !improved; ++k) {
            Matrix Hm = H;
            Hm.diagonal().array() += mu * (1.0 + H.diagonal().array().abs());
            Vector s2 = s + Hm.ldlt().solve(-g);
            Vector F2 = evaluate(s2);
            double r2 = F2.squaredNorm();
            if (r2 < r) {
                s = s2;
                F = F2;
                r = r2;
                mu = std::max(mu / 3, 1e-12);
                improved = true;
            } else {
                mu *= 4;
            }
        }
        if (!improved) break;
    }
    if (!converged && F.cwiseAbs().maxCoeff() >= 1e-11) return std::nullopt;
    const double scale = s.cwiseAbs().maxCoeff();
    for (Index i = 0; i < m; ++i)
        if (!(std::abs(s(i)) > 1e-6 * scale)) return std::nullopt;
    return std::make_pair(Vector(s / s(0)), cplx(1.0) / std::pow(s(0), 3));
}

/// Deterministic order: lexicographic on (Re, Im) of s rounded to 1e-6, then on t_0.
inline void sort_solutions(std::vector<MISolution>& sols) {
    auto key = [](const MISolution& x) {
        std::vector<long long> k;
        for (Index i = 0; i < x.s.size(); ++i) {
            k.push_back(std::llround(x.s(i).real() * 1e6));
            k.push_back(std::llround(x.s(i).imag() * 1e6));
        }
        k.push_back(std::llround(x.scale.real() * 1e6));
        k.push_back(std::llround(x.scale.imag() * 1e6));
        return k;
    };
    std::stable_sort(sols.begin(), sols.end(), [&](const MISolution& a, const MISolution& b) { return key(a) < key(b); });
}

/// Multi-start solve of the projective system; distinct classes s (s_0 = 1) with their cube scale c.
inline std::vector<std::pair<Vector, cplx>> multistart(const Matrix& P, const std::vector<CubeEquation>& eqs,
                                                        int starts, std::uint64_t seed) {
    const Index m = P.rows();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2 * M_PI);
    std::vector<std::pair<Vector, cplx>> found;
    // row 0 of P holds the valencies, so its sum is the order and P / sqrt(order) is unitary-like
    const double radius = 1.0 / std::sqrt(std::abs(P.row(0).sum()));
    for (int k = 0; k < starts; ++k) {
        Vector s(m);
        for (Index i = 0; i < m; ++i) s(i) = std::polar(radius, angle(rng));
        auto r = newton_cube(P, eqs, s);
        if (!r) continue;
        bool dup = false;
        for (const auto& f : found)
            if ((f.first - r->first).cwiseAbs().maxCoeff() < 1e-6) dup = true;
        if (!dup) found.push_back(*r);
    }
    return found;
}

}  // namespace detail

/// max |(PD)^3 - t_0 d^3 I|.
inline double check_modular_invariance(const ModularInvarianceProblem& p, const Vector& t, const Tolerance& tol = {}) {
    if (t.size() != p.size()) throw Error("OrderMismatch", "t needs one weight per class");
    detail::require_nonzero_weights(t, tol);
    return detail::cube_residual(p.P, t, t(0) * p.d * p.d * p.d);
}

/// Worst residual of (P(D_I + D_J))^3 = t_0 d^3 I and (P(D_I - D_J))^3 = -t_0 d^3 I.
inline double check_twisted(const ModularInvarianceProblem& p, const Vector& t, const Tolerance& tol = {}) {
    if (!p.index_sets) throw Error("BadParameters", "index sets are required");
    if (t.size() != p.size()) throw Error("OrderMismatch", "t needs one weight per class");
    detail::require_nonzero_weights(t, tol);
    const cplx rhs = t(0) * p.d * p.d * p.d;
    return std::max(detail::cube_residual(p.P, t, rhs), detail::cube_residual(p.P, detail::twisted(t, *p.index_sets), -rhs));
}

namespace detail {

inline std::vector<MISolution> finish(const ModularInvarianceProblem& p, const std::vector<std::pair<Vector, cplx>>& proj,
                                      bool twisted_eq, const Tolerance& tol) {
    std::vector<MISolution> out;
    const cplx d3 = p.d * p.d * p.d;
    for (const auto& [s, c] : proj) {
        const cplx lambda = std::sqrt(d3 / c);
        for (double sign : {1.0, -1.0}) {
            MISolution sol;
            sol.scale = sign * lambda;
            sol.s = s;
            sol.t = sol.scale * s;
            sol.residual = twisted_eq ? check_twisted(p, sol.t, tol) : check_modular_invariance(p, sol.t, tol);
            out.push_back(sol);
        }
    }
    sort_solutions(out);
    return out;
}

}  // namespace detail

/// All solutions of (PD)^3 = t_0 d^3 I found by closed form (m+1 = 2) or multi-start Newton (m+1 <= 6).
/// Each projective class s (s_0 = 1) is returned with both scales t = +-lambda s.
inline std::vector<MISolution> solve_modular_invariance(const ModularInvarianceProblem& p, const Tolerance& tol = {},
                                                        int starts = 64, std::uint64_t seed = 0) {
    const Index m = p.size();
    if (m > 6) throw Error("BadParameters", "solve_modular_invariance handles at most 6 classes");
    std::vector<std::pair<Vector, cplx>> proj;
    if (m == 1) {
        proj.push_back({Vector::Ones(1), std::pow(p.P(0, 0), 3)});
    } else if (m == 2) {
        // M = P diag(1, x) has M^3 scalar iff its eigenvalues differ by a cube root of unity: tr(M)^2 = det(M).
        const cplx a = p.P(1, 1) * p.P(1, 1);
        const cplx b = 2.0 * p.P(0, 0) * p.P(1, 1) - p.P.determinant();
        const cplx c0 = p.P(0, 0) * p.P(0, 0);
        const cplx disc = std::sqrt(b * b - 4.0 * a * c0);
        for (cplx x : {(-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a)}) {
            Vector s(2);
            s << 1.0, x;
            Matrix M = p.P * s.asDiagonal();
            cplx c = Matrix(M * M * M)(0, 0);
            bool dup = false;
            for (const auto& f : proj)
                if ((f.first - s).cwiseAbs().maxCoeff() < 1e-6) dup = true;
            if (!dup && std::abs(x) > 1e-12 && std::abs(c) > 1e-12) proj.push_back({s, c});
        }
    } else {
        proj = detail::multistart(p.P, {{Vector::Ones(m), 1.0}}, starts, seed);
    }
    auto out = detail::finish(p, proj, false, tol);
    std::erase_if(out, [&](const MISolution& s) {
        return s.residual > tol.abs_eps + tol.rel_eps * std::abs(s.t(0) * p.d * p.d * p.d);
    });
    if (out.empty()) throw Error("NoConvergence", "no solution found from " + std::to_string(starts) + " starts");
    return out;
}

/// Solutions of the coupled equations for V and V'. Returns an empty list when none is found.
inline std::vector<MISolution> solve_twisted(const ModularInvarianceProblem& p, const Tolerance& tol = {},
                                             int starts = 64, std::uint64_t seed = 0) {
    if (!p.index_sets) throw Error("BadParameters", "index sets are required");
    const Index m = p.size();
    if (m > 24) throw Error("BadParameters", "solve_twisted handles at most 24 classes");
    Vector eps_j = detail::twisted(Vector::Ones(m), *p.index_sets);
    auto proj = detail::multistart(p.P, {{Vector::Ones(m), 1.0}, {eps_j, -1.0}}, starts, seed);
    auto out = detail::finish(p, proj, true, tol);
    std::erase_if(out, [&](const MISolution& s) {
        return s.residual > tol.abs_eps + tol.rel_eps * std::abs(s.t(0) * p.d * p.d * p.d);
    });
    return out;
}

// ---------------------------------------------------------------- search

/// Classes of an imprimitive scheme on 4n points: A_i^T inside the diagonal 2n-blocks (I) or outside (J).
inline IndexSets imprimitive_index_sets(const SchemeData& sd, const Tolerance& tol = {}) {
    if (sd.n % 4 != 0) throw Error("NotImprimitive", "order is not a multiple of 4");
    const Index h = sd.n / 2;
    const Matrix inside = kron(identity(2), ones(h));
    IndexSets sets;
    for (std::size_t i = 0; i < sd.schur_basis.size(); ++i) {
        const Matrix At = sd.schur_basis[i].transpose();
        const double in = At.cwiseProduct(inside).cwiseAbs().sum();
        const double total = At.cwiseAbs().sum();
        if (std::abs(in - total) <= tol.abs_eps) sets.I.push_back(static_cast<Index>(i));
        else if (in <= tol.abs_eps) sets.J.push_back(static_cast<Index>(i));
        else throw Error("NotImprimitive", "class " + std::to_string(i) + " meets both block patterns");
    }
    if (sets.J.empty()) throw Error("NotImprimitive", "no class outside the diagonal blocks");
    return sets;
}

struct SearchCandidate {
    MISolution solution;
    Matrix V;
    std::string outcome;  // "Step (f)", "Step (g)" or "pair"
    std::string detail;
    std::optional<JonesPair> pair;
};

struct SearchResult {
    IndexSets sets;
    std::vector<SearchCandidate> candidates;
    std::vector<std::string> log;

    std::vector<JonesPair> pairs() const {
        std::vector<JonesPair> out;
        for (const auto& c : candidates)
            if (c.pair) out.push_back(*c.pair);
        return out;
    }
};

/// Steps (a)-(g): sd must already be ordered by its duality (Theta(E_i) = A_i); d is the pair's loop variable.
inline SearchResult search_four_weight(const SchemeData& sd, cplx d, const Tolerance& tol = {}, int starts = 64,
                                       std::uint64_t seed = 0) {
    SearchResult res;
    res.sets = imprimitive_index_sets(sd, tol);
    res.log.push_back("Step (a): |I| = " + std::to_string(res.sets.I.size()) + ", |J| = " + std::to_string(res.sets.J.size()));
    Check ps = p_squared_check(sd, tol);
    if (!ps.ok) throw Error("NoDuality", "P^2 != nT for the supplied ordering: " + ps.detail);
    res.log.push_back("Steps (b)-(c): duality accepted, P^2 = nT");
    ModularInvarianceProblem p = make_mi_problem(sd, 2.0 * d, res.sets, tol);
    auto sols = solve_twisted(p, tol, starts, seed);
    if (sols.empty()) {
        res.log.push_back("Step (d): no solution");
        return res;
    }
    res.log.push_back("Step (d): " + std::to_string(sols.size()) + " solutions");
    for (const auto& sol : sols) {
        SearchCandidate cand;
        cand.solution = sol;
        cand.V = Matrix::Zero(sd.n, sd.n);
        for (std::size_t i = 0; i < sd.schur_basis.size(); ++i)
            cand.V += sol.t(static_cast<Index>(i)) * sd.schur_basis[i].transpose();
        try {
            JonesPair jp = extract_pair_from_V(cand.V, d, tol);
            if (jp.invertible) {
                cand.outcome = "pair";
                cand.pair = jp;
            } else {
                cand.outcome = "Step (g)";
                cand.detail = "not an invertible Jones pair: " + jp.residual.detail + jp.consequences.detail;
            }
        } catch (const Error& e) {
            cand.outcome = "Step (f)";
            cand.detail = e.what();
        }
        res.candidates.push_back(std::move(cand));
    }
    std::size_t f = 0, g = 0, ok = 0;
    for (const auto& c : res.candidates) (c.outcome == "pair" ? ok : c.outcome == "Step (f)" ? f : g)++;
    res.log.push_back("Step (f): " + std::to_string(f) + " candidates without the V structure");
    res.log.push_back("Step (g): " + std::to_string(g) + " candidates not invertible Jones pairs");
    res.log.push_back("pairs recovered: " + std::to_string(ok));
    return res;
}

/// Scheme of N_V ordered by Theta_V; the pairing used by search_four_weight on the N_V of a known pair.
inline SchemeData nv_scheme(const VBundle& vb, const Tolerance& tol = {}) {
    NomuraData nv = nomura_algebra_of(vb.V, tol);
    SchemeData sd = scheme_from_space(nv.space, tol);
    SelfDualityReport rep = check_formal_self_duality(sd, theta_on_schur_basis(nv, sd), tol);
    if (!rep.ok) throw Error("NoDuality", "Theta_V is not a formal duality: " + rep.p_squared.detail);
    return rep.reordered;
}

/// Weights t_i with W = sum t_i A_i^T, or nullopt if W is not constant on the classes.
inline std::optional<Vector> class_weights(const SchemeData& sd, const Matrix& W, const Tolerance& tol = {}) {
    const Index m = static_cast<Index>(sd.schur_basis.size());
    Vector t(m);
    Matrix rebuilt = Matrix::Zero(sd.n, sd.n);
    for (Index i = 0; i < m; ++i) {
        const Matrix At = sd.schur_basis[static_cast<std::size_t>(i)].transpose();
        t(i) = W.cwiseProduct(At).sum() / At.sum();
        rebuilt += t(i) * At;
    }
    if (!approx_equal(rebuilt, W, tol)) return std::nullopt;
    return t;
}

}  // namespace spinlab
