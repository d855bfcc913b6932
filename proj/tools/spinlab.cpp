// spinlab: JSON front end for the library.
//
// Exit codes: 0 success, 1 verification failure or mathematical error, 2 usage or input error.

#include "spinlab/braid.hpp"
#include "spinlab/io.hpp"
#include "spinlab/modular.hpp"
#include "spinlab/scheme.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>

using namespace spinlab;
using io::json;

namespace {

struct RunConfig {
    Tolerance tol;
    std::optional<double> tol_override;
    std::optional<double> rank_override;
    std::uint64_t seed = 0;
    int starts = 64;
    std::string output;  // report path, stdout when empty
};

struct Outcome {
    json report = json::object();
    bool ok = true;
};

// ---------------------------------------------------------------- argument helpers

/// "re", "re,im" or "[re,im]".
cplx parse_complex(const std::string& text, const std::string& flag) {
    std::string s = text;
    s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == '[' || c == ']' || c == ' '; }), s.end());
    const auto comma = s.find(',');
    auto num = [&](const std::string& part) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(part, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (part.empty() || used != part.size()) throw io::bad_input(flag + ": cannot parse '" + text + "' as a number");
        return v;
    };
    if (comma == std::string::npos) return num(s);
    return {num(s.substr(0, comma)), num(s.substr(comma + 1))};
}

std::vector<Index> parse_indices(const std::string& text, const std::string& flag) {
    std::vector<Index> out;
    std::string s = text;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) {
        std::size_t used = 0;
        long v = 0;
        try {
            v = std::stol(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size()) throw io::bad_input(flag + ": bad index '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

/// "0,1;2,3" -> {{0,1},{2,3}}
std::vector<std::vector<Index>> parse_classes(const std::string& text, const std::string& flag) {
    std::vector<std::vector<Index>> out;
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ';')) out.push_back(parse_indices(part, flag));
    return out;
}

/// A matrix file, or the W of a spin model bundle.
Matrix load_matrix(const std::string& path) {
    json j = io::read_json_file(path);
    if (j.is_object() && !j.contains("entries") && j.contains("W")) return io::matrix_from_json(j["W"], path + ": W");
    return io::matrix_from_json(j, path);
}

JonesPair load_pair(const std::string& path, const Tolerance& tol, int d_sign = 1) {
    auto [A, B] = io::pair_from_json(io::read_json_file(path));
    return check_jones_pair(A, B, tol, d_sign);
}

SchemeData load_scheme(const std::string& path, const Tolerance& tol) {
    io::SchemeFile f = io::scheme_file_from_json(io::read_json_file(path));
    SchemeData sd = validate_scheme(RawScheme{f.schur_basis}, tol);
    if (f.theta_pairing) sd = apply_pairing(sd, *f.theta_pairing, tol);
    return sd;
}

int sign_of(const std::string& s) {
    if (s == "+" || s == "+1" || s == "1") return 1;
    if (s == "-" || s == "-1") return -1;
    throw io::bad_input("--d-sign must be + or -");
}

/// Rounds near-01 matrices to exact 0/1 so scheme files stay exact.
Matrix round01(const Matrix& M) {
    Matrix R = M;
    for (Index i = 0; i < R.rows(); ++i)
        for (Index j = 0; j < R.cols(); ++j) R(i, j) = std::round(R(i, j).real());
    return R;
}

// ---------------------------------------------------------------- report helpers

json flags_json(const SubspaceFlags& f) {
    return {{"contains_identity", f.contains_identity}, {"contains_all_ones", f.contains_all_ones},
            {"schur_closed", f.schur_closed},           {"transpose_closed", f.transpose_closed},
            {"mult_closed", f.mult_closed},             {"commutative", f.commutative}};
}

json pair_report(const JonesPair& jp) {
    json j = {{"n", jp.A.rows()},
              {"one_sided", jp.one_sided},
              {"two_sided", jp.two_sided},
              {"invertible", jp.invertible},
              {"residual", io::check_to_json(jp.residual)}};
    if (jp.invertible) {
        j["d"] = io::complex_to_json(jp.d);
        j["a"] = io::complex_to_json(jp.a);
        j["consequences"] = io::check_to_json(jp.consequences);
    }
    return j;
}

json spin_bundle(const SpinModel& m) {
    return {{"W", io::matrix_to_json(m.W)}, {"d", io::complex_to_json(m.d)}, {"a", io::complex_to_json(m.a)}};
}

json spin_report_json(const SpinReport& r) {
    return {{"cond_I", io::check_to_json(r.cond_I)},
            {"cond_II", io::check_to_json(r.cond_II)},
            {"cond_III", io::check_to_json(r.cond_III)},
            {"bridge", io::check_to_json(r.bridge)}};
}

json scheme_json(const SchemeData& sd) {
    json T = json::array();
    for (Index t : sd.T) T.push_back(t);
    json P = json::array();
    for (Index j = 0; j < sd.P.rows(); ++j) {
        json row = json::array();
        for (Index i = 0; i < sd.P.cols(); ++i) row.push_back(io::complex_to_json(sd.P(j, i)));
        P.push_back(row);
    }
    return {{"n", sd.n}, {"classes", sd.schur_basis.size()}, {"T", T}, {"P", P}};
}

json solution_json(const MISolution& s) {
    return {{"t", io::vector_to_json(s.t)},
            {"s", io::vector_to_json(s.s)},
            {"scale", io::complex_to_json(s.scale)},
            {"residual", s.residual}};
}

json sets_json(const IndexSets& s) { return {{"I", s.I}, {"J", s.J}}; }

void write_if(const std::string& path, const json& j) {
    if (!path.empty()) io::write_json_file(path, j);
}

// ---------------------------------------------------------------- commands

struct Cli {
    CLI::App app{"spinlab: Nomura algebras, Jones pairs, spin models and association schemes"};
    RunConfig cfg;
    std::string command;
    std::function<Outcome()> handler;

    // shared option storage
    std::string a, b, w, v, pair, bundle, scheme, out, pair_out, scheme_out, d_text, d_sign = "+", word, classes, subset, orders,
        h_path, omega_text, u_text;
    bool schur_inverse_b = false, normalize = false, twisted = false, even = false;
    int n = 0, root = 0, eps = 1, strands = 3;
    long pairing_n = 0;

    void on(CLI::App* sub, std::string name, std::function<Outcome()> f) {
        sub->callback([this, name = std::move(name), f = std::move(f)] {
            command = name;
            handler = f;
        });
    }

    cplx d_value() const { return parse_complex(d_text, "--d"); }

    Cli() {
        app.require_subcommand(1);
        app.add_option("--tol", cfg.tol_override, "absolute and relative tolerance (overrides SPINLAB_TOL)");
        app.add_option("--rank-tol", cfg.rank_override, "relative rank cutoff");
        app.add_option("--seed", cfg.seed, "seed for randomized starts and probes");
        app.add_option("--starts", cfg.starts, "multi-start count for the modular-invariance solver")
            ->check(CLI::PositiveNumber);
        app.add_option("-o,--output", cfg.output, "write the report here instead of stdout");

        add_nomura();
        add_jones();
        add_spin();
        add_construct();
        add_mi();
        add_braid();
        add_scheme();
    }

    void add_nomura() {
        auto* s = app.add_subcommand("nomura", "Nomura algebra N_{A,B} and its duality map");
        s->add_option("--a", a, "matrix file")->required();
        s->add_option("--b", b, "matrix file; defaults to the Schur inverse of A");
        s->add_flag("--schur-inverse-b", schur_inverse_b, "use the Schur inverse of B");
        s->add_option("--out", out, "bundle {dim, basis, theta}");
        on(s, "nomura", [this] {
            const Tolerance& tol = cfg.tol;
            Matrix A = load_matrix(a);
            Matrix B = b.empty() ? schur_inverse(A, tol) : load_matrix(b);
            if (schur_inverse_b) B = schur_inverse(B, tol);
            NomuraData nd = nomura_algebra(A, B, tol);
            const SubspaceFlags f = compute_flags(nd.space, tol);
            Outcome o;
            o.report["dim"] = nd.space.dim();
            o.report["flags"] = flags_json(f);
            o.report["dual_dim"] = nd.dual_space.dim();
            json bundle = {{"dim", nd.space.dim()},
                           {"basis", io::matrices_to_json(nd.space.basis())},
                           {"theta", io::matrices_to_json(nd.theta_images)}};
            if (out.empty())
                o.report["bundle"] = bundle;
            else
                io::write_json_file(out, bundle);
            return o;
        });
    }

    void add_jones() {
        auto* g = app.add_subcommand("jones", "Jones pairs and four-weight spin models");
        g->require_subcommand(1);

        auto* c = g->add_subcommand("check", "classify (A, B)");
        c->add_option("--a", a, "matrix file")->required();
        c->add_option("--b", b, "matrix file")->required();
        c->add_option("--d-sign", d_sign, "sign of d = +-sqrt(n)");
        on(c, "jones check", [this] {
            JonesPair jp = check_jones_pair(load_matrix(a), load_matrix(b), cfg.tol, sign_of(d_sign));
            return Outcome{pair_report(jp), jp.one_sided};
        });

        auto* t4 = g->add_subcommand("to4wt", "invertible Jones pair to four-weight bundle");
        t4->add_option("--pair", pair, "pair file {A, B}")->required();
        t4->add_option("--d-sign", d_sign, "sign of d");
        t4->add_option("--out", out, "four-weight bundle file");
        on(t4, "jones to4wt", [this] {
            JonesPair jp = load_pair(pair, cfg.tol, sign_of(d_sign));
            FourWeightSpinModel m = to_four_weight(jp, cfg.tol);
            Check c = validate_four_weight(m, cfg.tol);
            Outcome o{{{"pair", pair_report(jp)}, {"four_weight", io::check_to_json(c)}}, c.ok};
            if (out.empty())
                o.report["bundle"] = io::four_weight_to_json(m);
            else
                io::write_json_file(out, io::four_weight_to_json(m));
            return o;
        });

        auto* f4 = g->add_subcommand("from4wt", "four-weight bundle to Jones pair");
        f4->add_option("--bundle", bundle, "four-weight bundle file")->required();
        f4->add_option("--out", out, "pair file");
        on(f4, "jones from4wt", [this] {
            FourWeightSpinModel m = io::four_weight_from_json(io::read_json_file(bundle));
            JonesPair jp = from_four_weight(m, cfg.tol);
            Outcome o{{{"pair", pair_report(jp)}}, jp.invertible};
            if (out.empty())
                o.report["bundle"] = io::pair_to_json(jp.A, jp.B);
            else
                io::write_json_file(out, io::pair_to_json(jp.A, jp.B));
            return o;
        });

        auto* sy = g->add_subcommand("symmetrize", "odd gauge making A symmetric, or --even for B");
        sy->add_option("--pair", pair, "pair file")->required();
        sy->add_flag("--even", even, "symmetrize B by the even gauge");
        sy->add_option("--out", out, "pair file");
        on(sy, "jones symmetrize", [this] {
            JonesPair jp = load_pair(pair, cfg.tol);
            Outcome o;
            JonesPair res;
            if (even) {
                EvenSymmetrization s = symmetrize_even(jp, cfg.tol);
                res = s.pair;
                o.report["order"] = s.order;
            } else {
                res = symmetrize_odd(jp, cfg.tol).pair;
            }
            o.report["pair"] = pair_report(res);
            o.report["symmetric_A"] = approx_equal(res.A, res.A.transpose(), cfg.tol);
            o.report["symmetric_B"] = approx_equal(res.B, res.B.transpose(), cfg.tol);
            o.ok = res.invertible;
            if (out.empty())
                o.report["bundle"] = io::pair_to_json(res.A, res.B);
            else
                io::write_json_file(out, io::pair_to_json(res.A, res.B));
            return o;
        });

        auto* ix = g->add_subcommand("index", "index of a spin model");
        ix->add_option("--w", w, "matrix file")->required();
        ix->add_option("--d", d_text, "loop variable, re or re,im")->required();
        on(ix, "jones index", [this] {
            Matrix W = load_matrix(w);
            const cplx d = d_value();
            IndexReport r = spin_index(SpinModel{W, d, W(0, 0)}, cfg.tol);
            return Outcome{{{"index", r.index}, {"P", io::matrix_to_json(r.P)}, {"djd", io::check_to_json(r.djd)}},
                           r.djd.ok};
        });
    }

    void add_spin() {
        auto* g = app.add_subcommand("spin", "spin models");
        g->require_subcommand(1);

        auto* ve = g->add_subcommand("verify", "conditions (I)-(III)");
        ve->add_option("--w", w, "matrix file")->required();
        ve->add_option("--d", d_text, "loop variable, re or re,im")->required();
        on(ve, "spin verify", [this] {
            SpinReport r = spin_model_report(load_matrix(w), d_value(), cfg.tol);
            return Outcome{spin_report_json(r), r.ok()};
        });

        auto* mk = g->add_subcommand("make", "build a model and write its bundle");
        mk->require_subcommand(1);
        auto emit_model = [this](const SpinModel& m, json report) {
            if (!pair_out.empty()) {
                JonesPair jp = jones_pair_of(m, cfg.tol);
                io::write_json_file(pair_out, io::pair_to_json(jp.A, jp.B));
                report["pair_d"] = io::complex_to_json(jp.d);
            }
            if (out.empty())
                report["bundle"] = spin_bundle(m);
            else
                io::write_json_file(out, spin_bundle(m));
            return Outcome{report, true};
        };
        auto emit = [this](const json& bundle, json report) {
            if (out.empty())
                report["bundle"] = bundle;
            else
                io::write_json_file(out, bundle);
            return Outcome{report, true};
        };

        auto* po = mk->add_subcommand("potts", "Potts model");
        po->add_option("--n", n, "order")->required();
        po->add_option("--root", root, "root choice 0..7")->check(CLI::Range(0, 7));
        po->add_option("--out", out, "bundle file");
        po->add_option("--pair-out", pair_out, "Jones pair file (W/d, inv_s(W)^T)");
        on(po, "spin make potts", [this, emit_model] {
            SpinModel m = potts(n, root, cfg.tol);
            return emit_model(m, {{"n", n}, {"d", io::complex_to_json(m.d)}});
        });

        auto* cy = mk->add_subcommand("cyclic", "cyclic model, odd n");
        cy->add_option("--n", n, "order")->required();
        cy->add_option("--omega", omega_text, "primitive n-th root, re,im");
        cy->add_option("--out", out, "bundle file");
        cy->add_option("--pair-out", pair_out, "Jones pair file (W/d, inv_s(W)^T)");
        on(cy, "spin make cyclic", [this, emit_model] {
            std::optional<cplx> om;
            if (!omega_text.empty()) om = parse_complex(omega_text, "--omega");
            SpinModel m = cyclic_spin_model(n, om, cfg.tol);
            return emit_model(m, {{"n", n}, {"d", io::complex_to_json(m.d)}});
        });

        auto* hd = mk->add_subcommand("hadamard", "4n x 4n model from a Hadamard matrix");
        hd->add_option("--hadamard", h_path, "Hadamard matrix file; default the 4x4 Sylvester matrix");
        hd->add_option("--eps", eps, "+1 or -1")->check(CLI::IsMember({1, -1}));
        hd->add_option("--omega", omega_text, "omega with omega^4 = eps, re,im");
        hd->add_option("--u", u_text, "Potts parameter u with (u^2 + u^-2)^2 = n, re,im");
        hd->add_option("--out", out, "bundle file");
        hd->add_option("--pair-out", pair_out, "Jones pair file (W/d, inv_s(W)^T)");
        on(hd, "spin make hadamard", [this, emit_model] {
            Matrix H;
            if (h_path.empty()) {
                H.resize(4, 4);
                H << 1, 1, 1, 1, 1, -1, 1, -1, 1, 1, -1, -1, 1, -1, -1, 1;
            } else {
                H = load_matrix(h_path);
            }
            const double hn = double(H.rows());
            cplx omega = eps == 1 ? cplx(1.0) : std::polar(1.0, M_PI / 4);
            if (!omega_text.empty()) omega = parse_complex(omega_text, "--omega");
            // u^2 is a root of x^2 - sqrt(n) x + 1
            cplx u = std::sqrt((std::sqrt(hn) + std::sqrt(cplx(hn - 4.0))) / 2.0);
            if (!u_text.empty()) u = parse_complex(u_text, "--u");
            SpinModel m = hadamard_spin_model(H, eps, omega, u, cfg.tol);
            return emit_model(m, {{"n", m.n()}, {"d", io::complex_to_json(m.d)}, {"eps", eps}});
        });

        auto* ab = mk->add_subcommand("abelian", "character table of a product of cyclic groups (type II only)");
        ab->add_option("--orders", orders, "cyclic orders, e.g. 2,2")->required();
        ab->add_option("--out", out, "bundle file");
        on(ab, "spin make abelian", [this, emit] {
            std::vector<Index> ords = parse_indices(orders, "--orders");
            Matrix P = abelian_character_matrix(ords);
            Check c = type_ii_check(P, cfg.tol);
            Outcome o = emit({{"W", io::matrix_to_json(P)}}, {{"n", P.rows()}, {"type_ii", io::check_to_json(c)}});
            o.ok = c.ok;
            return o;
        });
    }

    void add_construct() {
        auto* g = app.add_subcommand("construct", "W and V constructions and derived algebras");
        g->require_subcommand(1);

        auto* cw = g->add_subcommand("w", "W from an invertible Jones pair");
        cw->add_option("--pair", pair, "pair file")->required();
        cw->add_option("--out", out, "matrix file for W");
        on(cw, "construct w", [this] {
            WBundle wb = build_W(load_pair(pair, cfg.tol), cfg.tol);
            NWReport r = verify_NW_structure(wb, cfg.tol, false);
            write_if(out, io::matrix_to_json(wb.W));
            json rep = {{"dims", {{"N_A", r.dim_A}, {"N_AB", r.dim_AB}, {"N_W", r.dim_W}, {"N_WT", r.dim_WT}}},
                        {"w_equals_wt", r.w_equals_wt},
                        {"dimension", io::check_to_json(r.dimension)},
                        {"schur_basis", io::check_to_json(r.schur_basis)},
                        {"principal_basis", io::check_to_json(r.principal_basis)},
                        {"memberships", io::check_to_json(r.memberships)},
                        {"self_dual_consequence", io::check_to_json(r.self_dual_consequence)}};
            if (r.spin_scalar) rep["spin_scalar"] = io::complex_to_json(*r.spin_scalar);
            return Outcome{rep, r.ok()};
        });

        auto* cv = g->add_subcommand("v", "V from an invertible Jones pair");
        cv->add_option("--pair", pair, "pair file")->required();
        cv->add_option("--d-sign", d_sign, "sign of the pair's d");
        cv->add_option("--out", out, "matrix file for V");
        cv->add_option("--scheme-out", scheme_out, "scheme file of N_V with its duality pairing");
        on(cv, "construct v", [this] {
            const Tolerance& tol = cfg.tol;
            VBundle vb = build_V(load_pair(pair, tol, sign_of(d_sign)), tol);
            NVReport r = verify_NV_structure(vb, tol, false, cfg.seed);
            write_if(out, io::matrix_to_json(vb.V));
            if (!scheme_out.empty()) {
                SchemeData ordered = nv_scheme(vb, tol);
                io::SchemeFile f;
                for (const auto& Ai : ordered.schur_basis) f.schur_basis.push_back(round01(Ai));
                SchemeData base = validate_scheme(RawScheme{f.schur_basis}, tol);
                f.theta_pairing = pairing_between(base, ordered, tol);
                io::write_json_file(scheme_out, io::scheme_file_to_json(f));
            }
            json rep = {{"dims", {{"n", r.n}, {"N_A", r.r}, {"N_V", r.dim_V}, {"subscheme", r.subscheme_dim}}},
                        {"flags",
                         {{"lower_bound", r.lower_bound}, {"upper_bound", r.upper_bound}, {"equals_4r", r.equals_4r}}},
                        {"loop", io::complex_to_json(2.0 * vb.d)},
                        {"verification", io::check_to_json(vb.verification)},
                        {"pairing_element", io::check_to_json(r.pairing_element)},
                        {"pattern", io::check_to_json(r.pattern)},
                        {"side_conditions", io::check_to_json(r.side_conditions)},
                        {"h_conditions", io::check_to_json(r.h_conditions)},
                        {"theta_blocks", io::check_to_json(r.theta_blocks)},
                        {"image_membership", io::check_to_json(r.image_membership)},
                        {"transpose_relation", io::check_to_json(r.transpose_relation)},
                        {"self_duality", io::check_to_json(r.self_duality)},
                        {"subscheme", io::check_to_json(r.subscheme)}};
            return Outcome{rep, r.ok() && vb.verification.ok};
        });

        auto* ex = g->add_subcommand("extract", "read (A, B) off V");
        ex->add_option("--v", v, "matrix file")->required();
        ex->add_option("--d", d_text, "the pair's loop variable")->required();
        ex->add_option("--out", out, "pair file");
        on(ex, "construct extract", [this] {
            JonesPair jp = extract_pair_from_V(load_matrix(v), d_value(), cfg.tol);
            Outcome o{{{"pair", pair_report(jp)}}, jp.invertible};
            if (out.empty())
                o.report["bundle"] = io::pair_to_json(jp.A, jp.B);
            else
                io::write_json_file(out, io::pair_to_json(jp.A, jp.B));
            return o;
        });

        auto* qu = g->add_subcommand("quotient", "quotient of N_A by an equitable partition");
        qu->add_option("--a", a, "type-II matrix file")->required();
        auto* cl = qu->add_option("--classes", classes, "classes, e.g. \"0,2;1,3\"");
        qu->add_option("--pairing", pairing_n, "classes {b+i, b+n+i} for blocks of size 2n")->excludes(cl);
        on(qu, "construct quotient", [this] {
            Matrix A = load_matrix(a);
            if (classes.empty() && pairing_n <= 0) throw io::bad_input("quotient needs --classes or --pairing");
            EquitablePartition part = classes.empty() ? pairing_partition(A.rows(), pairing_n)
                                                      : make_partition(A.rows(), parse_classes(classes, "--classes"));
            NomuraData nd = nomura_algebra_of(A, cfg.tol);
            MatrixSubspace q = quotient_algebra(nd.space, part, cfg.tol);
            BoseMesnerReport bm = is_bose_mesner(q, cfg.tol);
            json rep = {{"dims", {{"N_A", nd.space.dim()}, {"quotient", q.dim()}, {"classes", part.classes.size()}}},
                        {"flags", flags_json(q.flags)},
                        {"bose_mesner", bm.ok}};
            if (!bm.ok) rep["failure"] = bm.failure;
            return Outcome{rep, true};
        });

        auto* in = g->add_subcommand("induce", "span of principal submatrices of N_A on a subset");
        in->add_option("--a", a, "type-II matrix file")->required();
        in->add_option("--subset", subset, "indices, e.g. 0,1,2")->required();
        on(in, "construct induce", [this] {
            NomuraData nd = nomura_algebra_of(load_matrix(a), cfg.tol);
            InducedSpace s = induced_space(nd.space, parse_indices(subset, "--subset"), cfg.tol);
            json rep = {{"dims", {{"N_A", nd.space.dim()}, {"induced", s.space.dim()}}},
                        {"flags", flags_json(s.bose_mesner.flags)},
                        {"bose_mesner", s.bose_mesner.ok}};
            if (!s.bose_mesner.ok) rep["failure"] = s.bose_mesner.failure;
            return Outcome{rep, true};
        });

        auto* d2 = g->add_subcommand("dim2", "classify a pair whose Nomura algebra has dimension two");
        d2->add_option("--pair", pair, "pair file")->required();
        on(d2, "construct dim2", [this] {
            Dim2Report r = dim2_classify(load_pair(pair, cfg.tol), cfg.tol);
            json rep = {{"k", r.k},
                        {"lambda", r.lambda},
                        {"a", io::complex_to_json(r.a)},
                        {"b", io::complex_to_json(r.b)},
                        {"design", io::check_to_json(r.design)},
                        {"symmetric_A", r.symmetric_A}};
            if (r.symmetric_A) rep["two_graph"] = io::check_to_json(r.two_graph);
            return Outcome{rep, r.ok()};
        });
    }

    void add_mi() {
        auto* g = app.add_subcommand("mi", "modular invariance");
        g->require_subcommand(1);

        auto* ch = g->add_subcommand("check", "residual of the equation for W = sum t_i A_i^T");
        ch->add_option("--scheme", scheme, "scheme file")->required();
        ch->add_option("--d", d_text, "loop variable with d^2 = n")->required();
        ch->add_option("--w", w, "matrix file constant on the classes")->required();
        ch->add_flag("--twisted", twisted, "coupled system of an imprimitive scheme");
        on(ch, "mi check", [this] {
            const Tolerance& tol = cfg.tol;
            SchemeData sd = load_scheme(scheme, tol);
            std::optional<IndexSets> sets;
            if (twisted) sets = imprimitive_index_sets(sd, tol);
            auto p = make_mi_problem(sd, d_value(), sets, tol);
            auto t = class_weights(sd, load_matrix(w), tol);
            if (!t) throw Error("NotInAlgebra", "W is not constant on the classes of the scheme");
            const double res = twisted ? check_twisted(p, *t, tol) : check_modular_invariance(p, *t, tol);
            const double scale = std::abs((*t)(0) * std::pow(p.d, 3));
            const bool ok = res <= tol.abs_eps + tol.rel_eps * scale;
            return Outcome{{{"weights", io::vector_to_json(*t)}, {"residual", res}, {"satisfied", ok}}, ok};
        });

        auto* so = g->add_subcommand("solve", "all weight vectors solving the equation");
        so->add_option("--scheme", scheme, "scheme file")->required();
        so->add_option("--d", d_text, "loop variable with d^2 = n")->required();
        so->add_flag("--twisted", twisted, "coupled system of an imprimitive scheme");
        on(so, "mi solve", [this] {
            const Tolerance& tol = cfg.tol;
            SchemeData sd = load_scheme(scheme, tol);
            std::optional<IndexSets> sets;
            if (twisted) sets = imprimitive_index_sets(sd, tol);
            auto p = make_mi_problem(sd, d_value(), sets, tol);
            auto sols = twisted ? solve_twisted(p, tol, cfg.starts, cfg.seed)
                                : solve_modular_invariance(p, tol, cfg.starts, cfg.seed);
            json arr = json::array();
            for (const auto& s : sols) arr.push_back(solution_json(s));
            json rep = {{"scheme", scheme_json(sd)}, {"solutions", arr}};
            if (sets) rep["index_sets"] = sets_json(*sets);
            return Outcome{rep, !sols.empty()};
        });

        auto* se = g->add_subcommand("search", "four-weight spin models from an imprimitive self-dual scheme");
        se->add_option("--scheme", scheme, "scheme file, ordered by its duality")->required();
        se->add_option("--d", d_text, "loop variable of the pair (V has loop 2d)")->required();
        se->add_option("--out", out, "pair file for the first recovered pair");
        on(se, "mi search", [this] {
            const Tolerance& tol = cfg.tol;
            SchemeData sd = load_scheme(scheme, tol);
            SearchResult r = search_four_weight(sd, d_value(), tol, cfg.starts, cfg.seed);
            json cands = json::array();
            for (const auto& c : r.candidates) {
                json j = {{"outcome", c.outcome}, {"solution", solution_json(c.solution)}};
                if (!c.detail.empty()) j["detail"] = c.detail;
                if (c.pair) j["pair"] = io::pair_to_json(c.pair->A, c.pair->B);
                cands.push_back(j);
            }
            auto pairs = r.pairs();
            if (!pairs.empty()) write_if(out, io::pair_to_json(pairs.front().A, pairs.front().B));
            return Outcome{{{"index_sets", sets_json(r.sets)},
                            {"log", r.log},
                            {"candidates", cands},
                            {"pairs_recovered", pairs.size()}},
                           !pairs.empty()};
        });
    }

    void add_braid() {
        auto* g = app.add_subcommand("braid", "braid group representations");
        g->require_subcommand(1);

        auto* re = g->add_subcommand("relations", "braid relations of the representation");
        re->add_option("--pair", pair, "pair file")->required();
        re->add_option("--strands", strands, "number of strands m")->check(CLI::Range(2, 64));
        on(re, "braid relations", [this] {
            auto [A, B] = io::pair_from_json(io::read_json_file(pair));
            BraidRep rep = build_rep(A, B, strands, cfg.tol);
            BraidReport r = verify_braid_relations(rep, cfg.tol);
            json adj = json::array();
            for (const auto& c : r.adjacent) adj.push_back(io::check_to_json(c));
            json far = json::array();
            for (const auto& [ij, c] : r.far) {
                json j = io::check_to_json(c);
                j["i"] = ij.first;
                j["j"] = ij.second;
                far.push_back(j);
            }
            return Outcome{{{"strands", strands},
                            {"dim", rep.dim()},
                            {"adjacent", adj},
                            {"far", far},
                            {"one_sided_AB", io::check_to_json(r.one_sided_AB)},
                            {"one_sided_ABT", io::check_to_json(r.one_sided_ABT)},
                            {"consistent", r.consistent}},
                           r.ok()};
        });

        auto* tr = g->add_subcommand("trace", "trace of a braid word");
        tr->add_option("--pair", pair, "pair file")->required();
        tr->add_option("--word", word, "signed generator indices, e.g. \"1 -2 1\"")->required();
        tr->add_option("--strands", strands, "number of strands m")->check(CLI::Range(2, 64));
        tr->add_flag("--normalize", normalize, "scale the pair by sqrt(n)/tr(A) first");
        on(tr, "braid trace", [this] {
            auto [A, B] = io::pair_from_json(io::read_json_file(pair));
            BraidWord bw = parse_braid_word(word, strands);
            BraidRep rep = build_rep(A, B, strands, cfg.tol);
            const cplx t = braid_trace(rep, bw, normalize);
            return Outcome{{{"strands", strands},
                            {"word", bw.letters},
                            {"normalized", normalize},
                            {"trace", io::complex_to_json(t)}},
                           true};
        });
    }

    void add_scheme() {
        auto* g = app.add_subcommand("scheme", "association scheme checks");
        g->require_subcommand(1);

        auto* va = g->add_subcommand("validate", "scheme axioms and eigenmatrices");
        va->add_option("--scheme", scheme, "scheme file")->required();
        on(va, "scheme validate", [this] {
            io::SchemeFile f = io::scheme_file_from_json(io::read_json_file(scheme));
            SchemeData sd = validate_scheme(RawScheme{f.schur_basis}, cfg.tol);
            json rep = {{"valid", true}};
            bool ok = true;
            if (f.theta_pairing) {
                sd = apply_pairing(sd, *f.theta_pairing, cfg.tol);
                Check c = p_squared_check(sd, cfg.tol);
                rep["p_squared"] = io::check_to_json(c);
                ok = c.ok;
            }
            rep["scheme"] = scheme_json(sd);
            return Outcome{rep, ok};
        });

        auto* tri = g->add_subcommand("triply", "triple regularity by direct counting");
        tri->add_option("--scheme", scheme, "scheme file")->required();
        on(tri, "scheme triply", [this] {
            io::SchemeFile f = io::scheme_file_from_json(io::read_json_file(scheme));
            SchemeData sd = validate_scheme(RawScheme{f.schur_basis}, cfg.tol);
            TriplyReport r = triply_regular_check(sd);
            json rep = {{"triply_regular", r.triply_regular}, {"types", r.kappa.size()}};
            if (!r.triply_regular) rep["witness"] = r.witness;
            return Outcome{rep, r.triply_regular};
        });

        auto* hy = g->add_subcommand("hyperdual", "conjugation identities of Lambda");
        hy->add_option("--w", w, "matrix file")->required();
        hy->add_option("--d", d_text, "loop variable")->required();
        on(hy, "scheme hyperdual", [this] {
            HyperReport r = hyper_duality_check(load_matrix(w), d_value(), cfg.tol);
            return Outcome{{{"lambda_forms", io::check_to_json(r.lambda_forms)},
                            {"x_to_delta", io::check_to_json(r.x_to_delta)},
                            {"delta_to_x", io::check_to_json(r.delta_to_x)},
                            {"psi_squared", io::check_to_json(r.psi_squared)}},
                           r.ok()};
        });
    }
};

json config_json(const RunConfig& c) {
    return {{"tolerance", {{"abs_eps", c.tol.abs_eps}, {"rel_eps", c.tol.rel_eps}, {"rank_eps", c.tol.rank_eps}}},
            {"seed", c.seed},
            {"starts", c.starts}};
}

void emit(const RunConfig& cfg, const json& report) {
    const std::string text = io::to_text(report) + "\n";
    if (cfg.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(cfg.output);
    if (!f) {
        std::cerr << "spinlab: cannot write " << cfg.output << "\n";
        std::cout << text;
        return;
    }
    f << text;
}

}  // namespace

int main(int argc, char** argv) {
    Cli cli;
    try {
        cli.app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return cli.app.exit(e) == 0 ? 0 : 2;
    }
    if (!cli.handler) return 0;  // --help on a group

    json report = {{"command", cli.command}};
    try {
        cli.cfg.tol = Tolerance::from_env();
        if (cli.cfg.tol_override) cli.cfg.tol = cli.cfg.tol.with_eps(*cli.cfg.tol_override);
        if (cli.cfg.rank_override) cli.cfg.tol.rank_eps = *cli.cfg.rank_override;
        cli.cfg.tol.validate();
    } catch (const Error& e) {
        std::cerr << "spinlab: " << e.what() << "\n";
        return 2;
    }
    report["config"] = config_json(cli.cfg);

    int code = 0;
    try {
        Outcome o = cli.handler();
        report["ok"] = o.ok;
        report.update(o.report);
        code = o.ok ? 0 : 1;
    } catch (const Error& e) {
        const bool input = e.kind() == "BadInput";
        report["ok"] = false;
        report["error"] = {{"kind", e.kind()}, {"message", e.what()}};
        std::cerr << "spinlab: " << e.what() << "\n";
        code = input ? 2 : 1;
    }
    emit(cli.cfg, report);
    return code;
}
