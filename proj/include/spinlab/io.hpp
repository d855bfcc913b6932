#pragma once

#include "spinlab/jones.hpp"
#include "spinlab/nomura.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace spinlab::io {

using json = nlohmann::json;

inline Error bad_input(const std::string& msg) { return Error("BadInput", msg); }

inline json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

/// [re, im] or a bare real.
inline cplx complex_from_json(const json& j, const std::string& where = "value") {
    if (j.is_number()) return j.get<double>();
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw bad_input(where + ": expected a number or [re, im]");
}

inline json matrix_to_json(const Matrix& M) {
    require_square(M, "matrix");
    json rows = json::array();
    for (Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < M.cols(); ++j) row.push_back(complex_to_json(M(i, j)));
        rows.push_back(row);
    }
    return {{"n", M.rows()}, {"entries", rows}};
}

inline Matrix matrix_from_json(const json& j, const std::string& where = "matrix") {
    if (!j.is_object() || !j.contains("entries") || !j["entries"].is_array())
        throw bad_input(where + ": expected {\"n\": int, \"entries\": [...]}");
    const json& rows = j["entries"];
    const Index n = static_cast<Index>(rows.size());
    if (j.contains("n") && (!j["n"].is_number_integer() || j["n"].get<Index>() != n))
        throw bad_input(where + ": \"n\" does not match the number of rows");
    if (n == 0) throw bad_input(where + ": empty matrix");
    Matrix M(n, n);
    for (Index r = 0; r < n; ++r) {
        if (!rows[r].is_array() || static_cast<Index>(rows[r].size()) != n)
            throw bad_input(where + ": row " + std::to_string(r) + " does not have " + std::to_string(n) + " entries");
        for (Index c = 0; c < n; ++c)
            M(r, c) = complex_from_json(rows[r][c], where + "(" + std::to_string(r) + "," + std::to_string(c) + ")");
    }
    return M;
}

inline json vector_to_json(const Vector& v) {
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(complex_to_json(v(i)));
    return a;
}

inline Vector vector_from_json(const json& j, const std::string& where = "vector") {
    if (!j.is_array() || j.empty()) throw bad_input(where + ": expected a non-empty array");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = complex_from_json(j[i], where);
    return v;
}

inline json matrices_to_json(const std::vector<Matrix>& ms) {
    json a = json::array();
    for (const auto& M : ms) a.push_back(matrix_to_json(M));
    return a;
}

inline std::vector<Matrix> matrices_from_json(const json& j, const std::string& where) {
    if (!j.is_array()) throw bad_input(where + ": expected an array of matrices");
    std::vector<Matrix> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(matrix_from_json(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

inline json check_to_json(const Check& c) {
    json j = {{"ok", c.ok}, {"residual", std::isfinite(c.residual) ? json(c.residual) : json(nullptr)}};
    if (!c.detail.empty()) j["detail"] = c.detail;
    return j;
}

// ---------------------------------------------------------------- bundles

inline json pair_to_json(const Matrix& A, const Matrix& B) { return {{"A", matrix_to_json(A)}, {"B", matrix_to_json(B)}}; }

inline std::pair<Matrix, Matrix> pair_from_json(const json& j) {
    if (!j.is_object() || !j.contains("A") || !j.contains("B")) throw bad_input("pair file needs \"A\" and \"B\"");
    Matrix A = matrix_from_json(j["A"], "A"), B = matrix_from_json(j["B"], "B");
    if (A.rows() != B.rows()) throw bad_input("A and B have different orders");
    return {A, B};
}

inline json four_weight_to_json(const FourWeightSpinModel& m) {
    return {{"W1", matrix_to_json(m.W1)}, {"W2", matrix_to_json(m.W2)}, {"W3", matrix_to_json(m.W3)},
            {"W4", matrix_to_json(m.W4)}, {"d", complex_to_json(m.d)},   {"a", complex_to_json(m.a)}};
}

inline FourWeightSpinModel four_weight_from_json(const json& j) {
    for (const char* k : {"W1", "W2", "W3", "W4", "d", "a"})
        if (!j.contains(k)) throw bad_input(std::string("four-weight bundle is missing \"") + k + "\"");
    FourWeightSpinModel m;
    m.W1 = matrix_from_json(j["W1"], "W1");
    m.W2 = matrix_from_json(j["W2"], "W2");
    m.W3 = matrix_from_json(j["W3"], "W3");
    m.W4 = matrix_from_json(j["W4"], "W4");
    m.d = complex_from_json(j["d"], "d");
    m.a = complex_from_json(j["a"], "a");
    return m;
}

/// {"schur_basis": [matrix...], "theta_pairing": [int...]}; the pairing is optional.
struct SchemeFile {
    std::vector<Matrix> schur_basis;
    std::optional<std::vector<Index>> theta_pairing;
};

inline json scheme_file_to_json(const SchemeFile& f) {
    json j = {{"schur_basis", matrices_to_json(f.schur_basis)}};
    if (f.theta_pairing) j["theta_pairing"] = *f.theta_pairing;
    return j;
}

inline SchemeFile scheme_file_from_json(const json& j) {
    if (!j.is_object() || !j.contains("schur_basis")) throw bad_input("scheme file needs \"schur_basis\"");
    SchemeFile f;
    f.schur_basis = matrices_from_json(j["schur_basis"], "schur_basis");
    if (f.schur_basis.empty()) throw bad_input("schur_basis is empty");
    if (j.contains("theta_pairing")) {
        const json& p = j["theta_pairing"];
        if (!p.is_array() || p.size() != f.schur_basis.size())
            throw bad_input("theta_pairing needs one index per Schur idempotent");
        std::vector<Index> v;
        for (const auto& x : p) {
            if (!x.is_number_integer()) throw bad_input("theta_pairing entries must be integers");
            v.push_back(x.get<Index>());
        }
        f.theta_pairing = v;
    }
    return f;
}

// ---------------------------------------------------------------- text

namespace detail {

inline void dump(const json& j, std::ostream& out, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out << "{}";
                return;
            }
            out << "{" << nl;
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out << "," << nl;
                first = false;
                out << pad << json(it.key()).dump() << (indent > 0 ? ": " : ":");
                dump(it.value(), out, indent, depth + 1);
            }
            out << nl << close_pad << "}";
            return;
        }
        case json::value_t::array: {
            // a matrix row of [re, im] pairs stays on one line
            bool flat = std::all_of(j.begin(), j.end(), [](const json& x) {
                return x.is_primitive() ||
                       (x.is_array() && std::all_of(x.begin(), x.end(), [](const json& y) { return y.is_primitive(); }));
            });
            out << "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out << ",";
                if (!flat) out << nl << pad;
                dump(j[i], out, flat ? 0 : indent, depth + 1);
            }
            if (!flat && !j.empty()) out << nl << close_pad;
            out << "]";
            return;
        }
        case json::value_t::number_float: {
            const double v = j.get<double>();
            if (!std::isfinite(v)) {
                out << "null";
                return;
            }
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            std::string s = buf;
            if (s.find_first_of(".eE") == std::string::npos) s += ".0";
            out << s;
            return;
        }
        default: out << j.dump();
    }
}

}  // namespace detail

/// JSON text with every float written to 17 significant digits.
inline std::string to_text(const json& j, int indent = 2) {
    std::ostringstream out;
    detail::dump(j, out, indent, 0);
    return out.str();
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw bad_input("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw bad_input(path + ": " + e.what());
    }
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw bad_input("cannot write " + path);
    out << to_text(j) << "\n";
}

}  // namespace spinlab::io
