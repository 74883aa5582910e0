#pragma once

// JSON and text serialisation for CMs, parameters, witnesses and results.

#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>

#include "json.hpp"

#include "cvgme/criteria.hpp"
#include "cvgme/error.hpp"
#include "cvgme/linalg.hpp"
#include "cvgme/optimize.hpp"
#include "cvgme/trees.hpp"
#include "cvgme/witness.hpp"

namespace cvgme::io {

using json = nlohmann::json;

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline Matrix matrix_from_json(const json& j, int n, const char* what) {
    if (!j.is_array() || static_cast<int>(j.size()) != n)
        throw error(errc::parse, std::string(what) + " must be an array of " + std::to_string(n) + " rows");
    Matrix m(n, n);
    for (int r = 0; r < n; ++r) {
        if (!j[r].is_array() || static_cast<int>(j[r].size()) != n)
            throw error(errc::parse, std::string(what) + " row " + std::to_string(r + 1) + " has the wrong length");
        for (int c = 0; c < n; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

// Rejects asymmetry above tol; averages away anything below it.
inline Matrix symmetric_from_json(const json& j, int n, const char* what, double tol = 1e-9) {
    Matrix m = matrix_from_json(j, n, what);
    if (!m.allFinite()) throw error(errc::numeric_input, std::string(what) + " has non-finite entries");
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > tol)
        throw error(errc::parse, std::string(what) + " is not symmetric (max asymmetry " + std::to_string(asym) + ")");
    return 0.5 * (m + m.transpose());
}

inline json to_json(const CovarianceMatrix& cm) {
    return {{"modes", cm.modes}, {"x", matrix_to_json(cm.x)}, {"p", matrix_to_json(cm.p)}};
}

inline CovarianceMatrix cm_from_json(const json& j) {
    try {
        const int n = j.at("modes").get<int>();
        if (n < 1) throw error(errc::invalid_dimension, "modes must be >= 1");
        return {symmetric_from_json(j.at("x"), n, "x block"), symmetric_from_json(j.at("p"), n, "p block")};
    } catch (const json::exception& e) {
        throw error(errc::parse, std::string("CM JSON: ") + e.what());
    }
}

inline json to_json(const WitnessMatrix& w) {
    return {{"modes", w.modes},
            {"normalization", w.normalization},
            {"x", matrix_to_json(w.x)},
            {"p", matrix_to_json(w.p)}};
}

inline WitnessMatrix witness_from_json(const json& j) {
    try {
        const int n = j.at("modes").get<int>();
        if (n < 1) throw error(errc::invalid_dimension, "modes must be >= 1");
        return {n, symmetric_from_json(j.at("x"), n, "witness x block"),
                symmetric_from_json(j.at("p"), n, "witness p block"), j.value("normalization", 1.0)};
    } catch (const json::exception& e) {
        throw error(errc::parse, std::string("witness JSON: ") + e.what());
    }
}

inline json edges_to_json(const Tree& t) {
    json e = json::array();
    for (auto [u, v] : t.edges()) e.push_back({u, v});
    return e;
}

// A fixture key or an explicit [[u, v], ...] list already in labelled form.
inline LabeledTree tree_from_json(const json& j) {
    if (j.is_string()) return fixture_tree(j.get<std::string>());
    if (!j.is_array()) throw error(errc::parse, "tree must be a fixture key or an edge list");
    std::vector<Edge> edges;
    int order = 0;
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2) throw error(errc::parse, "edge entries must be [u, v]");
        edges.emplace_back(e[0].get<int>(), e[1].get<int>());
        order = std::max({order, edges.back().first, edges.back().second});
    }
    return {Tree(order, edges)};
}

inline json to_json(const CholeskyParams& c, const std::string& tree_key = {}) {
    json out;
    out["tree"] = tree_key.empty() ? edges_to_json(c.tree().tree) : json(tree_key);
    for (auto [q, name] : {std::pair{Quadrature::x, "ell_x"}, std::pair{Quadrature::p, "ell_p"}}) {
        json m = json::object();
        for (auto [r, col] : c.support()) m[std::to_string(r) + "," + std::to_string(col)] = c.get(q, r, col);
        out[name] = m;
    }
    return out;
}

// Keys "j,i" (1-based, row then column); entries left out are zero.
inline CholeskyParams params_from_json(const json& j) {
    try {
        CholeskyParams c(tree_from_json(j.at("tree")));
        for (auto [q, name] : {std::pair{Quadrature::x, "ell_x"}, std::pair{Quadrature::p, "ell_p"}}) {
            for (const auto& [key, val] : j.at(name).items()) {
                int r = 0, col = 0;
                char comma = 0;
                std::istringstream ks(key);
                if (!(ks >> r >> comma >> col) || comma != ',')
                    throw error(errc::parse, "coefficient key '" + key + "' is not of the form \"j,i\"");
                c.set(q, r, col, val.get<double>());
            }
        }
        return c;
    } catch (const json::exception& e) {
        throw error(errc::parse, std::string("params JSON: ") + e.what());
    }
}

inline json to_json(const CriterionReport& r) {
    json lk = json::array(), kk = json::array();
    for (std::size_t t = 0; t < r.splits.size(); ++t) {
        lk.push_back({{"split", r.splits[t].to_string()}, {"value", r.script_L_k[t]}});
        kk.push_back({{"split", r.splits[t].to_string()}, {"value", r.script_K_k[t]}});
    }
    return {{"u_x", r.u_x},
            {"u_p", r.u_p},
            {"script_L", r.script_L},
            {"script_L_k", lk},
            {"script_K_k", kk},
            {"d_p", r.d_p},
            {"d_s", r.d_s},
            {"argmin_split_p", r.argmin_split_p.to_string()},
            {"argmin_split_s", r.argmin_split_s.to_string()}};
}

inline json to_json(const DetectionResult& d, const std::string& tree_key = {}) {
    return {{"criterion", to_string(d.which)},
            {"best_value", d.best_value},
            {"detected", d.detected},
            {"converged", d.converged},
            {"best_restart", d.best_restart},
            {"restart_bests", d.restart_bests},
            {"best_params", to_json(d.best_params, tree_key)}};
}

inline std::string read_text(const std::string& path) {
    if (path == "-") return {std::istreambuf_iterator<char>(std::cin), {}};
    std::ifstream in(path);
    if (!in) throw error(errc::parse, "cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), {}};
}

inline json read_json(const std::string& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw error(errc::parse, "'" + path + "': " + e.what());
    }
}

} // namespace cvgme::io
