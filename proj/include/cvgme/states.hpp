#pragma once

// CM factories, the pure-loss channel, and the embedded fixture library.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "cvgme/criteria.hpp"
#include "cvgme/detail/fixture_data.hpp"
#include "cvgme/error.hpp"
#include "cvgme/linalg.hpp"
#include "cvgme/trees.hpp"

namespace cvgme {

namespace detail {

inline void require_squeezing(double r) {
    if (!std::isfinite(r) || r < 0.0) throw error(errc::numeric_input, "squeezing parameter must be finite and >= 0");
}

inline Matrix uniform_block(int n, double diag, double off) {
    Matrix m = Matrix::Constant(n, n, off);
    m.diagonal().setConstant(diag);
    return m;
}

inline Matrix from_rows(const Rows& rows) {
    Matrix m(rows.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
    return m;
}

} // namespace detail

// Squeezing in dB, 10 log10(e^{-2r}); r = 0.65 gives -5.646 dB.
inline double squeezing_db(double r) { return 10.0 * std::log10(std::exp(-2.0 * r)); }
inline double squeezing_from_db(double db) { return -db * std::log(10.0) / 20.0; }

// GHZ-like CM on N modes: x-block (a+, c+), p-block (a-, c-) with
// a+- = (e^{+-2r} + (N-1) e^{-+2r}) / N and c+- = (e^{+-2r} - e^{-+2r}) / N.
inline CovarianceMatrix ghz_cm(double r, int modes = 3) {
    detail::require_squeezing(r);
    if (modes < 2) throw error(errc::invalid_dimension, "GHZ CM needs at least two modes");
    const double ep = std::exp(2.0 * r), em = std::exp(-2.0 * r), n = modes;
    return {detail::uniform_block(modes, (ep + (n - 1) * em) / n, (ep - em) / n),
            detail::uniform_block(modes, (em + (n - 1) * ep) / n, (em - ep) / n)};
}

inline CovarianceMatrix tmsv_cm(double r) {
    detail::require_squeezing(r);
    const double a = std::cosh(2.0 * r), c = std::sinh(2.0 * r);
    Matrix x(2, 2), p(2, 2);
    x << a, c, c, a;
    p << a, -c, -c, a;
    return {x, p};
}

// Equal mixture of the three TMSV pairs, each padded with vacuum.
inline CovarianceMatrix test_bisep_cm(double r) {
    detail::require_squeezing(r);
    const double b = (2.0 * std::cosh(2.0 * r) + 1.0) / 3.0, e = std::sinh(2.0 * r) / 3.0;
    return {detail::uniform_block(3, b, e), detail::uniform_block(3, b, -e)};
}

// One squeezed mode split on two balanced beam splitters.
inline CovarianceMatrix split_squeezed_cm(double r) {
    detail::require_squeezing(r);
    auto block = [](double e2r) {
        const double a = 2.0 * (1.0 + e2r), b = std::sqrt(2.0) * (1.0 - e2r), c = 3.0 + e2r, d = 1.0 - e2r;
        Matrix m(3, 3);
        m << a, b, -b, b, c, d, -b, d, c;
        return Matrix(m / 4.0);
    };
    return {block(std::exp(2.0 * r)), block(std::exp(-2.0 * r))};
}

// Pure loss on the chosen (1-based) modes: gamma -> eta gamma + (1 - eta) I.
// An empty list means every mode.
inline CovarianceMatrix lossy_channel(const CovarianceMatrix& cm, double eta, std::vector<int> modes = {}) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw error(errc::numeric_input, "transmissivity must lie in [0, 1]");
    if (modes.empty())
        for (int m = 1; m <= cm.modes; ++m) modes.push_back(m);
    Vector t = Vector::Ones(cm.modes);
    for (int m : modes) {
        if (m < 1 || m > cm.modes) throw error(errc::invalid_dimension, "mode index out of range");
        t(m - 1) = std::sqrt(eta);
    }
    // Beam splitter to vacuum: gamma -> T gamma T + (I - T^2).
    auto one = [&](const Matrix& g) {
        Matrix out = t.asDiagonal() * g * t.asDiagonal();
        out.diagonal() += (Vector::Ones(cm.modes) - t.cwiseProduct(t));
        return out;
    };
    return {one(cm.x), one(cm.p)};
}

inline std::vector<std::string> fixture_cm_keys() {
    std::vector<std::string> keys;
    for (const auto& r : detail::cm_records()) keys.emplace_back(r.key);
    return keys;
}

// Notes attached to fixtures whose printed form needed a resolution.
inline std::string fixture_cm_note(const std::string& key) {
    if (key == "gamma7")
        return "printed p-block (2,3) = -3.379668 and (3,2) = -3.79668 disagree; -3.79668 is used for both";
    if (key == "gamma3")
        return "rounded to two decimals with 0.01 I added";
    return {};
}

// Printed matrix, symmetrised from the upper triangle. gamma7 takes its
// (2,3) momentum pair from the printed (3,2) entry, see fixture_cm_note.
inline CovarianceMatrix fixture_cm(const std::string& key) {
    for (const auto& r : detail::cm_records()) {
        if (key != r.key) continue;
        Matrix x = detail::from_rows(r.x), p = detail::from_rows(r.p);
        if (key == "gamma7") p(1, 2) = p(2, 1);
        return {x, p};
    }
    throw error(errc::lookup, "unknown CM fixture '" + key + "'");
}

// Tabulated Cholesky parameter sets, keyed "<cm>-<criterion>".
struct ParamFixture {
    std::string key;
    std::string tree;
    std::string cm;
    Criterion criterion;
    std::vector<std::pair<int, int>> order;
    std::vector<double> lx;
    std::vector<double> lp;
    std::string note;
};

inline const std::vector<ParamFixture>& param_fixtures() {
    using P = std::vector<std::pair<int, int>>;
    static const P path3{{1, 1}, {2, 1}, {2, 2}, {3, 2}, {3, 3}};
    static const P path4{{1, 1}, {2, 1}, {2, 2}, {3, 2}, {3, 3}, {4, 3}, {4, 4}};
    static const P star4{{1, 1}, {4, 1}, {2, 2}, {4, 2}, {3, 3}, {4, 3}, {4, 4}};
    static const std::vector<ParamFixture> table{
        {"gamma1-product", "3", "gamma1", Criterion::product, path3,
         {0.947, 0.760, 0.860, 1, 1e-5}, {0.989, -0.987, 0.817, -1, 1.8e-6}, {}},
        {"gamma1-sum", "3", "gamma1", Criterion::sum, path3,
         {0.425, 0.253, 0.305, 0.505, 2e-4}, {1, -0.954, 0.792, -1, 4e-4}, {}},
        {"gamma2-sum", "3", "gamma2", Criterion::sum, path3,
         {0.514, 0.314, 0.419, -0.908, 3e-5}, {1, -0.652, 0.489, 0.559, 8.7e-7}, {}},
        {"gamma3-sum", "3", "gamma3", Criterion::sum, path3,
         {0.90, -0.23, 0.23, -1, 0.01}, {1, 0.98, 1, 1, 0.01}, {}},
        {"gamma3_full-sum", "3", "gamma3_full", Criterion::sum, path3,
         {9.11, -2.31, 2.31, -10, 0.01}, {10, 10, 10, 10, 0.01}, {}},
        {"gamma4a-sum", "4a", "gamma4a", Criterion::sum, path4,
         {10, -5.08, 5.09, -9.03, 5.07, -10, 0.01}, {10, 5.08, 5.08, 9.03, 5.10, 10, 0.01},
         "p-coefficient (3,2) printed as -9.03; the sign is flipped, the printed sign gives D_S > 0"},
        {"gamma4a-sum-printed", "4a", "gamma4a", Criterion::sum, path4,
         {10, -5.08, 5.09, -9.03, 5.07, -10, 0.01}, {10, 5.08, 5.08, -9.03, 5.10, 10, 0.01},
         "verbatim print, kept for comparison"},
        {"gamma4b-sum", "4b", "gamma4b", Criterion::sum, star4,
         {2.35, -2.27, 2.17, -2.42, 4.09, -2.28, 0.12}, {10, 2.13, 10, 2.00, 9.99, 2.13, 0.09}, {}},
        {"gamma7-product", "3", "gamma7", Criterion::product, path3,
         {0.67, -0.76, 0.68, -1.00, 0.01}, {0.82, 1.00, 1.00, 0.61, 0.01}, {}},
        {"z3-guess", "3", "", Criterion::sum, path3,
         {8, -1, 1, -1, 0.01}, {10, 2, 5, 1, 0.01}, "guessed witness parameters"},
    };
    return table;
}

inline const ParamFixture& param_fixture(const std::string& key) {
    for (const auto& f : param_fixtures())
        if (f.key == key) return f;
    throw error(errc::lookup, "unknown parameter fixture '" + key + "'");
}

inline CholeskyParams fixture_params(const std::string& key) {
    const auto& f = param_fixture(key);
    return CholeskyParams::from_list(fixture_tree(f.tree), f.order, f.lx, f.lp);
}

} // namespace cvgme
