#pragma once

// Trace-form witnesses Z = (L^x L^xT (+) L^p L^pT) / (2 min_k K^(k)).
// Biseparable CMs satisfy Tr[gamma Z] >= 1; synthesis takes gamma = S^T S
// from the Williamson form S Z S^T = Z_W, so Tr[gamma Z] = Tr[Z_W].

#include <algorithm>
#include <cmath>
#include <string>

#include "cvgme/criteria.hpp"
#include "cvgme/detail/fixture_data.hpp"
#include "cvgme/error.hpp"
#include "cvgme/linalg.hpp"
#include "cvgme/states.hpp"
#include "cvgme/trees.hpp"

namespace cvgme {

struct WitnessMatrix {
    int modes = 0;
    Matrix x;             // already divided by normalization
    Matrix p;             // already divided by normalization
    double normalization = 1.0;

    Matrix full() const { return CovarianceMatrix(x, p).full(); }
};

inline WitnessMatrix witness_from_params(const CholeskyParams& params) {
    for (auto q : {Quadrature::x, Quadrature::p})
        if (!(params.coeffs(q).diag.minCoeff() > 0.0))
            throw error(errc::parameter, "witness construction needs strictly positive diagonal coefficients");
    const Matrix lx = build_L(params, Quadrature::x), lp = build_L(params, Quadrature::p);
    Evaluator ev(params);
    const auto vac = CovarianceMatrix::vacuum(params.modes());
    const double k = ev.evaluate(vac, params).min_K_k();
    const double norm = 2.0 * k;
    return {params.modes(), lx * lx.transpose() / norm, lp * lp.transpose() / norm, norm};
}

struct TraceTest {
    double trace = 0.0;
    bool detected = false; // Tr[gamma Z] < 1
};

inline TraceTest detects(const CovarianceMatrix& cm, const WitnessMatrix& w) {
    if (cm.modes != w.modes) throw error(errc::invalid_dimension, "CM and witness orders differ");
    const double t = (cm.x.cwiseProduct(w.x)).sum() + (cm.p.cwiseProduct(w.p)).sum();
    return {t, t < 1.0};
}

struct Synthesis {
    WilliamsonResult normal_form;
    double trace_zw = 0.0; // Tr[Z_W] = 2 sum nu
    CovarianceMatrix cm;
};

// gamma = S^T S; throws infeasible_error when Tr[Z_W] >= 1.
inline Synthesis synthesize(const WitnessMatrix& w) {
    Synthesis out;
    out.normal_form = williamson(w.full());
    out.trace_zw = 2.0 * out.normal_form.nu.sum();
    if (!(out.trace_zw < 1.0)) throw infeasible_error(out.trace_zw);
    out.cm = CovarianceMatrix::from_full(out.normal_form.s.transpose() * out.normal_form.s);
    return out;
}

inline CovarianceMatrix state_from_witness(const WitnessMatrix& w) { return synthesize(w).cm; }

struct Regularized {
    CovarianceMatrix cm;
    bool physical = false;
};

// Round half away from zero to `decimals` digits, then add noise * I. The
// noise is added on the integer grid so decimal inputs stay exact.
inline Regularized round_and_regularize(const CovarianceMatrix& cm, int decimals, double noise) {
    if (decimals < 0 || !(noise >= 0.0)) throw error(errc::numeric_input, "decimals and noise must be non-negative");
    const double scale = std::pow(10.0, decimals);
    auto one = [&](const Matrix& g) {
        Matrix out(g.rows(), g.cols());
        for (Eigen::Index i = 0; i < g.rows(); ++i)
            for (Eigen::Index j = 0; j < g.cols(); ++j)
                out(i, j) = (std::round(g(i, j) * scale) + (i == j ? noise * scale : 0.0)) / scale;
        return out;
    };
    Regularized r{CovarianceMatrix(one(cm.x), one(cm.p)), false};
    r.physical = is_physical(r.cm);
    return r;
}

struct WitnessFixture {
    std::string key;
    WitnessMatrix witness;
    CholeskyParams params;  // recovered by Cholesky of the printed blocks
    double printed_divisor; // divisor as printed next to the blocks
    std::string cm_key;     // printed CM the synthesis should reproduce
};

inline std::vector<std::string> fixture_witness_keys() {
    std::vector<std::string> keys;
    for (const auto& r : detail::witness_records()) keys.emplace_back(r.key);
    return keys;
}

// Printed witness blocks for a catalogue tree. The blocks are factored back
// into tree-sparse coefficients and renormalised by 2 min_k K^(k), which is
// what the biseparable bound Tr >= 1 requires. Some printed divisors equal
// min_k K^(k) itself; scaling does not change the synthesised S^T S.
inline WitnessFixture fixture_witness(const std::string& key) {
    for (const auto& r : detail::witness_records()) {
        if (key != r.key) continue;
        const LabeledTree tree = fixture_tree(key);
        CholeskyParams params(tree);
        for (auto [q, rows] : {std::pair{Quadrature::x, &r.x}, std::pair{Quadrature::p, &r.p}}) {
            const Matrix l = cholesky(detail::from_rows(*rows));
            for (int i = 0; i < l.rows(); ++i)
                for (int j = 0; j <= i; ++j) {
                    if (params.in_support(i + 1, j + 1))
                        params.set(q, i + 1, j + 1, l(i, j));
                    else if (l(i, j) != 0.0)
                        throw error(errc::structural, "printed witness block for '" + key + "' leaves the tree pattern");
                }
        }
        return {key, witness_from_params(params), params, r.divisor, key == "3" ? "gamma3_full" : "gamma" + key};
    }
    throw error(errc::lookup, "unknown witness fixture '" + key + "'");
}

} // namespace cvgme
