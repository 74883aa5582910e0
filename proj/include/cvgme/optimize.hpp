#pragma once

// Box-constrained Nelder-Mead over Cholesky coefficients with seeded
// restarts, loss-threshold bisection and squeezing scans.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "cvgme/criteria.hpp"
#include "cvgme/error.hpp"
#include "cvgme/linalg.hpp"
#include "cvgme/states.hpp"
#include "cvgme/trees.hpp"

namespace cvgme {

struct OptimizerConfig {
    double box = 1.0;            // coefficients live in [-box, box]
    int restarts = 64;
    int max_iters = 2000;        // per restart
    std::uint64_t seed = 0;
    double tol = 1e-10;          // simplex value spread
    bool witness_floor = false;  // floor diagonal coefficients at diag_floor
    double diag_floor = 1e-8;
    double detection_tol = 1e-6; // detected iff best < -detection_tol
    int threads = 0;             // 0: hardware concurrency

    void validate() const {
        if (!(box > 0.0) || restarts < 1 || max_iters < 1 || !(tol > 0.0))
            throw error(errc::parameter, "optimizer config needs box > 0, restarts >= 1, max_iters >= 1, tol > 0");
    }
};

struct NelderMeadResult {
    Vector x;
    double value = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

// Adaptive-coefficient Nelder-Mead; every trial point is clamped into
// [lo, hi]. After convergence the simplex is rebuilt around the best point
// with a smaller step until a rebuild no longer improves by more than tol.
template <class F>
NelderMeadResult nelder_mead(F&& f, const Vector& x0, const Vector& lo, const Vector& hi, double step,
                             int max_iters, double tol) {
    const int n = static_cast<int>(x0.size());
    const double dn = std::max(n, 2);
    const double alpha = 1.0, beta = 1.0 + 2.0 / dn, gamma = 0.75 - 1.0 / (2.0 * dn), delta = 1.0 - 1.0 / dn;
    auto clamp = [&](Vector& v) { v = v.cwiseMax(lo).cwiseMin(hi); };

    Matrix pts(n, n + 1);
    std::vector<double> val(n + 1);
    Vector centroid(n), xr(n), xe(n), xc(n);
    NelderMeadResult res;
    res.x = x0;
    clamp(res.x);
    res.value = f(res.x);

    auto build = [&](double h) {
        pts.col(0) = res.x;
        val[0] = res.value;
        for (int i = 0; i < n; ++i) {
            xr = res.x;
            xr(i) += (xr(i) + h <= hi(i)) ? h : -h;
            clamp(xr);
            pts.col(i + 1) = xr;
            val[i + 1] = f(xr);
        }
    };

    double h = step;
    build(h);
    int iters = 0;
    while (iters < max_iters) {
        int best = 0, worst = 0;
        for (int i = 1; i <= n; ++i) {
            if (val[i] < val[best]) best = i;
            if (val[i] >= val[worst]) worst = i;
        }
        int second = worst == 0 ? 1 : 0;
        for (int i = 0; i <= n; ++i)
            if (i != worst && val[i] > val[second]) second = i;
        if (val[best] < res.value) {
            res.value = val[best];
            res.x = pts.col(best);
        }
        bool small = val[worst] - val[best] <= tol;
        if (!small && iters % 16 == 0)
            small = (pts.colwise() - pts.col(best)).cwiseAbs().maxCoeff() <= tol;
        if (small) {
            // Rebuild around the best point; stop once that stops helping.
            const double before = res.value;
            h *= 0.1;
            if (h < 1e-9 * step) {
                res.converged = true;
                break;
            }
            build(h);
            ++iters;
            const double after = *std::min_element(val.begin(), val.end());
            if (after > before - tol && h < 1e-4 * step) {
                res.converged = true;
                break;
            }
            continue;
        }
        ++iters;
        centroid = (pts.rowwise().sum() - pts.col(worst)) / n;

        xr = centroid + alpha * (centroid - pts.col(worst));
        clamp(xr);
        const double fr = f(xr);
        if (fr < val[best]) {
            xe = centroid + beta * (xr - centroid);
            clamp(xe);
            const double fe = f(xe);
            if (fe < fr) {
                pts.col(worst) = xe;
                val[worst] = fe;
            } else {
                pts.col(worst) = xr;
                val[worst] = fr;
            }
            continue;
        }
        if (fr < val[second]) {
            pts.col(worst) = xr;
            val[worst] = fr;
            continue;
        }
        const bool outside = fr < val[worst];
        if (outside)
            xc = centroid + gamma * (xr - centroid);
        else
            xc = centroid + gamma * (pts.col(worst) - centroid);
        clamp(xc);
        const double fc = f(xc);
        if (fc < (outside ? fr : val[worst])) {
            pts.col(worst) = xc;
            val[worst] = fc;
            continue;
        }
        for (int i = 0; i <= n; ++i) {
            if (i == best) continue;
            xr = pts.col(best) + delta * (pts.col(i) - pts.col(best));
            clamp(xr);
            pts.col(i) = xr;
            val[i] = f(xr);
        }
    }
    for (int i = 0; i <= n; ++i)
        if (val[i] < res.value) {
            res.value = val[i];
            res.x = pts.col(i);
        }
    res.iterations = iters;
    return res;
}

struct DetectionResult {
    Criterion which = Criterion::product;
    double best_value = std::numeric_limits<double>::infinity();
    CholeskyParams best_params;
    bool detected = false;
    bool converged = false; // of the winning restart
    int best_restart = -1;
    std::vector<double> restart_bests;
};

namespace detail {

// Independent stream per restart: depends on (seed, k) only.
inline std::mt19937_64 restart_stream(std::uint64_t seed, std::uint64_t k) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    return std::mt19937_64(seq);
}

inline int worker_count(int requested, int jobs) {
    int t = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    return std::clamp(t, 1, std::max(jobs, 1));
}

// Runs fn(k) for k in [0, jobs) over a small thread pool.
template <class Fn>
void parallel_for(int jobs, int threads, Fn&& fn) {
    const int workers = worker_count(threads, jobs);
    if (workers == 1) {
        for (int k = 0; k < jobs; ++k) fn(k);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int k = next++; k < jobs; k = next++) fn(k);
        });
    for (auto& t : pool) t.join();
}

} // namespace detail

inline DetectionResult minimize_gap(const CovarianceMatrix& cm, const LabeledTree& tree, Criterion which,
                                    const OptimizerConfig& cfg) {
    cfg.validate();
    if (cm.modes != tree.order()) throw error(errc::invalid_dimension, "CM and tree orders differ");
    const CholeskyParams shape(tree);
    const int dim = shape.dimension();

    Vector lo = Vector::Constant(dim, -cfg.box), hi = Vector::Constant(dim, cfg.box);
    if (cfg.witness_floor) {
        int t = 0;
        for (int q = 0; q < 2; ++q)
            for (auto [j, i] : shape.support()) {
                if (j == i) lo(t) = cfg.diag_floor;
                ++t;
            }
    }

    std::vector<NelderMeadResult> runs(cfg.restarts);
    detail::parallel_for(cfg.restarts, cfg.threads, [&](int k) {
        Evaluator ev(shape);
        auto rng = detail::restart_stream(cfg.seed, static_cast<std::uint64_t>(k));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Vector x0(dim);
        for (int t = 0; t < dim; ++t) x0(t) = lo(t) + (hi(t) - lo(t)) * u(rng);
        auto f = [&](const Vector& v) { return ev.gap(cm, v, which); };
        runs[k] = nelder_mead(f, x0, lo, hi, 0.25 * cfg.box, cfg.max_iters, cfg.tol);
    });

    DetectionResult out;
    out.which = which;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < cfg.restarts; ++k) {
        out.restart_bests.push_back(runs[k].value);
        if (runs[k].value < best) {
            best = runs[k].value;
            out.best_restart = k;
        }
    }
    out.best_params = shape;
    out.best_params.assign(runs[out.best_restart].x);
    out.converged = runs[out.best_restart].converged;
    // Verdict from a fresh full evaluation, never from optimizer state.
    out.best_value = evaluate(cm, out.best_params).gap(which);
    out.detected = out.best_value < -cfg.detection_tol;
    return out;
}

struct ThresholdProbe {
    double eta = 0.0;
    double best_value = 0.0;
    bool detected = false;
};

struct ThresholdResult {
    double eta_min = 1.0;
    std::vector<ThresholdProbe> probes; // in probe order
};

// Smallest eta (within eta_tol) still detected, by bisection on [0, 1].
// Assumes detection is monotone in eta; the probe trace exposes violations.
inline ThresholdResult threshold_transmissivity(const CovarianceMatrix& cm, const LabeledTree& tree, Criterion which,
                                                const OptimizerConfig& cfg, double eta_tol = 1e-3) {
    ThresholdResult out;
    auto probe = [&](double eta) {
        const auto r = minimize_gap(lossy_channel(cm, eta), tree, which, cfg);
        out.probes.push_back({eta, r.best_value, r.detected});
        return r.detected;
    };
    if (!probe(1.0)) throw error(errc::precondition, "state is not detected without loss");
    double lo = 0.0, hi = 1.0;
    while (hi - lo > eta_tol) {
        const double mid = 0.5 * (lo + hi);
        (probe(mid) ? hi : lo) = mid;
    }
    out.eta_min = hi;
    return out;
}

struct ScanPoint {
    double r = 0.0;
    double best_value = 0.0;
    bool detected = false;
};

inline const std::vector<std::string>& state_factory_ids() {
    static const std::vector<std::string> ids{"ghz", "ghz4", "tmsv", "test-bisep", "split-squeezed"};
    return ids;
}

inline CovarianceMatrix make_state(const std::string& id, double r) {
    if (id == "ghz") return ghz_cm(r);
    if (id == "ghz4") return ghz_cm(r, 4);
    if (id == "tmsv") return tmsv_cm(r);
    if (id == "test-bisep") return test_bisep_cm(r);
    if (id == "split-squeezed") return split_squeezed_cm(r);
    throw error(errc::lookup, "unknown state factory '" + id + "'");
}

inline std::vector<ScanPoint> scan_squeezing(const std::string& factory, const LabeledTree& tree, Criterion which,
                                             const std::vector<double>& r_grid, const OptimizerConfig& cfg) {
    std::vector<ScanPoint> out;
    for (double r : r_grid) {
        if (!std::isfinite(r)) throw error(errc::numeric_input, "non-finite squeezing in grid");
        const auto res = minimize_gap(make_state(factory, r), tree, which, cfg);
        out.push_back({r, res.best_value, res.detected});
    }
    return out;
}

} // namespace cvgme
