#pragma once

// Independent reference implementations used only by the tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cvgme/criteria.hpp"
#include "cvgme/linalg.hpp"
#include "cvgme/trees.hpp"

namespace oracle {

using cvgme::Matrix;

// Labelled tree from a Pruefer sequence over {1..n}.
inline std::vector<cvgme::Edge> pruefer_decode(const std::vector<int>& seq, int n) {
    std::vector<int> degree(n + 1, 1);
    for (int v : seq) ++degree[v];
    std::vector<cvgme::Edge> edges;
    for (int v : seq) {
        for (int leaf = 1; leaf <= n; ++leaf) {
            if (degree[leaf] == 1) {
                edges.emplace_back(leaf, v);
                --degree[leaf];
                --degree[v];
                break;
            }
        }
    }
    int u = 0, w = 0;
    for (int v = 1; v <= n; ++v)
        if (degree[v] == 1) (u ? w : u) = v;
    edges.emplace_back(u, w);
    return edges;
}

// Isomorphism invariant: least rooted encoding over every choice of root.
// Deliberately avoids the centre so it shares no logic with the library.
inline std::string free_tree_code(int n, const std::vector<cvgme::Edge>& edges) {
    std::vector<std::vector<int>> adj(n + 1);
    for (auto [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::function<std::string(int, int)> enc = [&](int v, int from) {
        std::vector<std::string> kids;
        for (int w : adj[v])
            if (w != from) kids.push_back(enc(w, v));
        std::sort(kids.begin(), kids.end());
        std::string s = "(";
        for (auto& k : kids) s += k;
        return s + ")";
    };
    std::string best;
    for (int r = 1; r <= n; ++r) {
        auto c = enc(r, 0);
        if (best.empty() || c < best) best = c;
    }
    return best;
}

// Number of unlabelled trees on n vertices, from all n^(n-2) sequences.
inline int count_classes_by_pruefer(int n) {
    if (n <= 2) return 1;
    std::set<std::string> codes;
    std::vector<int> seq(n - 2, 1);
    while (true) {
        codes.insert(free_tree_code(n, pruefer_decode(seq, n)));
        int k = 0;
        while (k < n - 2 && seq[k] == n) seq[k++] = 1;
        if (k == n - 2) break;
        ++seq[k];
    }
    return static_cast<int>(codes.size());
}

// Restricted product entry M^(S)_{ab} = sum_{r in S} Lx_{ra} Lp_{rb}, by loops.
inline double restricted(const Matrix& lx, const Matrix& lp, const cvgme::Bipartition& s, bool side_i, int a, int b) {
    double m = 0.0;
    for (int r = 0; r < lx.rows(); ++r)
        if (s.in_i(r + 1) == side_i) m += lx(r, a) * lp(r, b);
    return m;
}

inline double script_L(const Matrix& lx, const Matrix& lp) {
    double l = 0.0;
    for (int a = 0; a < lx.cols(); ++a)
        for (int b = 0; b < lx.cols(); ++b) {
            double m = 0.0;
            for (int r = 0; r < lx.rows(); ++r) m += lx(r, a) * lp(r, b);
            l += m * m;
        }
    return l;
}

inline double script_L_k(const Matrix& lx, const Matrix& lp, const cvgme::Bipartition& s) {
    double l = 0.0;
    for (int a = 0; a < lx.cols(); ++a)
        for (int b = 0; b < lx.cols(); ++b) {
            const double x = restricted(lx, lp, s, true, a, b) * restricted(lx, lp, s, false, a, b);
            l += 2.0 * (std::abs(x) - x);
        }
    return l;
}

inline double script_K_k(const Matrix& lx, const Matrix& lp, const cvgme::Bipartition& s) {
    double k = 0.0;
    for (int a = 0; a < lx.cols(); ++a)
        k += std::abs(restricted(lx, lp, s, true, a, a)) + std::abs(restricted(lx, lp, s, false, a, a));
    return k;
}

// Variance of the combination sum_r c_r q_r for one quadrature block, with the
// 1/2 of the half-trace convention: 1/2 sum_{r,s} c_r c_s g_rs.
inline double half_variance(const Matrix& g, const std::vector<std::pair<int, double>>& terms) {
    double v = 0.0;
    for (auto [r, cr] : terms)
        for (auto [s, cs] : terms) v += cr * cs * g(r, s);
    return 0.5 * v;
}

inline Matrix random_pd(std::mt19937_64& rng, int n, double shift = 0.5) {
    std::normal_distribution<double> g;
    Matrix a(n, n);
    for (auto& e : a.reshaped()) e = g(rng);
    return a * a.transpose() + shift * Matrix::Identity(n, n);
}

inline Matrix random_orthogonal(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    Matrix a(n, n);
    for (auto& e : a.reshaped()) e = g(rng);
    Eigen::HouseholderQR<Matrix> qr(a);
    return qr.householderQ();
}

// Pure state with a random passive-active-passive network on vacuum.
inline Matrix random_pure(std::mt19937_64& rng, int n, double rmax = 1.0) {
    std::uniform_real_distribution<double> u(-rmax, rmax);
    auto passive = [&] {
        // Real orthogonal O acts identically on x and p: symplectic.
        const Matrix o = random_orthogonal(rng, n);
        Matrix s = Matrix::Zero(2 * n, 2 * n);
        s.topLeftCorner(n, n) = o;
        s.bottomRightCorner(n, n) = o;
        return s;
    };
    Matrix s = passive();
    for (int k = 1; k <= n; ++k) s = cvgme::squeezer(n, k, u(rng)) * s;
    s = passive() * s;
    return s * s.transpose();
}

// Equal-weight mixture of `terms` states, each pure and product across a
// random canonical split.
inline cvgme::CovarianceMatrix random_biseparable(std::mt19937_64& rng, int n, int terms, double rmax = 1.0) {
    Matrix x = Matrix::Zero(n, n), p = Matrix::Zero(n, n);
    const auto splits = cvgme::bipartitions(n);
    for (int k = 0; k < terms; ++k) {
        const auto& s = splits[rng() % splits.size()];
        for (const auto& side : {s.side_i(), s.side_j()}) {
            const int m = static_cast<int>(side.size());
            const Matrix g = random_pure(rng, m, rmax);
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) {
                    x(side[a] - 1, side[b] - 1) += g(a, b) / terms;
                    p(side[a] - 1, side[b] - 1) += g(m + a, m + b) / terms;
                }
        }
    }
    return {x, p};
}

// Random tree-sparse coefficients on a reverse-level-order labelling.
inline cvgme::CholeskyParams random_params(std::mt19937_64& rng, int n, double box = 1.0) {
    const auto trees = cvgme::enumerate_trees(n);
    cvgme::CholeskyParams p(cvgme::reverse_level_order_label(trees[rng() % trees.size()]));
    std::uniform_real_distribution<double> u(-box, box);
    cvgme::Vector v(p.dimension());
    for (auto& e : v) e = u(rng);
    p.assign(v);
    return p;
}

} // namespace oracle
