#pragma once

// Product and sum biseparability criteria built from tree-sparse Cholesky
// factors L^a = (I + A) o l^a, a in {x, p}.
//
//   U^a      = 1/2 Tr[gamma^a L^a L^aT]
//   M        = L^xT L^p,  M^(I) = L^xT diag(1_I) L^p
//   L        = ||M||_F^2
//   L^(k)    = 2 sum_ij (|X_ij| - X_ij),  X = M^(I) o M^(J)
//   K^(k)    = sum_i |M^(I)_ii| + |M^(J)_ii|
//   D_P      = U^x U^p - (L + min_k L^(k)) / 4
//   D_S      = U^x + U^p - min_k K^(k)

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cvgme/error.hpp"
#include "cvgme/linalg.hpp"
#include "cvgme/trees.hpp"

namespace cvgme {

enum class Quadrature { x, p };
enum class Criterion { product, sum };

inline const char* to_string(Criterion c) noexcept { return c == Criterion::product ? "product" : "sum"; }

// Coefficients of one quadrature: diag[i] = l_ii, off[i] = l_{parent(i), i}
// (0-based i; off[N-1] is unused and kept at zero).
struct Coefficients {
    Vector diag;
    Vector off;
};

class CholeskyParams {
public:
    CholeskyParams() = default;

    explicit CholeskyParams(LabeledTree tree) : tree_(std::move(tree)), parent_(parents(tree_)) {
        const int n = tree_.order();
        x_ = {Vector::Zero(n), Vector::Zero(n)};
        p_ = {Vector::Zero(n), Vector::Zero(n)};
    }

    // Ordered (l_11, l_21, l_22, l_32, ...) style input: for each column i
    // the diagonal first and then the edge coefficient below it, as in the
    // usual tabulation for a path. `order` lists the (row, col) pairs.
    static CholeskyParams from_list(const LabeledTree& tree, const std::vector<std::pair<int, int>>& order,
                                    const std::vector<double>& lx, const std::vector<double>& lp) {
        CholeskyParams c(tree);
        if (order.size() != lx.size() || order.size() != lp.size())
            throw error(errc::parameter, "coefficient list lengths differ");
        for (std::size_t t = 0; t < order.size(); ++t) {
            c.set(Quadrature::x, order[t].first, order[t].second, lx[t]);
            c.set(Quadrature::p, order[t].first, order[t].second, lp[t]);
        }
        return c;
    }

    const LabeledTree& tree() const noexcept { return tree_; }
    int modes() const noexcept { return tree_.order(); }
    int parent(int i) const { return parent_.at(i); } // 1-based; 0 for the root

    const Coefficients& coeffs(Quadrature q) const noexcept { return q == Quadrature::x ? x_ : p_; }
    Coefficients& coeffs(Quadrature q) noexcept { return q == Quadrature::x ? x_ : p_; }

    // (j, i) with j == i for a diagonal entry or j == parent(i), 1-based.
    bool in_support(int j, int i) const noexcept {
        if (i < 1 || i > modes() || j < 1 || j > modes()) return false;
        return j == i || (i < modes() && parent_[i] == j);
    }

    double get(Quadrature q, int j, int i) const {
        if (!in_support(j, i)) throw error(errc::parameter, "(" + std::to_string(j) + "," + std::to_string(i) + ") is outside the tree support");
        return j == i ? coeffs(q).diag(i - 1) : coeffs(q).off(i - 1);
    }

    void set(Quadrature q, int j, int i, double v) {
        if (!in_support(j, i)) throw error(errc::parameter, "(" + std::to_string(j) + "," + std::to_string(i) + ") is outside the tree support");
        (j == i ? coeffs(q).diag(i - 1) : coeffs(q).off(i - 1)) = v;
    }

    // Support in a fixed order: for each column i, (i,i) then (parent(i), i).
    std::vector<std::pair<int, int>> support() const {
        std::vector<std::pair<int, int>> s;
        for (int i = 1; i <= modes(); ++i) {
            s.emplace_back(i, i);
            if (i < modes()) s.emplace_back(parent_[i], i);
        }
        return s;
    }

    // Flat layout: x support then p support, each in support() order.
    int dimension() const noexcept { return 2 * (2 * modes() - 1); }

    Vector flatten() const {
        Vector v(dimension());
        int t = 0;
        for (auto q : {Quadrature::x, Quadrature::p})
            for (auto [j, i] : support()) v(t++) = get(q, j, i);
        return v;
    }

    void assign(const Vector& v) {
        if (v.size() != dimension()) throw error(errc::parameter, "flat parameter vector has wrong length");
        int t = 0;
        for (auto q : {Quadrature::x, Quadrature::p})
            for (auto [j, i] : support()) set(q, j, i, v(t++));
    }

    bool operator==(const CholeskyParams& o) const {
        return tree_.tree == o.tree_.tree && x_.diag == o.x_.diag && x_.off == o.x_.off && p_.diag == o.p_.diag &&
               p_.off == o.p_.off;
    }

private:
    LabeledTree tree_;
    std::vector<int> parent_;
    Coefficients x_, p_;
};

inline Matrix build_L(const CholeskyParams& params, Quadrature q) {
    const int n = params.modes();
    Matrix l = Matrix::Zero(n, n);
    const auto& c = params.coeffs(q);
    for (int i = 1; i <= n; ++i) {
        l(i - 1, i - 1) = c.diag(i - 1);
        if (i < n) l(params.parent(i) - 1, i - 1) = c.off(i - 1);
    }
    return l;
}

// Half trace 1/2 Tr[gamma^a L^a L^aT], summed column by column. Each column
// of L has at most two nonzeros, so this is the at-most-two-mode variance
// sum directly.
inline std::pair<double, double> lhs_U(const CovarianceMatrix& cm, const CholeskyParams& params) {
    if (cm.modes != params.modes()) throw error(errc::invalid_dimension, "CM and tree orders differ");
    auto one = [&](const Matrix& g, const Coefficients& c) {
        double u = 0.0;
        const int n = params.modes();
        for (int i = 0; i < n; ++i) {
            const double d = c.diag(i);
            u += d * d * g(i, i);
            if (i + 1 < n) {
                const int j = params.parent(i + 1) - 1;
                const double o = c.off(i);
                u += 2.0 * d * o * g(i, j) + o * o * g(j, j);
            }
        }
        return 0.5 * u;
    };
    return {one(cm.x, params.coeffs(Quadrature::x)), one(cm.p, params.coeffs(Quadrature::p))};
}

inline double script_L(const CholeskyParams& params) {
    return (build_L(params, Quadrature::x).transpose() * build_L(params, Quadrature::p)).squaredNorm();
}

namespace detail {

inline Matrix restricted_product(const Matrix& lx, const Matrix& lp, const Bipartition& s, bool side_i) {
    Vector mask(lx.rows());
    for (int r = 0; r < lx.rows(); ++r) mask(r) = (s.in_i(r + 1) == side_i) ? 1.0 : 0.0;
    return lx.transpose() * mask.asDiagonal() * lp;
}

inline void check_split(const CholeskyParams& params, const Bipartition& s) {
    if (s.modes != params.modes() || !(s.mask_i & 1u) || s.mask_i >= (1u << s.modes) - 1u)
        throw error(errc::invalid_split, "split does not match the tree order or is not canonical");
}

} // namespace detail

inline double script_L_k(const CholeskyParams& params, const Bipartition& s) {
    detail::check_split(params, s);
    const Matrix lx = build_L(params, Quadrature::x), lp = build_L(params, Quadrature::p);
    const Matrix x = detail::restricted_product(lx, lp, s, true).cwiseProduct(detail::restricted_product(lx, lp, s, false));
    return 2.0 * (x.cwiseAbs() - x).sum();
}

inline double script_K_k(const CholeskyParams& params, const Bipartition& s) {
    detail::check_split(params, s);
    const Matrix lx = build_L(params, Quadrature::x), lp = build_L(params, Quadrature::p);
    return detail::restricted_product(lx, lp, s, true).diagonal().cwiseAbs().sum() +
           detail::restricted_product(lx, lp, s, false).diagonal().cwiseAbs().sum();
}

// Edge-cut form of K^(k), valid for validated labellings: an uncut pair
// (i, parent j) gives |lx_ii lp_ii + lx_ji lp_ji|, a cut pair gives the two
// absolute values separately, and the root adds |lx_NN lp_NN|.
inline double script_K_k_edge_cut(const CholeskyParams& params, const Bipartition& s) {
    detail::check_split(params, s);
    const auto& x = params.coeffs(Quadrature::x);
    const auto& p = params.coeffs(Quadrature::p);
    const int n = params.modes();
    double k = std::abs(x.diag(n - 1) * p.diag(n - 1));
    for (int i = 1; i < n; ++i) {
        const double a = x.diag(i - 1) * p.diag(i - 1);
        const double b = x.off(i - 1) * p.off(i - 1);
        k += s.in_i(i) == s.in_i(params.parent(i)) ? std::abs(a + b) : std::abs(a) + std::abs(b);
    }
    return k;
}

struct CriterionReport {
    double u_x = 0.0;
    double u_p = 0.0;
    double script_L = 0.0;
    std::vector<Bipartition> splits;
    std::vector<double> script_L_k;
    std::vector<double> script_K_k;
    double d_p = 0.0;
    double d_s = 0.0;
    Bipartition argmin_split_p;
    Bipartition argmin_split_s;

    double gap(Criterion c) const noexcept { return c == Criterion::product ? d_p : d_s; }
    double min_L_k() const { return script_L_k.at(index_of(argmin_split_p)); }
    double min_K_k() const { return script_K_k.at(index_of(argmin_split_s)); }

private:
    std::size_t index_of(const Bipartition& b) const {
        for (std::size_t t = 0; t < splits.size(); ++t)
            if (splits[t] == b) return t;
        throw error(errc::lookup, "split not in report");
    }
};

// Reusable evaluator for one tree. evaluate() builds the dense restricted
// products; gap() computes the same index-set sums from the nonzero pattern
// only, for use inside the optimizer.
class Evaluator {
public:
    explicit Evaluator(const CholeskyParams& shape)
        : n_(shape.modes()), splits_(bipartitions(shape.modes())), shape_(shape) {
        masks_.reserve(splits_.size());
        for (const auto& s : splits_) {
            Vector m(n_);
            for (int r = 0; r < n_; ++r) m(r) = s.in_i(r + 1) ? 1.0 : 0.0;
            masks_.push_back(m);
        }
        build_pattern();
    }

    const std::vector<Bipartition>& splits() const noexcept { return splits_; }

    CriterionReport evaluate(const CovarianceMatrix& cm, const CholeskyParams& params) const {
        if (cm.modes != params.modes() || params.modes() != n_)
            throw error(errc::invalid_dimension, "CM, params and evaluator orders differ");
        CriterionReport r;
        std::tie(r.u_x, r.u_p) = lhs_U(cm, params);
        const Matrix lx = build_L(params, Quadrature::x), lp = build_L(params, Quadrature::p);
        const Matrix lxt = lx.transpose();
        const Matrix m = lxt * lp;
        r.script_L = m.squaredNorm();
        r.splits = splits_;
        r.script_L_k.reserve(splits_.size());
        r.script_K_k.reserve(splits_.size());
        double best_l = std::numeric_limits<double>::infinity(), best_k = best_l;
        for (std::size_t t = 0; t < splits_.size(); ++t) {
            const Matrix mi = lxt * masks_[t].asDiagonal() * lp;
            const Matrix mj = m - mi;
            const Matrix x = mi.cwiseProduct(mj);
            const double lk = 2.0 * (x.cwiseAbs() - x).sum();
            const double kk = mi.diagonal().cwiseAbs().sum() + mj.diagonal().cwiseAbs().sum();
            r.script_L_k.push_back(lk);
            r.script_K_k.push_back(kk);
            if (lk < best_l) {
                best_l = lk;
                r.argmin_split_p = splits_[t];
            }
            if (kk < best_k) {
                best_k = kk;
                r.argmin_split_s = splits_[t];
            }
        }
        r.d_p = r.u_x * r.u_p - (r.script_L + best_l) / 4.0;
        r.d_s = r.u_x + r.u_p - best_k;
        return r;
    }

    // D_P or D_S at a flat parameter vector (CholeskyParams::flatten order).
    double gap(const CovarianceMatrix& cm, const Vector& v, Criterion which) const {
        if (v.size() != shape_.dimension()) throw error(errc::parameter, "flat parameter vector has wrong length");
        const int half = 2 * n_ - 1;
        double ux = 0.0, up = 0.0;
        for (int i = 0; i < n_; ++i) {
            const double dx = v(2 * i), dp = v(half + 2 * i);
            ux += dx * dx * cm.x(i, i);
            up += dp * dp * cm.p(i, i);
            if (i + 1 < n_) {
                const int j = parent_[i];
                const double ox = v(2 * i + 1), op = v(half + 2 * i + 1);
                ux += 2.0 * dx * ox * cm.x(i, j) + ox * ox * cm.x(j, j);
                up += 2.0 * dp * op * cm.p(i, j) + op * op * cm.p(j, j);
            }
        }
        ux *= 0.5;
        up *= 0.5;

        for (std::size_t t = 0; t < terms_.size(); ++t) term_val_[t] = v(terms_[t].xi) * v(terms_[t].pk);
        double full = 0.0;
        if (which == Criterion::product) {
            std::fill(mi_.begin(), mi_.end(), 0.0);
            for (std::size_t t = 0; t < terms_.size(); ++t) mi_[terms_[t].entry] += term_val_[t];
            for (double e : mi_) full += e * e;
        }
        double best = std::numeric_limits<double>::infinity();
        for (const auto& s : splits_) {
            std::fill(mi_.begin(), mi_.end(), 0.0);
            std::fill(mj_.begin(), mj_.end(), 0.0);
            for (std::size_t t = 0; t < terms_.size(); ++t)
                (((s.mask_i >> terms_[t].row) & 1u) ? mi_ : mj_)[terms_[t].entry] += term_val_[t];
            double acc = 0.0;
            if (which == Criterion::product) {
                for (std::size_t e = 0; e < mi_.size(); ++e) {
                    const double x = mi_[e] * mj_[e];
                    acc += std::abs(x) - x;
                }
                acc *= 2.0;
            } else {
                for (std::size_t e = 0; e < mi_.size(); ++e)
                    if (diagonal_[e]) acc += std::abs(mi_[e]) + std::abs(mj_[e]);
            }
            best = std::min(best, acc);
        }
        if (which == Criterion::product) return ux * up - (full + best) / 4.0;
        return ux + up - best;
    }

private:
    // Entry (i, k) of L^xT diag(1_I) L^p collects L^x_ri L^p_rk over rows r
    // shared by columns i and k; column i is nonzero only in rows i and
    // parent(i).
    struct Term {
        int entry; // index into the structurally nonzero (i, k) list
        int row;   // 0-based row r
        int xi;    // flat index of L^x_ri
        int pk;    // flat index of L^p_rk
    };

    void build_pattern() {
        const int half = 2 * n_ - 1;
        parent_.assign(n_, -1);
        for (int i = 1; i < n_; ++i) parent_[i - 1] = shape_.parent(i) - 1;
        // (row, flat offset within one quadrature) for each column
        std::vector<std::vector<std::pair<int, int>>> col(n_);
        for (int i = 0; i < n_; ++i) {
            col[i].emplace_back(i, 2 * i);
            if (i + 1 < n_) col[i].emplace_back(parent_[i], 2 * i + 1);
        }
        for (int i = 0; i < n_; ++i)
            for (int k = 0; k < n_; ++k) {
                bool any = false;
                for (auto [ri, fi] : col[i])
                    for (auto [rk, fk] : col[k])
                        if (ri == rk) {
                            if (!any) {
                                diagonal_.push_back(i == k);
                                any = true;
                            }
                            terms_.push_back({static_cast<int>(diagonal_.size()) - 1, ri, fi, half + fk});
                        }
            }
        term_val_.assign(terms_.size(), 0.0);
        mi_.assign(diagonal_.size(), 0.0);
        mj_.assign(diagonal_.size(), 0.0);
    }

    int n_;
    std::vector<Bipartition> splits_;
    std::vector<Vector> masks_;
    CholeskyParams shape_;
    std::vector<int> parent_;
    std::vector<Term> terms_;
    std::vector<char> diagonal_;
    // Scratch for gap(); an Evaluator is therefore not shared across threads.
    mutable std::vector<double> term_val_, mi_, mj_;
};

inline CriterionReport evaluate(const CovarianceMatrix& cm, const CholeskyParams& params) {
    return Evaluator(params).evaluate(cm, params);
}

// Local pi rotation of mode j (1-based): x_j -> -x_j, p_j -> -p_j.
inline CovarianceMatrix flip_mode(const CovarianceMatrix& cm, int j) {
    CovarianceMatrix out = cm;
    out.x.row(j - 1) *= -1.0;
    out.x.col(j - 1) *= -1.0;
    out.p.row(j - 1) *= -1.0;
    out.p.col(j - 1) *= -1.0;
    return out;
}

// Matching parameter change: negate row j of both L factors.
inline CholeskyParams flip_mode(const CholeskyParams& params, int j) {
    CholeskyParams out = params;
    for (auto q : {Quadrature::x, Quadrature::p})
        for (auto [r, c] : params.support())
            if (r == j) out.set(q, r, c, -params.get(q, r, c));
    return out;
}

} // namespace cvgme
