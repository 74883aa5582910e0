#pragma once

// Dense symmetric and symplectic kernels for N-mode Gaussian covariance
// matrices. Ordering is (x_1..x_N, p_1..p_N); modes are 1-based at the API
// surface and 0-based internally.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cvgme/error.hpp"

namespace cvgme {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace detail {

inline void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite())
        throw error(errc::numeric_input, std::string(what) + " has non-finite entries");
}

// Symmetric copy taken from the upper triangle.
inline Matrix upper_symmetric(const Matrix& m) {
    Matrix s = m.triangularView<Eigen::Upper>();
    s.triangularView<Eigen::StrictlyLower>() = m.transpose().triangularView<Eigen::StrictlyLower>();
    return s;
}

} // namespace detail

// Block-diagonal CM gamma = gamma^x (+) gamma^p. Physicality is not an
// invariant here; near-boundary matrices must stay representable.
struct CovarianceMatrix {
    int modes = 0;
    Matrix x;
    Matrix p;

    CovarianceMatrix() = default;

    CovarianceMatrix(Matrix xb, Matrix pb) {
        if (xb.rows() < 1 || xb.rows() != xb.cols() || pb.rows() != pb.cols() || xb.rows() != pb.rows())
            throw error(errc::invalid_dimension, "x and p blocks must be square and of equal size");
        modes = static_cast<int>(xb.rows());
        x = detail::upper_symmetric(xb);
        p = detail::upper_symmetric(pb);
    }

    static CovarianceMatrix vacuum(int n) {
        if (n < 1) throw error(errc::invalid_dimension, "modes must be >= 1");
        return {Matrix::Identity(n, n), Matrix::Identity(n, n)};
    }

    Matrix full() const {
        Matrix g = Matrix::Zero(2 * modes, 2 * modes);
        g.topLeftCorner(modes, modes) = x;
        g.bottomRightCorner(modes, modes) = p;
        return g;
    }

    // Inverse of full(); any x-p coupling in g is discarded.
    static CovarianceMatrix from_full(const Matrix& g) {
        if (g.rows() != g.cols() || g.rows() % 2 != 0 || g.rows() == 0)
            throw error(errc::invalid_dimension, "full CM must be 2N x 2N");
        const auto n = g.rows() / 2;
        return {g.topLeftCorner(n, n), g.bottomRightCorner(n, n)};
    }

    bool operator==(const CovarianceMatrix&) const = default;
};

inline Matrix symplectic_form(int modes) {
    if (modes < 1) throw error(errc::invalid_dimension, "modes must be >= 1");
    Matrix om = Matrix::Zero(2 * modes, 2 * modes);
    om.topRightCorner(modes, modes).setIdentity();
    om.bottomLeftCorner(modes, modes) = -Matrix::Identity(modes, modes);
    return om;
}

inline bool is_symplectic(const Matrix& s, double tol = 1e-9) {
    if (s.rows() != s.cols() || s.rows() % 2 != 0 || s.rows() == 0) return false;
    const Matrix om = symplectic_form(static_cast<int>(s.rows() / 2));
    return (s * om * s.transpose() - om).cwiseAbs().maxCoeff() <= tol;
}

// Lower-triangular L with L L^T = z. Reports the failing pivot (0-based).
inline Matrix cholesky(const Matrix& z) {
    detail::require_finite(z, "cholesky input");
    if (z.rows() != z.cols() || z.rows() == 0)
        throw error(errc::invalid_dimension, "cholesky needs a square matrix");
    const auto n = z.rows();
    Matrix l = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = z(j, j) - l.row(j).head(j).squaredNorm();
        if (!(d > 0.0))
            throw decomposition_error(static_cast<int>(j),
                                      "matrix is not positive-definite at pivot " + std::to_string(j + 1));
        l(j, j) = std::sqrt(d);
        for (Eigen::Index i = j + 1; i < n; ++i)
            l(i, j) = (z(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
    return l;
}

namespace detail {

inline Eigen::SelfAdjointEigenSolver<Matrix> pd_eigen(const Matrix& z, const char* what) {
    require_finite(z, what);
    if (z.rows() != z.cols() || z.rows() == 0 || z.rows() % 2 != 0)
        throw error(errc::invalid_dimension, std::string(what) + " must be 2N x 2N");
    Eigen::SelfAdjointEigenSolver<Matrix> es(detail::upper_symmetric(z));
    if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() > 0.0))
        throw error(errc::decomposition_failure, std::string(what) + " is not positive-definite");
    return es;
}

} // namespace detail

// Symplectic spectrum of a positive-definite 2N x 2N matrix, descending.
// Uses the Hermitian form i Z^{1/2} Omega Z^{1/2}, whose spectrum is {+-nu_j}.
inline Vector symplectic_eigenvalues(const Matrix& z) {
    const auto es = detail::pd_eigen(z, "symplectic spectrum input");
    const int n = static_cast<int>(z.rows() / 2);
    const Matrix root = es.operatorSqrt();
    const Eigen::MatrixXcd h = std::complex<double>(0.0, 1.0) * (root * symplectic_form(n) * root).cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> hs(h, Eigen::EigenvaluesOnly);
    Vector nu = hs.eigenvalues().tail(n).reverse();
    return nu;
}

inline Vector symplectic_eigenvalues(const CovarianceMatrix& cm) { return symplectic_eigenvalues(cm.full()); }

inline double min_symplectic_eigenvalue(const Matrix& g) { return symplectic_eigenvalues(g).minCoeff(); }

inline double min_symplectic_eigenvalue(const CovarianceMatrix& cm) { return min_symplectic_eigenvalue(cm.full()); }

// gamma + i Omega >= 0, tested as min nu >= 1 - tol.
inline bool is_physical(const Matrix& g, double tol = 1e-9) {
    detail::require_finite(g, "CM");
    Eigen::SelfAdjointEigenSolver<Matrix> es(detail::upper_symmetric(g), Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() > 0.0)) return false;
    return min_symplectic_eigenvalue(g) >= 1.0 - tol;
}

inline bool is_physical(const CovarianceMatrix& cm, double tol = 1e-9) { return is_physical(cm.full(), tol); }

struct WilliamsonResult {
    Matrix s;  // S Z S^T = diag(nu, nu)
    Vector nu; // descending
};

// Normal form of a positive-definite Z. With K = Z^{-1/2} Omega Z^{-1/2} and
// unit eigenvectors v = a + ib of iK (eigenvalue 1/nu), the real pairs
// e = sqrt2 a, f = sqrt2 b block-diagonalise K; then
// S = diag(nu,nu)^{1/2} O^T Z^{-1/2} with O = [f_1..f_N | e_1..e_N].
// Each v is phased so its first non-negligible component is real positive.
inline WilliamsonResult williamson(const Matrix& z) {
    const auto es = detail::pd_eigen(z, "williamson input");
    const int n = static_cast<int>(z.rows() / 2);
    const Matrix inv_root = es.operatorInverseSqrt();
    const Matrix k = inv_root * symplectic_form(n) * inv_root;
    const Eigen::MatrixXcd h = std::complex<double>(0.0, 1.0) * k.cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> hs(h);
    if (hs.info() != Eigen::Success) throw error(errc::decomposition_failure, "eigensolver failed");

    // Ascending eigenvalues: the top n are +1/nu, so nu descending is the
    // top n in ascending order.
    Matrix o(2 * n, 2 * n);
    Vector nu(n);
    for (int j = 0; j < n; ++j) {
        const Eigen::Index col = n + j;
        const double lambda = hs.eigenvalues()(col);
        Eigen::VectorXcd v = hs.eigenvectors().col(col);
        const double scale = v.cwiseAbs().maxCoeff();
        for (Eigen::Index t = 0; t < v.size(); ++t) {
            if (std::abs(v(t)) > 1e-8 * scale) {
                v *= std::polar(1.0, -std::arg(v(t)));
                break;
            }
        }
        nu(j) = 1.0 / lambda;
        o.col(j) = std::sqrt(2.0) * v.imag();
        o.col(n + j) = std::sqrt(2.0) * v.real();
    }
    Vector d(2 * n);
    d << nu.cwiseSqrt(), nu.cwiseSqrt();
    return {d.asDiagonal() * o.transpose() * inv_root, nu};
}

// p-quadrature sign flip of the selected (1-based) modes.
inline CovarianceMatrix partial_transpose(const CovarianceMatrix& cm, const std::vector<int>& flipped) {
    std::vector<char> mark(cm.modes, 0);
    for (int m : flipped) {
        if (m < 1 || m > cm.modes) throw error(errc::invalid_split, "mode index out of range");
        mark[m - 1] = 1;
    }
    const auto count = std::count(mark.begin(), mark.end(), 1);
    if (count == 0 || count == cm.modes) throw error(errc::invalid_split, "flipped set must be a nonempty proper subset");
    CovarianceMatrix out = cm;
    for (int i = 0; i < cm.modes; ++i)
        for (int j = 0; j < cm.modes; ++j)
            if (mark[i] != mark[j]) out.p(i, j) = -cm.p(i, j);
    return out;
}

inline Matrix apply_symplectic(const Matrix& g, const Matrix& s) {
    if (g.rows() != s.rows() || g.cols() != s.cols() || g.rows() != g.cols())
        throw error(errc::invalid_dimension, "CM and symplectic matrix sizes differ");
    if (!is_symplectic(s, 1e-6)) throw error(errc::invalid_symplectic, "S Omega S^T != Omega");
    return s * g * s.transpose();
}

// Beam splitter on modes (i, j), 1-based, acting identically on x and p:
// (u_i, u_j) -> (c u_i + s u_j, s u_i - c u_j). The default angle is the
// balanced one, (u_i + u_j, u_i - u_j)/sqrt2. The map is its own inverse.
inline Matrix beam_splitter(int modes, int i, int j, double theta = M_PI / 4) {
    if (i < 1 || j < 1 || i > modes || j > modes || i == j)
        throw error(errc::invalid_dimension, "beam splitter needs two distinct modes");
    Matrix s = Matrix::Identity(2 * modes, 2 * modes);
    const double c = std::cos(theta), t = std::sin(theta);
    for (int off : {0, modes}) {
        const int a = off + i - 1, b = off + j - 1;
        s(a, a) = c;
        s(a, b) = t;
        s(b, a) = t;
        s(b, b) = -c;
    }
    return s;
}

// Single-mode squeezer: x_k -> e^{-r} x_k, p_k -> e^{r} p_k.
inline Matrix squeezer(int modes, int k, double r) {
    if (k < 1 || k > modes) throw error(errc::invalid_dimension, "mode index out of range");
    Matrix s = Matrix::Identity(2 * modes, 2 * modes);
    s(k - 1, k - 1) = std::exp(-r);
    s(modes + k - 1, modes + k - 1) = std::exp(r);
    return s;
}

// Entangled across every bipartition by the PPT test (min PT nu < 1).
inline bool fully_inseparable(const CovarianceMatrix& cm, double tol = 1e-9) {
    if (cm.modes < 2) throw error(errc::invalid_dimension, "needs at least two modes");
    const std::uint32_t splits = (1u << (cm.modes - 1)) - 1u;
    for (std::uint32_t mask = 0; mask < splits; ++mask) {
        // mode 1 always on the flipped side, remaining modes from mask bits
        std::vector<int> side{1};
        for (int m = 2; m <= cm.modes; ++m)
            if (mask & (1u << (m - 2))) side.push_back(m);
        if (min_symplectic_eigenvalue(partial_transpose(cm, side)) >= 1.0 - tol) return false;
    }
    return true;
}

} // namespace cvgme
