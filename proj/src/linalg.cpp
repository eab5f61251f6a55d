#include "fdia/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fdia/error.hpp"

namespace fdia {

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
    if (x.size() != a.cols()) throw DimensionError("matvec: size mismatch");
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const auto row = a.row(r);
        double acc = 0.0;
        for (std::size_t c = 0; c < a.cols(); ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
    return y;
}

std::vector<double> matvec_transposed(const Matrix& a, std::span<const double> x) {
    if (x.size() != a.rows()) throw DimensionError("matvec_transposed: size mismatch");
    std::vector<double> y(a.cols(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const auto row = a.row(r);
        const double xr = x[r];
        for (std::size_t c = 0; c < a.cols(); ++c) y[c] += row[c] * xr;
    }
    return y;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("matmul: size mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const auto brow = b.row(k);
            auto crow = c.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

Matrix transposed(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
    return t;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2_squared(std::span<const double> a) { return dot(a, a); }

CholeskyFactor::CholeskyFactor(const Matrix& spd) {
    if (spd.rows() != spd.cols()) throw DimensionError("cholesky: matrix not square");
    const std::size_t n = spd.rows();
    l_ = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = spd(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
        if (!(d > 0.0) || !std::isfinite(d))
            throw SemanticError("cholesky: matrix not positive definite at pivot "
                                + std::to_string(j));
        const double ljj = std::sqrt(d);
        l_(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = spd(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
            l_(i, j) = s / ljj;
        }
    }
}

std::vector<double> CholeskyFactor::solve(std::span<const double> rhs) const {
    const std::size_t n = l_.rows();
    if (rhs.size() != n) throw DimensionError("cholesky solve: size mismatch");
    std::vector<double> y(rhs.begin(), rhs.end());
    for (std::size_t i = 0; i < n; ++i) {
        double s = y[i];
        for (std::size_t k = 0; k < i; ++k) s -= l_(i, k) * y[k];
        y[i] = s / l_(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l_(k, ii) * y[k];
        y[ii] = s / l_(ii, ii);
    }
    return y;
}

QrFactor::QrFactor(const Matrix& a)
    : qr_(a), beta_(a.cols(), 0.0), v0_(a.cols(), 0.0) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    if (m < n) throw DimensionError("qr: matrix must be tall (rows >= cols)");

    double max_diag = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        // Householder reflector annihilating column k below the diagonal
        double sigma = 0.0;
        for (std::size_t i = k; i < m; ++i) sigma += qr_(i, k) * qr_(i, k);
        double alpha = std::sqrt(sigma);
        if (alpha == 0.0) continue;
        if (qr_(k, k) > 0.0) alpha = -alpha;
        const double v0 = qr_(k, k) - alpha;
        qr_(k, k) = alpha;
        beta_[k] = -1.0 / (alpha * v0); // = 2 / ||v||^2 with v = (v0, a_{k+1..m-1,k})
        v0_[k] = v0;

        // apply (I - beta v v^T) to the trailing columns; the reflector tail
        // v_{k+1..} lives below the diagonal of column k
        for (std::size_t j = k + 1; j < n; ++j) {
            double s = v0 * qr_(k, j);
            for (std::size_t i = k + 1; i < m; ++i) s += qr_(i, k) * qr_(i, j);
            s *= beta_[k];
            qr_(k, j) -= s * v0;
            for (std::size_t i = k + 1; i < m; ++i) qr_(i, j) -= s * qr_(i, k);
        }
        max_diag = std::max(max_diag, std::abs(alpha));
    }

    const double tol = std::max<std::size_t>(m, n) * 1e-13 * (max_diag > 0 ? max_diag : 1.0);
    rank_ = 0;
    for (std::size_t k = 0; k < n; ++k)
        if (std::abs(qr_(k, k)) > tol) ++rank_;
    full_rank_ = (rank_ == n);
}

std::vector<double> QrFactor::solve_least_squares(std::span<const double> rhs) const {
    const std::size_t m = qr_.rows();
    const std::size_t n = qr_.cols();
    if (rhs.size() != m) throw DimensionError("qr solve: rhs size mismatch");
    if (!full_rank_) throw SemanticError("qr solve: matrix is rank deficient");

    std::vector<double> y(rhs.begin(), rhs.end());
    for (std::size_t k = 0; k < n; ++k) {
        if (beta_[k] == 0.0) continue;
        double s = v0_[k] * y[k];
        for (std::size_t i = k + 1; i < m; ++i) s += qr_(i, k) * y[i];
        s *= beta_[k];
        y[k] -= s * v0_[k];
        for (std::size_t i = k + 1; i < m; ++i) y[i] -= s * qr_(i, k);
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= qr_(ii, j) * x[j];
        x[ii] = s / qr_(ii, ii);
    }
    return x;
}

SymmetricEigen symmetric_eigen(const Matrix& sym) {
    if (sym.rows() != sym.cols()) throw DimensionError("symmetric_eigen: matrix not square");
    const std::size_t n = sym.rows();
    Matrix a = sym;
    Matrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    auto offdiag = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
        return s;
    };

    for (int sweep = 0; sweep < 100 && offdiag() > 1e-24; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0)
                                 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    SymmetricEigen out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    return out;
}

} // namespace fdia
