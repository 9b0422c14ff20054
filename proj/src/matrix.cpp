#include "blp/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "blp/error.hpp"

namespace blp {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
        throw DimensionMismatch("matrix data length " + std::to_string(data_.size()) + " != " +
                                std::to_string(rows_) + " x " + std::to_string(cols_));
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_columns(const std::vector<Vector>& columns) {
    if (columns.empty()) return {};
    const std::size_t n = columns.front().size();
    Matrix m(n, columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j].size() != n) throw DimensionMismatch("columns of unequal length");
        for (std::size_t i = 0; i < n; ++i) m(i, j) = columns[j][i];
    }
    return m;
}

Vector Matrix::column(std::size_t c) const {
    Vector v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, c);
    return v;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionMismatch("matrix product: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Vector operator*(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) throw DimensionMismatch("matrix-vector product: dimensions differ");
    Vector y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto r = a.row(i);
        y[i] = std::inner_product(r.begin(), r.end(), x.begin(), 0.0);
    }
    return y;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("matrix difference: shapes differ");
    std::vector<double> d(a.data().size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.data()[i] - b.data()[i];
    return Matrix(a.rows(), a.cols(), std::move(d));
}

Matrix cross_product(const Matrix& x) {
    const std::size_t p = x.cols();
    Matrix c(p, p);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto r = x.row(i);
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = a; b < p; ++b) c(a, b) += r[a] * r[b];
    }
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < a; ++b) c(a, b) = c(b, a);
    return c;
}

double max_abs(const Matrix& a) noexcept {
    double m = 0.0;
    for (double v : a.data()) m = std::max(m, std::abs(v));
    return m;
}

namespace {

// Column-pivoted Householder QR of a column-equilibrated copy of X.
// Columns are stored separately so reflections touch contiguous memory.
struct PivotedQr {
    std::vector<Vector> cols;        // working columns; upper part holds R after factorization
    std::vector<Vector> reflectors;  // v_k, length n - k
    Vector betas;                    // 2 / v^T v (0 for identity reflections)
    Vector scale;                    // original column norms (1 for zero columns)
    std::vector<std::size_t> perm;   // perm[k] = original column index at position k
    std::size_t rank = 0;

    double r(std::size_t i, std::size_t j) const { return cols[j][i]; }
};

PivotedQr factorize(const Matrix& x, double tol) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    PivotedQr qr;
    qr.cols.resize(p);
    qr.scale.assign(p, 1.0);
    qr.perm.resize(p);
    std::iota(qr.perm.begin(), qr.perm.end(), std::size_t{0});
    for (std::size_t j = 0; j < p; ++j) {
        qr.cols[j] = x.column(j);
        const double nrm = std::sqrt(std::inner_product(qr.cols[j].begin(), qr.cols[j].end(), qr.cols[j].begin(), 0.0));
        if (nrm > 0.0) {
            qr.scale[j] = nrm;
            for (double& v : qr.cols[j]) v /= nrm;
        }
    }

    const std::size_t steps = std::min(n, p);
    qr.reflectors.resize(steps);
    qr.betas.assign(steps, 0.0);
    double r00 = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        // Pivot on the largest remaining trailing norm.
        std::size_t best = k;
        double best_norm = -1.0;
        for (std::size_t j = k; j < p; ++j) {
            double s = 0.0;
            for (std::size_t i = k; i < n; ++i) s += qr.cols[j][i] * qr.cols[j][i];
            if (s > best_norm) {
                best_norm = s;
                best = j;
            }
        }
        std::swap(qr.cols[k], qr.cols[best]);
        std::swap(qr.scale[k], qr.scale[best]);
        std::swap(qr.perm[k], qr.perm[best]);

        Vector& a = qr.cols[k];
        const double norm = std::sqrt(best_norm);
        Vector v(a.begin() + static_cast<std::ptrdiff_t>(k), a.end());
        const double alpha = (v[0] > 0.0) ? -norm : norm;
        v[0] -= alpha;
        const double vtv = std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
        const double beta = vtv > 0.0 ? 2.0 / vtv : 0.0;
        if (beta != 0.0) {
            a[k] = alpha;
            for (std::size_t i = k + 1; i < n; ++i) a[i] = 0.0;
            for (std::size_t j = k + 1; j < p; ++j) {
                Vector& c = qr.cols[j];
                double dot = 0.0;
                for (std::size_t i = k; i < n; ++i) dot += v[i - k] * c[i];
                dot *= beta;
                for (std::size_t i = k; i < n; ++i) c[i] -= dot * v[i - k];
            }
        }
        qr.reflectors[k] = std::move(v);
        qr.betas[k] = beta;

        if (k == 0) r00 = std::abs(a[0]);
        if (r00 > 0.0 && std::abs(a[k]) > tol * r00) ++qr.rank;
    }
    return qr;
}

void apply_qt(const PivotedQr& qr, Vector& y) {
    for (std::size_t k = 0; k < qr.reflectors.size(); ++k) {
        const Vector& v = qr.reflectors[k];
        const double beta = qr.betas[k];
        if (beta == 0.0) continue;
        double dot = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * y[k + i];
        dot *= beta;
        for (std::size_t i = 0; i < v.size(); ++i) y[k + i] -= dot * v[i];
    }
}

void require_finite(const Matrix& x, std::span<const double> y) {
    if (!x.all_finite() || !std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); }))
        throw Error("non-finite value in least-squares input");
}

}  // namespace

std::size_t numerical_rank(const Matrix& x, double tol) {
    if (x.cols() == 0 || x.rows() == 0) return 0;
    return factorize(x, tol).rank;
}

std::vector<std::size_t> dependent_columns(const Matrix& x, double tol) {
    std::vector<std::size_t> kept;
    std::vector<std::size_t> dependent;
    for (std::size_t j = 0; j < x.cols(); ++j) {
        std::vector<Vector> cols;
        cols.reserve(kept.size() + 1);
        for (std::size_t k : kept) cols.push_back(x.column(k));
        cols.push_back(x.column(j));
        if (numerical_rank(Matrix::from_columns(cols), tol) == cols.size())
            kept.push_back(j);
        else
            dependent.push_back(j);
    }
    return dependent;
}

LeastSquaresSolution solve_least_squares(const Matrix& x, std::span<const double> y, double tol) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    if (y.size() != n) throw DimensionMismatch("response length differs from design rows");
    if (n < p)
        throw InsufficientObservations(std::to_string(n) + " observation(s) for " + std::to_string(p) +
                                       " coefficient(s)");
    require_finite(x, y);

    const PivotedQr qr = factorize(x, tol);
    if (qr.rank < p) throw RankDeficient(dependent_columns(x, tol));

    Vector qty(y.begin(), y.end());
    apply_qt(qr, qty);

    // Back substitution R z = (Q^T y)[0:p] in the pivoted, scaled basis.
    Vector z(p, 0.0);
    for (std::size_t ii = p; ii-- > 0;) {
        double s = qty[ii];
        for (std::size_t j = ii + 1; j < p; ++j) s -= qr.r(ii, j) * z[j];
        z[ii] = s / qr.r(ii, ii);
    }

    // R^{-1}, upper triangular.
    Matrix rinv(p, p);
    for (std::size_t j = 0; j < p; ++j) {
        rinv(j, j) = 1.0 / qr.r(j, j);
        for (std::size_t ii = j; ii-- > 0;) {
            double s = 0.0;
            for (std::size_t k = ii + 1; k <= j; ++k) s += qr.r(ii, k) * rinv(k, j);
            rinv(ii, j) = -s / qr.r(ii, ii);
        }
    }

    LeastSquaresSolution sol;
    sol.rank = qr.rank;
    sol.coefficients.assign(p, 0.0);
    for (std::size_t k = 0; k < p; ++k) sol.coefficients[qr.perm[k]] = z[k] / qr.scale[k];

    sol.xtx_inverse = Matrix(p, p);
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b) {
            double s = 0.0;
            for (std::size_t k = std::max(a, b); k < p; ++k) s += rinv(a, k) * rinv(b, k);
            sol.xtx_inverse(qr.perm[a], qr.perm[b]) = s / (qr.scale[a] * qr.scale[b]);
        }

    sol.fitted = x * std::span<const double>(sol.coefficients);
    sol.residuals.resize(n);
    for (std::size_t i = 0; i < n; ++i) sol.residuals[i] = y[i] - sol.fitted[i];
    return sol;
}

Matrix invert_spd(const Matrix& a) {
    const std::size_t p = a.rows();
    if (a.cols() != p) throw DimensionMismatch("invert_spd requires a square matrix");
    const double scale = std::max(max_abs(a), 1e-300);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j)
            if (std::abs(a(i, j) - a(j, i)) > 1e-10 * scale) throw Error("invert_spd requires a symmetric matrix");

    // Lower Cholesky factor L with A = L L^T.
    Matrix l(p, p);
    for (std::size_t j = 0; j < p; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0)) throw NotPositiveDefinite(j);
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < p; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }

    // L^{-1}, lower triangular; A^{-1} = L^{-T} L^{-1}.
    Matrix linv(p, p);
    for (std::size_t j = 0; j < p; ++j) {
        linv(j, j) = 1.0 / l(j, j);
        for (std::size_t i = j + 1; i < p; ++i) {
            double s = 0.0;
            for (std::size_t k = j; k < i; ++k) s += l(i, k) * linv(k, j);
            linv(i, j) = -s / l(i, i);
        }
    }
    Matrix inv(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = i; k < p; ++k) s += linv(k, i) * linv(k, j);
            inv(i, j) = s;
            inv(j, i) = s;
        }
    return inv;
}

}  // namespace blp
