#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace blp {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);
    /// Builds an n x k matrix whose j-th column is columns[j]; all columns must share a length.
    static Matrix from_columns(const std::vector<Vector>& columns);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }
    Vector column(std::size_t c) const;
    const std::vector<double>& data() const noexcept { return data_; }

    Matrix transpose() const;
    bool all_finite() const noexcept;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> x);
Matrix operator-(const Matrix& a, const Matrix& b);

/// X^T X.
Matrix cross_product(const Matrix& x);
/// Largest absolute entry.
double max_abs(const Matrix& a) noexcept;

/// Default relative rank tolerance, applied to column-equilibrated designs.
inline constexpr double kDefaultRankTolerance = 1e-10;

struct LeastSquaresSolution {
    Vector coefficients;
    Vector residuals;
    Vector fitted;
    std::size_t rank = 0;
    Matrix xtx_inverse;
};

/// Least squares via column-pivoted Householder QR on the column-equilibrated design.
/// Throws RankDeficient naming the dependent columns (first-come order) when rank < cols.
LeastSquaresSolution solve_least_squares(const Matrix& x, std::span<const double> y,
                                         double tol = kDefaultRankTolerance);

/// Number of columns whose pivoted-QR diagonal exceeds tol times the largest one,
/// after scaling every column to unit norm. Zero columns never count.
std::size_t numerical_rank(const Matrix& x, double tol = kDefaultRankTolerance);

/// Indices of columns that are (numerically) spanned by earlier columns.
std::vector<std::size_t> dependent_columns(const Matrix& x, double tol = kDefaultRankTolerance);

/// Cholesky-based inverse of a symmetric positive definite matrix.
Matrix invert_spd(const Matrix& a);

}  // namespace blp
