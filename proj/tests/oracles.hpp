#pragma once

// Independent reference computations for tests. Everything here goes through Eigen
// (or plain loops) rather than the library's QR path.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "blp/matrix.hpp"

namespace oracle {

inline Eigen::MatrixXd to_eigen(const blp::Matrix& m) {
    Eigen::MatrixXd e(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
    return e;
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

/// (X'X)^{-1} X'y by explicit inversion of the normal equations.
inline std::vector<double> normal_equations(const blp::Matrix& x, const std::vector<double>& y) {
    const Eigen::MatrixXd X = to_eigen(x);
    const Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();
    return to_std(xtx_inv * X.transpose() * to_eigen(y));
}

inline std::vector<double> singular_values(const blp::Matrix& x) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(x));
    return to_std(svd.singularValues());
}

/// Just-identified IV: (Z'X)^{-1} Z'y.
inline std::vector<double> iv_closed_form(const blp::Matrix& z, const blp::Matrix& x, const std::vector<double>& y) {
    const Eigen::MatrixXd Z = to_eigen(z);
    const Eigen::MatrixXd X = to_eigen(x);
    return to_std((Z.transpose() * X).fullPivLu().solve(Z.transpose() * to_eigen(y)));
}

/// bread * X' diag(u^2) X * bread as an explicit triple product.
inline Eigen::MatrixXd hc0_triple_product(const blp::Matrix& x, const std::vector<double>& u, const blp::Matrix& bread) {
    const Eigen::MatrixXd X = to_eigen(x);
    Eigen::VectorXd u2 = to_eigen(u).array().square();
    const Eigen::MatrixXd B = to_eigen(bread);
    return B * (X.transpose() * u2.asDiagonal() * X) * B;
}

/// Residual sum of squares of y on X via normal equations.
inline double rss(const blp::Matrix& x, const std::vector<double>& y) {
    const auto beta = normal_equations(x, y);
    const Eigen::VectorXd r = to_eigen(y) - to_eigen(x) * to_eigen(beta);
    return r.squaredNorm();
}

/// Random matrix with standard normal entries.
inline blp::Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    blp::Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = nd(rng);
    return m;
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    std::vector<double> v(n);
    for (auto& x : v) x = nd(rng);
    return v;
}

inline double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
    return m;
}

}  // namespace oracle
