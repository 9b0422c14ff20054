#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "blp/error.hpp"
#include "blp/matrix.hpp"
#include "oracles.hpp"

using blp::Matrix;

TEST_CASE("least squares on the identity returns y with zero residuals") {
    const auto sol = blp::solve_least_squares(Matrix::identity(3), std::vector<double>{1, 2, 3});
    CHECK(sol.coefficients[0] == doctest::Approx(1.0));
    CHECK(sol.coefficients[1] == doctest::Approx(2.0));
    CHECK(sol.coefficients[2] == doctest::Approx(3.0));
    for (double r : sol.residuals) CHECK(std::abs(r) < 1e-14);
    CHECK(sol.rank == 3);
}

TEST_CASE("intercept-only fit is the sample mean") {
    const auto sol = blp::solve_least_squares(Matrix(4, 1, 1.0), std::vector<double>{1, 2, 3, 4});
    CHECK(sol.coefficients[0] == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(sol.xtx_inverse(0, 0) == doctest::Approx(0.25));
}

TEST_CASE("QR solution matches the normal-equations oracle") {
    std::mt19937_64 rng(101);
    const Matrix x = oracle::random_matrix(10, 3, rng);
    const auto y = oracle::random_vector(10, rng);
    const auto sol = blp::solve_least_squares(x, y);
    const auto expected = oracle::normal_equations(x, y);
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(std::abs(sol.coefficients[j] - expected[j]) <= 1e-10 * std::max(1.0, std::abs(expected[j])));

    const Eigen::MatrixXd X = oracle::to_eigen(x);
    const Eigen::MatrixXd inv = (X.transpose() * X).inverse();
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) CHECK(sol.xtx_inverse(a, b) == doctest::Approx(inv(a, b)).epsilon(1e-10));
}

TEST_CASE("numerical rank") {
    CHECK(blp::numerical_rank(Matrix::identity(3)) == 3);

    std::mt19937_64 rng(7);
    Matrix dup = oracle::random_matrix(6, 3, rng);
    for (std::size_t i = 0; i < 6; ++i) dup(i, 2) = dup(i, 0);
    CHECK(blp::numerical_rank(dup) == 2);

    SUBCASE("near-duplicate column at 1e-14 noise is rank deficient at tol 1e-10") {
        Matrix x = oracle::random_matrix(5, 3, rng);
        const auto noise = oracle::random_vector(5, rng);
        for (std::size_t i = 0; i < 5; ++i) x(i, 2) = x(i, 0) + 1e-14 * noise[i];
        // Independent check of the construction: relative smallest singular value is tiny.
        const auto sv = oracle::singular_values(x);
        REQUIRE(sv.back() / sv.front() < 1e-12);
        CHECK(blp::numerical_rank(x, 1e-10) == 2);
    }

    SUBCASE("zero column does not count") {
        Matrix x = oracle::random_matrix(5, 3, rng);
        for (std::size_t i = 0; i < 5; ++i) x(i, 1) = 0.0;
        CHECK(blp::numerical_rank(x) == 2);
    }
}

TEST_CASE("rank deficiency is an error naming the later dependent column") {
    std::mt19937_64 rng(8);
    Matrix x = oracle::random_matrix(8, 4, rng);
    for (std::size_t i = 0; i < 8; ++i) x(i, 3) = 2.0 * x(i, 1) - x(i, 0);
    const auto y = oracle::random_vector(8, rng);
    try {
        (void)blp::solve_least_squares(x, y);
        FAIL("expected RankDeficient");
    } catch (const blp::RankDeficient& e) {
        CHECK(e.columns() == std::vector<std::size_t>{3});
    }
    CHECK(blp::dependent_columns(x) == std::vector<std::size_t>{3});
}

TEST_CASE("least squares input validation") {
    CHECK_THROWS_AS(blp::solve_least_squares(Matrix(2, 3, 1.0), std::vector<double>{1, 2}), blp::InsufficientObservations);
    CHECK_THROWS_AS(blp::solve_least_squares(Matrix(3, 1, 1.0), std::vector<double>{1, 2}), blp::DimensionMismatch);
    Matrix bad = Matrix::identity(2);
    bad(0, 1) = std::nan("");
    CHECK_THROWS_AS(blp::solve_least_squares(bad, std::vector<double>{1, 2}), blp::Error);
    CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1, 2, 3}), blp::DimensionMismatch);
}

TEST_CASE("invert_spd") {
    const Matrix i2 = blp::invert_spd(Matrix::identity(2));
    CHECK(i2 == Matrix::identity(2));

    const Matrix d = blp::invert_spd(Matrix(2, 2, std::vector<double>{2, 0, 0, 4}));
    CHECK(d(0, 0) == doctest::Approx(0.5));
    CHECK(d(1, 1) == doctest::Approx(0.25));
    CHECK(d(0, 1) == 0.0);

    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix b = oracle::random_matrix(4, 4, rng);
        Matrix a = b.transpose() * b;
        for (std::size_t k = 0; k < 4; ++k) a(k, k) += 1.0;
        const Matrix residual = a * blp::invert_spd(a) - Matrix::identity(4);
        CHECK(blp::max_abs(residual) <= 1e-8);
    }

    CHECK_THROWS_AS(blp::invert_spd(Matrix(2, 2, std::vector<double>{1, 2, 2, 1})), blp::NotPositiveDefinite);
    CHECK_THROWS_AS(blp::invert_spd(Matrix(2, 2, std::vector<double>{1, 0.5, 0.4, 1})), blp::Error);
}

TEST_CASE("least squares properties on random full-rank designs") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> rows(6, 40), cols(1, 5);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t p = cols(rng);
        const std::size_t n = std::max(p + 1, rows(rng));
        const Matrix x = oracle::random_matrix(n, p, rng);
        const auto y = oracle::random_vector(n, rng);
        const auto sol = blp::solve_least_squares(x, y);

        // fitted + residuals = y and X'r = 0
        double scale = 0.0;
        for (double v : y) scale = std::max(scale, std::abs(v));
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(sol.fitted[i] + sol.residuals[i] - y[i]) <= 1e-12 * (1 + scale));
        const Matrix xt = x.transpose();
        const auto xtr = xt * std::span<const double>(sol.residuals);
        for (double v : xtr) CHECK(std::abs(v) <= 1e-8 * (1.0 + scale) * static_cast<double>(n));

        // Row permutation leaves coefficients unchanged.
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        Matrix xp(n, p);
        std::vector<double> yp(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < p; ++j) xp(i, j) = x(perm[i], j);
            yp[i] = y[perm[i]];
        }
        const auto solp = blp::solve_least_squares(xp, yp);
        CHECK(oracle::max_rel_diff(solp.coefficients, sol.coefficients) <= 1e-10);
        for (std::size_t i = 0; i < n; ++i) CHECK(solp.residuals[i] == doctest::Approx(sol.residuals[perm[i]]).epsilon(1e-8));

        // Scaling column k by c scales coefficient k by 1/c.
        const std::size_t k = trial % p;
        const double c = std::pow(10.0, static_cast<double>(trial % 9) - 4.0);
        Matrix xs = x;
        for (std::size_t i = 0; i < n; ++i) xs(i, k) *= c;
        const auto sols = blp::solve_least_squares(xs, y);
        CHECK(sols.coefficients[k] * c == doctest::Approx(sol.coefficients[k]).epsilon(1e-8));
        for (std::size_t i = 0; i < n; ++i) CHECK(sols.fitted[i] == doctest::Approx(sol.fitted[i]).epsilon(1e-8));
    }
}
