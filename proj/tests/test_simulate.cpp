#include <doctest.h>

#include <cmath>
#include <sstream>

#include "blp/demand.hpp"
#include "blp/error.hpp"
#include "blp/panel.hpp"
#include "blp/simulate.hpp"

using blp::DgpParams;
using blp::Estimator;

namespace {

DgpParams flat(std::size_t products, std::size_t periods) {
    DgpParams p;
    p.products = products;
    p.periods = periods;
    p.alpha = 0.0;
    p.beta = {0.0, 0.0};
    p.xi_scale = 0.0;
    return p;
}

double share(const blp::PanelDataset& d, std::size_t row) {
    return d.column(blp::kQuantityColumn).values[row] / d.column(blp::kMarketSizeColumn).values[row];
}

}  // namespace

TEST_CASE("Rng draws are in range and reproducible") {
    blp::Rng a(9), b(9);
    for (int i = 0; i < 10000; ++i) {
        const double u = a.uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
        CHECK(u == b.uniform());
    }
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < 200000; ++i) {
        const double z = a.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / 200000) < 0.01);
    CHECK(std::abs(sq / 200000 - 1.0) < 0.02);
    // Gumbel mean is the Euler-Mascheroni constant.
    double g = 0.0;
    for (int i = 0; i < 200000; ++i) g += a.gumbel();
    CHECK(std::abs(g / 200000 - 0.5772156649) < 0.01);
}

TEST_CASE("zero utilities give every option an equal share") {
    for (std::size_t J : {1u, 3u, 7u}) {
        const auto m = blp::generate_market(flat(J, 4));
        for (std::size_t i = 0; i < m.data.size(); ++i) {
            CHECK(m.delta[i] == 0.0);
            CHECK(share(m.data, i) == doctest::Approx(1.0 / static_cast<double>(J + 1)).epsilon(1e-14));
        }
    }
}

TEST_CASE("one product with xi = log 2 takes two thirds of the market") {
    auto p = flat(1, 1);
    p.unit_effects = {std::log(2.0)};
    const auto m = blp::generate_market(p);
    CHECK(m.delta[0] == doctest::Approx(std::log(2.0)));
    CHECK(share(m.data, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("generated markets satisfy the dataset invariants and the DGP") {
    DgpParams p;
    p.products = 4;
    p.periods = 6;
    p.price_endogeneity = 0.7;
    const auto m = blp::generate_market(p);
    CHECK(m.data.size() == 24);
    CHECK(m.data.units().front() == "p001");
    CHECK(m.data.periods().front() == 2000);
    for (const char* c : {"x1", "x2", "price", "cost1", "cost2", "quantity", "market_size"}) CHECK(m.data.has(c));

    // Written and re-read through the CSV loader, which enforces every domain check.
    std::stringstream csv;
    blp::write_panel(csv, m.data);
    CHECK(blp::read_panel(csv) == m.data);

    const auto& x1 = m.data.column("x1").values;
    const auto& x2 = m.data.column("x2").values;
    const auto& pr = m.data.column("price").values;
    for (std::size_t i = 0; i < m.data.size(); ++i)
        CHECK(m.delta[i] == doctest::Approx(p.intercept + x1[i] - 0.5 * x2[i] - pr[i] + m.xi[i]).epsilon(1e-12));

    const auto dep = blp::compute_dependent(m.data).data.column(blp::kDependentColumn).values;
    for (std::size_t i = 0; i < m.data.size(); ++i) CHECK(dep[i] == doctest::Approx(m.delta[i]).epsilon(1e-9));
}

TEST_CASE("identical seeds give identical markets") {
    DgpParams p;
    p.periods = 5;
    p.consumers = 20000;
    CHECK(blp::generate_market(p).data == blp::generate_market(p).data);
    auto q = p;
    q.seed += 1;
    CHECK_FALSE(blp::generate_market(q).data == blp::generate_market(p).data);
}

TEST_CASE("sampled shares with a million consumers track exact shares") {
    DgpParams p;
    p.products = 4;
    p.periods = 3;
    p.seed = 4242;
    const auto exact = blp::generate_market(p);
    p.consumers = 1000000;
    const auto sampled = blp::generate_market(p);
    // Same draws up to the choice stage, so delta agrees exactly.
    CHECK(sampled.delta == exact.delta);
    double worst = 0.0;
    for (std::size_t i = 0; i < exact.data.size(); ++i)
        worst = std::max(worst, std::abs(share(sampled.data, i) - share(exact.data, i)));
    CHECK(worst < 5e-3);
}

TEST_CASE("sample_choices") {
    blp::Rng rng(5);
    SUBCASE("symmetric binary choice") {
        const auto c = blp::sample_choices(std::vector<double>{0.0}, 100000, rng);
        CHECK(c[0] + c[1] == 100000);
        CHECK(std::abs(static_cast<double>(c[1]) / 100000 - 0.5) < 0.01);
    }
    SUBCASE("a dominant product takes every consumer") {
        const auto c = blp::sample_choices(std::vector<double>{20.0}, 100000, rng);
        CHECK(c[1] == 100000);
    }
    SUBCASE("frequencies match logit shares") {
        const std::vector<double> delta{1.5, -0.3, 0.0};
        const auto c = blp::sample_choices(delta, 1000000, rng);
        double outside = 0.0;
        const auto s = blp::predict_shares(delta, outside);
        CHECK(std::abs(static_cast<double>(c[0]) / 1e6 - outside) < 3e-3);
        for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(static_cast<double>(c[j + 1]) / 1e6 - s[j]) < 3e-3);
    }
}

TEST_CASE("noiseless markets are identified exactly by 2SLS") {
    DgpParams p;
    p.xi_scale = 0.0;
    p.price_endogeneity = 0.8;
    p.intercept = 0.4;
    const auto m = blp::generate_market(p);
    const auto data = blp::compute_dependent(m.data).data;
    const auto r = blp::estimate(blp::simulation_spec(p, Estimator::tsls), data);
    for (const auto& [name, value] : m.truth) CHECK(std::abs(r.coefficient(name) - value) < 1e-8);
}

TEST_CASE("Monte Carlo summaries do not depend on the thread count") {
    DgpParams p;
    p.products = 3;
    p.periods = 10;
    p.price_endogeneity = 0.5;
    const auto spec = blp::simulation_spec(p, Estimator::tsls);
    const auto one = blp::run_monte_carlo(p, spec, 40, 1);
    for (unsigned threads : {2u, 3u, 8u}) {
        const auto many = blp::run_monte_carlo(p, spec, 40, threads);
        REQUIRE(many.coefficients.size() == one.coefficients.size());
        for (std::size_t c = 0; c < one.coefficients.size(); ++c) {
            CHECK(many.coefficients[c].mean_estimate == one.coefficients[c].mean_estimate);
            CHECK(many.coefficients[c].rmse == one.coefficients[c].rmse);
            CHECK(many.coefficients[c].ci_coverage_95 == one.coefficients[c].ci_coverage_95);
        }
        CHECK(many.mean_first_stage_f == one.mean_first_stage_f);
        CHECK(many.sargan_rejection_rate == one.sargan_rejection_rate);
    }
    for (const auto& c : one.coefficients) {
        CHECK(c.ci_coverage_95 >= 0.0);
        CHECK(c.ci_coverage_95 <= 1.0);
    }
}

TEST_CASE("replication failures are counted, not thrown") {
    DgpParams p;
    p.products = 2;
    p.periods = 2;  // 4 rows: too few for a five-column 2SLS design
    const auto s = blp::run_monte_carlo(p, blp::simulation_spec(p, Estimator::tsls), 5, 1);
    CHECK(s.failures == 5);
    CHECK(s.replications == 5);
}

TEST_CASE("invalid parameters") {
    auto bad = [](auto mutate) {
        DgpParams p;
        mutate(p);
        return p;
    };
    CHECK_THROWS_AS(blp::generate_market(bad([](DgpParams& p) { p.products = 0; })), blp::InvalidParams);
    CHECK_THROWS_AS(blp::generate_market(bad([](DgpParams& p) { p.xi_scale = -1; })), blp::InvalidParams);
    CHECK_THROWS_AS(blp::generate_market(bad([](DgpParams& p) { p.instrument_strength = -0.1; })), blp::InvalidParams);
    CHECK_THROWS_AS(blp::generate_market(bad([](DgpParams& p) { p.beta = {1.0}; })), blp::InvalidParams);
    CHECK_THROWS_AS(blp::generate_market(bad([](DgpParams& p) { p.unit_effects = {1.0}; })), blp::InvalidParams);
    CHECK_THROWS_AS(blp::run_monte_carlo(DgpParams{}, blp::simulation_spec(DgpParams{}, Estimator::ols), 0),
                    blp::InvalidParams);
}

TEST_CASE("extreme utilities exhaust the redraw budget") {
    auto p = flat(2, 2);
    p.intercept = 40.0;  // outside share ~ 1e-18
    p.max_redraws = 3;
    CHECK_THROWS_AS(blp::generate_market(p), blp::DegenerateShares);
}
