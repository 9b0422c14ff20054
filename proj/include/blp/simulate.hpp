#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "blp/estimators.hpp"
#include "blp/panel.hpp"

namespace blp {

/// mt19937_64 with portable uniform, normal and Gumbel draws (no std:: distributions,
/// whose output differs between standard libraries).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept;
    /// Standard normal via Box-Muller.
    double normal() noexcept;
    /// Standard Gumbel (type-I extreme value) by inversion: -log(-log(u)).
    double gumbel() noexcept;

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

/// Synthetic-market data generating process.
///
/// Utility is delta_jt = intercept + x_jt' beta - alpha p_jt + xi_jt with
/// xi_jt = unit_effects[j] + time_effects[t] + xi_scale * N(0,1), and price
/// p_jt = price_intercept + instrument_strength * sum(cost_jt) + price_endogeneity * xi_jt
///        + price_noise * N(0,1).
/// Characteristics and costs are normal with the given mean and scale.
struct DgpParams {
    std::size_t products = 5;
    std::size_t periods = 40;
    std::size_t characteristics = 2;
    Vector beta = {1.0, -0.5};
    double intercept = 0.0;
    double alpha = 1.0;
    double xi_scale = 0.5;
    Vector unit_effects;
    Vector time_effects;
    double price_endogeneity = 0.0;
    double instrument_strength = 1.0;
    std::size_t cost_shifters = 2;
    double price_intercept = 1.0;
    double price_noise = 0.5;
    double characteristic_mean = 0.0;
    double characteristic_scale = 1.0;
    double cost_mean = 0.0;
    double cost_scale = 1.0;
    /// Consumers per period for multinomial sampling; absent means exact logit shares.
    std::optional<std::uint64_t> consumers;
    /// Market size used to express exact shares as quantities.
    double market_size = 1e6;
    int first_period = 2000;
    std::size_t max_redraws = 20;
    std::uint64_t seed = 12345;

    /// Throws InvalidParams.
    void validate() const;
};

/// Generated panel with the parameters and unobservables that produced it.
struct SimulatedMarket {
    PanelDataset data;
    /// True coefficient per simulated column name (Constant, x1..xK, price).
    std::vector<std::pair<std::string, double>> truth;
    Vector xi;
    Vector delta;
    std::size_t redraws = 0;
};

/// Column names written by generate_market.
std::string characteristic_column(std::size_t k);
std::string cost_column(std::size_t m);
inline constexpr const char* kPriceColumn = "price";

SimulatedMarket generate_market(const DgpParams& params);

/// (Constant, intercept), (x_k, beta_k) and (price, -alpha).
std::vector<std::pair<std::string, double>> true_coefficients(const DgpParams& params);

/// Choice counts over `consumers` Gumbel-argmax draws; index 0 is the outside option (delta 0).
std::vector<std::uint64_t> sample_choices(std::span<const double> delta, std::uint64_t consumers, Rng& rng);

/// Column roles matching generate_market's output for the given estimator.
ModelSpec simulation_spec(const DgpParams& params, Estimator estimator,
                          Covariance covariance = Covariance::robust_hc0);

struct CoefficientSummary {
    std::string name;
    double truth = 0.0;
    double mean_estimate = 0.0;
    double mean_bias = 0.0;
    /// Standard deviation of the estimates divided by sqrt(successful replications).
    double mc_standard_error = 0.0;
    double rmse = 0.0;
    double mean_standard_error = 0.0;
    double ci_coverage_95 = 0.0;
};

struct McSummary {
    Estimator estimator = Estimator::ols;
    std::size_t replications = 0;
    std::size_t failures = 0;
    std::vector<CoefficientSummary> coefficients;
    std::optional<double> mean_first_stage_f;
    std::optional<double> sargan_rejection_rate;
    std::optional<double> sargan_instrument_block_rejection_rate;

    /// Throws UnknownColumn.
    const CoefficientSummary& coefficient(const std::string& name) const;
};

/// Replication r draws from seed params.seed + r. The summary is identical for any
/// thread count (0 = hardware concurrency).
McSummary run_monte_carlo(const DgpParams& params, const ModelSpec& spec, std::size_t replications,
                          unsigned threads = 0);

}  // namespace blp
