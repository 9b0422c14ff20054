#include "blp/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include "blp/demand.hpp"
#include "blp/diagnostics.hpp"
#include "blp/error.hpp"

namespace blp {

double Rng::uniform() noexcept {
    // 53 random bits, offset by half a step so 0 and 1 are never returned.
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() noexcept {
    if (spare_) {
        const double v = *spare_;
        spare_.reset();
        return v;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    return r * std::cos(theta);
}

double Rng::gumbel() noexcept { return -std::log(-std::log(uniform())); }

void DgpParams::validate() const {
    auto fail = [](const std::string& what) { throw InvalidParams(what); };
    if (products < 1) fail("products must be >= 1");
    if (periods < 1) fail("periods must be >= 1");
    if (beta.size() != characteristics) fail("beta must have one entry per characteristic");
    if (!unit_effects.empty() && unit_effects.size() != products) fail("unit_effects must have one entry per product");
    if (!time_effects.empty() && time_effects.size() != periods) fail("time_effects must have one entry per period");
    for (double s : {xi_scale, instrument_strength, price_noise, characteristic_scale, cost_scale})
        if (!(s >= 0.0)) fail("scale parameters must be >= 0");
    if (!(market_size > 0.0)) fail("market_size must be positive");
    if (consumers && *consumers < 1) fail("consumers must be >= 1");
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(beta.begin(), beta.end(), finite) || !std::isfinite(alpha) || !std::isfinite(intercept) ||
        !std::isfinite(price_endogeneity) || !std::isfinite(price_intercept))
        fail("parameters must be finite");
}

std::string characteristic_column(std::size_t k) { return "x" + std::to_string(k + 1); }
std::string cost_column(std::size_t m) { return "cost" + std::to_string(m + 1); }

std::vector<std::uint64_t> sample_choices(std::span<const double> delta, std::uint64_t consumers, Rng& rng) {
    std::vector<std::uint64_t> counts(delta.size() + 1, 0);
    for (std::uint64_t i = 0; i < consumers; ++i) {
        std::size_t best = 0;
        double best_u = rng.gumbel();
        for (std::size_t j = 0; j < delta.size(); ++j) {
            const double u = delta[j] + rng.gumbel();
            if (u > best_u) {
                best_u = u;
                best = j + 1;
            }
        }
        ++counts[best];
    }
    return counts;
}

namespace {

constexpr double kMinShare = 1e-12;

std::string product_name(std::size_t j) {
    std::string s = std::to_string(j + 1);
    return "p" + std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
}

}  // namespace

SimulatedMarket generate_market(const DgpParams& params) {
    params.validate();
    const std::size_t J = params.products;
    const std::size_t T = params.periods;
    const std::size_t K = params.characteristics;
    const std::size_t M = params.cost_shifters;
    const std::size_t n = J * T;
    Rng rng(params.seed);
    // Separate stream for consumer choices so sampled and exact modes share every other draw.
    Rng choice_rng(params.seed ^ 0x9E3779B97F4A7C15ULL);

    for (std::size_t attempt = 0; attempt <= params.max_redraws; ++attempt) {
        std::vector<Vector> x(K, Vector(n));
        std::vector<Vector> cost(M, Vector(n));
        Vector price(n), xi(n), delta(n), quantity(n), market(n);
        bool degenerate = false;

        for (std::size_t t = 0; t < T && !degenerate; ++t) {
            for (std::size_t j = 0; j < J; ++j) {
                const std::size_t i = j * T + t;  // rows ordered by (unit, period)
                for (std::size_t k = 0; k < K; ++k)
                    x[k][i] = params.characteristic_mean + params.characteristic_scale * rng.normal();
                double cost_sum = 0.0;
                for (std::size_t m = 0; m < M; ++m) {
                    cost[m][i] = params.cost_mean + params.cost_scale * rng.normal();
                    cost_sum += cost[m][i];
                }
                xi[i] = (params.unit_effects.empty() ? 0.0 : params.unit_effects[j]) +
                        (params.time_effects.empty() ? 0.0 : params.time_effects[t]) + params.xi_scale * rng.normal();
                price[i] = params.price_intercept + params.instrument_strength * cost_sum +
                           params.price_endogeneity * xi[i] + params.price_noise * rng.normal();
                double d = params.intercept - params.alpha * price[i] + xi[i];
                for (std::size_t k = 0; k < K; ++k) d += params.beta[k] * x[k][i];
                delta[i] = d;
            }

            Vector period_delta(J);
            for (std::size_t j = 0; j < J; ++j) period_delta[j] = delta[j * T + t];
            if (params.consumers) {
                const auto counts = sample_choices(period_delta, *params.consumers, choice_rng);
                if (std::any_of(counts.begin(), counts.end(), [](std::uint64_t c) { return c == 0; })) {
                    degenerate = true;
                    break;
                }
                for (std::size_t j = 0; j < J; ++j) {
                    quantity[j * T + t] = static_cast<double>(counts[j + 1]);
                    market[j * T + t] = static_cast<double>(*params.consumers);
                }
            } else {
                double outside = 0.0;
                const Vector shares = predict_shares(period_delta, outside);
                if (outside < kMinShare || std::any_of(shares.begin(), shares.end(), [](double s) { return s < kMinShare; })) {
                    degenerate = true;
                    break;
                }
                for (std::size_t j = 0; j < J; ++j) {
                    quantity[j * T + t] = shares[j] * params.market_size;
                    market[j * T + t] = params.market_size;
                }
            }
        }
        if (degenerate) continue;

        SimulatedMarket out;
        out.redraws = attempt;
        for (std::size_t j = 0; j < J; ++j)
            for (std::size_t t = 0; t < T; ++t) out.data.add_row(product_name(j), params.first_period + static_cast<int>(t));
        for (std::size_t k = 0; k < K; ++k) out.data.set_column({characteristic_column(k), ColumnKind::continuous, x[k]});
        out.data.set_column({kPriceColumn, ColumnKind::continuous, price});
        for (std::size_t m = 0; m < M; ++m) out.data.set_column({cost_column(m), ColumnKind::continuous, cost[m]});
        out.data.set_column({kQuantityColumn, ColumnKind::continuous, quantity});
        out.data.set_column({kMarketSizeColumn, ColumnKind::continuous, market});
        out.truth = true_coefficients(params);
        out.xi = std::move(xi);
        out.delta = std::move(delta);
        return out;
    }
    throw DegenerateShares("every draw produced a share below 1e-12 (or an empty choice count) after " +
                           std::to_string(params.max_redraws) + " redraw(s)");
}

std::vector<std::pair<std::string, double>> true_coefficients(const DgpParams& params) {
    std::vector<std::pair<std::string, double>> t;
    t.emplace_back(kInterceptName, params.intercept);
    for (std::size_t k = 0; k < params.characteristics && k < params.beta.size(); ++k)
        t.emplace_back(characteristic_column(k), params.beta[k]);
    t.emplace_back(kPriceColumn, -params.alpha);
    return t;
}

ModelSpec simulation_spec(const DgpParams& params, Estimator estimator, Covariance covariance) {
    ModelSpec s;
    s.dependent = kDependentColumn;
    for (std::size_t k = 0; k < params.characteristics; ++k) s.exogenous.push_back(characteristic_column(k));
    s.endogenous = {kPriceColumn};
    if (estimator == Estimator::tsls)
        for (std::size_t m = 0; m < params.cost_shifters; ++m) s.instruments.push_back(cost_column(m));
    s.estimator = estimator;
    s.covariance = covariance;
    s.include_intercept = estimator != Estimator::two_way_fe;
    return s;
}

const CoefficientSummary& McSummary::coefficient(const std::string& name) const {
    for (const auto& c : coefficients)
        if (c.name == name) return c;
    throw UnknownColumn(name);
}

namespace {

struct Replication {
    bool ok = false;
    Vector estimates;
    Vector standard_errors;
    std::optional<double> first_stage_f;
    std::optional<bool> sargan_reject;
    std::optional<bool> sargan_block_reject;
};

constexpr double kZ975 = 1.959963984540054;

Replication run_one(const DgpParams& base, const ModelSpec& spec, std::size_t r, const std::vector<std::string>& names) {
    Replication out;
    try {
        DgpParams params = base;
        params.seed = base.seed + r;
        const SimulatedMarket market = generate_market(params);
        const PanelDataset data = compute_dependent(market.data).data;
        const EstimateResult est = estimate(spec, data);
        for (const auto& name : names) {
            out.estimates.push_back(est.coefficient(name));
            out.standard_errors.push_back(est.standard_error(name));
        }
        if (!spec.instruments.empty() && spec.endogenous.size() == 1)
            out.first_stage_f = first_stage_f(spec, data).f_statistic;
        if (spec.estimator == Estimator::tsls && spec.instruments.size() > spec.endogenous.size()) {
            const JTestReport j = sargan_j(est, spec, data);
            out.sargan_reject = j.reject_at_5pct;
            out.sargan_block_reject = j.reject_instrument_block_at_5pct;
        }
        out.ok = true;
    } catch (const Error&) {
        out.ok = false;
    }
    return out;
}

}  // namespace

McSummary run_monte_carlo(const DgpParams& params, const ModelSpec& spec, std::size_t replications, unsigned threads) {
    params.validate();
    spec.validate();
    if (replications < 1) throw InvalidParams("replications must be >= 1");

    // Coefficients with a known true value, in estimator output order.
    const auto known = true_coefficients(params);
    std::vector<std::string> names;
    std::vector<double> truth;
    std::vector<std::string> regressors;
    if (spec.include_intercept && spec.estimator != Estimator::two_way_fe) regressors.push_back(kInterceptName);
    regressors.insert(regressors.end(), spec.exogenous.begin(), spec.exogenous.end());
    regressors.insert(regressors.end(), spec.endogenous.begin(), spec.endogenous.end());
    for (const auto& name : regressors)
        for (const auto& [tn, tv] : known)
            if (tn == name) {
                names.push_back(name);
                truth.push_back(tv);
            }

    std::vector<Replication> results(replications);
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads == 0 ? hw : threads, replications));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t r = next++; r < replications; r = next++) results[r] = run_one(params, spec, r, names);
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    McSummary s;
    s.estimator = spec.estimator;
    s.replications = replications;
    std::size_t ok = 0;
    for (const auto& r : results) (r.ok ? ok : s.failures)++;

    for (std::size_t c = 0; c < names.size(); ++c) {
        CoefficientSummary cs;
        cs.name = names[c];
        cs.truth = truth[c];
        if (ok > 0) {
            double sum = 0.0, sum_se = 0.0, sq_err = 0.0;
            std::size_t covered = 0;
            for (const auto& r : results) {
                if (!r.ok) continue;
                sum += r.estimates[c];
                sum_se += r.standard_errors[c];
                sq_err += (r.estimates[c] - cs.truth) * (r.estimates[c] - cs.truth);
                if (std::abs(r.estimates[c] - cs.truth) <= kZ975 * r.standard_errors[c]) ++covered;
            }
            const double k = static_cast<double>(ok);
            cs.mean_estimate = sum / k;
            cs.mean_bias = cs.mean_estimate - cs.truth;
            cs.mean_standard_error = sum_se / k;
            cs.rmse = std::sqrt(sq_err / k);
            cs.ci_coverage_95 = static_cast<double>(covered) / k;
            double var = 0.0;
            for (const auto& r : results)
                if (r.ok) var += (r.estimates[c] - cs.mean_estimate) * (r.estimates[c] - cs.mean_estimate);
            cs.mc_standard_error = ok > 1 ? std::sqrt(var / (k - 1.0) / k) : 0.0;
        }
        s.coefficients.push_back(std::move(cs));
    }

    auto mean_of = [&](auto get) -> std::optional<double> {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& r : results)
            if (r.ok)
                if (const auto v = get(r)) {
                    sum += *v;
                    ++count;
                }
        return count ? std::optional<double>(sum / static_cast<double>(count)) : std::nullopt;
    };
    s.mean_first_stage_f = mean_of([](const Replication& r) { return r.first_stage_f; });
    s.sargan_rejection_rate = mean_of([](const Replication& r) {
        return r.sargan_reject ? std::optional<double>(*r.sargan_reject ? 1.0 : 0.0) : std::nullopt;
    });
    s.sargan_instrument_block_rejection_rate = mean_of([](const Replication& r) {
        return r.sargan_block_reject ? std::optional<double>(*r.sargan_block_reject ? 1.0 : 0.0) : std::nullopt;
    });
    return s;
}

}  // namespace blp
