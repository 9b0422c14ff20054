#include "blp/demand.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "blp/error.hpp"

namespace blp {

namespace {

std::string where(int period) { return "period " + std::to_string(period); }

}  // namespace

const PeriodUtilities& MeanUtilityTable::at(int period) const {
    for (const auto& p : periods)
        if (p.period == period) return p;
    throw std::out_of_range("no mean utilities for " + where(period));
}

void validate(const PeriodShares& shares) {
    if (shares.inside.size() != shares.products.size())
        throw DimensionMismatch("share vector and product list differ in length (" + where(shares.period) + ")");
    if (!(shares.outside > 0.0 && shares.outside < 1.0))
        throw OutsideShareNonPositive("outside share " + std::to_string(shares.outside) + " not in (0, 1) in " +
                                      where(shares.period));
    double total = shares.outside;
    for (std::size_t j = 0; j < shares.inside.size(); ++j) {
        const double s = shares.inside[j];
        if (!(s > 0.0 && s < 1.0))
            throw ShareDomainError("share of '" + shares.products[j] + "' not in (0, 1) in " + where(shares.period));
        total += s;
    }
    if (std::abs(total - 1.0) > kShareSumTolerance)
        throw ShareDomainError("shares do not sum to one in " + where(shares.period));
}

PeriodShares shares_from_quantities(const MarketPeriod& market) {
    if (market.quantities.size() != market.products.size())
        throw DimensionMismatch("quantity vector and product list differ in length (" + where(market.period) + ")");
    if (!(market.market_size > 0.0) || !std::isfinite(market.market_size))
        throw OutsideShareNonPositive("market size must be positive in " + where(market.period));
    double sold = 0.0;
    for (std::size_t j = 0; j < market.quantities.size(); ++j) {
        const double q = market.quantities[j];
        if (!std::isfinite(q) || q < 0.0)
            throw ShareDomainError("invalid quantity for '" + market.products[j] + "' in " + where(market.period));
        if (q == 0.0) throw ZeroQuantity("zero quantity for '" + market.products[j] + "' in " + where(market.period));
        sold += q;
    }
    if (sold >= market.market_size)
        throw OutsideShareNonPositive("quantities sold (" + std::to_string(sold) + ") reach market size (" +
                                      std::to_string(market.market_size) + ") in " + where(market.period));

    PeriodShares out;
    out.period = market.period;
    out.products = market.products;
    out.inside.resize(market.quantities.size());
    for (std::size_t j = 0; j < market.quantities.size(); ++j)
        out.inside[j] = market.quantities[j] / market.market_size;
    out.outside = (market.market_size - sold) / market.market_size;
    return out;
}

PeriodUtilities invert_shares(const PeriodShares& shares) {
    validate(shares);
    PeriodUtilities u;
    u.period = shares.period;
    u.products = shares.products;
    u.delta.resize(shares.inside.size());
    const double log_outside = std::log(shares.outside);
    for (std::size_t j = 0; j < shares.inside.size(); ++j) u.delta[j] = std::log(shares.inside[j]) - log_outside;
    return u;
}

MeanUtilityTable invert_shares(const ShareTable& shares) {
    MeanUtilityTable table;
    table.periods.reserve(shares.periods.size());
    for (const auto& p : shares.periods) table.periods.push_back(invert_shares(p));
    return table;
}

Vector predict_shares(std::span<const double> delta, double& outside) {
    // Outside good has delta = 0, so the shift is at least 0.
    double shift = 0.0;
    for (double d : delta) {
        if (!std::isfinite(d)) throw ShareDomainError("non-finite mean utility");
        shift = std::max(shift, d);
    }
    Vector inside(delta.size());
    double denom = std::exp(-shift);
    for (std::size_t j = 0; j < delta.size(); ++j) {
        inside[j] = std::exp(delta[j] - shift);
        denom += inside[j];
    }
    for (double& s : inside) s /= denom;
    outside = std::exp(-shift) / denom;
    return inside;
}

PeriodShares predict_shares(const PeriodUtilities& delta) {
    PeriodShares s;
    s.period = delta.period;
    s.products = delta.products;
    s.inside = predict_shares(delta.delta, s.outside);
    return s;
}

PeriodShares predict_shares(const MeanUtilityTable& delta, int period) { return predict_shares(delta.at(period)); }

double binary_choice_probability(double delta_j, double delta_k) noexcept {
    const double diff = delta_k - delta_j;
    if (diff > 0.0) {
        const double e = std::exp(-diff);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(diff));
}

}  // namespace blp
