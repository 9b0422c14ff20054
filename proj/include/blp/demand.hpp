#pragma once

#include <span>
#include <string>
#include <vector>

#include "blp/matrix.hpp"

namespace blp {

/// Units sold per product in one period, with the number of potential consumers.
struct MarketPeriod {
    int period = 0;
    std::vector<std::string> products;
    Vector quantities;
    double market_size = 0.0;
};

/// Observed (or predicted) shares for one period. Inside shares are aligned with `products`.
struct PeriodShares {
    int period = 0;
    std::vector<std::string> products;
    Vector inside;
    double outside = 0.0;
};

struct ShareTable {
    std::vector<PeriodShares> periods;
};

/// Mean utilities for one period; the outside option is normalized to zero and not stored.
struct PeriodUtilities {
    int period = 0;
    std::vector<std::string> products;
    Vector delta;
};

struct MeanUtilityTable {
    std::vector<PeriodUtilities> periods;

    /// Throws std::out_of_range when the period is absent.
    const PeriodUtilities& at(int period) const;
};

/// Tolerance on outside + sum(inside) == 1.
inline constexpr double kShareSumTolerance = 1e-12;

/// Throws ShareDomainError unless every share is in (0, 1) and they sum to one.
void validate(const PeriodShares& shares);

/// s_j = q_j / N and s_0 = (N - sum q) / N.
PeriodShares shares_from_quantities(const MarketPeriod& market);

/// delta_j = log s_j - log s_0 for every period.
MeanUtilityTable invert_shares(const ShareTable& shares);
PeriodUtilities invert_shares(const PeriodShares& shares);

/// Logit shares with the outside good in the denominator, evaluated with a max shift.
PeriodShares predict_shares(const PeriodUtilities& delta);
PeriodShares predict_shares(const MeanUtilityTable& delta, int period);
/// Raw form: returns inside shares and writes the outside share.
Vector predict_shares(std::span<const double> delta, double& outside);

/// Pr(choose j over k) = exp(d_j) / (exp(d_j) + exp(d_k)).
double binary_choice_probability(double delta_j, double delta_k) noexcept;

}  // namespace blp
