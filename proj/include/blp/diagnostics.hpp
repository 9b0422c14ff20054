#pragma once

#include <cstddef>
#include <string>

#include "blp/estimators.hpp"

namespace blp {

inline constexpr double kRuleOfThumbF = 10.0;

/// Conditional first-stage F test that all excluded-instrument coefficients are zero.
struct FTestReport {
    std::string endogenous;
    double f_statistic = 0.0;
    std::size_t df_numerator = 0;    // number of restrictions (instrument count)
    std::size_t df_denominator = 0;  // unrestricted residual df
    double p_value = 1.0;
    bool passes_rule_of_thumb = false;
    std::size_t restricted_df = 0;
    std::size_t unrestricted_df = 0;
    double rss_restricted = 0.0;
    double rss_unrestricted = 0.0;
    std::size_t n_observations = 0;
};

/// Sargan over-identification test from the regression of 2SLS residuals on the instrument set.
///
/// `j_statistic` is m times the residual regression's overall F. The conventional
/// alternatives are reported alongside: m times the F of the instrument block alone
/// and n * R^2 of the same regression.
struct JTestReport {
    double j_statistic = 0.0;
    std::size_t m = 0;
    std::size_t k = 0;
    std::size_t df = 0;
    double p_value = 1.0;
    double critical_value_5pct = 0.0;
    bool reject_at_5pct = false;

    double regression_f = 0.0;
    std::size_t regression_df_numerator = 0;
    std::size_t regression_df_denominator = 0;
    double regression_r_squared = 0.0;

    double instrument_block_f = 0.0;
    double j_instrument_block = 0.0;
    double p_value_instrument_block = 1.0;
    bool reject_instrument_block_at_5pct = false;

    double n_r_squared = 0.0;
    double p_value_n_r_squared = 1.0;
    std::size_t n_observations = 0;
};

/// Throws MultipleEndogenous unless there is exactly one endogenous regressor.
FTestReport first_stage_f(const ModelSpec& spec, const PanelDataset& data);

/// Throws ExactlyIdentified when m == k.
JTestReport sargan_j(const EstimateResult& tsls_result, const ModelSpec& spec, const PanelDataset& data);

}  // namespace blp
