#pragma once

#include <string>
#include <string_view>

#include "blp/diagnostics.hpp"
#include "blp/estimators.hpp"
#include "blp/simulate.hpp"

namespace blp {

/// Two-sided p-value of coefficient i: Student-t with the residual df for classical
/// covariance, normal approximation for robust covariance.
double coefficient_p_value(const EstimateResult& r, std::size_t i);

/// "***" for p < 0.01, "**" for p < 0.05, "*" for p < 0.1.
std::string_view significance_stars(double p) noexcept;

/// Fixed three-decimal table with stars, standard errors and fit statistics.
std::string render_estimate_text(const EstimateResult& r, std::string_view dependent, std::string_view label = {});
/// name,estimate,std_error,t_value with 17 significant digits.
std::string render_estimate_csv(const EstimateResult& r);

std::string render_first_stage_text(const FTestReport& f, const ModelSpec& spec);
std::string render_sargan_text(const JTestReport& j);
/// key,value rows for the F test and (when present) the J test.
std::string render_diagnostics_csv(const FTestReport& f, const JTestReport* j);

std::string render_mc_summary_text(const McSummary& s);

}  // namespace blp
