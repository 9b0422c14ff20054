#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blp/matrix.hpp"
#include "blp/panel.hpp"

namespace blp {

enum class Estimator { ols, two_way_fe, tsls };
enum class Covariance { classical, robust_hc0 };

std::string_view to_string(Estimator e) noexcept;
std::string_view to_string(Covariance c) noexcept;
/// Accepts "ols", "two_way_fe"/"fe", "tsls"/"2sls". Throws InvalidSpec.
Estimator parse_estimator(std::string_view s);
/// Accepts "classical", "robust_hc0"/"robust"/"hc0". Throws InvalidSpec.
Covariance parse_covariance(std::string_view s);

/// Column roles for one estimation of the linear demand equation.
struct ModelSpec {
    std::string dependent;
    std::vector<std::string> exogenous;
    std::vector<std::string> endogenous;
    std::vector<std::string> instruments;
    bool include_intercept = true;
    Estimator estimator = Estimator::ols;
    Covariance covariance = Covariance::classical;

    /// Throws InvalidSpec / OrderConditionViolated when roles are inconsistent.
    void validate() const;
    /// Every column the estimator reads (dependent first).
    std::vector<std::string> used_columns() const;
};

inline constexpr const char* kInterceptName = "Constant";

struct FixedEffectValues {
    std::vector<std::string> units;
    /// Unit level: intercept plus unit dummy (base unit has dummy 0).
    Vector unit_effects;
    std::vector<int> periods;
    /// Period dummy coefficients (base period is 0).
    Vector time_effects;
};

struct EstimateResult {
    Estimator estimator = Estimator::ols;
    Covariance covariance = Covariance::classical;
    std::vector<std::string> names;
    Vector coefficients;
    Vector standard_errors;
    Matrix covariance_matrix;
    /// Structural residuals, aligned with `rows` (dataset row indices).
    Vector residuals;
    std::vector<std::size_t> rows;
    std::size_t n_observations = 0;
    std::size_t n_dropped = 0;
    /// All estimated parameters, absorbed dummies included.
    std::size_t n_parameters = 0;
    std::size_t df_residual = 0;
    double rss = 0.0;
    double r_squared = 0.0;
    double adjusted_r_squared = 0.0;
    double residual_std_error = 0.0;
    std::optional<FixedEffectValues> fixed_effects;

    /// Throws UnknownColumn for an absent name.
    std::size_t index_of(std::string_view name) const;
    double coefficient(std::string_view name) const { return coefficients[index_of(name)]; }
    double standard_error(std::string_view name) const { return standard_errors[index_of(name)]; }
};

/// Rows with every column in `columns` present, plus the number dropped.
struct RowSelection {
    std::vector<std::size_t> rows;
    std::size_t dropped = 0;
};
RowSelection complete_rows(const PanelDataset& data, const std::vector<std::string>& columns);

/// Values of `column` at the given rows.
Vector gather(const PanelDataset& data, const std::string& column, const std::vector<std::size_t>& rows);

/// HC0 sandwich bread * X' diag(u^2) X * bread.
Matrix robust_covariance(const Matrix& x, std::span<const double> residuals, const Matrix& bread);

/// Pooled least squares; endogenous regressors are treated as exogenous.
EstimateResult estimate_ols(const ModelSpec& spec, const PanelDataset& data);
/// Two-way fixed effects by least-squares dummy variables (unit and period dummies).
EstimateResult estimate_two_way_fe(const ModelSpec& spec, const PanelDataset& data);
/// Two-stage least squares; residuals use the actual endogenous regressors.
EstimateResult estimate_tsls(const ModelSpec& spec, const PanelDataset& data);
/// Dispatches on spec.estimator.
EstimateResult estimate(const ModelSpec& spec, const PanelDataset& data);

}  // namespace blp
