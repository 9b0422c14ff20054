#include "blp/diagnostics.hpp"

#include <limits>
#include <numeric>

#include "blp/distributions.hpp"
#include "blp/error.hpp"

namespace blp {

namespace {

Matrix regressors(const PanelDataset& data, const std::vector<std::size_t>& rows, bool intercept,
                  const std::vector<std::string>& names) {
    std::vector<Vector> cols;
    if (intercept) cols.emplace_back(rows.size(), 1.0);
    for (const auto& n : names) cols.push_back(gather(data, n, rows));
    return Matrix::from_columns(cols);
}

double rss_of(const Matrix& x, std::span<const double> y) {
    const auto sol = solve_least_squares(x, y);
    return std::inner_product(sol.residuals.begin(), sol.residuals.end(), sol.residuals.begin(), 0.0);
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

FTestReport first_stage_f(const ModelSpec& spec, const PanelDataset& data) {
    if (spec.endogenous.empty()) throw InvalidSpec("first-stage F needs an endogenous regressor");
    if (spec.endogenous.size() > 1) throw MultipleEndogenous(spec.endogenous.size());
    if (spec.instruments.empty()) throw InvalidSpec("first-stage F needs at least one instrument");
    ModelSpec iv = spec;
    iv.estimator = Estimator::tsls;
    iv.validate();

    const RowSelection sel = complete_rows(data, iv.used_columns());
    const Vector endog = gather(data, spec.endogenous.front(), sel.rows);
    const Matrix unrestricted = regressors(data, sel.rows, spec.include_intercept, concat(spec.exogenous, spec.instruments));
    const std::size_t n = sel.rows.size();
    if (n <= unrestricted.cols())
        throw InsufficientObservations("first stage has " + std::to_string(n) + " observation(s) for " +
                                       std::to_string(unrestricted.cols()) + " parameter(s)");

    FTestReport r;
    r.endogenous = spec.endogenous.front();
    r.n_observations = n;
    r.rss_unrestricted = rss_of(unrestricted, endog);
    const Matrix restricted = regressors(data, sel.rows, spec.include_intercept, spec.exogenous);
    r.rss_restricted = restricted.cols() == 0 ? std::inner_product(endog.begin(), endog.end(), endog.begin(), 0.0)
                                              : rss_of(restricted, endog);
    r.df_numerator = spec.instruments.size();
    r.unrestricted_df = n - unrestricted.cols();
    r.restricted_df = n - restricted.cols();
    r.df_denominator = r.unrestricted_df;
    const double num = std::max(0.0, r.rss_restricted - r.rss_unrestricted) / static_cast<double>(r.df_numerator);
    const double den = r.rss_unrestricted / static_cast<double>(r.df_denominator);
    r.f_statistic = den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
    r.p_value = f_upper_tail(r.f_statistic, static_cast<double>(r.df_numerator), static_cast<double>(r.df_denominator));
    r.passes_rule_of_thumb = r.f_statistic >= kRuleOfThumbF;
    return r;
}

JTestReport sargan_j(const EstimateResult& tsls_result, const ModelSpec& spec, const PanelDataset& data) {
    if (tsls_result.estimator != Estimator::tsls) throw InvalidSpec("Sargan test needs a tsls estimate");
    const std::size_t m = spec.instruments.size();
    const std::size_t k = spec.endogenous.size();
    if (m < k) throw OrderConditionViolated(m, k);
    if (m == k) throw ExactlyIdentified();

    const auto& rows = tsls_result.rows;
    const Vector& u = tsls_result.residuals;
    const std::size_t n = rows.size();
    const Matrix full = regressors(data, rows, spec.include_intercept, concat(spec.instruments, spec.exogenous));
    if (n <= full.cols())
        throw InsufficientObservations("residual regression has " + std::to_string(n) + " observation(s) for " +
                                       std::to_string(full.cols()) + " parameter(s)");
    const double rss_u = rss_of(full, u);

    double tss = 0.0;
    if (spec.include_intercept) {
        const double mean = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(n);
        for (double v : u) tss += (v - mean) * (v - mean);
    } else {
        tss = std::inner_product(u.begin(), u.end(), u.begin(), 0.0);
    }

    JTestReport r;
    r.m = m;
    r.k = k;
    r.df = m - k;
    r.n_observations = n;
    const std::size_t df_resid = n - full.cols();
    const double s2 = rss_u / static_cast<double>(df_resid);

    r.regression_df_numerator = spec.include_intercept ? full.cols() - 1 : full.cols();
    r.regression_df_denominator = df_resid;
    r.regression_r_squared = tss > 0.0 ? 1.0 - rss_u / tss : 0.0;
    r.regression_f = s2 > 0.0 ? std::max(0.0, tss - rss_u) / static_cast<double>(r.regression_df_numerator) / s2 : 0.0;

    const Matrix restricted = regressors(data, rows, spec.include_intercept, spec.exogenous);
    const double rss_r = restricted.cols() == 0 ? std::inner_product(u.begin(), u.end(), u.begin(), 0.0)
                                                : rss_of(restricted, u);
    r.instrument_block_f = s2 > 0.0 ? std::max(0.0, rss_r - rss_u) / static_cast<double>(m) / s2 : 0.0;

    const double df = static_cast<double>(r.df);
    r.critical_value_5pct = chi_square_critical_value(0.05, df);

    r.j_statistic = static_cast<double>(m) * r.regression_f;
    r.p_value = chi_square_upper_tail(r.j_statistic, df);
    r.reject_at_5pct = r.j_statistic > r.critical_value_5pct;

    r.j_instrument_block = static_cast<double>(m) * r.instrument_block_f;
    r.p_value_instrument_block = chi_square_upper_tail(r.j_instrument_block, df);
    r.reject_instrument_block_at_5pct = r.j_instrument_block > r.critical_value_5pct;

    r.n_r_squared = static_cast<double>(n) * r.regression_r_squared;
    r.p_value_n_r_squared = chi_square_upper_tail(std::max(0.0, r.n_r_squared), df);
    return r;
}

}  // namespace blp
