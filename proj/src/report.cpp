#include "blp/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "blp/distributions.hpp"

namespace blp {

namespace {

std::string fixed(double v, int decimals = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string exact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string pad_right(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::string pad_left(std::string s, std::size_t width) {
    if (s.size() < width) s.insert(0, width - s.size(), ' ');
    return s;
}

std::string title_of(Estimator e) {
    switch (e) {
        case Estimator::ols: return "Ordinary Least Squares";
        case Estimator::two_way_fe: return "Fixed Effects model, two ways (unit and period)";
        case Estimator::tsls: return "Two Stage Least Squares, IV estimation";
    }
    return "";
}

constexpr std::size_t kNameWidth = 24;
constexpr std::size_t kValueWidth = 14;
const std::string kRule(58, '-');
const std::string kDoubleRule(58, '=');

}  // namespace

double coefficient_p_value(const EstimateResult& r, std::size_t i) {
    const double se = r.standard_errors[i];
    if (!(se > 0.0)) return r.coefficients[i] == 0.0 ? 1.0 : 0.0;
    const double t = r.coefficients[i] / se;
    return r.covariance == Covariance::classical ? student_t_two_sided(t, static_cast<double>(r.df_residual))
                                                 : normal_two_sided(t);
}

std::string_view significance_stars(double p) noexcept {
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.1) return "*";
    return "";
}

std::string render_estimate_text(const EstimateResult& r, std::string_view dependent, std::string_view label) {
    std::ostringstream os;
    os << title_of(r.estimator);
    if (!label.empty()) os << " [" << label << "]";
    os << '\n' << "Dependent variable: " << dependent << '\n' << kDoubleRule << '\n';
    os << pad_right("", kNameWidth) << pad_left("Estimate", kValueWidth) << "   Std. Error\n" << kRule << '\n';
    for (std::size_t i = 0; i < r.names.size(); ++i) {
        const std::string est = fixed(r.coefficients[i]) + std::string(significance_stars(coefficient_p_value(r, i)));
        os << pad_right(r.names[i], kNameWidth) << pad_left(est, kValueWidth) << "   (" << fixed(r.standard_errors[i])
           << ")\n";
    }
    os << kRule << '\n';
    os << pad_right("Observations", kNameWidth) << pad_left(std::to_string(r.n_observations), kValueWidth) << '\n';
    if (r.n_dropped > 0)
        os << pad_right("Rows dropped (missing)", kNameWidth) << pad_left(std::to_string(r.n_dropped), kValueWidth)
           << '\n';
    os << pad_right(r.estimator == Estimator::two_way_fe ? "R2 (within)" : "R2", kNameWidth)
       << pad_left(fixed(r.r_squared), kValueWidth) << '\n';
    os << pad_right("Adjusted R2", kNameWidth) << pad_left(fixed(r.adjusted_r_squared), kValueWidth) << '\n';
    os << pad_right("Residual Std. Error", kNameWidth) << pad_left(fixed(r.residual_std_error), kValueWidth)
       << " (df = " << r.df_residual << ")\n";
    os << kDoubleRule << '\n';
    os << "Note: *p<0.1; **p<0.05; ***p<0.01; two-sided, "
       << (r.covariance == Covariance::classical ? "Student-t with residual df, classical SEs"
                                                 : "normal approximation, HC0 robust SEs")
       << '\n';
    return os.str();
}

std::string render_estimate_csv(const EstimateResult& r) {
    std::ostringstream os;
    os << "name,estimate,std_error,t_value\n";
    for (std::size_t i = 0; i < r.names.size(); ++i) {
        const double se = r.standard_errors[i];
        os << r.names[i] << ',' << exact(r.coefficients[i]) << ',' << exact(se) << ','
           << exact(se > 0.0 ? r.coefficients[i] / se : std::nan("")) << '\n';
    }
    return os.str();
}

std::string render_first_stage_text(const FTestReport& f, const ModelSpec& spec) {
    std::ostringstream os;
    os << "Conditional first-stage F test\n" << kRule << '\n';
    os << "Endogenous regressor: " << f.endogenous << '\n';
    os << "Instruments:";
    for (const auto& z : spec.instruments) os << ' ' << z;
    os << '\n';
    os << pad_right("Observations", kNameWidth) << f.n_observations << '\n';
    os << pad_right("Res.Df (restricted)", kNameWidth) << f.restricted_df << '\n';
    os << pad_right("Res.Df (unrestricted)", kNameWidth) << f.unrestricted_df << '\n';
    os << pad_right("Restrictions", kNameWidth) << f.df_numerator << '\n';
    os << pad_right("F", kNameWidth) << fixed(f.f_statistic) << '\n';
    os << pad_right("Pr(>F)", kNameWidth) << fixed(f.p_value) << '\n';
    os << "Rule of thumb F >= 10: "
       << (f.passes_rule_of_thumb ? "satisfied" : "NOT satisfied (warning: possibly weak instruments)") << '\n';
    return os.str();
}

std::string render_sargan_text(const JTestReport& j) {
    std::ostringstream os;
    os << "Sargan J over-identification test\n" << kRule << '\n';
    os << pad_right("Instruments (m)", kNameWidth) << j.m << '\n';
    os << pad_right("Endogenous (k)", kNameWidth) << j.k << '\n';
    os << pad_right("Residual regression F", kNameWidth) << fixed(j.regression_f) << " (df = "
       << j.regression_df_numerator << "; " << j.regression_df_denominator << ")\n";
    os << pad_right("Residual regression R2", kNameWidth) << fixed(j.regression_r_squared) << '\n';
    os << pad_right("J = m * F", kNameWidth) << fixed(j.j_statistic) << '\n';
    os << pad_right("df (m - k)", kNameWidth) << j.df << '\n';
    os << pad_right("Pr(>chi2)", kNameWidth) << fixed(j.p_value) << '\n';
    os << pad_right("5% critical value", kNameWidth) << fixed(j.critical_value_5pct) << " (upper tail)\n";
    os << "Decision at 5%: " << (j.reject_at_5pct ? "reject H0 (at least one instrument endogenous)" : "fail to reject H0")
       << '\n';
    os << "Cross-checks:\n";
    os << "  instrument-block F = " << fixed(j.instrument_block_f) << ", m * F = " << fixed(j.j_instrument_block)
       << ", Pr(>chi2) = " << fixed(j.p_value_instrument_block) << '\n';
    os << "  n * R2 = " << fixed(j.n_r_squared) << ", Pr(>chi2) = " << fixed(j.p_value_n_r_squared) << '\n';
    return os.str();
}

std::string render_diagnostics_csv(const FTestReport& f, const JTestReport* j) {
    std::ostringstream os;
    os << "statistic,value\n";
    os << "first_stage_f," << exact(f.f_statistic) << '\n';
    os << "first_stage_df_numerator," << f.df_numerator << '\n';
    os << "first_stage_res_df_restricted," << f.restricted_df << '\n';
    os << "first_stage_res_df_unrestricted," << f.unrestricted_df << '\n';
    os << "first_stage_p_value," << exact(f.p_value) << '\n';
    os << "first_stage_rule_of_thumb," << (f.passes_rule_of_thumb ? 1 : 0) << '\n';
    if (j) {
        os << "residual_regression_f," << exact(j->regression_f) << '\n';
        os << "sargan_j," << exact(j->j_statistic) << '\n';
        os << "sargan_df," << j->df << '\n';
        os << "sargan_p_value," << exact(j->p_value) << '\n';
        os << "sargan_reject_5pct," << (j->reject_at_5pct ? 1 : 0) << '\n';
        os << "sargan_j_instrument_block," << exact(j->j_instrument_block) << '\n';
        os << "sargan_n_r_squared," << exact(j->n_r_squared) << '\n';
    }
    return os.str();
}

std::string render_mc_summary_text(const McSummary& s) {
    std::ostringstream os;
    os << "Monte Carlo summary: " << to_string(s.estimator) << ", " << s.replications << " replication(s), "
       << s.failures << " failure(s)\n";
    os << pad_right("coefficient", 14) << pad_left("truth", 10) << pad_left("mean", 11) << pad_left("bias", 11)
       << pad_left("mc_se", 11) << pad_left("rmse", 11) << pad_left("cover95", 9) << '\n';
    for (const auto& c : s.coefficients)
        os << pad_right(c.name, 14) << pad_left(fixed(c.truth, 4), 10) << pad_left(fixed(c.mean_estimate, 4), 11)
           << pad_left(fixed(c.mean_bias, 4), 11) << pad_left(fixed(c.mc_standard_error, 4), 11)
           << pad_left(fixed(c.rmse, 4), 11) << pad_left(fixed(c.ci_coverage_95, 3), 9) << '\n';
    if (s.mean_first_stage_f) os << "mean first-stage F: " << fixed(*s.mean_first_stage_f) << '\n';
    if (s.sargan_rejection_rate) os << "Sargan J (m * overall F) rejection rate at 5%: " << fixed(*s.sargan_rejection_rate) << '\n';
    if (s.sargan_instrument_block_rejection_rate)
        os << "Sargan J (m * instrument-block F) rejection rate at 5%: "
           << fixed(*s.sargan_instrument_block_rejection_rate) << '\n';
    return os.str();
}

}  // namespace blp
