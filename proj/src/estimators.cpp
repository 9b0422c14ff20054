#include "blp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "blp/error.hpp"

namespace blp {

std::string_view to_string(Estimator e) noexcept {
    switch (e) {
        case Estimator::ols: return "ols";
        case Estimator::two_way_fe: return "two_way_fe";
        case Estimator::tsls: return "tsls";
    }
    return "?";
}

std::string_view to_string(Covariance c) noexcept {
    return c == Covariance::classical ? "classical" : "robust_hc0";
}

Estimator parse_estimator(std::string_view s) {
    if (s == "ols") return Estimator::ols;
    if (s == "two_way_fe" || s == "fe") return Estimator::two_way_fe;
    if (s == "tsls" || s == "2sls") return Estimator::tsls;
    throw InvalidSpec("unknown estimator '" + std::string(s) + "'");
}

Covariance parse_covariance(std::string_view s) {
    if (s == "classical") return Covariance::classical;
    if (s == "robust_hc0" || s == "robust" || s == "hc0") return Covariance::robust_hc0;
    throw InvalidSpec("unknown covariance '" + std::string(s) + "'");
}

void ModelSpec::validate() const {
    if (dependent.empty()) throw InvalidSpec("dependent column not set");
    std::set<std::string> seen{dependent};
    auto check = [&](const std::vector<std::string>& cols, const char* role) {
        for (const auto& c : cols)
            if (!seen.insert(c).second) throw InvalidSpec("column '" + c + "' appears in more than one role (" + role + ")");
    };
    check(exogenous, "exogenous");
    check(endogenous, "endogenous");
    if (estimator == Estimator::two_way_fe && include_intercept)
        throw InvalidSpec("two_way_fe absorbs the intercept; set include_intercept to false");
    if (estimator == Estimator::tsls) {
        check(instruments, "instruments");
        if (endogenous.empty()) throw InvalidSpec("tsls requires at least one endogenous regressor");
        if (instruments.size() < endogenous.size())
            throw OrderConditionViolated(instruments.size(), endogenous.size());
    }
}

std::vector<std::string> ModelSpec::used_columns() const {
    std::vector<std::string> cols{dependent};
    cols.insert(cols.end(), exogenous.begin(), exogenous.end());
    cols.insert(cols.end(), endogenous.begin(), endogenous.end());
    if (estimator == Estimator::tsls) cols.insert(cols.end(), instruments.begin(), instruments.end());
    return cols;
}

std::size_t EstimateResult::index_of(std::string_view name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw UnknownColumn(std::string(name));
    return static_cast<std::size_t>(it - names.begin());
}

RowSelection complete_rows(const PanelDataset& data, const std::vector<std::string>& columns) {
    std::vector<const Vector*> cols;
    for (const auto& c : columns) cols.push_back(&data.column(c).values);
    RowSelection sel;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const bool complete = std::none_of(cols.begin(), cols.end(), [i](const Vector* v) { return is_missing((*v)[i]); });
        if (complete)
            sel.rows.push_back(i);
        else
            ++sel.dropped;
    }
    return sel;
}

Vector gather(const PanelDataset& data, const std::string& column, const std::vector<std::size_t>& rows) {
    const Vector& src = data.column(column).values;
    Vector out;
    out.reserve(rows.size());
    for (std::size_t i : rows) out.push_back(src[i]);
    return out;
}

Matrix robust_covariance(const Matrix& x, std::span<const double> residuals, const Matrix& bread) {
    const std::size_t p = x.cols();
    if (residuals.size() != x.rows() || bread.rows() != p || bread.cols() != p)
        throw DimensionMismatch("robust_covariance: dimensions disagree");
    Matrix meat(p, p);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double w = residuals[i] * residuals[i];
        if (w == 0.0) continue;
        const auto r = x.row(i);
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = a; b < p; ++b) meat(a, b) += w * r[a] * r[b];
    }
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < a; ++b) meat(a, b) = meat(b, a);
    Matrix v = bread * meat * bread;
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < a; ++b) v(a, b) = v(b, a) = 0.5 * (v(a, b) + v(b, a));
    return v;
}

namespace {

// Named regressor block assembled column by column.
struct Design {
    std::vector<std::string> names;
    std::vector<Vector> columns;

    void add(std::string name, Vector values) {
        names.push_back(std::move(name));
        columns.push_back(std::move(values));
    }
    Matrix matrix() const { return Matrix::from_columns(columns); }
};

Design base_design(const ModelSpec& spec, const PanelDataset& data, const std::vector<std::size_t>& rows,
                   const std::vector<std::string>& regressors) {
    Design d;
    if (spec.include_intercept) d.add(kInterceptName, Vector(rows.size(), 1.0));
    for (const auto& c : regressors) d.add(c, gather(data, c, rows));
    return d;
}

LeastSquaresSolution solve_named(const Design& d, std::span<const double> y) {
    const Matrix x = d.matrix();
    try {
        return solve_least_squares(x, y);
    } catch (const RankDeficient& e) {
        std::vector<std::string> names;
        for (std::size_t c : e.columns()) names.push_back(d.names[c]);
        throw RankDeficient(e.columns(), std::move(names));
    }
}

double sum_squares(std::span<const double> v) {
    return std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
}

double total_sum_squares(std::span<const double> y, bool centered) {
    if (!centered) return sum_squares(y);
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double s = 0.0;
    for (double v : y) s += (v - mean) * (v - mean);
    return s;
}

void require_observations(std::size_t n, std::size_t p) {
    if (n <= p)
        throw InsufficientObservations(std::to_string(n) + " complete observation(s) for " + std::to_string(p) +
                                       " parameter(s)");
}

// Fills fit statistics and standard errors; `bread_design` is the matrix the sandwich uses.
void finish(EstimateResult& r, const Vector& y, bool centered_tss, double tss_override, const Matrix& bread_design,
            const Matrix& bread, std::size_t block_begin) {
    const std::size_t n = y.size();
    r.n_observations = n;
    r.df_residual = n - r.n_parameters;
    r.rss = sum_squares(r.residuals);
    const double tss = tss_override >= 0.0 ? tss_override : total_sum_squares(y, centered_tss);
    r.r_squared = tss > 0.0 ? 1.0 - r.rss / tss : (r.rss == 0.0 ? 1.0 : 0.0);
    const double nd = static_cast<double>(n);
    const double df = static_cast<double>(r.df_residual);
    const double scale = centered_tss ? (nd - 1.0) / df : nd / df;
    r.adjusted_r_squared = 1.0 - (1.0 - r.r_squared) * scale;
    r.residual_std_error = std::sqrt(r.rss / df);

    const Matrix full = r.covariance == Covariance::classical
                            ? [&] {
                                  Matrix v = bread;
                                  const double s2 = r.rss / df;
                                  for (std::size_t a = 0; a < v.rows(); ++a)
                                      for (std::size_t b = 0; b < v.cols(); ++b) v(a, b) *= s2;
                                  return v;
                              }()
                            : robust_covariance(bread_design, r.residuals, bread);
    const std::size_t k = r.names.size();
    r.covariance_matrix = Matrix(k, k);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) r.covariance_matrix(a, b) = full(block_begin + a, block_begin + b);
    r.standard_errors.resize(k);
    for (std::size_t a = 0; a < k; ++a) r.standard_errors[a] = std::sqrt(std::max(0.0, r.covariance_matrix(a, a)));
}

void require_estimator(const ModelSpec& spec, Estimator e) {
    if (spec.estimator != e)
        throw InvalidSpec("spec requests estimator '" + std::string(to_string(spec.estimator)) + "', called '" +
                          std::string(to_string(e)) + "'");
    spec.validate();
}

}  // namespace

EstimateResult estimate_ols(const ModelSpec& spec, const PanelDataset& data) {
    require_estimator(spec, Estimator::ols);
    const RowSelection sel = complete_rows(data, spec.used_columns());
    std::vector<std::string> regressors = spec.exogenous;
    regressors.insert(regressors.end(), spec.endogenous.begin(), spec.endogenous.end());
    const Design d = base_design(spec, data, sel.rows, regressors);
    const Vector y = gather(data, spec.dependent, sel.rows);
    require_observations(y.size(), d.columns.size());
    const LeastSquaresSolution sol = solve_named(d, y);

    EstimateResult r;
    r.estimator = Estimator::ols;
    r.covariance = spec.covariance;
    r.names = d.names;
    r.coefficients = sol.coefficients;
    r.residuals = sol.residuals;
    r.rows = sel.rows;
    r.n_dropped = sel.dropped;
    r.n_parameters = d.columns.size();
    finish(r, y, spec.include_intercept, -1.0, d.matrix(), sol.xtx_inverse, 0);
    return r;
}

EstimateResult estimate_tsls(const ModelSpec& spec, const PanelDataset& data) {
    require_estimator(spec, Estimator::tsls);
    const RowSelection sel = complete_rows(data, spec.used_columns());
    const std::size_t n = sel.rows.size();

    std::vector<std::string> z_cols = spec.exogenous;
    z_cols.insert(z_cols.end(), spec.instruments.begin(), spec.instruments.end());
    const Design z = base_design(spec, data, sel.rows, z_cols);
    require_observations(n, z.columns.size());

    // Stage 1: project every endogenous column on the full instrument set.
    Design actual = base_design(spec, data, sel.rows, spec.exogenous);
    Design projected = actual;
    for (const auto& e : spec.endogenous) {
        const Vector col = gather(data, e, sel.rows);
        const LeastSquaresSolution first = solve_named(z, col);
        actual.add(e, col);
        projected.add(e, first.fitted);
    }

    // Stage 2 on the projected design; residuals from the actual one.
    const Vector y = gather(data, spec.dependent, sel.rows);
    const LeastSquaresSolution second = solve_named(projected, y);
    EstimateResult r;
    r.estimator = Estimator::tsls;
    r.covariance = spec.covariance;
    r.names = actual.names;
    r.coefficients = second.coefficients;
    const Vector fitted = actual.matrix() * std::span<const double>(r.coefficients);
    r.residuals.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.residuals[i] = y[i] - fitted[i];
    r.rows = sel.rows;
    r.n_dropped = sel.dropped;
    r.n_parameters = actual.columns.size();
    finish(r, y, spec.include_intercept, -1.0, projected.matrix(), second.xtx_inverse, 0);
    return r;
}

EstimateResult estimate_two_way_fe(const ModelSpec& spec, const PanelDataset& data) {
    require_estimator(spec, Estimator::two_way_fe);
    const RowSelection sel = complete_rows(data, spec.used_columns());
    const std::size_t n = sel.rows.size();

    std::vector<std::string> units;
    std::vector<int> periods;
    for (std::size_t i : sel.rows) {
        units.push_back(data.units()[i]);
        periods.push_back(data.periods()[i]);
    }
    std::vector<std::string> unit_levels(units);
    std::sort(unit_levels.begin(), unit_levels.end());
    unit_levels.erase(std::unique(unit_levels.begin(), unit_levels.end()), unit_levels.end());
    std::vector<int> period_levels(periods);
    std::sort(period_levels.begin(), period_levels.end());
    period_levels.erase(std::unique(period_levels.begin(), period_levels.end()), period_levels.end());
    if (unit_levels.size() < 2 || period_levels.size() < 2)
        throw InsufficientObservations("two-way fixed effects need at least 2 units and 2 periods");

    Design d;
    d.add(kInterceptName, Vector(n, 1.0));
    for (std::size_t u = 1; u < unit_levels.size(); ++u) {
        Vector dummy(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) dummy[i] = units[i] == unit_levels[u] ? 1.0 : 0.0;
        d.add("unit:" + unit_levels[u], std::move(dummy));
    }
    for (std::size_t t = 1; t < period_levels.size(); ++t) {
        Vector dummy(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) dummy[i] = periods[i] == period_levels[t] ? 1.0 : 0.0;
        d.add("period:" + std::to_string(period_levels[t]), std::move(dummy));
    }
    const std::size_t absorbed = d.columns.size();
    const Matrix effects_only = d.matrix();
    if (numerical_rank(effects_only) < absorbed)
        throw RankDeficient(dependent_columns(effects_only), {"fixed-effect dummies (disconnected panel)"});

    std::vector<std::string> slopes = spec.exogenous;
    slopes.insert(slopes.end(), spec.endogenous.begin(), spec.endogenous.end());
    for (const auto& s : slopes) d.add(s, gather(data, s, sel.rows));
    require_observations(n, d.columns.size());

    const Matrix x = d.matrix();
    const auto dependent = dependent_columns(x);
    if (!dependent.empty()) {
        const std::size_t first = dependent.front();
        std::vector<Vector> probe = std::vector<Vector>(d.columns.begin(), d.columns.begin() + static_cast<std::ptrdiff_t>(absorbed));
        probe.push_back(d.columns[first]);
        if (numerical_rank(Matrix::from_columns(probe)) < probe.size()) throw CollinearWithFixedEffects(d.names[first]);
        std::vector<std::string> names;
        for (std::size_t c : dependent) names.push_back(d.names[c]);
        throw RankDeficient(dependent, std::move(names));
    }

    const Vector y = gather(data, spec.dependent, sel.rows);
    const LeastSquaresSolution sol = solve_least_squares(x, y);
    const LeastSquaresSolution within = solve_least_squares(effects_only, y);

    EstimateResult r;
    r.estimator = Estimator::two_way_fe;
    r.covariance = spec.covariance;
    r.names = slopes;
    r.coefficients.assign(sol.coefficients.begin() + static_cast<std::ptrdiff_t>(absorbed), sol.coefficients.end());
    r.residuals = sol.residuals;
    r.rows = sel.rows;
    r.n_dropped = sel.dropped;
    r.n_parameters = d.columns.size();
    finish(r, y, true, sum_squares(within.residuals), x, sol.xtx_inverse, absorbed);

    FixedEffectValues fe;
    fe.units = unit_levels;
    fe.periods = period_levels;
    for (std::size_t u = 0; u < unit_levels.size(); ++u)
        fe.unit_effects.push_back(sol.coefficients[0] + (u == 0 ? 0.0 : sol.coefficients[u]));
    for (std::size_t t = 0; t < period_levels.size(); ++t)
        fe.time_effects.push_back(t == 0 ? 0.0 : sol.coefficients[unit_levels.size() - 1 + t]);
    r.fixed_effects = std::move(fe);
    return r;
}

EstimateResult estimate(const ModelSpec& spec, const PanelDataset& data) {
    switch (spec.estimator) {
        case Estimator::ols: return estimate_ols(spec, data);
        case Estimator::two_way_fe: return estimate_two_way_fe(spec, data);
        case Estimator::tsls: return estimate_tsls(spec, data);
    }
    throw InvalidSpec("unknown estimator");
}

}  // namespace blp
