#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <filesystem>
#include <optional>

#include "blp/demand.hpp"
#include "blp/diagnostics.hpp"
#include "blp/distributions.hpp"
#include "blp/error.hpp"
#include "blp/estimators.hpp"
#include "blp/panel.hpp"
#include "blp/simulate.hpp"
#include "blp/spec_file.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;

namespace {

struct Loaded {
    blp::SpecFile spec;
    blp::PanelDataset data;
};

Loaded load(const std::string& spec_json, const std::optional<fs::path>& data_path, const fs::path& base_dir,
            const std::optional<std::string>& method) {
    Loaded l;
    l.spec = blp::parse_spec_text(spec_json, base_dir);
    if (method) {
        l.spec.model.estimator = blp::parse_estimator(*method);
        if (l.spec.model.estimator == blp::Estimator::two_way_fe) l.spec.model.include_intercept = false;
    }
    const auto path = data_path ? data_path : l.spec.dataset;
    if (!path) throw blp::InvalidSpec("no dataset: pass data_path or set \"dataset\" in the spec");
    l.data = blp::load_panel(*path, l.spec.load_options());
    blp::check_columns(l.spec.model, l.data);
    if (!l.data.has(l.spec.model.dependent)) l.data = blp::compute_dependent(l.data).data;
    return l;
}

py::dict to_dict(const blp::EstimateResult& r) {
    py::dict d;
    d["estimator"] = std::string(blp::to_string(r.estimator));
    d["covariance"] = std::string(blp::to_string(r.covariance));
    d["names"] = r.names;
    d["coefficients"] = r.coefficients;
    d["standard_errors"] = r.standard_errors;
    std::vector<std::vector<double>> cov(r.covariance_matrix.rows());
    for (std::size_t a = 0; a < cov.size(); ++a)
        for (std::size_t b = 0; b < r.covariance_matrix.cols(); ++b) cov[a].push_back(r.covariance_matrix(a, b));
    d["covariance_matrix"] = cov;
    d["residuals"] = r.residuals;
    d["n_observations"] = r.n_observations;
    d["n_dropped"] = r.n_dropped;
    d["df_residual"] = r.df_residual;
    d["rss"] = r.rss;
    d["r_squared"] = r.r_squared;
    d["adjusted_r_squared"] = r.adjusted_r_squared;
    d["residual_std_error"] = r.residual_std_error;
    return d;
}

py::dict to_dict(const blp::FTestReport& f) {
    py::dict d;
    d["endogenous"] = f.endogenous;
    d["f_statistic"] = f.f_statistic;
    d["df_numerator"] = f.df_numerator;
    d["df_denominator"] = f.df_denominator;
    d["p_value"] = f.p_value;
    d["passes_rule_of_thumb"] = f.passes_rule_of_thumb;
    d["restricted_df"] = f.restricted_df;
    d["unrestricted_df"] = f.unrestricted_df;
    return d;
}

py::dict to_dict(const blp::JTestReport& j) {
    py::dict d;
    d["j_statistic"] = j.j_statistic;
    d["m"] = j.m;
    d["k"] = j.k;
    d["df"] = j.df;
    d["p_value"] = j.p_value;
    d["critical_value_5pct"] = j.critical_value_5pct;
    d["reject_at_5pct"] = j.reject_at_5pct;
    d["regression_f"] = j.regression_f;
    d["j_instrument_block"] = j.j_instrument_block;
    d["p_value_instrument_block"] = j.p_value_instrument_block;
    d["n_r_squared"] = j.n_r_squared;
    return d;
}

py::dict to_dict(const blp::McSummary& s) {
    py::dict d;
    d["estimator"] = std::string(blp::to_string(s.estimator));
    d["replications"] = s.replications;
    d["failures"] = s.failures;
    py::list coefs;
    for (const auto& c : s.coefficients) {
        py::dict e;
        e["name"] = c.name;
        e["truth"] = c.truth;
        e["mean_estimate"] = c.mean_estimate;
        e["mean_bias"] = c.mean_bias;
        e["mc_standard_error"] = c.mc_standard_error;
        e["rmse"] = c.rmse;
        e["mean_standard_error"] = c.mean_standard_error;
        e["ci_coverage_95"] = c.ci_coverage_95;
        coefs.append(e);
    }
    d["coefficients"] = coefs;
    d["mean_first_stage_f"] = s.mean_first_stage_f;
    d["sargan_rejection_rate"] = s.sargan_rejection_rate;
    d["sargan_instrument_block_rejection_rate"] = s.sargan_instrument_block_rejection_rate;
    return d;
}

}  // namespace

PYBIND11_MODULE(_blpdemand, m) {
    m.doc() = "Logit demand estimation core";
    m.attr("__version__") = BLP_VERSION;

    static py::exception<blp::Error> error(m, "BlpError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const blp::Error& e) {
            py::set_error(error, e.what());
        }
    });

    m.def("predict_shares", [](const std::vector<double>& delta) {
        double outside = 0.0;
        auto inside = blp::predict_shares(delta, outside);
        return py::make_tuple(inside, outside);
    }, py::arg("delta"));

    m.def("invert_shares", [](const std::vector<double>& inside, double outside) {
        blp::PeriodShares s;
        s.inside = inside;
        s.outside = outside;
        s.products.resize(inside.size());
        return blp::invert_shares(s).delta;
    }, py::arg("inside"), py::arg("outside"));

    m.def("shares_from_quantities", [](const std::vector<double>& quantities, double market_size) {
        blp::MarketPeriod p;
        p.quantities = quantities;
        p.market_size = market_size;
        p.products.resize(quantities.size());
        const auto s = blp::shares_from_quantities(p);
        return py::make_tuple(s.inside, s.outside);
    }, py::arg("quantities"), py::arg("market_size"));

    m.def("estimate", [](const std::string& spec_json, std::optional<fs::path> data_path, const fs::path& base_dir,
                         std::optional<std::string> method) {
        const Loaded l = load(spec_json, data_path, base_dir, method);
        py::gil_scoped_release release;
        auto r = blp::estimate(l.spec.model, l.data);
        py::gil_scoped_acquire acquire;
        return to_dict(r);
    }, py::arg("spec_json"), py::arg("data_path") = py::none(), py::arg("base_dir") = fs::path(),
       py::arg("method") = py::none());

    m.def("diagnose", [](const std::string& spec_json, std::optional<fs::path> data_path, const fs::path& base_dir) {
        Loaded l = load(spec_json, data_path, base_dir, std::nullopt);
        blp::ModelSpec model = l.spec.model;
        model.estimator = blp::Estimator::tsls;
        if (l.spec.model.estimator == blp::Estimator::two_way_fe) model.include_intercept = true;
        py::dict out;
        out["first_stage"] = to_dict(blp::first_stage_f(model, l.data));
        if (model.instruments.size() > model.endogenous.size())
            out["sargan"] = to_dict(blp::sargan_j(blp::estimate_tsls(model, l.data), model, l.data));
        else
            out["sargan"] = py::none();
        return out;
    }, py::arg("spec_json"), py::arg("data_path") = py::none(), py::arg("base_dir") = fs::path());

    m.def("simulate", [](const std::string& config_json, std::optional<std::size_t> replications,
                         std::optional<std::uint64_t> seed, unsigned threads) {
        blp::SimulationConfig cfg = blp::parse_simulation_config_text(config_json);
        if (replications) cfg.replications = *replications;
        if (seed) cfg.dgp.seed = *seed;
        std::vector<blp::McSummary> summaries;
        {
            py::gil_scoped_release release;
            for (auto e : cfg.estimators)
                summaries.push_back(blp::run_monte_carlo(cfg.dgp, blp::simulation_spec(cfg.dgp, e, cfg.covariance),
                                                         cfg.replications, threads));
        }
        py::list out;
        for (const auto& s : summaries) out.append(to_dict(s));
        return out;
    }, py::arg("config_json"), py::arg("replications") = py::none(), py::arg("seed") = py::none(),
       py::arg("threads") = 0u);

    m.def("generate_market", [](const std::string& config_json, const fs::path& path) {
        const auto cfg = blp::parse_simulation_config_text(config_json);
        blp::save_panel(path, blp::generate_market(cfg.dgp).data);
    }, py::arg("config_json"), py::arg("path"));

    m.def("chi_square_upper_tail", &blp::chi_square_upper_tail, py::arg("x"), py::arg("df"));
    m.def("f_upper_tail", &blp::f_upper_tail, py::arg("x"), py::arg("df1"), py::arg("df2"));
}
