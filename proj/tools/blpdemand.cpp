// blpdemand: logit demand estimation pipeline.
//
// Exit codes: 0 success, 1 usage or I/O error, 2 data validation failure,
// 3 estimation failure, 4 spec has no instruments (diagnose), 5 invalid
// simulation parameters.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "blp/demand.hpp"
#include "blp/diagnostics.hpp"
#include "blp/error.hpp"
#include "blp/estimators.hpp"
#include "blp/panel.hpp"
#include "blp/report.hpp"
#include "blp/simulate.hpp"
#include "blp/spec_file.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kValidation = 2,
    kEstimation = 3,
    kNoInstruments = 4,
    kInvalidParams = 5,
};

struct Failure {
    int code;
    std::string message;
};

struct Options {
    std::string spec;
    std::string data;
    std::string output;
    std::string format = "text";
    std::optional<std::uint64_t> seed;
    std::string method;
    bool robust = false;
    bool classical = false;
    std::string params;
    std::size_t replications = 0;
    std::string emit_dataset;
    unsigned threads = 0;
    std::string manifest;
};

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const fs::path& output, const std::string& command, const std::vector<std::string>& argv,
                    const Options& o) {
    nlohmann::ordered_json m;
    m["command"] = command;
    m["argv"] = argv;
    m["working_directory"] = fs::current_path().string();
    m["spec"] = o.spec;
    m["dataset"] = o.data;
    if (o.seed) m["seed"] = *o.seed;
    m["tool_version"] = BLP_VERSION;
    m["timestamp"] = utc_timestamp();
    std::ofstream out(output.string() + ".manifest.json");
    out << m.dump(2) << '\n';
}

void emit(const std::string& text, const Options& o, const std::string& command, const std::vector<std::string>& argv) {
    if (o.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(o.output, std::ios::binary);
    if (!out) throw Failure{kUsage, "cannot write '" + o.output + "'"};
    out << text;
    write_manifest(o.output, command, argv, o);
}

blp::PanelDataset load_data(const fs::path& path, const blp::LoadOptions& load) {
    try {
        return blp::load_panel(path, load);
    } catch (const blp::Error& e) {
        throw Failure{kValidation, path.string() + ": " + e.what()};
    }
}

struct Loaded {
    blp::SpecFile spec;
    blp::PanelDataset data;
};

Loaded load_spec_and_data(const Options& o) {
    if (o.spec.empty()) throw Failure{kUsage, "--spec is required"};
    Loaded l;
    try {
        l.spec = blp::parse_spec(o.spec);
    } catch (const blp::Error& e) {
        throw Failure{kValidation, o.spec + ": " + e.what()};
    }
    fs::path data_path;
    if (!o.data.empty())
        data_path = o.data;
    else if (l.spec.dataset)
        data_path = *l.spec.dataset;
    else
        throw Failure{kUsage, "no dataset: pass --data or set \"dataset\" in the spec"};
    l.data = load_data(data_path, l.spec.load_options());
    try {
        blp::check_columns(l.spec.model, l.data);
        if (!l.data.has(l.spec.model.dependent)) l.data = blp::compute_dependent(l.data).data;
    } catch (const blp::Error& e) {
        throw Failure{kValidation, e.what()};
    }
    if (!o.method.empty()) {
        try {
            l.spec.model.estimator = blp::parse_estimator(o.method);
        } catch (const blp::Error& e) {
            throw Failure{kUsage, e.what()};
        }
    }
    if (o.robust) l.spec.model.covariance = blp::Covariance::robust_hc0;
    if (o.classical) l.spec.model.covariance = blp::Covariance::classical;
    if (l.spec.model.estimator == blp::Estimator::two_way_fe) l.spec.model.include_intercept = false;
    return l;
}

int cmd_invert(const Options& o, const std::vector<std::string>& argv) {
    blp::LoadOptions load;
    fs::path data_path = o.data;
    if (!o.spec.empty()) {
        try {
            const auto spec = blp::parse_spec(o.spec);
            load = spec.load_options();
            if (data_path.empty() && spec.dataset) data_path = *spec.dataset;
        } catch (const blp::Error& e) {
            throw Failure{kValidation, o.spec + ": " + e.what()};
        }
    }
    if (data_path.empty()) throw Failure{kUsage, "--data is required"};
    const blp::PanelDataset data = load_data(data_path, load);
    blp::DependentResult result;
    std::vector<std::pair<int, double>> outside;
    try {
        result = blp::compute_dependent(data);
        outside = blp::outside_shares(data);
    } catch (const blp::Error& e) {
        throw Failure{kValidation, data_path.string() + ": " + e.what()};
    }
    if (result.warning) std::cerr << "warning: " << *result.warning << '\n';

    std::ostringstream csv;
    blp::write_panel(csv, result.data);
    std::ostream& info = o.output.empty() ? std::cerr : std::cout;
    info << "period,outside_share\n";
    for (const auto& [t, s0] : outside) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", s0);
        info << t << ',' << buf << '\n';
    }
    emit(csv.str(), o, "invert", argv);
    return kOk;
}

int cmd_estimate(const Options& o, const std::vector<std::string>& argv) {
    const Loaded l = load_spec_and_data(o);
    blp::EstimateResult r;
    try {
        r = blp::estimate(l.spec.model, l.data);
    } catch (const blp::Error& e) {
        throw Failure{kEstimation, std::string("estimation failed: ") + e.what()};
    }
    if (r.n_dropped > 0) std::cerr << r.n_dropped << " row(s) dropped for missing values\n";
    const std::string text = o.format == "csv" ? blp::render_estimate_csv(r)
                                               : blp::render_estimate_text(r, l.spec.model.dependent, l.spec.label);
    emit(text, o, "estimate", argv);
    return kOk;
}

int cmd_diagnose(const Options& o, const std::vector<std::string>& argv) {
    Loaded l = load_spec_and_data(o);
    blp::ModelSpec model = l.spec.model;
    if (model.instruments.empty()) throw Failure{kNoInstruments, "spec has no instruments; nothing to diagnose"};
    model.estimator = blp::Estimator::tsls;
    if (o.method.empty() && !o.classical) model.covariance = blp::Covariance::robust_hc0;
    model.include_intercept = l.spec.model.estimator == blp::Estimator::two_way_fe ? true : model.include_intercept;

    std::string text;
    try {
        const blp::FTestReport f = blp::first_stage_f(model, l.data);
        std::optional<blp::JTestReport> j;
        std::string note;
        if (model.instruments.size() > model.endogenous.size()) {
            const blp::EstimateResult iv = blp::estimate_tsls(model, l.data);
            j = blp::sargan_j(iv, model, l.data);
        } else {
            note = "Sargan J test skipped: model is exactly identified (m = k = " +
                   std::to_string(model.instruments.size()) + ")\n";
        }
        if (o.format == "csv") {
            text = blp::render_diagnostics_csv(f, j ? &*j : nullptr);
        } else {
            text = blp::render_first_stage_text(f, model) + "\n";
            text += j ? blp::render_sargan_text(*j) : note;
        }
    } catch (const blp::Error& e) {
        throw Failure{kEstimation, std::string("diagnostics failed: ") + e.what()};
    }
    emit(text, o, "diagnose", argv);
    return kOk;
}

int cmd_simulate(const Options& o, const std::vector<std::string>& argv) {
    if (o.params.empty()) throw Failure{kUsage, "a simulation parameter file is required"};
    blp::SimulationConfig cfg;
    try {
        cfg = blp::parse_simulation_config(o.params);
        if (o.seed) cfg.dgp.seed = *o.seed;
        if (o.replications > 0) cfg.replications = o.replications;
        cfg.dgp.validate();
    } catch (const blp::Error& e) {
        throw Failure{kInvalidParams, o.params + ": " + e.what()};
    }

    if (!o.emit_dataset.empty()) {
        try {
            blp::save_panel(o.emit_dataset, blp::generate_market(cfg.dgp).data);
        } catch (const blp::InvalidParams& e) {
            throw Failure{kInvalidParams, e.what()};
        } catch (const blp::Error& e) {
            throw Failure{kUsage, e.what()};
        }
        Options manifest_opts = o;
        manifest_opts.seed = cfg.dgp.seed;
        write_manifest(o.emit_dataset, "simulate", argv, manifest_opts);
    }

    std::ostringstream os;
    os << "seed " << cfg.dgp.seed << ", " << cfg.dgp.products << " products x " << cfg.dgp.periods << " periods\n";
    for (const auto e : cfg.estimators) {
        try {
            const blp::ModelSpec spec = blp::simulation_spec(cfg.dgp, e, cfg.covariance);
            os << '\n' << blp::render_mc_summary_text(blp::run_monte_carlo(cfg.dgp, spec, cfg.replications, o.threads));
        } catch (const blp::InvalidParams& ex) {
            throw Failure{kInvalidParams, ex.what()};
        } catch (const blp::Error& ex) {
            throw Failure{kEstimation, ex.what()};
        }
    }
    Options out = o;
    out.seed = cfg.dgp.seed;
    emit(os.str(), out, "simulate", argv);
    return kOk;
}

int run(std::vector<std::string> args);

int cmd_replay(const Options& o) {
    std::ifstream in(o.manifest);
    if (!in) throw Failure{kUsage, "cannot open manifest '" + o.manifest + "'"};
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Failure{kUsage, std::string("invalid manifest: ") + e.what()};
    }
    if (!m.contains("argv") || !m["argv"].is_array()) throw Failure{kUsage, "manifest has no argv"};
    // Relative paths in argv are relative to where the original command ran.
    if (m.contains("working_directory")) {
        std::error_code ec;
        fs::current_path(m["working_directory"].get<std::string>(), ec);
        if (ec) throw Failure{kUsage, "cannot enter recorded working directory: " + ec.message()};
    }
    return run(m["argv"].get<std::vector<std::string>>());
}

int run(std::vector<std::string> args) {
    CLI::App app{"Logit demand estimation: share inversion, OLS / two-way FE / 2SLS, instrument diagnostics, "
                 "Monte Carlo"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--spec", o.spec, "Model spec (JSON)");
    app.add_option("--data", o.data, "Panel CSV (overrides the spec's dataset)");
    app.add_option("--output", o.output, "Write results here (plus <output>.manifest.json)");
    app.add_option("--format", o.format, "text or csv")->check(CLI::IsMember({"text", "csv"}));
    app.add_option("--seed", o.seed, "RNG seed (simulate)");

    auto* invert = app.add_subcommand("invert", "Add log_share_diff = log s_jt - log s_0t to a panel");
    auto* est = app.add_subcommand("estimate", "Estimate the demand equation");
    est->add_option("--method", o.method, "ols, fe or 2sls (overrides the spec)")
        ->check(CLI::IsMember({"ols", "fe", "2sls", "tsls", "two_way_fe"}));
    est->add_flag("--robust", o.robust, "HC0 robust standard errors");
    est->add_flag("--classical", o.classical, "Classical standard errors");
    auto* diag = app.add_subcommand("diagnose", "First-stage F and Sargan J tests");
    auto* sim = app.add_subcommand("simulate", "Monte Carlo on synthetic logit markets");
    sim->add_option("params", o.params, "Simulation parameter file (JSON)")->required();
    sim->add_option("--replications", o.replications, "Replications (overrides the file)");
    sim->add_option("--emit-dataset", o.emit_dataset, "Write one simulated panel (replication seed) as CSV");
    sim->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
    auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    replay->add_option("manifest", o.manifest, "Manifest JSON")->required();

    for (auto* sub : {est, diag, invert}) {
        sub->add_option("--spec", o.spec, "Model spec (JSON)");
        sub->add_option("--data", o.data, "Panel CSV");
        sub->add_option("--output", o.output, "Output path");
        sub->add_option("--format", o.format, "text or csv")->check(CLI::IsMember({"text", "csv"}));
    }
    sim->add_option("--output", o.output, "Output path");
    sim->add_option("--seed", o.seed, "RNG seed");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*invert) return cmd_invert(o, args);
        if (*est) return cmd_estimate(o, args);
        if (*diag) return cmd_diagnose(o, args);
        if (*sim) return cmd_simulate(o, args);
        if (*replay) return cmd_replay(o);
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << '\n';
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(std::move(args));
}
