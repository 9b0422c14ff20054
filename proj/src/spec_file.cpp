#include "blp/spec_file.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "blp/error.hpp"

namespace blp {

namespace {

using nlohmann::json;

const std::set<std::string> kKnownKeys = {"dataset",   "dependent", "exogenous",   "endogenous",    "instruments",
                                          "estimator", "covariance", "intercept", "unit_column", "period_column",
                                          "label"};

std::vector<std::string> string_list(const json& doc, const char* key) {
    if (!doc.contains(key)) return {};
    const json& v = doc.at(key);
    if (!v.is_array()) throw InvalidSpec(std::string("'") + key + "' must be an array of column names");
    std::vector<std::string> out;
    for (const auto& e : v) {
        if (!e.is_string()) throw InvalidSpec(std::string("'") + key + "' must contain only strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

std::string string_field(const json& doc, const char* key) {
    const json& v = doc.at(key);
    if (!v.is_string()) throw InvalidSpec(std::string("'") + key + "' must be a string");
    return v.get<std::string>();
}

}  // namespace

LoadOptions SpecFile::load_options() const {
    LoadOptions o;
    o.unit_column = unit_column;
    o.period_column = period_column;
    return o;
}

SpecFile parse_spec_text(const std::string& text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(0, "", std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError(0, "", "spec must be a JSON object");
    for (const auto& [key, _] : doc.items())
        if (!kKnownKeys.contains(key)) throw UnknownKey(key);
    if (!doc.contains("dependent")) throw MissingRequired("dependent");

    SpecFile s;
    ModelSpec& m = s.model;
    m.dependent = string_field(doc, "dependent");
    m.exogenous = string_list(doc, "exogenous");
    m.endogenous = string_list(doc, "endogenous");
    m.instruments = string_list(doc, "instruments");
    m.estimator = doc.contains("estimator") ? parse_estimator(string_field(doc, "estimator"))
                                            : (m.instruments.empty() ? Estimator::ols : Estimator::tsls);
    m.covariance = doc.contains("covariance")
                       ? parse_covariance(string_field(doc, "covariance"))
                       : (m.estimator == Estimator::tsls ? Covariance::robust_hc0 : Covariance::classical);
    if (doc.contains("intercept")) {
        if (!doc.at("intercept").is_boolean()) throw InvalidSpec("'intercept' must be true or false");
        m.include_intercept = doc.at("intercept").get<bool>();
    } else {
        m.include_intercept = m.estimator != Estimator::two_way_fe;
    }
    if (doc.contains("dataset")) {
        std::filesystem::path p = string_field(doc, "dataset");
        s.dataset = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    if (doc.contains("unit_column")) s.unit_column = string_field(doc, "unit_column");
    if (doc.contains("period_column")) s.period_column = string_field(doc, "period_column");
    if (doc.contains("label")) s.label = string_field(doc, "label");
    m.validate();
    return s;
}

SpecFile parse_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, "", "cannot open spec '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_spec_text(ss.str(), path.parent_path());
}

void check_columns(const ModelSpec& spec, const PanelDataset& data) {
    const bool derivable = (data.has(kQuantityColumn) && data.has(kMarketSizeColumn)) ||
                           (data.has(kShareColumn) && data.has(kOutsideShareColumn));
    if (!data.has(spec.dependent) && !(spec.dependent == kDependentColumn && derivable))
        throw UnknownColumn(spec.dependent);
    for (const auto* cols : {&spec.exogenous, &spec.endogenous, &spec.instruments})
        for (const auto& c : *cols)
            if (!data.has(c)) throw UnknownColumn(c);
}

namespace {

double real_field(const json& doc, const char* key) {
    const json& v = doc.at(key);
    if (!v.is_number()) throw InvalidParams(std::string("'") + key + "' must be a number");
    return v.get<double>();
}

std::uint64_t count_field(const json& doc, const char* key) {
    const json& v = doc.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw InvalidParams(std::string("'") + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
}

Vector real_list(const json& doc, const char* key) {
    const json& v = doc.at(key);
    if (!v.is_array()) throw InvalidParams(std::string("'") + key + "' must be an array of numbers");
    Vector out;
    for (const auto& e : v) {
        if (!e.is_number()) throw InvalidParams(std::string("'") + key + "' must contain only numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

}  // namespace

SimulationConfig parse_simulation_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidParams(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw InvalidParams("simulation config must be a JSON object");

    SimulationConfig cfg;
    DgpParams& p = cfg.dgp;
    for (const auto& [key, value] : doc.items()) {
        const char* k = key.c_str();
        try {
            if (key == "products") p.products = count_field(doc, k);
            else if (key == "periods") p.periods = count_field(doc, k);
            else if (key == "characteristics") p.characteristics = count_field(doc, k);
            else if (key == "beta") p.beta = real_list(doc, k);
            else if (key == "intercept") p.intercept = real_field(doc, k);
            else if (key == "alpha") p.alpha = real_field(doc, k);
            else if (key == "xi_scale") p.xi_scale = real_field(doc, k);
            else if (key == "unit_effects") p.unit_effects = real_list(doc, k);
            else if (key == "time_effects") p.time_effects = real_list(doc, k);
            else if (key == "price_endogeneity") p.price_endogeneity = real_field(doc, k);
            else if (key == "instrument_strength") p.instrument_strength = real_field(doc, k);
            else if (key == "cost_shifters") p.cost_shifters = count_field(doc, k);
            else if (key == "price_intercept") p.price_intercept = real_field(doc, k);
            else if (key == "price_noise") p.price_noise = real_field(doc, k);
            else if (key == "characteristic_mean") p.characteristic_mean = real_field(doc, k);
            else if (key == "characteristic_scale") p.characteristic_scale = real_field(doc, k);
            else if (key == "cost_mean") p.cost_mean = real_field(doc, k);
            else if (key == "cost_scale") p.cost_scale = real_field(doc, k);
            else if (key == "consumers") {
                if (value.is_null()) p.consumers.reset();
                else p.consumers = count_field(doc, k);
            }
            else if (key == "market_size") p.market_size = real_field(doc, k);
            else if (key == "first_period") p.first_period = static_cast<int>(count_field(doc, k));
            else if (key == "max_redraws") p.max_redraws = count_field(doc, k);
            else if (key == "seed") p.seed = count_field(doc, k);
            else if (key == "replications") cfg.replications = count_field(doc, k);
            else if (key == "covariance") cfg.covariance = parse_covariance(string_field(doc, k));
            else if (key == "estimators") {
                cfg.estimators.clear();
                for (const auto& name : string_list(doc, k)) cfg.estimators.push_back(parse_estimator(name));
            } else {
                throw UnknownKey(key);
            }
        } catch (const InvalidSpec& e) {
            throw InvalidParams(e.what());
        } catch (const json::exception& e) {
            throw InvalidParams("'" + key + "': " + e.what());
        }
    }
    if (!doc.contains("beta") && doc.contains("characteristics")) p.beta.assign(p.characteristics, 1.0);
    if (cfg.replications < 1) throw InvalidParams("replications must be >= 1");
    if (cfg.estimators.empty()) throw InvalidParams("at least one estimator is required");
    p.validate();
    return cfg;
}

SimulationConfig parse_simulation_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParams("cannot open simulation config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_simulation_config_text(ss.str());
}

}  // namespace blp
