#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "blp/estimators.hpp"
#include "blp/panel.hpp"
#include "blp/simulate.hpp"

namespace blp {

/// A model specification document: column roles plus where the data lives.
struct SpecFile {
    ModelSpec model;
    /// Resolved against the spec file's directory when relative.
    std::optional<std::filesystem::path> dataset;
    std::string unit_column = "unit";
    std::string period_column = "period";
    std::string label;

    LoadOptions load_options() const;
};

/// Parses a JSON spec. Throws UnknownKey, MissingRequired, InvalidSpec or ParseError.
SpecFile parse_spec(const std::filesystem::path& path);
SpecFile parse_spec_text(const std::string& text, const std::filesystem::path& base_dir = {});

/// Throws UnknownColumn for the first spec column absent from the dataset.
/// The dependent column may be absent when it can be derived from quantities or shares.
void check_columns(const ModelSpec& spec, const PanelDataset& data);

/// Monte Carlo configuration: DGP parameters plus which estimators to run.
struct SimulationConfig {
    DgpParams dgp;
    std::vector<Estimator> estimators = {Estimator::ols, Estimator::tsls};
    Covariance covariance = Covariance::robust_hc0;
    std::size_t replications = 1;
};

/// Keys mirror DgpParams field names plus "estimators", "covariance", "replications".
/// Throws UnknownKey or InvalidParams.
SimulationConfig parse_simulation_config(const std::filesystem::path& path);
SimulationConfig parse_simulation_config_text(const std::string& text);

}  // namespace blp
