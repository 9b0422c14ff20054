#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "blp/matrix.hpp"

namespace blp {

enum class ColumnKind { continuous, dummy };

/// A named numeric column; missing cells are stored as quiet NaN.
struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::continuous;
    Vector values;
};

bool is_missing(double v) noexcept;

inline constexpr const char* kQuantityColumn = "quantity";
inline constexpr const char* kMarketSizeColumn = "market_size";
inline constexpr const char* kShareColumn = "share";
inline constexpr const char* kOutsideShareColumn = "outside_share";
inline constexpr const char* kDependentColumn = "log_share_diff";

/// Long-format (product, period) panel, rows sorted by unit then period.
class PanelDataset {
public:
    std::string unit_column = "unit";
    std::string period_column = "period";

    std::size_t size() const noexcept { return units_.size(); }
    const std::vector<std::string>& units() const noexcept { return units_; }
    const std::vector<int>& periods() const noexcept { return periods_; }
    const std::vector<Column>& columns() const noexcept { return columns_; }

    bool has(const std::string& name) const noexcept;
    /// Throws UnknownColumn.
    const Column& column(const std::string& name) const;

    /// Appends a row key; every column grows by one missing cell.
    void add_row(std::string unit, int period);
    /// Adds or replaces a column; values must match size().
    void set_column(Column column);

    /// Sorts rows by (unit, period) and rejects duplicate keys.
    void sort_and_check_keys();

    friend bool operator==(const PanelDataset& a, const PanelDataset& b);

private:
    std::vector<std::string> units_;
    std::vector<int> periods_;
    std::vector<Column> columns_;
};

struct LoadOptions {
    std::string unit_column = "unit";
    std::string period_column = "period";
    /// Columns validated as 0/1 when present.
    std::vector<std::string> dummy_columns = {"Alone", "Subscribe"};
    /// Columns that may not have missing cells; offending rows are reported.
    std::vector<std::string> required_columns;
};

PanelDataset load_panel(const std::filesystem::path& path, const LoadOptions& options = {});
PanelDataset read_panel(std::istream& in, const LoadOptions& options = {});

/// Writes the dataset in the same CSV schema read_panel accepts; values round-trip exactly.
void write_panel(std::ostream& out, const PanelDataset& data);
void save_panel(const std::filesystem::path& path, const PanelDataset& data);

struct DependentResult {
    PanelDataset data;
    std::optional<std::string> warning;
};

/// Adds log_share_diff = log s_jt - log s_0t from quantity/market_size (or share/outside_share).
DependentResult compute_dependent(const PanelDataset& data);

/// Per-period outside shares implied by the dataset's quantity/market_size or share columns.
std::vector<std::pair<int, double>> outside_shares(const PanelDataset& data);

}  // namespace blp
