#include "blp/error.hpp"

#include <sstream>

namespace blp {

namespace {

std::string join_columns(const std::vector<std::size_t>& cols, const std::vector<std::string>& names) {
    std::ostringstream os;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) os << ", ";
        if (i < names.size() && !names[i].empty())
            os << names[i];
        else
            os << "#" << cols[i];
    }
    return os.str();
}

}  // namespace

RankDeficient::RankDeficient(std::vector<std::size_t> columns, std::vector<std::string> names)
    : Error("rank deficient design; linearly dependent column(s): " + join_columns(columns, names)),
      columns_(std::move(columns)),
      names_(std::move(names)) {}

NotPositiveDefinite::NotPositiveDefinite(std::size_t pivot)
    : Error("matrix is not positive definite (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}

OrderConditionViolated::OrderConditionViolated(std::size_t instruments, std::size_t endogenous)
    : Error("order condition violated: " + std::to_string(instruments) + " instrument(s) for " +
            std::to_string(endogenous) + " endogenous regressor(s)") {}

CollinearWithFixedEffects::CollinearWithFixedEffects(std::string column)
    : Error("column '" + column + "' is collinear with the unit/period fixed effects"),
      column_(std::move(column)) {}

ExactlyIdentified::ExactlyIdentified()
    : Error("over-identification test undefined: model is exactly identified (m = k)") {}

MultipleEndogenous::MultipleEndogenous(std::size_t count)
    : Error("first-stage F supports exactly one endogenous regressor, got " + std::to_string(count)) {}

ParseError::ParseError(std::size_t line, std::string column, const std::string& what)
    : Error("parse error at line " + std::to_string(line) + (column.empty() ? "" : ", column '" + column + "'") +
            ": " + what),
      line_(line),
      column_(std::move(column)) {}

DuplicateKey::DuplicateKey(std::string unit, int period)
    : Error("duplicate (unit, period) key (" + unit + ", " + std::to_string(period) + ")") {}

DomainViolation::DomainViolation(std::string column, std::size_t row, const std::string& reason)
    : Error("domain violation in column '" + column + "' at row " + std::to_string(row) + ": " + reason),
      column_(std::move(column)),
      row_(row) {}

UnknownKey::UnknownKey(const std::string& key) : Error("unknown key '" + key + "'") {}

MissingRequired::MissingRequired(const std::string& field) : Error("missing required field '" + field + "'") {}

UnknownColumn::UnknownColumn(std::string name)
    : Error("unknown column '" + name + "'"), name_(std::move(name)) {}

}  // namespace blp
