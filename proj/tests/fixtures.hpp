#pragma once

#include <string>
#include <utility>
#include <vector>

#include "blp/panel.hpp"

namespace fixture {

/// Balanced panel of `units` x `periods` with the given columns (row-major over unit, then period).
inline blp::PanelDataset balanced(std::size_t units, std::size_t periods,
                                  const std::vector<std::pair<std::string, std::vector<double>>>& columns) {
    blp::PanelDataset d;
    for (std::size_t u = 0; u < units; ++u)
        for (std::size_t t = 0; t < periods; ++t) {
            char name[32];
            std::snprintf(name, sizeof name, "u%03zu", u);
            d.add_row(name, 2000 + static_cast<int>(t));
        }
    for (const auto& [name, values] : columns) d.set_column(blp::Column{name, blp::ColumnKind::continuous, values});
    return d;
}

}  // namespace fixture
