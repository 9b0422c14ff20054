#include "blp/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <cstring>

#include "blp/demand.hpp"
#include "blp/error.hpp"

namespace blp {

bool is_missing(double v) noexcept { return std::isnan(v); }

bool PanelDataset::has(const std::string& name) const noexcept {
    return std::any_of(columns_.begin(), columns_.end(), [&](const Column& c) { return c.name == name; });
}

const Column& PanelDataset::column(const std::string& name) const {
    for (const auto& c : columns_)
        if (c.name == name) return c;
    throw UnknownColumn(name);
}

void PanelDataset::add_row(std::string unit, int period) {
    units_.push_back(std::move(unit));
    periods_.push_back(period);
    for (auto& c : columns_) c.values.push_back(std::numeric_limits<double>::quiet_NaN());
}

void PanelDataset::set_column(Column column) {
    if (column.values.size() != size())
        throw DimensionMismatch("column '" + column.name + "' has " + std::to_string(column.values.size()) +
                                " values for " + std::to_string(size()) + " rows");
    for (auto& c : columns_)
        if (c.name == column.name) {
            c = std::move(column);
            return;
        }
    columns_.push_back(std::move(column));
}

void PanelDataset::sort_and_check_keys() {
    std::vector<std::size_t> order(size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (units_[a] != units_[b]) return units_[a] < units_[b];
        return periods_[a] < periods_[b];
    });
    for (std::size_t i = 1; i < order.size(); ++i)
        if (units_[order[i]] == units_[order[i - 1]] && periods_[order[i]] == periods_[order[i - 1]])
            throw DuplicateKey(units_[order[i]], periods_[order[i]]);

    auto permute = [&](auto& v) {
        std::remove_reference_t<decltype(v)> out;
        out.reserve(v.size());
        for (std::size_t i : order) out.push_back(v[i]);
        v = std::move(out);
    };
    permute(units_);
    permute(periods_);
    for (auto& c : columns_) permute(c.values);
}

bool operator==(const PanelDataset& a, const PanelDataset& b) {
    if (a.units_ != b.units_ || a.periods_ != b.periods_ || a.columns_.size() != b.columns_.size()) return false;
    for (std::size_t k = 0; k < a.columns_.size(); ++k) {
        const auto& x = a.columns_[k];
        const auto& y = b.columns_[k];
        if (x.name != y.name || x.kind != y.kind || x.values.size() != y.values.size()) return false;
        for (std::size_t i = 0; i < x.values.size(); ++i) {
            const bool mx = is_missing(x.values[i]);
            if (mx != is_missing(y.values[i])) return false;
            if (!mx && std::memcmp(&x.values[i], &y.values[i], sizeof(double)) != 0) return false;
        }
    }
    return true;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw ParseError(line_no, "", "unterminated quoted field");
    fields.push_back(std::move(cur));
    return fields;
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

bool is_missing_token(const std::string& s) { return s.empty() || s == "NA" || s == "NaN" || s == "nan"; }

double parse_real(const std::string& s, std::size_t line, const std::string& column) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw ParseError(line, column, "not a number: '" + s + "'");
    if (!std::isfinite(v)) throw ParseError(line, column, "non-finite value: '" + s + "'");
    return v;
}

int parse_period(const std::string& s, std::size_t line, const std::string& column) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ParseError(line, column, "period must be an integer year, got '" + s + "'");
    return v;
}

void validate_domains(const PanelDataset& data, const LoadOptions& options, const std::vector<std::size_t>& lines) {
    for (const auto& name : options.required_columns) {
        const Column& c = data.column(name);
        for (std::size_t i = 0; i < data.size(); ++i)
            if (is_missing(c.values[i])) throw DomainViolation(name, lines[i], "missing value in required column");
    }
    for (const auto& c : data.columns()) {
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double v = c.values[i];
            if (is_missing(v)) continue;
            if (c.kind == ColumnKind::dummy && v != 0.0 && v != 1.0)
                throw DomainViolation(c.name, lines[i], "dummy column must be 0 or 1");
            if ((c.name == kQuantityColumn || c.name == kMarketSizeColumn) && !(v > 0.0))
                throw DomainViolation(c.name, lines[i], "must be positive");
        }
    }
    if (data.has(kQuantityColumn) && data.has(kMarketSizeColumn)) {
        const auto& q = data.column(kQuantityColumn).values;
        const auto& n = data.column(kMarketSizeColumn).values;
        std::map<int, std::pair<double, double>> totals;  // period -> (sold, size)
        std::map<int, std::size_t> first_row;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (is_missing(q[i]) || is_missing(n[i])) continue;
            const int t = data.periods()[i];
            auto [it, inserted] = totals.try_emplace(t, 0.0, n[i]);
            if (inserted) first_row[t] = lines[i];
            if (it->second.second != n[i])
                throw DomainViolation(kMarketSizeColumn, lines[i], "market size differs within period " + std::to_string(t));
            it->second.first += q[i];
        }
        for (const auto& [t, sn] : totals)
            if (!(sn.first < sn.second))
                throw DomainViolation(kQuantityColumn, first_row[t],
                                      "quantities in period " + std::to_string(t) + " reach the market size");
    }
}

}  // namespace

PanelDataset read_panel(std::istream& in, const LoadOptions& options) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        header = split_csv_line(line, line_no);
        break;
    }
    if (header.empty()) throw ParseError(std::max<std::size_t>(line_no, 1), "", "empty file: no header row");
    for (auto& h : header) h = trim(h);

    std::set<std::string> seen;
    for (const auto& h : header) {
        if (h.empty()) throw ParseError(line_no, "", "empty column name in header");
        if (!seen.insert(h).second) throw ParseError(line_no, h, "duplicate column name");
    }
    const auto find = [&](const std::string& name) -> std::ptrdiff_t {
        const auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : it - header.begin();
    };
    const std::ptrdiff_t unit_idx = find(options.unit_column);
    const std::ptrdiff_t period_idx = find(options.period_column);
    if (unit_idx < 0) throw ParseError(line_no, options.unit_column, "unit column not found in header");
    if (period_idx < 0) throw ParseError(line_no, options.period_column, "period column not found in header");
    for (const auto& name : options.required_columns)
        if (find(name) < 0) throw UnknownColumn(name);

    PanelDataset data;
    data.unit_column = options.unit_column;
    data.period_column = options.period_column;
    std::vector<std::size_t> value_idx;
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (static_cast<std::ptrdiff_t>(k) == unit_idx || static_cast<std::ptrdiff_t>(k) == period_idx) continue;
        value_idx.push_back(k);
        Column c;
        c.name = header[k];
        const bool dummy = std::find(options.dummy_columns.begin(), options.dummy_columns.end(), c.name) !=
                           options.dummy_columns.end();
        c.kind = dummy ? ColumnKind::dummy : ColumnKind::continuous;
        data.set_column(std::move(c));
    }

    struct RawRow {
        std::string unit;
        int period;
        std::size_t line;
        Vector values;
    };
    std::vector<RawRow> raw;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line, line_no);
        if (fields.size() != header.size())
            throw ParseError(line_no, "", "expected " + std::to_string(header.size()) + " fields, got " +
                                              std::to_string(fields.size()));
        RawRow r;
        r.unit = trim(fields[static_cast<std::size_t>(unit_idx)]);
        if (r.unit.empty()) throw ParseError(line_no, options.unit_column, "empty unit identifier");
        r.period = parse_period(trim(fields[static_cast<std::size_t>(period_idx)]), line_no, options.period_column);
        r.line = line_no;
        for (std::size_t k : value_idx) {
            const std::string cell = trim(fields[k]);
            r.values.push_back(is_missing_token(cell) ? std::numeric_limits<double>::quiet_NaN()
                                                      : parse_real(cell, line_no, header[k]));
        }
        raw.push_back(std::move(r));
    }

    std::stable_sort(raw.begin(), raw.end(), [](const RawRow& a, const RawRow& b) {
        return a.unit != b.unit ? a.unit < b.unit : a.period < b.period;
    });
    for (std::size_t i = 1; i < raw.size(); ++i)
        if (raw[i].unit == raw[i - 1].unit && raw[i].period == raw[i - 1].period)
            throw DuplicateKey(raw[i].unit, raw[i].period);

    std::vector<std::size_t> sorted_lines;
    for (const auto& r : raw) {
        data.add_row(r.unit, r.period);
        sorted_lines.push_back(r.line);
    }
    for (std::size_t k = 0; k < value_idx.size(); ++k) {
        Column c = data.columns()[k];
        for (std::size_t i = 0; i < raw.size(); ++i) c.values[i] = raw[i].values[k];
        data.set_column(std::move(c));
    }
    validate_domains(data, options, sorted_lines);
    return data;
}

PanelDataset load_panel(const std::filesystem::path& path, const LoadOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(0, "", "cannot open '" + path.string() + "'");
    return read_panel(in, options);
}

namespace {

std::string format_exact(double v) {
    if (is_missing(v)) return "";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

void write_panel(std::ostream& out, const PanelDataset& data) {
    out << quote_if_needed(data.unit_column) << ',' << quote_if_needed(data.period_column);
    for (const auto& c : data.columns()) out << ',' << quote_if_needed(c.name);
    out << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << quote_if_needed(data.units()[i]) << ',' << data.periods()[i];
        for (const auto& c : data.columns()) out << ',' << format_exact(c.values[i]);
        out << '\n';
    }
}

void save_panel(const std::filesystem::path& path, const PanelDataset& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    write_panel(out, data);
}

namespace {

// Groups row indices by period, preserving row order inside each period.
std::map<int, std::vector<std::size_t>> rows_by_period(const PanelDataset& data) {
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < data.size(); ++i) groups[data.periods()[i]].push_back(i);
    return groups;
}

std::vector<PeriodShares> observed_shares(const PanelDataset& data) {
    const bool from_quantities = data.has(kQuantityColumn) && data.has(kMarketSizeColumn);
    const bool from_shares = data.has(kShareColumn) && data.has(kOutsideShareColumn);
    if (!from_quantities && !from_shares)
        throw UnknownColumn(std::string(kQuantityColumn) + "/" + kMarketSizeColumn + " (or " + kShareColumn + "/" +
                            kOutsideShareColumn + ")");

    std::vector<PeriodShares> out;
    for (const auto& [t, rows] : rows_by_period(data)) {
        try {
            if (from_quantities) {
                const auto& q = data.column(kQuantityColumn).values;
                const auto& n = data.column(kMarketSizeColumn).values;
                MarketPeriod m;
                m.period = t;
                m.market_size = n[rows.front()];
                for (std::size_t i : rows) {
                    if (is_missing(q[i]) || is_missing(n[i]))
                        throw ZeroQuantity("missing quantity or market size for '" + data.units()[i] + "'");
                    if (n[i] != m.market_size) throw ShareDomainError("market size differs within period");
                    m.products.push_back(data.units()[i]);
                    m.quantities.push_back(q[i]);
                }
                out.push_back(shares_from_quantities(m));
            } else {
                const auto& s = data.column(kShareColumn).values;
                const auto& s0 = data.column(kOutsideShareColumn).values;
                PeriodShares ps;
                ps.period = t;
                ps.outside = s0[rows.front()];
                for (std::size_t i : rows) {
                    if (s0[i] != ps.outside) throw ShareDomainError("outside share differs within period");
                    ps.products.push_back(data.units()[i]);
                    ps.inside.push_back(s[i]);
                }
                validate(ps);
                out.push_back(std::move(ps));
            }
        } catch (const ShareDomainError& e) {
            throw ShareDomainError("period " + std::to_string(t) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace

std::vector<std::pair<int, double>> outside_shares(const PanelDataset& data) {
    std::vector<std::pair<int, double>> out;
    for (const auto& ps : observed_shares(data)) out.emplace_back(ps.period, ps.outside);
    return out;
}

DependentResult compute_dependent(const PanelDataset& data) {
    if (data.has(kDependentColumn))
        return {data, std::string("column '") + kDependentColumn + "' already present; left unchanged"};

    Column dep{kDependentColumn, ColumnKind::continuous, Vector(data.size(), 0.0)};
    const auto groups = rows_by_period(data);
    for (const auto& ps : observed_shares(data)) {
        const PeriodUtilities u = invert_shares(ps);
        const auto& rows = groups.at(ps.period);
        for (std::size_t k = 0; k < rows.size(); ++k) dep.values[rows[k]] = u.delta[k];
    }
    DependentResult r{data, std::nullopt};
    r.data.set_column(std::move(dep));
    return r;
}

}  // namespace blp
