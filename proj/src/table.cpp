#include "uniflux/table.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include "json.hpp"

#include "uniflux/errors.hpp"

namespace uniflux {

namespace {

std::string cell_text(const Cell& c) {
    if (const double* d = std::get_if<double>(&c)) return format_number(*d);
    return std::get<std::string>(c);
}

}  // namespace

void ResultTable::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size())
        fail(ErrorKind::InvalidArgument, fmt::format("row has {} cells, table has {} columns", row.size(), columns.size()));
    rows.push_back(std::move(row));
}

void ResultTable::set_meta(const std::string& key, const std::string& value) {
    for (auto& [k, v] : metadata)
        if (k == key) {
            v = value;
            return;
        }
    metadata.emplace_back(key, value);
}

void ResultTable::stamp(const std::string& command, const std::string& config_hash, bool with_timestamp) {
    set_meta("schema_version", std::to_string(kSchemaVersion));
    set_meta("model_version", kModelVersion);
    set_meta("command", command);
    set_meta("config_hash", config_hash.empty() ? "none" : config_hash);
    if (with_timestamp)
        set_meta("timestamp", fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(
                                                                        std::chrono::system_clock::now()))));
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    return fmt::format("{:.12g}", v);
}

std::string to_csv(const ResultTable& t) {
    std::ostringstream out;
    for (const auto& [k, v] : t.metadata) out << "# " << k << ": " << v << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        out << (i ? "," : "") << t.columns[i].name << '[' << t.columns[i].unit << ']';
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << cell_text(row[i]);
        out << '\n';
    }
    return out.str();
}

std::string to_json(const ResultTable& t) {
    nlohmann::ordered_json j;
    j["metadata"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : t.metadata) j["metadata"][k] = v;
    j["columns"] = nlohmann::ordered_json::array();
    for (const auto& c : t.columns) j["columns"].push_back({{"name", c.name}, {"unit", c.unit}});
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        nlohmann::ordered_json r = nlohmann::ordered_json::array();
        for (const auto& c : row) {
            if (const double* d = std::get_if<double>(&c)) {
                // Same 12-digit rounding as the CSV; non-finite values become strings.
                if (std::isfinite(*d)) r.push_back(std::strtod(format_number(*d).c_str(), nullptr));
                else r.push_back(format_number(*d));
            } else {
                r.push_back(std::get<std::string>(c));
            }
        }
        j["rows"].push_back(std::move(r));
    }
    return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::IoError, fmt::format("cannot write '{}'", path));
    out << text;
    if (!out) fail(ErrorKind::IoError, fmt::format("write to '{}' failed", path));
}

}  // namespace uniflux
