#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace uniflux {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kModelVersion = "uniflux 1.0.0";

using Cell = std::variant<double, std::string>;

struct Column {
    std::string name;
    std::string unit;  // "1" for dimensionless, "-" for text
};

struct ResultTable {
    std::vector<Column> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::pair<std::string, std::string>> metadata;  // ordered

    void add_row(std::vector<Cell> row);
    void set_meta(const std::string& key, const std::string& value);
    // Standard block: schema and model version, command, config hash, optional timestamp.
    void stamp(const std::string& command, const std::string& config_hash, bool with_timestamp);
};

// 12 significant digits; inf and nan spelled out.
std::string format_number(double v);

std::string to_csv(const ResultTable& t);
std::string to_json(const ResultTable& t);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace uniflux
