#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace expmod {

// Tabular output carrier. Cells are preformatted strings so CSV and JSON
// emit bit-identical numeric spellings (17-digit floats, num/den rationals).
struct Table {
    std::string schema;  // "<verb>.v1"
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    nlohmann::json summary = nlohmann::json::object();  // scalar extras
};

// RFC 4180 quoting: fields containing comma, quote or line breaks are
// wrapped in quotes with embedded quotes doubled.
inline std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// The trailing schema column versions the header itself, so a consumer can
// reject files written by a different layout without guessing.
inline void write_csv(std::ostream& os, const Table& table) {
    for (const auto& c : table.columns) os << csv_quote(c) << ',';
    os << "schema\n";
    for (const auto& row : table.rows) {
        for (const auto& cell : row) os << csv_quote(cell) << ',';
        os << csv_quote(table.schema) << '\n';
    }
}

inline void write_json(std::ostream& os, const Table& table, const nlohmann::json& config_echo) {
    nlohmann::json doc;
    doc["schema"] = table.schema;
    doc["config"] = config_echo;
    doc["columns"] = table.columns;
    doc["rows"] = table.rows;
    if (!table.summary.empty()) doc["summary"] = table.summary;
    os << doc.dump(2) << '\n';
}

}  // namespace expmod
