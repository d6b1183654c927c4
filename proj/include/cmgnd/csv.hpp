#ifndef CMGND_CSV_HPP
#define CMGND_CSV_HPP

#include <cstddef>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "cmgnd/errors.hpp"

namespace cmgnd {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

}  // namespace detail

// First line is the header; every row must have as many fields.
inline CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) {
        throw input_error("csv: empty input");
    }
    table.header = detail::split_csv_line(line);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != table.header.size()) {
            throw input_error("csv: line " + std::to_string(lineno) + " has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    return table;
}

inline CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw input_error("csv: cannot open " + path);
    }
    return read_csv(in);
}

// Resolve a --col argument: empty means the last column, otherwise a header
// name or a zero-based index.
inline std::size_t resolve_column(const CsvTable& table, const std::string& selector) {
    if (table.header.empty()) throw input_error("csv: no columns");
    if (selector.empty()) {
        return table.header.size() - 1;
    }
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (table.header[c] == selector) return c;
    }
    std::size_t pos = 0;
    try {
        const int idx = std::stoi(selector, &pos);
        if (pos == selector.size() && idx >= 0 &&
            static_cast<std::size_t>(idx) < table.header.size()) {
            return static_cast<std::size_t>(idx);
        }
    } catch (const std::exception&) {
    }
    throw input_error("csv: no column named '" + selector + "'");
}

inline std::vector<double> numeric_column(const CsvTable& table, std::size_t col) {
    if (col >= table.header.size()) {
        throw input_error("csv: column index out of range");
    }
    std::vector<double> values;
    values.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string& cell = table.rows[r][col];
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(cell, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != cell.size() || cell.empty()) {
            throw input_error("csv: non-numeric value '" + cell + "' in row " +
                              std::to_string(r + 2) + ", column '" + table.header[col] + "'");
        }
        values.push_back(v);
    }
    return values;
}

// Identifiers (dates, tickers) live in the first column by convention.
inline std::vector<std::string> id_column(const CsvTable& table) {
    std::vector<std::string> ids;
    ids.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        ids.push_back(row.empty() ? std::string() : row.front());
    }
    return ids;
}

}  // namespace cmgnd

#endif  // CMGND_CSV_HPP
