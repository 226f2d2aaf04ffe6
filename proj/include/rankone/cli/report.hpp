#pragma once

// Tabular reports with exact cells, written as CSV or JSON. Rational columns
// carry the exact "p/q" text plus a decimal companion column "<name>_decimal".

#include "rankone/numeric.hpp"

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace rankone::cli {

enum class ColumnKind { text, integer, rational, boolean };

struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::text;
};

/// std::monostate is an empty cell.
using Cell = std::variant<std::monostate, std::string, Int, Rational, bool>;

struct Table {
    std::string name;
    std::vector<Column> columns;
    std::vector<std::vector<Cell>> rows;

    Table& add_row(std::vector<Cell> row);
};

struct Report {
    std::string command;
    /// Ordered key/value notes (family description, parameters, warnings).
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<Table> tables;

    const Table* table(const std::string& name) const;
};

/// Number of fractional digits of every decimal companion cell.
inline constexpr int kDecimalDigits = 12;

/// RFC 4180 quoting, LF line endings, header row always present.
std::string to_csv(const Table& table);
std::string to_json(const Report& report);

/// Writes <dir>/<command>.json, or one <dir>/<command>[_<table>].csv per table
/// (the suffix is dropped for single-table reports). Returns the paths written.
std::vector<std::string> write_report(const Report& report, const std::string& dir, const std::string& format);

/// Parsed CSV: header plus rows of raw text.
struct CsvData {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvData parse_csv(const std::string& text);

}  // namespace rankone::cli
