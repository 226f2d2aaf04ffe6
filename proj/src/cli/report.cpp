#include "rankone/cli/report.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

namespace rankone::cli {

Table& Table::add_row(std::vector<Cell> row)
{
    if (row.size() != columns.size())
        throw ConsistencyError("table " + name + ": row has " + std::to_string(row.size()) + " cells, expected " +
                               std::to_string(columns.size()));
    rows.push_back(std::move(row));
    return *this;
}

const Table* Report::table(const std::string& name) const
{
    for (const auto& t : tables)
        if (t.name == name)
            return &t;
    return nullptr;
}

namespace {

std::string quote(const std::string& s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

std::string cell_text(const Cell& c)
{
    struct {
        std::string operator()(std::monostate) const { return ""; }
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(const Int& v) const { return to_text(v); }
        std::string operator()(const Rational& v) const { return to_text(v); }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
    } visit;
    return std::visit(visit, c);
}

std::string cell_decimal(const Cell& c)
{
    if (const auto* q = std::get_if<Rational>(&c))
        return to_decimal(*q, kDecimalDigits);
    if (const auto* v = std::get_if<Int>(&c))
        return to_decimal(Rational(*v), kDecimalDigits);
    return "";
}

nlohmann::ordered_json cell_json(const Cell& c)
{
    if (std::holds_alternative<std::monostate>(c))
        return nullptr;
    if (const auto* b = std::get_if<bool>(&c))
        return *b;
    if (const auto* v = std::get_if<Int>(&c)) {
        if (v->fits_slong_p())
            return v->get_si();
        return to_text(*v);
    }
    return cell_text(c);
}

}  // namespace

std::string to_csv(const Table& table)
{
    std::string out;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i)
            out += ',';
        out += quote(table.columns[i].name);
        if (table.columns[i].kind == ColumnKind::rational)
            out += ',' + quote(table.columns[i].name + "_decimal");
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i)
                out += ',';
            out += quote(cell_text(row[i]));
            if (table.columns[i].kind == ColumnKind::rational)
                out += ',' + cell_decimal(row[i]);
        }
        out += '\n';
    }
    return out;
}

std::string to_json(const Report& report)
{
    nlohmann::ordered_json doc;
    doc["command"] = report.command;
    nlohmann::ordered_json meta = nlohmann::ordered_json::object();
    for (const auto& [k, v] : report.meta)
        meta[k] = v;
    doc["meta"] = meta;
    nlohmann::ordered_json tables = nlohmann::ordered_json::object();
    for (const auto& t : report.tables) {
        nlohmann::ordered_json cols = nlohmann::ordered_json::array();
        for (const auto& c : t.columns) {
            cols.push_back(c.name);
            if (c.kind == ColumnKind::rational)
                cols.push_back(c.name + "_decimal");
        }
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& row : t.rows) {
            nlohmann::ordered_json r = nlohmann::ordered_json::object();
            for (std::size_t i = 0; i < row.size(); ++i) {
                r[t.columns[i].name] = cell_json(row[i]);
                if (t.columns[i].kind == ColumnKind::rational) {
                    if (std::holds_alternative<std::monostate>(row[i]))
                        r[t.columns[i].name + "_decimal"] = nullptr;
                    else
                        r[t.columns[i].name + "_decimal"] = cell_decimal(row[i]);
                }
            }
            rows.push_back(std::move(r));
        }
        tables[t.name] = {{"columns", cols}, {"rows", rows}};
    }
    doc["tables"] = tables;
    return doc.dump(2) + "\n";
}

std::vector<std::string> write_report(const Report& report, const std::string& dir, const std::string& format)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<std::string> written;
    auto emit = [&](const std::string& name, const std::string& body) {
        const fs::path path = fs::path(dir) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw Error("cannot write '" + path.string() + "'");
        out << body;
        written.push_back(path.string());
    };
    if (format == "json") {
        emit(report.command + ".json", to_json(report));
    } else if (format == "csv") {
        for (const auto& t : report.tables) {
            const std::string stem = report.tables.size() == 1 ? report.command : report.command + "_" + t.name;
            emit(stem + ".csv", to_csv(t));
        }
    } else {
        throw DomainError("unknown format '" + format + "' (csv or json)");
    }
    return written;
}

CsvData parse_csv(const std::string& text)
{
    CsvData out;
    std::vector<std::vector<std::string>> lines;
    std::vector<std::string> row;
    std::string cell;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            row.push_back(std::move(cell));
            cell.clear();
            any = true;
        } else if (c == '\n') {
            row.push_back(std::move(cell));
            cell.clear();
            lines.push_back(std::move(row));
            row.clear();
            any = false;
        } else if (c != '\r') {
            cell += c;
            any = true;
        }
    }
    if (any || !cell.empty()) {
        row.push_back(std::move(cell));
        lines.push_back(std::move(row));
    }
    if (lines.empty())
        return out;
    out.header = std::move(lines.front());
    out.rows.assign(std::make_move_iterator(lines.begin() + 1), std::make_move_iterator(lines.end()));
    return out;
}

}  // namespace rankone::cli
