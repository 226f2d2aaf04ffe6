#include "rankone/cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <map>

namespace rankone::cli {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 400;
constexpr double kLeft = 70;
constexpr double kRight = 160;
constexpr double kTop = 20;
constexpr double kBottom = 40;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f"};

const std::vector<std::string> kXNames{"t", "a", "stride", "n", "L", "q", "k"};
const std::vector<std::string> kYNames{"normalized_decimal", "value_decimal", "fraction_decimal", "mu_C_decimal",
                                       "raw_decimal"};
const std::vector<std::string> kSeriesNames{"pair", "set", "L"};

std::string fmt(const char* pattern, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::optional<std::size_t> find(const std::vector<std::string>& header, const std::string& name)
{
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name)
            return i;
    return std::nullopt;
}

std::size_t pick(const std::vector<std::string>& header, const std::optional<std::string>& chosen,
                 const std::vector<std::string>& candidates, const std::string& role)
{
    if (chosen) {
        if (auto i = find(header, *chosen))
            return *i;
        throw DomainError("chart: report has no field '" + *chosen + "' for the " + role + " axis");
    }
    for (const auto& c : candidates)
        if (auto i = find(header, c))
            return *i;
    std::string list;
    for (const auto& c : candidates)
        list += (list.empty() ? "" : ", ") + c;
    throw DomainError("chart: report is missing the " + role + " field (one of " + list + ")");
}

double value_of(const std::string& s)
{
    if (s.find('/') != std::string::npos)
        return parse_rational(s).get_d();
    return std::strtod(s.c_str(), nullptr);
}

}  // namespace

std::string render_chart(const CsvData& data, const ChartOptions& options)
{
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    std::vector<std::string> order;
    std::string x_label = options.x.value_or("x");
    std::string y_label = options.y.value_or("y");
    if (!data.header.empty()) {
        const std::size_t xi = pick(data.header, options.x, kXNames, "x");
        const std::size_t yi = pick(data.header, options.y, kYNames, "y");
        std::optional<std::size_t> si;
        if (options.series)
            si = pick(data.header, options.series, {}, "series");
        else
            for (const auto& c : kSeriesNames)
                if ((si = find(data.header, c)))
                    break;
        x_label = data.header[xi];
        y_label = data.header[yi];
        for (const auto& row : data.rows) {
            if (row.size() != data.header.size())
                throw DomainError("chart: row with " + std::to_string(row.size()) + " fields, header has " +
                                  std::to_string(data.header.size()));
            if (row[xi].empty() || row[yi].empty())
                continue;
            const std::string key = si ? row[*si] : y_label;
            if (!series.count(key))
                order.push_back(key);
            series[key].emplace_back(value_of(row[xi]), value_of(row[yi]));
        }
    }

    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    bool first = true;
    for (const auto& [_, pts] : series)
        for (const auto& [x, y] : pts) {
            if (first) {
                x0 = x1 = x;
                y0 = y1 = y;
                first = false;
            }
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    if (x1 == x0) {
        x0 -= 1;
        x1 += 1;
    }
    if (y1 == y0) {
        y0 -= 1;
        y1 += 1;
    }
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
    auto sy = [&](double y) { return kTop + ph - (y - y0) / (y1 - y0) * ph; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"400\" fill=\"white\"/>\n";
    svg += "<g stroke=\"black\" stroke-width=\"1\">\n";
    svg += "<line x1=\"" + fmt("%.2f", kLeft) + "\" y1=\"" + fmt("%.2f", kTop + ph) + "\" x2=\"" +
           fmt("%.2f", kLeft + pw) + "\" y2=\"" + fmt("%.2f", kTop + ph) + "\"/>\n";
    svg += "<line x1=\"" + fmt("%.2f", kLeft) + "\" y1=\"" + fmt("%.2f", kTop) + "\" x2=\"" + fmt("%.2f", kLeft) +
           "\" y2=\"" + fmt("%.2f", kTop + ph) + "\"/>\n";
    svg += "</g>\n<g font-family=\"monospace\" font-size=\"10\" fill=\"black\">\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = x0 + (x1 - x0) * i / 4;
        const double fy = y0 + (y1 - y0) * i / 4;
        svg += "<text x=\"" + fmt("%.2f", sx(fx)) + "\" y=\"" + fmt("%.2f", kTop + ph + 14) +
               "\" text-anchor=\"middle\">" + fmt("%.4g", fx) + "</text>\n";
        svg += "<text x=\"" + fmt("%.2f", kLeft - 4) + "\" y=\"" + fmt("%.2f", sy(fy) + 3) +
               "\" text-anchor=\"end\">" + fmt("%.4g", fy) + "</text>\n";
    }
    svg += "<text x=\"" + fmt("%.2f", kLeft + pw / 2) + "\" y=\"" + fmt("%.2f", kHeight - 6) +
           "\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
    svg += "<text x=\"12\" y=\"" + fmt("%.2f", kTop + ph / 2) + "\" transform=\"rotate(-90 12 " +
           fmt("%.2f", kTop + ph / 2) + ")\" text-anchor=\"middle\">" + escape(y_label) + "</text>\n";
    svg += "</g>\n";
    for (std::size_t i = 0; i < order.size(); ++i) {
        const char* color = kPalette[i % (sizeof kPalette / sizeof *kPalette)];
        std::string points;
        for (const auto& [x, y] : series[order[i]])
            points += (points.empty() ? "" : " ") + fmt("%.2f", sx(x)) + "," + fmt("%.2f", sy(y));
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" +
               points + "\"/>\n";
        const double ly = kTop + 12 + 14 * static_cast<double>(i);
        svg += "<text x=\"" + fmt("%.2f", kLeft + pw + 10) + "\" y=\"" + fmt("%.2f", ly) +
               "\" font-family=\"monospace\" font-size=\"10\" fill=\"" + color + "\">" + escape(order[i]) +
               "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace rankone::cli
