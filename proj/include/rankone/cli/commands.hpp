#pragma once

#include "rankone/cli/config.hpp"
#include "rankone/cli/report.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace rankone::cli {

/// Command-line values that take precedence over the config file.
struct Overrides {
    std::optional<std::size_t> ref_column;
    std::optional<std::size_t> budget_pieces;
    std::optional<std::size_t> budget_depth;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> format;
};

void apply_overrides(RunConfig& cfg, const Overrides& o);

Report cmd_build(const RunConfig& cfg);
Report cmd_correlate(const RunConfig& cfg);
Report cmd_ergavg(const RunConfig& cfg);
Report cmd_slice(const RunConfig& cfg);
Report cmd_uniform(const RunConfig& cfg);
Report cmd_power(const RunConfig& cfg);
Report cmd_poly(const RunConfig& cfg);
Report cmd_validate(const RunConfig& cfg);
/// Uniform mixing sums, dynamical averages and correlation decay side by
/// side, plus family diagnostics.
Report cmd_diagnose(const RunConfig& cfg);

/// Runs a command by name ("build", "correlate", ...).
Report run_command(const std::string& name, const RunConfig& cfg);

struct ChartOptions {
    std::optional<std::string> x;
    std::optional<std::string> y;
    std::optional<std::string> series;
};

/// Deterministic SVG line chart of a CSV report; one polyline per series.
/// An empty report yields empty axes.
std::string render_chart(const CsvData& data, const ChartOptions& options = {});

}  // namespace rankone::cli
