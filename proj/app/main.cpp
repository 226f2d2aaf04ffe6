#include "rankone/cli/commands.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace rankone;
using namespace rankone::cli;

namespace {

enum Exit { ok = 0, internal = 1, config = 2, domain = 3, budget = 4, construction = 5 };

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("", 0, "cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exact rank-one cutting-and-stacking engine"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    Overrides over;
    std::string format;
    std::size_t pieces = 0;
    std::size_t depth = 0;
    std::uint64_t seed = 0;
    std::size_t ref = 0;

    auto common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", config_path, "YAML run configuration");
        if (needs_config)
            c->required();
        sub->add_option("--out", out_dir, "output directory (default: config output.dir, else RANKONE_OUT, else .)");
        sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--budget-pieces", pieces, "piece budget for power images");
        sub->add_option("--budget-depth", depth, "column depth budget for power images");
        sub->add_option("--seed", seed, "seed for stochastic families (overrides config)");
        sub->add_option("--ref-column", ref, "reference column M");
    };

    const std::vector<std::pair<std::string, std::string>> commands{
        {"build", "stage table: r_n, h_n, widths, column and spacer measures"},
        {"correlate", "correlations mu(T^t A ∩ B) over explicit or windowed t"},
        {"ergavg", "ergodic averages along exponent lists or dynamical sequences"},
        {"slice", "slicing of a partial-sum stage, its checks and slice average"},
        {"uniform", "uniform mixing sums over the levels of C_p"},
        {"power", "averages along arithmetic progressions"},
        {"poly", "averages along a polynomial exponent sequence"},
        {"validate", "family growth and divisibility diagnostics"},
        {"diagnose", "uniform sums, dynamical averages and correlations side by side"},
    };
    std::vector<std::pair<std::string, CLI::App*>> subs;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        common(sub, true);
        subs.emplace_back(name, sub);
    }
    CLI::App* chart = app.add_subcommand("chart", "SVG line chart of a CSV report");
    std::string report_path;
    ChartOptions chart_opts;
    chart->add_option("report", report_path, "CSV report written by this tool")->required();
    chart->add_option("--out", out_dir, "output directory");
    chart->add_option("--x", chart_opts.x, "x column");
    chart->add_option("--y", chart_opts.y, "y column");
    chart->add_option("--series", chart_opts.series, "series column");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Exit::ok : Exit::config;
    }

    try {
        if (chart->parsed()) {
            const std::string body = render_chart(parse_csv(read_file(report_path)), chart_opts);
            const std::string dir = out_dir.empty() ? "." : out_dir;
            std::filesystem::create_directories(dir);
            const auto path = std::filesystem::path(dir) / (std::filesystem::path(report_path).stem().string() + ".svg");
            std::ofstream(path, std::ios::binary) << body;
            std::cout << path.string() << "\n";
            return Exit::ok;
        }
        for (const auto& [name, sub] : subs) {
            if (!sub->parsed())
                continue;
            RunConfig cfg = load_config(config_path);
            if (sub->count("--budget-pieces"))
                over.budget_pieces = pieces;
            if (sub->count("--budget-depth"))
                over.budget_depth = depth;
            if (sub->count("--seed"))
                over.seed = seed;
            if (sub->count("--ref-column"))
                over.ref_column = ref;
            if (sub->count("--format"))
                over.format = format;
            apply_overrides(cfg, over);
            std::string dir = out_dir;
            if (dir.empty() && cfg.out_dir)
                dir = *cfg.out_dir;
            if (dir.empty())
                if (const char* env = std::getenv("RANKONE_OUT"))
                    dir = env;
            if (dir.empty())
                dir = ".";
            const Report report = run_command(name, cfg);
            for (const auto& p : write_report(report, dir, cfg.format))
                std::cout << p << "\n";
        }
        return Exit::ok;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return Exit::config;
    } catch (const ResourceError& e) {
        std::cerr << "budget exhausted: " << e.what() << "\n";
        return Exit::budget;
    } catch (const ConstructionError& e) {
        std::cerr << "construction error: " << e.what() << "\n";
        return Exit::construction;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return Exit::domain;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return Exit::internal;
    }
}
