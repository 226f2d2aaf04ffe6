#include "checks.hpp"
#include "doctest.h"
#include "oracle.hpp"
#include "rankone/cli/commands.hpp"

#include <fstream>
#include <sstream>

using namespace rankone;
using namespace rankone::cli;

namespace {

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "cannot open " << path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string config_path(const std::string& name) { return std::string(RANKONE_SOURCE_DIR) + "/configs/" + name; }
std::string golden(const std::string& name) { return slurp(std::string(RANKONE_SOURCE_DIR) + "/tests/golden/" + name); }

std::string error_of(const std::string& yaml)
{
    try {
        (void)parse_config(yaml);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("config parsing")
{
    const RunConfig cfg = load_config(config_path("r23.yaml"));
    CHECK(cfg.family.kind == "staircase");
    CHECK(cfg.ref_column == 2);
    CHECK(cfg.sets.size() == 3);
    CHECK(cfg.set("H").bottom_half);
    CHECK(cfg.correlate->pairs.size() == 1);
    CHECK(cfg.correlate->windows->residuals.size() == 2);
    CHECK(cfg.slice->epsilon == Rational(1, 8));
    CHECK(cfg.budget.max_depth == averaging_budget().max_depth);

    const RunConfig poly = parse_config("family:\n  kind: polynomial\n  coefficients: [0, \"-1/2\", \"1/2\"]\n"
                                        "  cuts: 5\n");
    CHECK(poly.family.polynomial.degree == 2);
    CHECK(poly.family.polynomial.base[1] == Rational(-1, 2));
    CHECK(make_rule(poly.family).stage(0) == std::vector<Int>{0, 0, 1, 3, 6});

    CHECK(error_of("family:\n  kind: staircase\nsets:\n  B: {column: 1, levles: [0]}\n")
              .find("line 4: field 'sets.B.levles': unknown field") != std::string::npos);
    CHECK(error_of("family:\n  kind: spiral\n").find("line 2: field 'family.kind'") != std::string::npos);
    CHECK(error_of("stages: {first: 0, last: 3}\n").find("field 'family': missing required field") !=
          std::string::npos);
    CHECK(error_of("family:\n  kind: staircase\nbudget: {pieces: 0}\n").find("budget.pieces") != std::string::npos);
    CHECK(error_of("family:\n  kind: staircase\nreference_column: x\n").find("reference_column") !=
          std::string::npos);
    CHECK(error_of("family:\n  kind: staircase\nuniform: {set: Z, a: [1]}\n").find("no set named 'Z'") !=
          std::string::npos);
    CHECK(error_of("family: [1, 2\n").find("line ") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/config.yaml"), ConfigError);

    RunConfig over = cfg;
    apply_overrides(over, Overrides{4, 100, 3, 9, std::string("json")});
    CHECK(over.ref_column == 4);
    CHECK(over.budget.max_pieces == 100);
    CHECK(over.budget.max_depth == 3);
    CHECK(over.family.seed == std::optional<std::uint64_t>(9));
    CHECK(over.format == "json");
    CHECK_THROWS_AS(apply_overrides(over, Overrides{std::nullopt, 0}), ConfigError);
}

TEST_CASE("report cells round-trip")
{
    Table t{"x", {{"name", ColumnKind::text}, {"q", ColumnKind::rational}, {"n", ColumnKind::integer}}, {}};
    t.add_row({std::string("a,\"b\""), Rational(-7, 3), Int(5)});
    t.add_row({std::string("c"), Cell(), Int(0)});
    CHECK_THROWS_AS(t.add_row({std::string("short")}), ConsistencyError);
    const std::string csv = to_csv(t);
    CHECK(csv == "name,q,q_decimal,n\n\"a,\"\"b\"\"\",-7/3,-2.333333333333,5\nc,,,0\n");
    const CsvData back = parse_csv(csv);
    REQUIRE(back.rows.size() == 2);
    CHECK(back.rows[0][0] == "a,\"b\"");
    CHECK(parse_rational(back.rows[0][1]) == Rational(-7, 3));

    Report r;
    r.command = "x";
    r.meta.emplace_back("k", "v");
    r.tables.push_back(t);
    const std::string json = to_json(r);
    CHECK(json.find("\"q\": \"-7/3\"") != std::string::npos);
    CHECK(json.find("\"q_decimal\": \"-2.333333333333\"") != std::string::npos);
    CHECK(json.find("\"q_decimal\": null") != std::string::npos);

    // every rational cell of a real report parses back exactly
    const Report build = cmd_build(load_config(config_path("r23.yaml")));
    const Table& stages = build.tables.front();
    const CsvData parsed = parse_csv(to_csv(stages));
    for (std::size_t i = 0; i < stages.rows.size(); ++i)
        for (std::size_t c = 0, col = 0; c < stages.columns.size(); ++c, ++col) {
            if (stages.columns[c].kind == ColumnKind::rational) {
                CHECK(parse_rational(parsed.rows[i][col]) == std::get<Rational>(stages.rows[i][c]));
                ++col;
            }
        }
}

TEST_CASE("build report")
{
    RunConfig cfg = load_config(config_path("r23.yaml"));
    const Report report = cmd_build(cfg);
    const Table& t = report.tables.front();
    REQUIRE(t.rows.size() == 4);
    const std::vector<long> h{1, 3, 12, 54};
    const std::vector<Rational> mu{Rational(1), Rational(3, 2), Rational(2), Rational(9, 4)};
    for (std::size_t n = 0; n < 4; ++n) {
        CHECK(std::get<Int>(t.rows[n][2]) == h[n]);
        CHECK(std::get<Rational>(t.rows[n][4]) == mu[n]);
    }
    CHECK(std::get<Rational>(t.rows[2][7]) == Rational(23, 24));
    CHECK(to_csv(t) == golden("r23_build.csv"));

    RunConfig zero = parse_config("family:\n  kind: constant\n  value: 0\n  cuts: 3\nstages: {first: 0, last: 6}\n");
    const Report zero_report = cmd_build(zero);
    for (const auto& row : zero_report.tables.front().rows)
        CHECK(std::get<Rational>(row[4]) == 1);

    RunConfig poly = load_config(config_path("polystair.yaml"));
    poly.last_stage = 20;
    const Report poly_report = cmd_build(poly);
    const Table& pt = poly_report.tables.front();
    for (std::size_t n = 1; n < pt.rows.size(); ++n) {
        CHECK(std::get<Rational>(pt.rows[n][4]) > std::get<Rational>(pt.rows[n - 1][4]));
        CHECK(std::get<Rational>(pt.rows[n][4]) < 3);
    }
}

TEST_CASE("correlate report against enumeration")
{
    const RunConfig cfg = load_config(config_path("r23.yaml"));
    const Report r = cmd_correlate(cfg);
    const Table& t = r.tables.front();
    const oracle::Tower brute = oracle::r23(12);
    const mpq_class mu2 = brute.column_measure(2);
    const mpq_class nu = brute.measure(1, 1) / mu2;
    for (const auto& row : t.rows) {
        const long time = std::get<Int>(row[1]).get_si();
        const mpq_class raw = brute.correlation_raw(1, {0}, 1, {0}, time);
        CHECK(std::get<Rational>(row[5]) == raw);
        CHECK(std::get<Rational>(row[6]) == raw / mu2 - nu * nu);
        CHECK(std::get<std::string>(row[7]) == "ok");
    }
    CHECK(std::get<Rational>(t.rows[0][6]) == Rational(3, 16));
    CHECK(std::get<Rational>(t.rows[3][6]) == Rational(1, 48));
    // windows [h_p, h_{p+1}) sampled at k h_p + m
    CHECK(std::get<Int>(t.rows[4][1]) == 3);
    CHECK(std::get<Int>(t.rows[5][1]) == 4);
    CHECK(to_csv(t) == golden("r23_correlate.csv"));

    RunConfig tight = cfg;
    tight.budget.max_depth = 1;
    std::size_t marked = 0;
    const Report tight_report = cmd_correlate(tight);
    for (const auto& row : tight_report.tables.front().rows)
        marked += std::get<std::string>(row[7]) == "budget_exceeded";
    CHECK(marked > 0);
}

TEST_CASE("command reports")
{
    const RunConfig cfg = load_config(config_path("r23.yaml"));
    const Report erg = cmd_ergavg(cfg);
    REQUIRE(erg.table("dynseq") != nullptr);
    CHECK(erg.table("dynseq")->rows.size() == 6);

    const Report sl = cmd_slice(cfg);
    for (const auto& row : sl.table("checks")->rows)
        if (!std::get<bool>(row[2]))
            CHECK(std::get<bool>(row[1]));

    const Report uni = cmd_uniform(cfg);
    CHECK(std::get<Rational>(uni.tables.front().rows[2][3]) == Rational(1, 12));

    const Report pw = cmd_power(cfg);
    CHECK(pw.table("profile")->rows.size() == 8);

    const Report poly = cmd_poly(cfg);
    CHECK(std::get<Int>(poly.tables.front().rows[0][2]) == 6);

    const Report val = cmd_validate(cfg);
    CHECK(val.table("flags") != nullptr);
    CHECK(val.meta.back().second == "pass");

    RunConfig even = parse_config("family:\n  kind: polynomial\n  coefficients: [0, 2]\nstages: {first: 0, last: 4}\n"
                                  "validate: {l_max: 4}\n");
    const Report ev = cmd_validate(even);
    CHECK(ev.meta.back().second == "flagged");

    RunConfig orn = load_config(config_path("ornstein.yaml"));
    CHECK(cmd_validate(orn).meta.back().second.find("not applicable") != std::string::npos);

    CHECK_THROWS_AS(run_command("nope", cfg), DomainError);
    RunConfig bare = parse_config("family:\n  kind: staircase\n");
    CHECK_THROWS_AS(cmd_correlate(bare), ConfigError);
}

TEST_CASE("diagnose bundle")
{
    const RunConfig cfg = load_config(config_path("r23.yaml"));
    const Report r = cmd_diagnose(cfg);
    for (const char* name : {"uniform", "ergodic", "correlation", "family_stages"})
        CHECK(r.table(name) != nullptr);

    const RunConfig orn = load_config(config_path("ornstein.yaml"));
    const std::string first = to_json(cmd_diagnose(orn));
    CHECK(first == to_json(cmd_diagnose(orn)));
    CHECK(first == golden("ornstein_diagnose.json"));
    RunConfig other = orn;
    apply_overrides(other, Overrides{std::nullopt, std::nullopt, std::nullopt, 1});
    CHECK(to_json(cmd_diagnose(other)) != first);
}

TEST_CASE("charts")
{
    const std::string csv = golden("r23_correlate.csv");
    const std::string svg = render_chart(parse_csv(csv));
    CHECK(svg == golden("r23_correlate.svg"));
    CHECK(svg == render_chart(parse_csv(csv)));
    std::size_t lines = 0;
    for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1))
        ++lines;
    CHECK(lines == 1);

    // two pairs, two polylines
    const std::string two = "pair,t,normalized,normalized_decimal\nA:B,1,0,0.0\nA:B,2,1,1.0\nB:B,1,1,1.0\nB:B,2,0,0.0\n";
    const std::string svg2 = render_chart(parse_csv(two));
    CHECK(svg2.find("A:B") != std::string::npos);
    CHECK(svg2.find("B:B") != std::string::npos);

    const std::string empty = render_chart(parse_csv(""));
    CHECK(empty.find("<polyline") == std::string::npos);
    CHECK(empty.find("<svg") == 0);
    CHECK(render_chart(parse_csv("t,normalized_decimal\n")).find("<polyline") == std::string::npos);

    try {
        (void)render_chart(parse_csv("name,passed\nx,true\n"));
        FAIL("schema mismatch accepted");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("missing the x field") != std::string::npos);
    }
    try {
        (void)render_chart(parse_csv(csv), ChartOptions{std::string("when")});
        FAIL("unknown column accepted");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("'when'") != std::string::npos);
    }
}
