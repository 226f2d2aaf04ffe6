#include "rankone/cli/commands.hpp"

#include "rankone/dynseq.hpp"
#include "rankone/ergodic.hpp"
#include "rankone/families.hpp"

#include <memory>

namespace rankone::cli {

void apply_overrides(RunConfig& cfg, const Overrides& o)
{
    if (o.ref_column)
        cfg.ref_column = *o.ref_column;
    if (o.budget_pieces) {
        if (*o.budget_pieces == 0)
            throw ConfigError("--budget-pieces", 0, "budget must be positive");
        cfg.budget.max_pieces = *o.budget_pieces;
    }
    if (o.budget_depth) {
        if (*o.budget_depth == 0)
            throw ConfigError("--budget-depth", 0, "budget must be positive");
        cfg.budget.max_depth = *o.budget_depth;
    }
    if (o.seed)
        cfg.family.seed = *o.seed;
    if (o.format) {
        if (*o.format != "csv" && *o.format != "json")
            throw ConfigError("--format", 0, "format is csv or json");
        cfg.format = *o.format;
    }
}

namespace {

constexpr auto kText = ColumnKind::text;
constexpr auto kInt = ColumnKind::integer;
constexpr auto kRat = ColumnKind::rational;
constexpr auto kBool = ColumnKind::boolean;

Int to_int(std::size_t v) { return Int(static_cast<unsigned long>(v)); }

Cell opt_cell(const std::optional<Rational>& q) { return q ? Cell(*q) : Cell(); }

Report start(const std::string& command, const RunConfig& cfg, const TowerModel& tower)
{
    Report r;
    r.command = command;
    r.meta.emplace_back("family", tower.rule().describe());
    if (cfg.family.seed)
        r.meta.emplace_back("seed", std::to_string(*cfg.family.seed));
    r.meta.emplace_back("reference_column", std::to_string(cfg.ref_column));
    const auto notes = tower.rule().notes();
    for (std::size_t i = 0; i < notes.size(); ++i)
        r.meta.emplace_back("note_" + std::to_string(i), notes[i]);
    return r;
}

std::unique_ptr<TowerModel> tower_of(const RunConfig& cfg)
{
    return std::make_unique<TowerModel>(make_rule(cfg.family));
}

template <class T>
const T& section(const std::optional<T>& s, const std::string& name)
{
    if (!s)
        throw ConfigError(name, 0, "missing section '" + name + "' for this command");
    return *s;
}

std::optional<Rational> relative(const Rational& value, const Rational& nu)
{
    if (nu == 0)
        return std::nullopt;
    return value / nu;
}

Rational nu_of(const TowerModel& tower, const LevelSet& b, std::size_t m)
{
    return b.measure(tower) / tower.column_measure(m);
}

std::vector<Cell> average_cells(const AverageResult& a, const Rational& nu)
{
    return {to_int(a.terms), a.value, opt_cell(relative(a.value, nu)), a.tail_bound, to_int(a.tail_column),
            a.divergent};
}

const std::vector<Column> kAverageColumns{{"terms", kInt},      {"value", kRat},        {"value_over_nu", kRat},
                                          {"tail_bound", kRat}, {"tail_column", kInt}, {"divergent", kBool}};

std::vector<Column> with_average(std::vector<Column> head)
{
    head.insert(head.end(), kAverageColumns.begin(), kAverageColumns.end());
    return head;
}

std::vector<Cell> join(std::vector<Cell> head, std::vector<Cell> tail)
{
    head.insert(head.end(), std::make_move_iterator(tail.begin()), std::make_move_iterator(tail.end()));
    return head;
}

/// Stage polynomials for families that have them.
std::optional<std::function<Polynomial(std::size_t)>> stage_polynomials(const FamilyConfig& f)
{
    if (f.kind == "staircase")
        return [](std::size_t) { return Polynomial::monomial(1); };
    if (f.kind == "simple_polystair") {
        const std::size_t d = f.degree;
        return [d](std::size_t) { return Polynomial::monomial(d); };
    }
    if (f.kind == "polynomial") {
        const PolynomialSpec spec = f.polynomial;
        return [spec](std::size_t n) { return spec.at(n); };
    }
    return std::nullopt;
}

void add_family_tables(Report& r, const FamilyDiagnostics& d)
{
    Table stages{"stages",
                 {{"n", kInt},
                  {"r", kInt},
                  {"h", kInt},
                  {"r2_over_h", kRat},
                  {"mean_spacer", kRat},
                  {"r_mean_over_h", kRat},
                  {"lead_over_n", kRat}},
                 {}};
    for (const auto& s : d.stages)
        stages.add_row({to_int(s.n), s.r, s.h, s.r_squared_over_h, s.mean_spacer, s.r_mean_over_h,
                        opt_cell(s.lead_over_n)});
    r.tables.push_back(std::move(stages));
    if (d.divisibility.empty())
        return;
    Table div{"divisibility", {{"L", kInt}, {"n", kInt}, {"fraction", kRat}}, {}};
    Table flags{"flags", {{"L", kInt}, {"flagged", kBool}, {"informational", kBool}}, {}};
    for (const auto& row : d.divisibility) {
        for (std::size_t i = 0; i < row.fractions.size(); ++i)
            div.add_row({row.L, to_int(d.stages[i].n), row.fractions[i]});
        flags.add_row({row.L, row.flagged, row.informational});
    }
    r.tables.push_back(std::move(div));
    r.tables.push_back(std::move(flags));
}

FamilyDiagnostics family_diagnostics(const RunConfig& cfg, const TowerModel& tower, std::size_t l_max,
                                     std::size_t first, std::size_t last)
{
    const auto polys = stage_polynomials(cfg.family);
    if (!polys)
        return diagnose_family(tower, first, last);
    return validate_polystair(tower, *polys, l_max, first, last);
}

struct Decomposition {
    std::optional<std::size_t> p;
    std::optional<Int> k;
    std::optional<Int> m;
};

Decomposition decompose(const TowerModel& tower, const Int& t)
{
    if (t < 1)
        return {};
    const std::size_t p = tower.stage_of(t);
    const Int& h = tower.height(p);
    return {p, Int(t / h), Int(t % h)};
}

}  // namespace

Report cmd_build(const RunConfig& cfg)
{
    auto tower = tower_of(cfg);
    Report r = start("build", cfg, *tower);
    Table t{"stages",
            {{"n", kInt},
             {"r", kInt},
             {"h", kInt},
             {"width", kRat},
             {"mu_C", kRat},
             {"mu_S", kRat},
             {"mean_over_h", kRat},
             {"partial_sum", kRat}},
            {}};
    Rational partial = 0;
    for (std::size_t n = 0; n <= cfg.last_stage; ++n) {
        const Rational mean_over_h = tower->mean_spacer(n) / Rational(tower->height(n));
        partial += mean_over_h;
        if (n < cfg.first_stage)
            continue;
        t.add_row({to_int(n), tower->cuts(n), tower->height(n), tower->width(n), tower->column_measure(n),
                   tower->spacer_measure(n), mean_over_h, partial});
    }
    r.tables.push_back(std::move(t));
    return r;
}

Report cmd_correlate(const RunConfig& cfg)
{
    const CorrelateConfig& c = section(cfg.correlate, "correlate");
    auto tower = tower_of(cfg);
    Report r = start("correlate", cfg, *tower);
    std::vector<Int> times = c.times;
    if (c.windows) {
        // t = k h_p + m inside [h_p, h_{p+1})
        for (std::size_t p = c.windows->first; p <= c.windows->last; ++p) {
            const Int& h = tower->height(p);
            const Int& next = tower->height(p + 1);
            for (Int k = 1; k * h < next; ++k) {
                if (c.windows->max_k && k > static_cast<unsigned long>(*c.windows->max_k))
                    break;
                for (const Int& m : c.windows->residuals)
                    if (m >= 0 && m < h && k * h + m < next)
                        times.push_back(k * h + m);
            }
        }
    }
    Table t{"correlation",
            {{"pair", kText},
             {"t", kInt},
             {"p", kInt},
             {"k", kInt},
             {"m", kInt},
             {"raw", kRat},
             {"normalized", kRat},
             {"status", kText}},
            {}};
    for (const auto& [an, bn] : c.pairs) {
        const LevelSet a = make_set(*tower, cfg.set(an));
        const LevelSet b = make_set(*tower, cfg.set(bn));
        for (const Int& time : times) {
            const Decomposition d = decompose(*tower, time);
            std::vector<Cell> row{an + ":" + bn, time, d.p ? Cell(to_int(*d.p)) : Cell(), d.k ? Cell(*d.k) : Cell(),
                                  d.m ? Cell(*d.m) : Cell()};
            try {
                const CorrelationRow cr = correlation(*tower, a, b, time, cfg.ref_column, cfg.budget);
                row.insert(row.end(), {cr.raw, cr.normalized, std::string("ok")});
            } catch (const ResourceError&) {
                row.insert(row.end(), {Cell(), Cell(), std::string("budget_exceeded")});
            }
            t.add_row(std::move(row));
        }
    }
    r.tables.push_back(std::move(t));
    return r;
}

Report cmd_ergavg(const RunConfig& cfg)
{
    const ErgavgConfig& e = section(cfg.ergavg, "ergavg");
    auto tower = tower_of(cfg);
    Report r = start("ergavg", cfg, *tower);
    const LevelSet b = make_set(*tower, cfg.set(e.set));
    const Rational nu = nu_of(*tower, b, cfg.ref_column);
    r.meta.emplace_back("set", e.set);
    r.meta.emplace_back("nu_B", to_text(nu));
    if (!e.exponents.empty()) {
        Table t{"exponents", with_average({{"set", kText}}), {}};
        t.add_row(join({e.set}, average_cells(ergodic_average(*tower, e.exponents, b, cfg.ref_column, cfg.budget), nu)));
        r.tables.push_back(std::move(t));
    }
    if (e.dynseq_stages) {
        Table t{"dynseq", with_average({{"n", kInt}, {"k", kInt}}), {}};
        for (std::size_t n = e.dynseq_stages->first; n <= e.dynseq_stages->second; ++n)
            t.add_row(join({to_int(n), to_int(e.k)},
                           average_cells(dynseq_ergodic_average(*tower, n, e.k, b, cfg.ref_column, cfg.budget), nu)));
        r.tables.push_back(std::move(t));
    }
    return r;
}

Report cmd_slice(const RunConfig& cfg)
{
    const SliceConfig& s = section(cfg.slice, "slice");
    auto tower = tower_of(cfg);
    Report r = start("slice", cfg, *tower);
    const LevelSet b = make_set(*tower, cfg.set(s.set));
    const Rational eps = s.epsilon ? *s.epsilon : epsilon_schedule(*tower, s.stage);
    const Slicing sl = build_slicing(*tower, s.stage, s.k, s.m, eps, s.rule);
    r.meta.emplace_back("rule", to_string(sl.rule));
    r.meta.emplace_back("epsilon", to_text(eps));
    r.meta.emplace_back("Q", std::to_string(sl.Q));

    Table slices{"slices",
                 {{"q", kInt},
                  {"ell", kInt},
                  {"size", kInt},
                  {"alpha", kInt},
                  {"beta", kInt},
                  {"beta_prime", kInt},
                  {"lower", kInt},
                  {"upper", kInt}},
                 {}};
    for (std::size_t q = 0; q < sl.Q; ++q)
        slices.add_row({to_int(q), to_int(sl.ell[q]), to_int(sl.gamma[q].size()), to_int(sl.alpha[q]), sl.beta[q],
                        sl.beta_prime[q], sl.lower[q], sl.upper[q] ? Cell(*sl.upper[q]) : Cell()});
    r.tables.push_back(std::move(slices));

    Table checks{"checks", {{"name", kText}, {"passed", kBool}, {"informational", kBool}, {"detail", kText}}, {}};
    for (const auto& c : validate_slicing(sl, *tower).checks)
        checks.add_row({c.name, c.passed, c.informational, c.detail});
    r.tables.push_back(std::move(checks));

    const SliceNormalizer norm = s.normalizer == "term_count" ? SliceNormalizer::term_count : SliceNormalizer::cut_count;
    const Rational nu = nu_of(*tower, b, cfg.ref_column);
    Table avg{"average", with_average({{"set", kText}, {"normalizer", kText}}), {}};
    avg.add_row(join({s.set, to_string(norm)},
                     average_cells(slice_ergodic_average(*tower, sl, b, cfg.ref_column, norm, cfg.budget), nu)));
    r.tables.push_back(std::move(avg));
    return r;
}

Report cmd_uniform(const RunConfig& cfg)
{
    const UniformConfig& u = section(cfg.uniform, "uniform");
    auto tower = tower_of(cfg);
    Report r = start("uniform", cfg, *tower);
    const LevelSet b = make_set(*tower, cfg.set(u.set));
    Table t{"uniform",
            {{"set", kText}, {"a", kInt}, {"p", kInt}, {"value", kRat}, {"tail_bound", kRat}, {"divergent", kBool}},
            {}};
    for (const Int& a : u.a) {
        const UniformSum s = uniform_mixing_sum(*tower, a, b, cfg.ref_column, cfg.budget);
        t.add_row({u.set, a, to_int(s.p), s.result.value, s.result.tail_bound, s.result.divergent});
    }
    r.tables.push_back(std::move(t));
    return r;
}

Report cmd_power(const RunConfig& cfg)
{
    const PowerConfig& p = section(cfg.power, "power");
    auto tower = tower_of(cfg);
    Report r = start("power", cfg, *tower);
    const LevelSet b = make_set(*tower, cfg.set(p.set));
    const PowerProfile prof = p.strides.empty()
                                  ? power_ergodic_profile(*tower, p.n, p.k_max, b, cfg.ref_column, cfg.budget)
                                  : power_ergodic_profile(*tower, p.n, p.strides, b, cfg.ref_column, cfg.budget);
    const Rational nu = nu_of(*tower, b, cfg.ref_column);
    Table t{"profile", with_average({{"stride", kInt}}), {}};
    for (const auto& [k, a] : prof.rows)
        t.add_row(join({k}, average_cells(a, nu)));
    r.tables.push_back(std::move(t));
    Table sup{"summary", {{"n", kInt}, {"sup", kRat}, {"argsup", kInt}}, {}};
    sup.add_row({to_int(p.n), prof.sup, prof.argsup});
    r.tables.push_back(std::move(sup));
    return r;
}

Report cmd_poly(const RunConfig& cfg)
{
    const PolyConfig& p = section(cfg.poly, "poly");
    auto tower = tower_of(cfg);
    Report r = start("poly", cfg, *tower);
    const LevelSet b = make_set(*tower, cfg.set(p.set));
    const Polynomial poly(p.coefficients);
    std::string text;
    for (std::size_t i = 0; i < poly.coefficients().size(); ++i)
        text += (i ? " " : "") + to_text(poly.coefficients()[i]);
    r.meta.emplace_back("coefficients_ascending", text);
    const Rational nu = nu_of(*tower, b, cfg.ref_column);
    Table t{"poly", with_average({{"set", kText}, {"n", kInt}}), {}};
    t.add_row(join({p.set, to_int(p.n)}, average_cells(polynomial_average(*tower, poly, p.n, b, cfg.ref_column, cfg.budget), nu)));
    r.tables.push_back(std::move(t));
    return r;
}

Report cmd_validate(const RunConfig& cfg)
{
    const ValidateConfig v = cfg.validate.value_or(ValidateConfig{});
    auto tower = tower_of(cfg);
    Report r = start("validate", cfg, *tower);
    const FamilyDiagnostics d = family_diagnostics(cfg, *tower, v.l_max, cfg.first_stage, cfg.last_stage);
    if (d.divisibility.empty())
        r.meta.emplace_back("divisibility", "not applicable: family has no stage polynomials");
    else
        r.meta.emplace_back("divisibility", d.passes() ? "pass" : "flagged");
    add_family_tables(r, d);
    return r;
}

Report cmd_diagnose(const RunConfig& cfg)
{
    const DiagnoseConfig& dc = section(cfg.diagnose, "diagnose");
    auto tower = tower_of(cfg);
    Report r = start("diagnose", cfg, *tower);
    const LevelSet b = make_set(*tower, cfg.set(dc.set));
    const Rational nu = nu_of(*tower, b, cfg.ref_column);
    r.meta.emplace_back("set", dc.set);
    r.meta.emplace_back("nu_B", to_text(nu));

    std::vector<Int> times = dc.times;
    if (times.empty())
        for (std::size_t p = 1; p <= cfg.ref_column; ++p)
            times.push_back(tower->height(p));

    Table uniform{"uniform", {{"a", kInt}, {"p", kInt}, {"value", kRat}, {"tail_bound", kRat}}, {}};
    Table corr{"correlation", {{"t", kInt}, {"raw", kRat}, {"normalized", kRat}}, {}};
    for (const Int& a : times) {
        if (a >= 1 && tower->stage_of(a) <= cfg.ref_column) {
            const UniformSum s = uniform_mixing_sum(*tower, a, b, cfg.ref_column, cfg.budget);
            uniform.add_row({a, to_int(s.p), s.result.value, s.result.tail_bound});
        }
        const CorrelationRow c = correlation(*tower, b, b, a, cfg.ref_column, cfg.budget);
        corr.add_row({a, c.raw, c.normalized});
    }

    Table ergodic{"ergodic", with_average({{"n", kInt}, {"k", kInt}}), {}};
    for (std::size_t n = dc.dynseq_stages.first; n <= dc.dynseq_stages.second; ++n)
        ergodic.add_row(join({to_int(n), to_int(dc.k)},
                             average_cells(dynseq_ergodic_average(*tower, n, dc.k, b, cfg.ref_column, cfg.budget), nu)));

    r.tables.push_back(std::move(uniform));
    r.tables.push_back(std::move(ergodic));
    r.tables.push_back(std::move(corr));
    Report fam;
    add_family_tables(fam, family_diagnostics(cfg, *tower, 6, cfg.first_stage, cfg.last_stage));
    for (auto& t : fam.tables) {
        t.name = "family_" + t.name;
        r.tables.push_back(std::move(t));
    }
    return r;
}

Report run_command(const std::string& name, const RunConfig& cfg)
{
    if (name == "build")
        return cmd_build(cfg);
    if (name == "correlate")
        return cmd_correlate(cfg);
    if (name == "ergavg")
        return cmd_ergavg(cfg);
    if (name == "slice")
        return cmd_slice(cfg);
    if (name == "uniform")
        return cmd_uniform(cfg);
    if (name == "power")
        return cmd_power(cfg);
    if (name == "poly")
        return cmd_poly(cfg);
    if (name == "validate")
        return cmd_validate(cfg);
    if (name == "diagnose")
        return cmd_diagnose(cfg);
    throw DomainError("unknown command '" + name + "'");
}

}  // namespace rankone::cli
