#include "rankone/cli/config.hpp"

#include "rankone/spacer_rule.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace rankone::cli {

ConfigError::ConfigError(const std::string& field, int line, const std::string& message)
    : Error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
            (field.empty() ? std::string() : "field '" + field + "': ") + message),
      field_(field), line_(line)
{
}

const SetConfig& RunConfig::set(const std::string& name) const
{
    for (const auto& s : sets)
        if (s.name == name)
            return s;
    throw ConfigError("sets." + name, 0, "no set named '" + name + "'");
}

namespace {

class Field {
public:
    Field(YAML::Node node, std::string path, int fallback_line)
        : node_(std::move(node)), path_(std::move(path)), line_(fallback_line)
    {
        if (node_.IsDefined() && node_.Mark().line >= 0)
            line_ = node_.Mark().line + 1;
    }

    bool present() const { return node_.IsDefined() && !node_.IsNull(); }
    const std::string& path() const { return path_; }
    int line() const { return line_; }

    [[noreturn]] void fail(const std::string& message) const { throw ConfigError(path_, line_, message); }

    Field child(const std::string& key) const
    {
        if (present() && !node_.IsMap())
            fail("expected a mapping");
        return Field(present() ? node_[key] : YAML::Node(YAML::NodeType::Undefined), join(key), line_);
    }
    Field required(const std::string& key) const
    {
        Field f = child(key);
        if (!f.present())
            throw ConfigError(join(key), line_, "missing required field");
        return f;
    }
    std::vector<Field> items() const
    {
        if (!node_.IsSequence())
            fail("expected a list");
        std::vector<Field> out;
        for (std::size_t i = 0; i < node_.size(); ++i)
            out.emplace_back(node_[i], path_ + "[" + std::to_string(i) + "]", line_);
        return out;
    }
    std::vector<std::pair<std::string, Field>> entries() const
    {
        if (!node_.IsMap())
            fail("expected a mapping");
        std::vector<std::pair<std::string, Field>> out;
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            const std::string key = it->first.as<std::string>();
            out.emplace_back(key, Field(it->second, join(key), line_));
        }
        return out;
    }
    void allow(std::initializer_list<const char*> keys) const
    {
        if (!present())
            return;
        if (!node_.IsMap())
            fail("expected a mapping");
        const std::set<std::string> ok(keys.begin(), keys.end());
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            const std::string key = it->first.as<std::string>();
            if (!ok.count(key))
                throw ConfigError(join(key), it->first.Mark().line + 1, "unknown field");
        }
    }

    bool is_scalar() const { return node_.IsScalar(); }
    bool is_map() const { return node_.IsMap(); }
    bool is_list() const { return node_.IsSequence(); }

    std::string text() const
    {
        if (!node_.IsScalar())
            fail("expected a scalar");
        return node_.Scalar();
    }
    Int integer() const
    {
        try {
            return parse_int(text());
        } catch (const DomainError&) {
            fail("expected an integer, got '" + text() + "'");
        }
    }
    Rational rational() const
    {
        try {
            return parse_rational(text());
        } catch (const DomainError&) {
            fail("expected an integer or p/q, got '" + text() + "'");
        }
    }
    std::size_t count() const
    {
        const Int v = integer();
        if (v < 0 || !v.fits_ulong_p())
            fail("expected a non-negative integer");
        return v.get_ui();
    }
    bool boolean() const
    {
        const std::string t = text();
        if (t == "true" || t == "yes")
            return true;
        if (t == "false" || t == "no")
            return false;
        fail("expected true or false");
    }
    std::vector<Int> integers() const
    {
        if (is_scalar())
            return {integer()};
        std::vector<Int> out;
        for (const auto& f : items())
            out.push_back(f.integer());
        return out;
    }
    std::vector<Rational> rationals() const
    {
        std::vector<Rational> out;
        for (const auto& f : items())
            out.push_back(f.rational());
        return out;
    }

private:
    std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    YAML::Node node_;
    std::string path_;
    int line_;
};

CutRule read_cuts(const Field& f)
{
    if (f.is_scalar())
        return CutRule::constant(f.integer());
    f.allow({"slope", "offset", "table"});
    CutRule out = CutRule::affine(1, 2);
    if (f.child("slope").present())
        out.slope = f.child("slope").integer();
    if (f.child("offset").present())
        out.offset = f.child("offset").integer();
    if (f.child("table").present())
        out.table = f.child("table").integers();
    return out;
}

FamilyConfig read_family(const Field& f)
{
    f.allow({"kind", "cuts", "seed", "coefficients", "coefficient_slope", "degree", "delta", "bound", "value",
             "stages", "first_stage", "last_stage"});
    FamilyConfig out;
    out.kind = f.required("kind").text();
    static const std::set<std::string> kinds{"staircase", "polynomial", "simple_polystair", "ornstein", "constant",
                                             "table"};
    if (!kinds.count(out.kind))
        f.child("kind").fail("unknown family kind '" + out.kind +
                             "' (staircase, polynomial, simple_polystair, ornstein, constant, table)");
    if (f.child("cuts").present())
        out.cuts = read_cuts(f.child("cuts"));
    if (f.child("seed").present()) {
        const Int s = f.child("seed").integer();
        if (s < 0 || !s.fits_ulong_p())
            f.child("seed").fail("seed must be a non-negative 64-bit integer");
        out.seed = s.get_ui();
    }
    if (out.kind == "polynomial") {
        out.polynomial.base = f.required("coefficients").rationals();
        if (out.polynomial.base.empty())
            f.child("coefficients").fail("needs at least one coefficient");
        out.polynomial.degree = f.child("degree").present() ? f.child("degree").count() : out.polynomial.base.size() - 1;
        out.polynomial.slope = f.child("coefficient_slope").present() ? f.child("coefficient_slope").rationals()
                                                                     : std::vector<Rational>();
        out.polynomial.slope.resize(out.polynomial.base.size());
        if (f.child("first_stage").present())
            out.polynomial.first_stage = f.child("first_stage").count();
        if (f.child("last_stage").present())
            out.polynomial.last_stage = f.child("last_stage").count();
    }
    if (out.kind == "simple_polystair") {
        out.degree = f.required("degree").count();
        out.delta = f.required("delta").rational();
    }
    if (out.kind == "ornstein") {
        out.bound = read_cuts(f.required("bound"));
        if (!out.seed)
            out.seed = 0;
    }
    if (out.kind == "constant")
        out.value = f.required("value").integer();
    if (out.kind == "table")
        for (const auto& row : f.required("stages").items())
            out.stages.push_back(row.integers());
    return out;
}

SetConfig read_set(const std::string& name, const Field& f)
{
    f.allow({"column", "levels", "ranges", "whole", "bottom_half"});
    SetConfig out;
    out.name = name;
    out.line = f.line();
    out.column = f.required("column").count();
    if (out.column >= TowerModel::kMaxStages)
        f.child("column").fail("column beyond the materializable range");
    if (f.child("levels").present())
        for (const Int& x : f.child("levels").integers())
            out.ranges.push_back({x, x + 1});
    if (f.child("ranges").present()) {
        for (const auto& r : f.child("ranges").items()) {
            const auto bounds = r.integers();
            if (bounds.size() != 2 || bounds[0] > bounds[1])
                r.fail("a range is [begin, end) with begin <= end");
            out.ranges.push_back({bounds[0], bounds[1]});
        }
    }
    if (f.child("whole").present())
        out.whole = f.child("whole").boolean();
    if (f.child("bottom_half").present())
        out.bottom_half = f.child("bottom_half").boolean();
    if (out.whole + out.bottom_half + !out.ranges.empty() > 1)
        f.fail("use exactly one of levels/ranges, whole, bottom_half");
    return out;
}

std::string read_set_name(const Field& f, const RunConfig& cfg)
{
    const std::string name = f.text();
    if (std::none_of(cfg.sets.begin(), cfg.sets.end(), [&](const SetConfig& s) { return s.name == name; }))
        f.fail("no set named '" + name + "'");
    return name;
}

std::pair<std::size_t, std::size_t> read_stage_range(const Field& f)
{
    f.allow({"first", "last"});
    std::pair<std::size_t, std::size_t> out{f.required("first").count(), f.required("last").count()};
    if (out.first > out.second)
        f.fail("first must not exceed last");
    if (out.second >= TowerModel::kMaxStages)
        f.child("last").fail("stage beyond the materializable range");
    return out;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("", e.mark.line + 1, source + ": " + e.msg);
    }
    RunConfig cfg;
    cfg.source = source;
    if (!root.IsDefined() || root.IsNull())
        root = YAML::Node(YAML::NodeType::Map);
    Field top(root, "", 1);
    if (!root.IsMap())
        top.fail("top level must be a mapping");
    top.allow({"family", "reference_column", "stages", "sets", "budget", "output", "correlate", "ergavg", "slice",
               "uniform", "power", "poly", "validate", "diagnose"});

    cfg.family = read_family(top.required("family"));
    if (top.child("reference_column").present())
        cfg.ref_column = top.child("reference_column").count();
    if (top.child("stages").present())
        std::tie(cfg.first_stage, cfg.last_stage) = read_stage_range(top.child("stages"));
    if (top.child("sets").present())
        for (const auto& [name, f] : top.child("sets").entries())
            cfg.sets.push_back(read_set(name, f));
    cfg.budget = averaging_budget();
    if (const Field b = top.child("budget"); b.present()) {
        b.allow({"pieces", "depth"});
        if (b.child("pieces").present())
            cfg.budget.max_pieces = b.child("pieces").count();
        if (b.child("depth").present())
            cfg.budget.max_depth = b.child("depth").count();
        if (cfg.budget.max_pieces == 0)
            b.child("pieces").fail("budget must be positive");
        if (cfg.budget.max_depth == 0)
            b.child("depth").fail("budget must be positive");
    }
    if (const Field o = top.child("output"); o.present()) {
        o.allow({"format", "dir"});
        if (o.child("format").present()) {
            cfg.format = o.child("format").text();
            if (cfg.format != "csv" && cfg.format != "json")
                o.child("format").fail("format is csv or json");
        }
        if (o.child("dir").present())
            cfg.out_dir = o.child("dir").text();
    }

    if (const Field c = top.child("correlate"); c.present()) {
        c.allow({"pairs", "t", "windows"});
        CorrelateConfig out;
        for (const auto& pair : c.required("pairs").items()) {
            const auto names = pair.items();
            if (names.size() != 2)
                pair.fail("a pair names two sets");
            out.pairs.emplace_back(read_set_name(names[0], cfg), read_set_name(names[1], cfg));
        }
        if (c.child("t").present())
            out.times = c.child("t").integers();
        if (const Field w = c.child("windows"); w.present()) {
            w.allow({"first", "last", "residuals", "max_k"});
            Windows win;
            win.first = w.required("first").count();
            win.last = w.required("last").count();
            if (win.first > win.last)
                w.fail("first must not exceed last");
            if (w.child("residuals").present())
                win.residuals = w.child("residuals").integers();
            if (w.child("max_k").present())
                win.max_k = w.child("max_k").count();
            out.windows = win;
        }
        if (out.times.empty() && !out.windows)
            c.fail("give t, windows, or both");
        cfg.correlate = out;
    }
    if (const Field e = top.child("ergavg"); e.present()) {
        e.allow({"set", "exponents", "dynseq", "k"});
        ErgavgConfig out;
        out.set = read_set_name(e.required("set"), cfg);
        if (e.child("exponents").present())
            out.exponents = e.child("exponents").integers();
        if (e.child("dynseq").present())
            out.dynseq_stages = read_stage_range(e.child("dynseq"));
        if (e.child("k").present())
            out.k = e.child("k").count();
        if (out.exponents.empty() && !out.dynseq_stages)
            e.fail("give exponents or dynseq");
        cfg.ergavg = out;
    }
    if (const Field s = top.child("slice"); s.present()) {
        s.allow({"set", "stage", "k", "m", "epsilon", "rule", "normalizer"});
        SliceConfig out;
        out.set = read_set_name(s.required("set"), cfg);
        out.stage = s.required("stage").count();
        if (s.child("k").present())
            out.k = s.child("k").count();
        if (s.child("m").present())
            out.m = s.child("m").integer();
        if (s.child("epsilon").present() && s.child("epsilon").text() != "schedule")
            out.epsilon = s.child("epsilon").rational();
        if (s.child("rule").present()) {
            const std::string r = s.child("rule").text();
            if (r == "shifted_window")
                out.rule = BreakRule::shifted_window;
            else if (r == "same_window")
                out.rule = BreakRule::same_window;
            else
                s.child("rule").fail("rule is shifted_window or same_window");
        }
        if (s.child("normalizer").present()) {
            out.normalizer = s.child("normalizer").text();
            if (out.normalizer != "cut_count" && out.normalizer != "term_count")
                s.child("normalizer").fail("normalizer is cut_count or term_count");
        }
        cfg.slice = out;
    }
    if (const Field u = top.child("uniform"); u.present()) {
        u.allow({"set", "a"});
        cfg.uniform = UniformConfig{read_set_name(u.required("set"), cfg), u.required("a").integers()};
    }
    if (const Field p = top.child("power"); p.present()) {
        p.allow({"set", "n", "k_max", "strides"});
        PowerConfig out;
        out.set = read_set_name(p.required("set"), cfg);
        if (p.child("n").present())
            out.n = p.child("n").count();
        if (p.child("k_max").present())
            out.k_max = p.child("k_max").count();
        if (p.child("strides").present())
            out.strides = p.child("strides").integers();
        cfg.power = out;
    }
    if (const Field p = top.child("poly"); p.present()) {
        p.allow({"set", "coefficients", "n"});
        PolyConfig out;
        out.set = read_set_name(p.required("set"), cfg);
        out.coefficients = p.required("coefficients").rationals();
        if (p.child("n").present())
            out.n = p.child("n").count();
        cfg.poly = out;
    }
    if (const Field v = top.child("validate"); v.present()) {
        v.allow({"l_max"});
        ValidateConfig out;
        if (v.child("l_max").present())
            out.l_max = v.child("l_max").count();
        if (out.l_max < 2)
            v.child("l_max").fail("l_max must be at least 2");
        cfg.validate = out;
    }
    if (const Field d = top.child("diagnose"); d.present()) {
        d.allow({"set", "k", "dynseq", "t"});
        DiagnoseConfig out;
        out.set = read_set_name(d.required("set"), cfg);
        if (d.child("k").present())
            out.k = d.child("k").count();
        if (d.child("dynseq").present())
            out.dynseq_stages = read_stage_range(d.child("dynseq"));
        if (d.child("t").present())
            out.times = d.child("t").integers();
        cfg.diagnose = out;
    }
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("", 0, "cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

SpacerRule make_rule(const FamilyConfig& f)
{
    if (f.kind == "staircase")
        return make_staircase(f.cuts);
    if (f.kind == "polynomial")
        return make_polynomial_staircase(f.polynomial, f.cuts);
    if (f.kind == "simple_polystair")
        return make_simple_polystair(f.degree, f.delta);
    if (f.kind == "ornstein")
        return make_ornstein(f.seed.value_or(0), f.bound, f.cuts);
    if (f.kind == "constant") {
        require_nondegenerate_cuts(f.cuts);
        return constant_rule(f.value, f.cuts);
    }
    return table_rule(f.stages);
}

LevelSet make_set(const TowerModel& tower, const SetConfig& set)
{
    if (set.whole)
        return LevelSet::whole_column(tower, set.column);
    if (set.bottom_half)
        return LevelSet::from_ranges(tower, set.column, {{Int(0), Int(tower.height(set.column) / 2)}});
    return LevelSet::from_ranges(tower, set.column, set.ranges);
}

}  // namespace rankone::cli
