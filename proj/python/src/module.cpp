#include "rankone/cli/commands.hpp"
#include "rankone/dynseq.hpp"
#include "rankone/ergodic.hpp"
#include "rankone/families.hpp"
#include "rankone/tower.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

namespace py = pybind11;
using namespace rankone;

namespace {

py::object fraction_type() { return py::module_::import("fractions").attr("Fraction"); }

py::object to_py(const Int& v) { return py::int_(py::str(v.get_str())); }

py::object to_py(const Rational& q)
{
    return fraction_type()(py::int_(py::str(q.get_num().get_str())), py::int_(py::str(q.get_den().get_str())));
}

Int to_int(const py::handle& v) { return Int(py::str(v).cast<std::string>()); }

/// Accepts int, Fraction or "p/q" text.
Rational to_rational(const py::handle& v)
{
    if (py::isinstance<py::str>(v))
        return parse_rational(v.cast<std::string>());
    if (py::hasattr(v, "numerator") && py::hasattr(v, "denominator"))
        return ratio(to_int(v.attr("numerator")), to_int(v.attr("denominator")));
    return Rational(to_int(v));
}

CutRule cuts_of(const py::handle& v)
{
    if (py::isinstance<py::int_>(v))
        return CutRule::constant(to_int(v));
    const auto pair = v.cast<std::pair<py::object, py::object>>();
    return CutRule::affine(to_int(pair.first), to_int(pair.second));
}

std::vector<Int> ints_of(const py::iterable& xs)
{
    std::vector<Int> out;
    for (auto x : xs)
        out.push_back(to_int(x));
    return out;
}

/// Keeps the tower alive as long as any set or slicing made from it.
struct Tower {
    std::shared_ptr<TowerModel> model;
    explicit Tower(SpacerRule rule) : model(std::make_shared<TowerModel>(std::move(rule))) {}
};

struct Set {
    std::shared_ptr<TowerModel> model;
    LevelSet set;
};

py::dict average_dict(const AverageResult& a)
{
    py::dict d;
    d["value"] = to_py(a.value);
    d["tail_bound"] = to_py(a.tail_bound);
    d["divergent"] = a.divergent;
    d["ref_column"] = a.ref_column;
    d["tail_column"] = a.tail_column;
    d["terms"] = a.terms;
    return d;
}

void check_same(const Tower& t, const Set& s)
{
    if (t.model != s.model)
        throw DomainError("set belongs to a different tower");
}

}  // namespace

PYBIND11_MODULE(_rankone, m)
{
    m.doc() = "Exact rank-one cutting-and-stacking engine";

    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ConstructionError>(m, "ConstructionError", PyExc_ValueError);
    py::register_exception<ResourceError>(m, "BudgetError", PyExc_RuntimeError);
    py::register_exception<cli::ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<Tower>(m, "Tower")
        .def_static(
            "staircase", [](const py::object& cuts) { return Tower(make_staircase(cuts_of(cuts))); },
            py::arg("cuts") = py::make_tuple(1, 2), "s_{n,j} = j; cuts is an int or (slope, offset)")
        .def_static(
            "polynomial",
            [](const py::iterable& coefficients, const py::object& cuts) {
                std::vector<Rational> c;
                for (auto x : coefficients)
                    c.push_back(to_rational(x));
                return Tower(make_polynomial_staircase(PolynomialSpec::fixed(std::move(c)), cuts_of(cuts)));
            },
            py::arg("coefficients"), py::arg("cuts") = py::make_tuple(1, 2), "s_{n,j} = p(j), ascending coefficients")
        .def_static(
            "simple_polystair",
            [](std::size_t degree, const py::object& delta) {
                return Tower(make_simple_polystair(degree, to_rational(delta)));
            },
            py::arg("degree"), py::arg("delta"))
        .def_static(
            "ornstein",
            [](std::uint64_t seed, const py::object& bound, const py::object& cuts) {
                return Tower(make_ornstein(seed, cuts_of(bound), cuts_of(cuts)));
            },
            py::arg("seed"), py::arg("bound"), py::arg("cuts") = py::make_tuple(1, 2))
        .def_static("table", [](const std::vector<std::vector<long>>& stages) {
            std::vector<std::vector<Int>> rows;
            for (const auto& s : stages) {
                rows.emplace_back();
                for (long v : s)
                    rows.back().emplace_back(v);
            }
            return Tower(table_rule(std::move(rows)));
        })
        .def("describe", [](const Tower& t) { return t.model->rule().describe(); })
        .def("height", [](const Tower& t, std::size_t n) { return to_py(t.model->height(n)); })
        .def("cuts", [](const Tower& t, std::size_t n) { return to_py(t.model->cuts(n)); })
        .def("stage", [](const Tower& t, std::size_t n) {
            py::list out;
            for (const Int& v : t.model->rule().stage(n))
                out.append(to_py(v));
            return out;
        })
        .def("column_measure", [](const Tower& t, std::size_t n) { return to_py(t.model->column_measure(n)); })
        .def("spacer_measure", [](const Tower& t, std::size_t n) { return to_py(t.model->spacer_measure(n)); })
        .def("mean_spacer", [](const Tower& t, std::size_t n) { return to_py(t.model->mean_spacer(n)); })
        .def("level", [](const Tower& t, std::size_t column, const py::object& i) {
            return Set{t.model, LevelSet::level(*t.model, column, to_int(i))};
        })
        .def("levels", [](const Tower& t, std::size_t column, const std::vector<std::pair<py::object, py::object>>& ranges) {
            std::vector<IndexRange> rs;
            for (const auto& [a, b] : ranges)
                rs.push_back({to_int(a), to_int(b)});
            return Set{t.model, LevelSet::from_ranges(*t.model, column, rs)};
        }, "union of half-open ranges [a, b) of column levels")
        .def("whole_column", [](const Tower& t, std::size_t column) {
            return Set{t.model, LevelSet::whole_column(*t.model, column)};
        })
        .def("correlation", [](const Tower& t, const Set& a, const Set& b, const py::object& time, std::size_t m) {
            check_same(t, a);
            check_same(t, b);
            const CorrelationRow r = correlation(*t.model, a.set, b.set, to_int(time), m);
            return py::make_tuple(to_py(r.raw), to_py(r.normalized));
        }, py::arg("a"), py::arg("b"), py::arg("t"), py::arg("ref_column"), "(mu(T^t A ∩ B), normalized)")
        .def("ergodic_average", [](const Tower& t, const py::iterable& exps, const Set& b, std::size_t m) {
            check_same(t, b);
            return average_dict(ergodic_average(*t.model, ints_of(exps), b.set, m));
        })
        .def("dynseq_average", [](const Tower& t, std::size_t n, std::size_t k, const Set& b, std::size_t m) {
            check_same(t, b);
            return average_dict(dynseq_ergodic_average(*t.model, n, k, b.set, m));
        })
        .def("uniform_mixing_sum", [](const Tower& t, const py::object& a, const Set& b, std::size_t m) {
            check_same(t, b);
            const UniformSum s = uniform_mixing_sum(*t.model, to_int(a), b.set, m);
            py::dict d = average_dict(s.result);
            d["p"] = s.p;
            return d;
        })
        .def("slicing", [](const Tower& t, std::size_t p, std::size_t k, const py::object& mm, const py::object& eps,
                           const std::string& rule) {
            const BreakRule br = rule == "same_window" ? BreakRule::same_window : BreakRule::shifted_window;
            if (rule != "same_window" && rule != "shifted_window")
                throw DomainError("rule is shifted_window or same_window");
            const Slicing s = build_slicing(*t.model, p, k, to_int(mm), to_rational(eps), br);
            py::dict d;
            d["Q"] = s.Q;
            d["alpha"] = s.alpha;
            py::list gamma;
            for (const auto& g : s.gamma)
                gamma.append(py::cast(g));
            d["gamma"] = gamma;
            py::dict checks;
            for (const auto& c : validate_slicing(s, *t.model).checks)
                checks[py::str(c.name)] = py::make_tuple(c.passed, c.informational, c.detail);
            d["checks"] = checks;
            return d;
        }, py::arg("p"), py::arg("k"), py::arg("m"), py::arg("epsilon"), py::arg("rule") = "shifted_window");

    py::class_<Set>(m, "LevelSet")
        .def_property_readonly("column", [](const Set& s) { return s.set.column(); })
        .def("count", [](const Set& s) { return to_py(s.set.count()); })
        .def("measure", [](const Set& s) { return to_py(s.set.measure(*s.model)); })
        .def("__contains__", [](const Set& s, const py::object& i) { return s.set.contains(to_int(i)); });

    m.def(
        "partial_sum_polynomial",
        [](const py::iterable& coefficients, std::size_t k) {
            std::vector<Rational> c;
            for (auto x : coefficients)
                c.push_back(to_rational(x));
            const Polynomial sum = partial_sum_polynomial(Polynomial(std::move(c)), k);
            py::list out;
            for (const Rational& q : sum.coefficients())
                out.append(to_py(q));
            return out;
        },
        py::arg("coefficients"), py::arg("k"), "ascending coefficients of p(j) + ... + p(j+k-1)");

    m.def(
        "run",
        [](const std::string& command, const std::string& config_yaml, const std::string& format) {
            const cli::RunConfig cfg = cli::parse_config(config_yaml);
            const cli::Report r = cli::run_command(command, cfg);
            if (format == "json")
                return py::dict(py::arg("json") = cli::to_json(r));
            py::dict out;
            for (const auto& t : r.tables)
                out[py::str(t.name)] = cli::to_csv(t);
            return out;
        },
        py::arg("command"), py::arg("config"), py::arg("format") = "csv",
        "runs a CLI command on YAML config text; returns {table: csv} or {'json': text}");
}
