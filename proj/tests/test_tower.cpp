#include "checks.hpp"
#include "doctest.h"
#include "rankone/tower.hpp"

#include <map>
#include <thread>

using namespace rankone;

namespace {

SpacerRule r23_rule() { return staircase_rule(CutRule::affine(1, 2)); }

LevelSet levels(const TowerModel& t, std::size_t column, std::initializer_list<long> xs)
{
    std::vector<IndexRange> ranges;
    for (long x : xs)
        ranges.push_back(IndexRange{Int(x), Int(x + 1)});
    return LevelSet::from_ranges(t, column, ranges);
}

}  // namespace

TEST_CASE("R23 heights, widths and measures")
{
    TowerModel t(r23_rule());
    CHECK(t.height(0) == 1);
    CHECK(t.height(1) == 3);
    CHECK(t.height(2) == 12);
    CHECK(t.height(3) == 54);
    CHECK(t.width(0) == 1);
    CHECK(t.width(1) == Rational(1, 2));
    CHECK(t.width(2) == Rational(1, 6));
    CHECK(t.width(3) == Rational(1, 24));
    CHECK(t.column_measure(1) == Rational(3, 2));
    CHECK(t.column_measure(2) == 2);
    CHECK(t.column_measure(3) == Rational(9, 4));
    for (std::size_t n = 0; n < 30; ++n) {
        CHECK(t.height(n + 1) == t.cuts(n) * t.height(n) + t.stage_sum(n));
        CHECK(t.column_measure(n + 1) == t.column_measure(n) * (1 + t.mean_spacer(n) / Rational(t.height(n))));
        CHECK(t.spacer_measure(n) == t.mean_spacer(n) / Rational(t.height(n)) * t.column_measure(n));
        CHECK(t.width(n + 1) == t.width(n) / Rational(t.cuts(n)));
    }
}

TEST_CASE("zero spacers give dyadic heights")
{
    TowerModel t(constant_rule(0, CutRule::constant(2)));
    for (std::size_t n = 0; n < 20; ++n) {
        CHECK(t.height(n) == pow_int(Int(2), n));
        CHECK(t.column_measure(n) == 1);
        CHECK(t.sublevel_offset(n, Int(1)) == t.height(n));
    }
    auto s = finite_measure_partial_sum(t, 10);
    CHECK(s.sum == 0);
    CHECK(s.column_measure == 1);
}

TEST_CASE("finite measure partial sum")
{
    TowerModel t(r23_rule());
    auto s = finite_measure_partial_sum(t, 3);
    CHECK(s.sum == Rational(23, 24));
    CHECK(s.column_measure == Rational(9, 4));
    CHECK_THROWS_AS(finite_measure_partial_sum(t, 0), DomainError);

    TowerModel poly(simple_polystair_rule(1, Rational(1)));
    Rational previous_increment = -1;
    for (std::size_t n = 1; n <= 20; ++n) {
        auto a = finite_measure_partial_sum(poly, n);
        auto b = finite_measure_partial_sum(poly, n + 1);
        CHECK(b.sum >= a.sum);
        CHECK(b.column_measure == poly.column_measure(n + 1));
        previous_increment = b.sum - a.sum;
    }
    CHECK(previous_increment < Rational(1, 10));
}

TEST_CASE("sublevel offsets")
{
    TowerModel t(r23_rule());
    CHECK(t.offsets(1) == std::vector<Int>{0, 3, 7});
    CHECK(t.offsets(2) == std::vector<Int>{0, 12, 25, 39});
    CHECK(t.sublevel_offset(2, Int(3)) == 39);
    CHECK_THROWS_AS(t.sublevel_offset(1, Int(3)), DomainError);
    CHECK(t.stage_of(Int(1)) == 0);
    CHECK(t.stage_of(Int(3)) == 1);
    CHECK(t.stage_of(Int(11)) == 1);
    CHECK(t.stage_of(Int(12)) == 2);
    CHECK_THROWS_AS(t.stage_of(Int(0)), DomainError);
}

TEST_CASE("level sets normalize and validate")
{
    TowerModel t(r23_rule());
    auto a = LevelSet::from_ranges(t, 2, {{Int(5), Int(7)}, {Int(0), Int(2)}, {Int(6), Int(9)}, {Int(2), Int(3)}});
    REQUIRE(a.ranges().size() == 2);
    CHECK(a.ranges()[0] == IndexRange{Int(0), Int(3)});
    CHECK(a.ranges()[1] == IndexRange{Int(5), Int(9)});
    CHECK(a.count() == 7);
    CHECK(a.contains(Int(8)));
    CHECK_FALSE(a.contains(Int(4)));
    CHECK(a.measure(t) == Rational(7, 6));
    CHECK_THROWS_AS(LevelSet::from_ranges(t, 1, {{Int(2), Int(4)}}), DomainError);
    CHECK(LevelSet::from_ranges(t, 1, {{Int(2), Int(2)}}).empty());
}

TEST_CASE("refine")
{
    TowerModel t(r23_rule());
    CHECK(refine(t, LevelSet::level(t, 1, Int(0)), 2) == levels(t, 2, {0, 3, 7}));
    CHECK(refine(t, LevelSet::level(t, 2, Int(0)), 3) == levels(t, 3, {0, 12, 25, 39}));
    auto a = LevelSet::level(t, 2, Int(4));
    CHECK(refine(t, a, 2) == a);
    CHECK_THROWS_AS(refine(t, a, 1), DomainError);
    auto whole = LevelSet::whole_column(t, 1);
    CHECK(refine(t, whole, 4).measure(t) == whole.measure(t));
}

TEST_CASE("apply_power worked examples")
{
    TowerModel t(r23_rule());
    auto i10 = LevelSet::level(t, 1, Int(0));
    auto one = apply_power(t, i10, Int(1));
    CHECK(one.exact());
    CHECK(one.resolved.flatten(t) == LevelSet::level(t, 1, Int(1)));

    auto three = apply_power(t, i10, Int(3));
    CHECK(three.exact());
    CHECK(three.resolved.flatten(t) == levels(t, 2, {3, 6, 10}));

    auto i12 = LevelSet::level(t, 1, Int(2));
    auto img = apply_power(t, i12, Int(3));
    CHECK(img.exact());
    auto want = unite(t, levels(t, 2, {5, 8}), levels(t, 3, {12, 24, 37, 51}));
    CHECK(img.resolved.flatten(t) == want);
    REQUIRE(img.resolved.parts().size() == 2);
    CHECK(img.resolved.parts()[0] == levels(t, 2, {5, 8}));
    CHECK(img.resolved.parts()[1] == levels(t, 3, {12, 24, 37, 51}));
    CHECK(img.resolved.measure(t) == Rational(1, 2));

    CHECK_THROWS_AS(apply_power(t, i10, Int(-1)), DomainError);
    CHECK(apply_power(t, i10, Int(0)).resolved.flatten(t) == i10);
}

TEST_CASE("apply_power agrees with brute-force enumeration")
{
    TowerModel t(r23_rule());
    const auto brute = oracle::r23(6);
    std::mt19937_64 rng(11);
    auto tally = checks::brute_force_correlations(t, brute, rng, 300, 3);
    INFO(tally.first_failure);
    CHECK(tally.ok());
}

TEST_CASE("budget exhaustion is reported, not hidden")
{
    TowerModel odo(constant_rule(0, CutRule::constant(2)));
    auto top = LevelSet::level(odo, 1, Int(1));
    Budget budget;
    budget.max_depth = 5;
    auto img = apply_power(odo, top, Int(1), budget);
    CHECK_FALSE(img.exact());
    CHECK(img.unresolved_mass == Rational(1, 64));
    CHECK(img.resolved.measure(odo) + img.unresolved_mass == top.measure(odo));
    budget.strict = true;
    try {
        apply_power(odo, top, Int(1), budget);
        FAIL("expected BudgetError");
    } catch (const BudgetError& e) {
        CHECK(e.partial().unresolved_mass == Rational(1, 64));
    }
    Budget tight;
    tight.max_pieces = 4;
    TowerModel t(r23_rule());
    auto small = apply_power(t, LevelSet::whole_column(t, 2), Int(30), tight);
    CHECK_FALSE(small.exact());
    CHECK(small.resolved.measure(t) + small.unresolved_mass == 2);
}

TEST_CASE("pullback is the adjoint of apply_power")
{
    TowerModel t(r23_rule());
    std::mt19937_64 rng(5);
    for (int n = 0; n < 150; ++n) {
        const std::size_t ca = static_cast<std::size_t>(checks::uniform_long(rng, 0, 3));
        const std::size_t cb = static_cast<std::size_t>(checks::uniform_long(rng, 0, 3));
        auto a = checks::random_level_set(t, ca, rng);
        auto b = checks::random_level_set(t, cb, rng);
        const Int s(checks::uniform_long(rng, 0, 60));
        const Rational forward = intersect_measure(t, apply_power(t, a, s, Budget{1u << 22, 24, true}).resolved, b);
        Budget deep;
        deep.max_depth = 24;
        const MixedSet back = pullback(t, a, b, s, deep);
        CHECK(back.measure(t) == forward);
        // the pulled-back set lies inside the domain and maps into B
        for (const auto& part : back.parts()) {
            CHECK(intersect(t, part, a) == part);
            CHECK(intersect_measure(t, apply_power(t, part, s, deep).resolved, b) == part.measure(t));
        }
    }
}

TEST_CASE("intersect and unite")
{
    TowerModel t(r23_rule());
    auto i10 = LevelSet::level(t, 1, Int(0));
    CHECK(intersect_measure(t, i10, i10) == Rational(1, 2));
    CHECK(intersect_measure(t, levels(t, 2, {3, 6, 10}), levels(t, 2, {0, 3, 7})) == Rational(1, 6));
    CHECK(intersect_measure(t, i10, LevelSet::level(t, 1, Int(1))) == 0);
    CHECK(intersect_measure(t, i10, levels(t, 2, {3, 4, 5})) == Rational(1, 6));
    CHECK(unite(t, i10, LevelSet::level(t, 1, Int(1))).count() == 2);
}

TEST_CASE("point steps")
{
    TowerModel t(r23_rule());
    auto a = point_step(t, PointCoord{1, Int(0), Rational(1, 3)});
    CHECK(a == PointCoord{1, Int(1), Rational(1, 3)});
    auto b = point_step(t, PointCoord{1, Int(2), Rational(2, 3)});
    CHECK(b == PointCoord{2, Int(10), Rational(0)});
    CHECK(locate(t, b, 1) == std::nullopt);  // spacer level of column 2

    TowerModel odo(constant_rule(0, CutRule::constant(2)));
    CHECK(odo.offsets(1) == std::vector<Int>{0, 2});
    CHECK(point_step(odo, PointCoord{1, Int(1), Rational(0)}) == PointCoord{2, Int(2), Rational(0)});
    CHECK_THROWS_AS(point_step(odo, PointCoord{1, Int(1), Rational(1, 2)}, 1), ResourceError);
    CHECK_THROWS_AS(point_step(t, PointCoord{1, Int(3), Rational(0)}), DomainError);
    CHECK_THROWS_AS(point_step(t, PointCoord{1, Int(0), Rational(1)}), DomainError);

    // advance equals repeated steps
    PointCoord x{1, Int(1), Rational(5, 7)};
    PointCoord y = x;
    for (int k = 0; k < 40; ++k)
        y = point_step(t, y);
    CHECK(point_advance(t, x, Int(40)) == y);
}

TEST_CASE("locate inverts refinement")
{
    TowerModel t(r23_rule());
    PointCoord x{1, Int(2), Rational(5, 8)};
    auto deep = locate(t, x, 3);
    REQUIRE(deep);
    CHECK(locate(t, x, 1) == Int(2));
    CHECK(locate(t, PointCoord{3, *deep, Rational(0)}, 1) == Int(2));
}

TEST_CASE("sample points")
{
    TowerModel t(r23_rule());
    auto a = sample_points(t, 2, 3, 99);
    auto b = sample_points(t, 2, 3, 99);
    CHECK(a == b);
    CHECK(sample_points(t, 2, 3, 100) != a);
    // golden triple
    std::vector<std::string> levels_seen;
    for (const auto& p : a)
        levels_seen.push_back(p.level.get_str());
    CHECK(levels_seen.size() == 3);
    CHECK_THROWS_AS(sample_points(t, 2, 0, 1), DomainError);

    const std::size_t n = 100000;
    auto pts = sample_points(t, 2, n, 7);
    std::map<long, std::size_t> hist;
    for (const auto& p : pts) {
        CHECK(p.level >= 0);
        CHECK(p.level < 12);
        CHECK(p.u >= 0);
        CHECK(p.u < 1);
        ++hist[p.level.get_si()];
    }
    double chi2 = 0;
    const double expect = static_cast<double>(n) / 12.0;
    for (long l = 0; l < 12; ++l) {
        const double d = static_cast<double>(hist[l]) - expect;
        chi2 += d * d / expect;
    }
    // 11 degrees of freedom: mean 11, sd sqrt(22); 4 sigma envelope
    CHECK(chi2 < 11 + 4 * std::sqrt(22.0));
}

TEST_CASE("lemma on levels holds exhaustively on the fixture")
{
    TowerModel t(r23_rule());
    auto tally = checks::levels_lemma(t, 2);
    INFO(tally.first_failure);
    CHECK(tally.ok());
    CHECK(tally.cases > 1000);
}

TEST_CASE("measure preservation on two families")
{
    std::mt19937_64 rng(3);
    TowerModel stair(r23_rule());
    TowerModel poly(simple_polystair_rule(1, Rational(1)));
    auto a = checks::measure_preservation(stair, rng, 60, 2);
    auto b = checks::measure_preservation(poly, rng, 60, 3);
    INFO(a.first_failure, b.first_failure);
    CHECK(a.ok());
    CHECK(b.ok());
}

TEST_CASE("Monte Carlo orbits agree with exact images")
{
    TowerModel t(r23_rule());
    std::mt19937_64 rng(17);
    auto tally = checks::oracle_equivalence(t, rng, 6, 20000, 2);
    INFO(tally.first_failure);
    CHECK(tally.failures <= 1);
}

TEST_CASE("frozen tower reads are consistent across threads")
{
    TowerModel t(r23_rule());
    t.freeze(12);
    CHECK(t.materialized() >= 13);
    std::vector<std::thread> workers;
    std::vector<Int> seen(4);
    for (int k = 0; k < 4; ++k)
        workers.emplace_back([&, k] { seen[k] = t.height(13) + t.offsets(5).back(); });
    for (auto& w : workers)
        w.join();
    for (int k = 1; k < 4; ++k)
        CHECK(seen[k] == seen[0]);
}
