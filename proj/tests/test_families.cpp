#include "checks.hpp"
#include "doctest.h"
#include "rankone/dynseq.hpp"
#include "rankone/families.hpp"

#include <random>

using namespace rankone;

namespace {

std::vector<Int> ints(std::initializer_list<long> xs)
{
    std::vector<Int> out;
    for (long x : xs)
        out.emplace_back(x);
    return out;
}

std::vector<Rational> rats(std::initializer_list<Rational> xs) { return std::vector<Rational>(xs); }

}  // namespace

TEST_CASE("staircase family")
{
    const SpacerRule rule = make_staircase(CutRule::affine(1, 2));
    CHECK(rule.stage(1) == ints({0, 1, 2}));
    CHECK(rule.stage(0) == ints({0, 1}));
    TowerModel t(rule);
    for (std::size_t n = 0; n <= 20; ++n)
        CHECK(t.mean_spacer(n) == ratio(t.cuts(n) - 1, 2));

    CHECK_THROWS_AS(make_staircase(CutRule::constant(1)), ConstructionError);
    CHECK_THROWS_AS(make_staircase(CutRule::listed(ints({2, 1}), 1, 2)), ConstructionError);
    CHECK_THROWS_AS(make_staircase(CutRule::affine(-1, 40)), ConstructionError);
    CHECK_NOTHROW(make_staircase(CutRule::constant(2)));

    // r_n^2 / h_n decreases over n <= 20
    const FamilyDiagnostics d = diagnose_family(t, 0, 20);
    REQUIRE(d.stages.size() == 21);
    for (std::size_t n = 1; n <= 20; ++n)
        CHECK(d.stages[n].r_squared_over_h < d.stages[n - 1].r_squared_over_h);
    CHECK(d.stages[1].r_squared_over_h == 3);
    CHECK(d.stages[2].r_squared_over_h == ratio(16, 12));
    CHECK(d.stages[2].r_mean_over_h == ratio(6, 12));
}

TEST_CASE("polynomial staircase family")
{
    const SpacerRule identity = make_polynomial_staircase(PolynomialSpec::fixed(rats({0, 1})), CutRule::affine(1, 2));
    const SpacerRule stair = make_staircase(CutRule::affine(1, 2));
    for (std::size_t n = 0; n <= 6; ++n)
        CHECK(identity.stage(n) == stair.stage(n));

    const SpacerRule squares = make_polynomial_staircase(PolynomialSpec::fixed(rats({0, 0, 1})),
                                                         CutRule::listed(ints({4}), 1, 2));
    CHECK(squares.stage(0) == ints({0, 1, 4, 9}));

    const SpacerRule triangular = make_polynomial_staircase(
        PolynomialSpec::fixed(rats({0, Rational(-1, 2), Rational(1, 2)})), CutRule::affine(1, 4));
    CHECK(triangular.stage(0) == ints({0, 0, 1, 3}));

    CHECK_THROWS_AS(make_polynomial_staircase(PolynomialSpec::fixed(rats({0, Rational(1, 2)})), CutRule::constant(3)),
                    ConstructionError);

    // c_{n,1} = n/2 + 1/2 is integer-valued only at odd n
    PolynomialSpec drifting;
    drifting.degree = 1;
    drifting.base = rats({0, Rational(1, 2)});
    drifting.slope = rats({0, Rational(1, 2)});
    CHECK_THROWS_AS(make_polynomial_staircase(drifting, CutRule::constant(3)), ConstructionError);
    drifting.first_stage = 1;
    drifting.last_stage = 1;
    CHECK_NOTHROW(make_polynomial_staircase(drifting, CutRule::constant(3)));

    // p(j) = j - 2 is negative at j = 0, 1
    const SpacerRule shifted = make_polynomial_staircase(PolynomialSpec::fixed(rats({-2, 1})), CutRule::constant(4));
    try {
        (void)shifted.stage(3);
        FAIL("negative spacer accepted");
    } catch (const ConstructionError& e) {
        CHECK(std::string(e.what()).find("(n, j) = (3, 0)") != std::string::npos);
    }
}

TEST_CASE("simple polynomial staircase family")
{
    const SpacerRule rule = make_simple_polystair(1, Rational(1));
    TowerModel t(rule);
    CHECK(t.cuts(0) == 2);
    CHECK(t.height(1) == 3);
    CHECK(t.cuts(1) == 2);
    CHECK(t.height(2) == 7);
    const auto notes = rule.notes();
    REQUIRE(!notes.empty());
    CHECK(notes.front().find("stage 0") != std::string::npos);

    const SpacerRule cubes = make_simple_polystair(3, Rational(1, 2));
    CHECK(cubes.spacer(0, Int(0)) == 0);
    CHECK(cubes.spacer(0, Int(1)) == 1);
    for (std::size_t n = 0; n <= 8; ++n) {
        const auto st = cubes.stage(n);
        for (std::size_t j = 0; j < st.size(); ++j)
            CHECK(st[j] == pow_int(Int(static_cast<unsigned long>(j)), 3));
    }

    CHECK_THROWS_AS(make_simple_polystair(0, Rational(1)), DomainError);
    CHECK_THROWS_AS(make_simple_polystair(1, Rational(0)), DomainError);

    // delta = 1, D = 1 is the borderline: r_n * mean / h_n stays bounded
    const FamilyDiagnostics d = diagnose_family(t, 0, 25);
    for (const auto& s : d.stages) {
        CHECK(s.r_mean_over_h <= 1);
        if (s.n >= 6)
            CHECK(s.r_mean_over_h >= ratio(1, 4));
    }
}

TEST_CASE("simple polynomial staircase growth series")
{
    for (std::size_t degree : {1, 2}) {
        for (const Rational& delta : {Rational(1, 2), Rational(1), Rational(2)}) {
            CAPTURE(degree);
            CAPTURE(to_text(delta));
            const auto rows = polystair_growth_series(degree, delta, 25);
            REQUIRE(rows.size() == 26);
            for (std::size_t n = 1; n < rows.size(); ++n) {
                CHECK(rows[n].partial_sum > rows[n - 1].partial_sum);
                // clamped stages end by n = 6 for these parameters
                if (n >= 7)
                    CHECK(rows[n].increment < rows[n - 1].increment);
            }
            for (const auto& row : rows)
                if (row.h >= 4)
                    CHECK(row.within_envelope);
        }
    }
}

TEST_CASE("ornstein family")
{
    const SpacerRule zero = make_ornstein(7, CutRule::constant(0), CutRule::affine(1, 2));
    for (std::size_t n = 0; n < 5; ++n)
        for (const Int& s : zero.stage(n))
            CHECK(s == 0);

    const SpacerRule a = make_ornstein(11, CutRule::affine(3, 1), CutRule::affine(2, 2));
    const SpacerRule b = make_ornstein(11, CutRule::affine(3, 1), CutRule::affine(2, 2));
    const SpacerRule c = make_ornstein(12, CutRule::affine(3, 1), CutRule::affine(2, 2));
    bool differs = false;
    for (std::size_t n = 0; n < 6; ++n) {
        CHECK(a.stage(n) == b.stage(n));
        differs = differs || a.stage(n) != c.stage(n);
    }
    CHECK(differs);
    CHECK(a.seed() == std::optional<std::uint64_t>(11));
    CHECK(a.describe().find("heuristic") != std::string::npos);

    // mean within 4 sigma of bound/2, r >= 10^4
    const long bound = 37;
    const SpacerRule big = make_ornstein(2024, CutRule::constant(bound), CutRule::constant(20000));
    const std::vector<Int> st = big.stage(0);
    REQUIRE(st.size() == 20000);
    Int sum = 0;
    for (const Int& s : st) {
        CHECK(s >= 0);
        CHECK(s <= bound);
        sum += s;
    }
    const Rational mean = ratio(sum, Int(20000));
    const Rational dev = mean - Rational(bound, 2);
    // var = ((B+1)^2 - 1)/12, sigma^2 of the mean = var / r
    const Rational var_mean = ratio(Int((bound + 1) * (bound + 1) - 1), Int(12L * 20000));
    CHECK(dev * dev <= 16 * var_mean);

    CHECK_THROWS_AS(make_ornstein(1, CutRule::affine(-1, 3), CutRule::constant(3)), ConstructionError);
}

TEST_CASE("divisibility counts")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<long> b;
        const long degree = checks::uniform_long(rng, 0, 4);
        for (long i = 0; i <= degree; ++i)
            b.push_back(checks::uniform_long(rng, -6, 6));
        const Polynomial q = checks::from_binomial_basis(b);
        REQUIRE(q.integer_valued());
        const long L = checks::uniform_long(rng, 1, 12);
        const long count = checks::uniform_long(rng, 0, 600);
        long want = 0;
        for (long j = 0; j < count; ++j)
            want += q.eval_int(Int(j)) % Int(L) == 0;
        CHECK(count_divisible(q, Int(L), Int(count)) == want);
    }
    CHECK_THROWS_AS(count_divisible(Polynomial(rats({0, Rational(1, 2)})), Int(2), Int(10)), DomainError);
    CHECK_THROWS_AS(count_divisible(Polynomial(rats({1})), Int(0), Int(10)), DomainError);
}

TEST_CASE("polystair hypothesis diagnostics")
{
    const FamilyDiagnostics stair = validate_polystair(PolynomialSpec::fixed(rats({0, 1})), CutRule::affine(1, 2), 8, 0, 10);
    CHECK(stair.passes());
    for (const auto& row : stair.divisibility) {
        for (const Rational& f : row.fractions)
            CHECK(f == (row.L == 1 ? 1 : 0));
    }
    REQUIRE(stair.row(Int(1)) != nullptr);
    CHECK(stair.row(Int(1))->informational);
    CHECK(stair.row(Int(1))->flagged);
    CHECK(!stair.stages[0].lead_over_n);
    CHECK(*stair.stages[4].lead_over_n == ratio(1, 4));

    const FamilyDiagnostics even = validate_polystair(PolynomialSpec::fixed(rats({0, 2})), CutRule::affine(1, 2), 4, 0, 6);
    CHECK(!even.passes());
    CHECK(even.row(Int(2))->flagged);
    CHECK(!even.row(Int(3))->flagged);
    CHECK(!even.row(Int(4))->flagged);
    for (const Rational& f : even.row(Int(2))->fractions)
        CHECK(f == 1);

    // squares: differences 2j+1 are odd, and 3 | 2j+1 for a third of j
    const FamilyDiagnostics sq = validate_polystair(PolynomialSpec::fixed(rats({0, 0, 1})), CutRule::constant(6), 3, 0, 2);
    CHECK(sq.passes());
    CHECK(sq.row(Int(2))->fractions[0] == 0);
    CHECK(sq.row(Int(3))->fractions[0] == ratio(1, 3));

    // lead coefficient growing with n
    PolynomialSpec growing;
    growing.degree = 1;
    growing.base = rats({0, 1});
    growing.slope = rats({0, 3});
    const FamilyDiagnostics g = validate_polystair(growing, CutRule::affine(1, 2), 2, 1, 5);
    CHECK(*g.stages[0].lead_over_n == 4);
    CHECK(*g.stages[4].lead_over_n == ratio(16, 5));

    CHECK_THROWS_AS(validate_polystair(PolynomialSpec::fixed(rats({0, 1})), CutRule::affine(1, 2), 1, 0, 3), DomainError);
}

TEST_CASE("partial sum polynomials")
{
    const PolynomialSpec id = PolynomialSpec::fixed(rats({0, 1}));
    const PolynomialSpec two = partial_sum_polynomial(id, 3, 2);
    CHECK(two.at(3) == Polynomial(rats({1, 2})));
    CHECK(two.lead(3) == 2);
    CHECK(partial_sum_polynomial(id, 0, 1).at(0) == id.at(0));
    CHECK_THROWS_AS(partial_sum_polynomial(id, 0, 0), DomainError);

    const PolynomialSpec sq = PolynomialSpec::fixed(rats({0, 0, 1}));
    const Polynomial three = partial_sum_polynomial(sq.at(0), 3);
    CHECK(three.lead() == 3);
    const DynStage stage = materialize_stage(make_polynomial_staircase(sq, CutRule::constant(10)), 0);
    const PartialSumStage direct = partial_sums(stage, 3);
    for (std::size_t j = 0; j < direct.values.size(); ++j)
        CHECK(three.eval_int(Int(static_cast<unsigned long>(j))) == direct.values[j]);

    // exhaustive over D <= 4, k <= 8, r <= 64 against direct summation
    std::mt19937_64 rng(9);
    std::size_t compared = 0;
    for (std::size_t degree = 0; degree <= 4; ++degree) {
        for (int trial = 0; trial < 4; ++trial) {
            std::vector<long> b;
            for (std::size_t i = 0; i <= degree; ++i)
                b.push_back(checks::uniform_long(rng, 0, 5));
            b.back() = checks::uniform_long(rng, 1, 5);
            const Polynomial p = checks::from_binomial_basis(b);
            const SpacerRule rule = make_polynomial_staircase(PolynomialSpec::fixed(p.coefficients()),
                                                              CutRule::affine(1, 2));
            for (std::size_t n = 0; n <= 62; n += 1 + degree * 4) {
                const DynStage st = materialize_stage(rule, n);
                for (std::size_t k = 1; k <= 8 && k < st.values.size(); ++k) {
                    const Polynomial q = partial_sum_polynomial(p, k);
                    CHECK(q.lead() == Rational(static_cast<long>(k)) * p.lead());
                    const PartialSumStage ps = partial_sums(st, k);
                    for (std::size_t j = 0; j < ps.values.size(); ++j) {
                        CHECK(q.eval_int(Int(static_cast<unsigned long>(j))) == ps.values[j]);
                        ++compared;
                    }
                }
            }
        }
    }
    CHECK(compared > 10000);
}
