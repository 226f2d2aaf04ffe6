#include "rankone/families.hpp"

#include <algorithm>

namespace rankone {

namespace {

Polynomial shifted(const Polynomial& p, const Int& t)
{
    const auto& c = p.coefficients();
    std::vector<Rational> out(c.size());
    for (std::size_t a = 0; a < c.size(); ++a) {
        // (x + t)^a contributes C(a, b) t^(a-b) x^b
        for (std::size_t b = 0; b <= a; ++b)
            out[b] += c[a] * Rational(binomial(a, b) * pow_int(t, static_cast<unsigned long>(a - b)));
    }
    return Polynomial(std::move(out));
}

Polynomial difference(const Polynomial& lhs, const Polynomial& rhs)
{
    std::vector<Rational> out(std::max(lhs.coefficients().size(), rhs.coefficients().size()));
    for (std::size_t a = 0; a < lhs.coefficients().size(); ++a)
        out[a] += lhs.coefficients()[a];
    for (std::size_t a = 0; a < rhs.coefficients().size(); ++a)
        out[a] -= rhs.coefficients()[a];
    return Polynomial(std::move(out));
}

Int factorial(std::size_t n)
{
    Int out = 1;
    for (std::size_t i = 2; i <= n; ++i)
        out *= static_cast<unsigned long>(i);
    return out;
}

const Rational kFlagFloor = Rational(1) - ratio(1, 1000000);

}  // namespace

void require_nondegenerate_cuts(const CutRule& cuts)
{
    for (std::size_t n = 0; n < cuts.table.size(); ++n)
        if (cuts.table[n] < 2)
            throw ConstructionError("cut rule gives r_" + std::to_string(n) + " = " + cuts.table[n].get_str() +
                                    " < 2");
    if (cuts.slope < 0)
        throw ConstructionError("cut rule " + cuts.describe() + " eventually drops below 2");
    if (cuts.at(cuts.table.size()) < 2)
        throw ConstructionError("cut rule gives r_" + std::to_string(cuts.table.size()) + " = " +
                                cuts.at(cuts.table.size()).get_str() + " < 2");
}

SpacerRule make_staircase(CutRule cuts)
{
    require_nondegenerate_cuts(cuts);
    return staircase_rule(std::move(cuts));
}

SpacerRule make_polynomial_staircase(PolynomialSpec spec, CutRule cuts)
{
    require_nondegenerate_cuts(cuts);
    // p_n is affine in n, so two consecutive stages decide integrality for all of them
    const std::size_t first = spec.first_stage;
    const bool single = spec.last_stage && *spec.last_stage == first;
    for (std::size_t n = first; n <= first + (single ? 0 : 1); ++n) {
        const Polynomial p = spec.at(n);
        if (p.degree() > spec.degree)
            throw ConstructionError("stage " + std::to_string(n) + ": p_n has degree above " +
                                    std::to_string(spec.degree));
        if (!p.integer_valued())
            throw ConstructionError("stage " + std::to_string(n) + ": p_n is not integer-valued");
    }
    return polynomial_rule(std::move(spec), std::move(cuts));
}

SpacerRule make_simple_polystair(std::size_t degree, Rational delta)
{
    return simple_polystair_rule(degree, std::move(delta));
}

SpacerRule make_ornstein(std::uint64_t seed, CutRule bound, CutRule cuts)
{
    require_nondegenerate_cuts(cuts);
    if (bound.slope < 0)
        throw ConstructionError("spacer bound " + bound.describe() + " eventually negative");
    for (std::size_t n = 0; n <= bound.table.size(); ++n)
        if (bound.at(n) < 0)
            throw ConstructionError("spacer bound is negative at stage " + std::to_string(n));
    return ornstein_rule(seed, std::move(bound), std::move(cuts));
}

bool FamilyDiagnostics::passes() const
{
    return std::none_of(divisibility.begin(), divisibility.end(),
                        [](const DivisibilityRow& r) { return r.flagged && !r.informational; });
}

const DivisibilityRow* FamilyDiagnostics::row(const Int& L) const
{
    for (const auto& r : divisibility)
        if (r.L == L)
            return &r;
    return nullptr;
}

FamilyDiagnostics diagnose_family(const TowerModel& tower, std::size_t first, std::size_t last)
{
    if (first > last)
        throw DomainError("empty stage range");
    FamilyDiagnostics out;
    out.first_stage = first;
    out.last_stage = last;
    for (std::size_t n = first; n <= last; ++n) {
        StageDiagnostics s;
        s.n = n;
        s.r = tower.cuts(n);
        s.h = tower.height(n);
        s.r_squared_over_h = ratio(s.r * s.r, s.h);
        s.mean_spacer = tower.mean_spacer(n);
        s.r_mean_over_h = Rational(s.r) * s.mean_spacer / Rational(s.h);
        s.r_mean_over_h.canonicalize();
        out.stages.push_back(std::move(s));
    }
    out.notes = tower.rule().notes();
    return out;
}

Int count_divisible(const Polynomial& q, const Int& L, const Int& count)
{
    if (L < 1)
        throw DomainError("divisor must be positive");
    if (count <= 0)
        return 0;
    if (!q.integer_valued())
        throw DomainError("count_divisible needs an integer-valued polynomial");
    // integer-valued polynomials of degree D are periodic mod L with period L * D!
    const Int period = L * factorial(q.degree());
    const Int span = std::min(period, count);
    if (span > Int(static_cast<unsigned long>(kMaxMaterializedCuts)))
        throw DomainError("divisibility period " + period.get_str() + " too large");
    const unsigned long steps = span.get_ui();
    Int in_span = 0;
    Int in_rest = 0;
    const Int rest = count >= period ? Int(count % period) : Int(0);
    for (unsigned long j = 0; j < steps; ++j) {
        const Int v = q.eval_int(Int(j));
        if (v % L == 0) {
            ++in_span;
            if (Int(j) < rest)
                ++in_rest;
        }
    }
    if (count <= period)
        return in_span;
    return Int(count / period) * in_span + in_rest;
}

FamilyDiagnostics validate_polystair(const TowerModel& tower, const std::function<Polynomial(std::size_t)>& stage_poly,
                                     std::size_t l_max, std::size_t first, std::size_t last)
{
    if (l_max < 2)
        throw DomainError("validate_polystair needs l_max >= 2");
    FamilyDiagnostics out = diagnose_family(tower, first, last);
    std::vector<Polynomial> diffs;
    for (auto& s : out.stages) {
        const Polynomial p = stage_poly(s.n);
        if (s.n >= 1)
            s.lead_over_n = p.lead() / Rational(static_cast<unsigned long>(s.n));
        diffs.push_back(difference(shifted(p, 1), p));
    }
    for (std::size_t L = 1; L <= l_max; ++L) {
        DivisibilityRow row;
        row.L = static_cast<unsigned long>(L);
        row.informational = L == 1;
        row.flagged = true;
        for (std::size_t i = 0; i < out.stages.size(); ++i) {
            Rational f = ratio(count_divisible(diffs[i], row.L, out.stages[i].r), out.stages[i].r);
            row.flagged = row.flagged && f >= kFlagFloor;
            row.fractions.push_back(std::move(f));
        }
        out.divisibility.push_back(std::move(row));
    }
    return out;
}

FamilyDiagnostics validate_polystair(const PolynomialSpec& spec, const CutRule& cuts, std::size_t l_max,
                                     std::size_t first, std::size_t last)
{
    if (l_max < 2)
        throw DomainError("validate_polystair needs l_max >= 2");
    TowerModel tower(make_polynomial_staircase(spec, cuts));
    FamilyDiagnostics out = validate_polystair(tower, [&](std::size_t n) { return spec.at(n); }, l_max, first, last);
    // c_{n,D} is the declared-degree coefficient, which may vanish at some stages
    for (auto& s : out.stages)
        if (s.n >= 1)
            s.lead_over_n = spec.lead(s.n) / Rational(static_cast<unsigned long>(s.n));
    return out;
}

Polynomial partial_sum_polynomial(const Polynomial& p, std::size_t k)
{
    if (k < 1)
        throw DomainError("partial_sum_polynomial needs k >= 1");
    // sum_{i<k} (j + i)^a = sum_b C(a, b) j^b sum_{i<k} i^(a-b)
    const auto& c = p.coefficients();
    std::vector<Int> power_sums(c.size(), 0);
    for (std::size_t e = 0; e < c.size(); ++e)
        for (std::size_t i = 0; i < k; ++i)
            power_sums[e] += pow_int(Int(static_cast<unsigned long>(i)), static_cast<unsigned long>(e));
    std::vector<Rational> out(c.size());
    for (std::size_t a = 0; a < c.size(); ++a)
        for (std::size_t b = 0; b <= a; ++b)
            out[b] += c[a] * Rational(binomial(a, b) * power_sums[a - b]);
    return Polynomial(std::move(out));
}

PolynomialSpec partial_sum_polynomial(const PolynomialSpec& spec, std::size_t n, std::size_t k)
{
    const Polynomial q = partial_sum_polynomial(spec.at(n), k);
    PolynomialSpec out;
    out.degree = spec.degree;
    out.base = q.coefficients();
    out.base.resize(spec.degree + 1);
    out.slope.assign(spec.degree + 1, Rational(0));
    out.first_stage = n;
    out.last_stage = n;
    return out;
}

std::vector<GrowthRow> polystair_growth_series(std::size_t degree, const Rational& delta, std::size_t n_max)
{
    TowerModel tower(make_simple_polystair(degree, delta));
    // mean <= h^(D/(D+a/b))  <=>  mean^(bD+a) <= h^(bD)
    const unsigned long b = delta.get_den().get_ui();
    const unsigned long e = b * degree + delta.get_num().get_ui();
    std::vector<GrowthRow> out;
    Rational partial = 0;
    for (std::size_t n = 0; n <= n_max; ++n) {
        GrowthRow row;
        row.n = n;
        row.h = tower.height(n);
        row.r = tower.cuts(n);
        row.mean_spacer = tower.mean_spacer(n);
        row.increment = row.mean_spacer / Rational(row.h);
        row.increment.canonicalize();
        partial += row.increment;
        row.partial_sum = partial;
        row.within_envelope = pow_int(row.mean_spacer.get_num(), e) <=
                              pow_int(row.h, b * degree) * pow_int(row.mean_spacer.get_den(), e);
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace rankone
