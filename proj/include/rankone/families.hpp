#pragma once

// Named transformation families as spacer rules, with hypothesis checks
// and exact growth and divisibility diagnostics.

#include "rankone/numeric.hpp"
#include "rankone/polynomial.hpp"
#include "rankone/spacer_rule.hpp"
#include "rankone/tower.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rankone {

/// Throws ConstructionError unless r_n >= 2 for every n.
void require_nondegenerate_cuts(const CutRule& cuts);

/// s_{n,j} = j.
SpacerRule make_staircase(CutRule cuts);
/// s_{n,j} = p_n(j). p_n must be integer-valued of degree <= D; negative
/// values are reported per stage, naming (n, j), when the stage is read.
SpacerRule make_polynomial_staircase(PolynomialSpec spec, CutRule cuts);
/// s_{n,j} = j^D, r_n = max(2, floor(h_n^(1/(D+delta)))); clamps are in rule.notes().
SpacerRule make_simple_polystair(std::size_t degree, Rational delta);
/// s_{n,j} uniform on {0, ..., bound(n)}, keyed by (seed, n, j). Heuristic family.
SpacerRule make_ornstein(std::uint64_t seed, CutRule bound, CutRule cuts);

struct StageDiagnostics {
    std::size_t n = 0;
    Int r;
    Int h;
    Rational r_squared_over_h;
    Rational mean_spacer;
    /// r_n * mean_spacer / h_n
    Rational r_mean_over_h;
    /// c_{n,D} / n, polynomial families with n >= 1 only
    std::optional<Rational> lead_over_n;
};

struct DivisibilityRow {
    Int L;
    /// (1/r_n) #{j < r_n : L | p_n(j+1) - p_n(j)}, one entry per stage
    std::vector<Rational> fractions;
    /// Every fraction >= 1 - 10^-6.
    bool flagged = false;
    /// L = 1 divides everything; reported, never counted.
    bool informational = false;
};

struct FamilyDiagnostics {
    std::size_t first_stage = 0;
    std::size_t last_stage = 0;
    std::vector<StageDiagnostics> stages;
    std::vector<DivisibilityRow> divisibility;
    std::vector<std::string> notes;

    /// No non-informational row is flagged.
    bool passes() const;
    const DivisibilityRow* row(const Int& L) const;
};

/// Growth rows for stages first..last of any tower.
FamilyDiagnostics diagnose_family(const TowerModel& tower, std::size_t first, std::size_t last);

/// Growth rows plus divisibility fractions for L = 1..l_max (l_max >= 2).
FamilyDiagnostics validate_polystair(const PolynomialSpec& spec, const CutRule& cuts, std::size_t l_max,
                                     std::size_t first, std::size_t last);
/// Same diagnostics for a tower whose stage n spacers are p_n(j), j < r_n.
FamilyDiagnostics validate_polystair(const TowerModel& tower, const std::function<Polynomial(std::size_t)>& stage_poly,
                                     std::size_t l_max, std::size_t first, std::size_t last);

/// #{j < count : L | q(j)} for an integer-valued polynomial q, exact for any count.
Int count_divisible(const Polynomial& q, const Int& L, const Int& count);

/// p_{n,k}(j) = p_n(j) + ... + p_n(j+k-1), a single-stage spec at stage n. Requires k >= 1.
PolynomialSpec partial_sum_polynomial(const PolynomialSpec& spec, std::size_t n, std::size_t k);
Polynomial partial_sum_polynomial(const Polynomial& p, std::size_t k);

struct GrowthRow {
    std::size_t n = 0;
    Int h;
    Int r;
    Rational mean_spacer;
    /// mean_spacer / h_n
    Rational increment;
    /// sum of increments over stages 0..n
    Rational partial_sum;
    /// mean_spacer <= h_n^(D/(D+delta)), decided exactly
    bool within_envelope = false;
};

/// sum_n mean_spacer_n / h_n for the simple polynomial staircase, stages 0..n_max.
std::vector<GrowthRow> polystair_growth_series(std::size_t degree, const Rational& delta, std::size_t n_max);

}  // namespace rankone
