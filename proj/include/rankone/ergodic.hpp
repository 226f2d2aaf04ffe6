#pragma once

// Correlations, ergodic averages and the inequalities relating them, all
// evaluated exactly over a reference column C_M with nu = mu / mu(C_M).
//
// Convention: chi_B o T^{-e} is the indicator of T^e(B). Negative exponents
// go through the adjoint route (pullback of B into C_M).

#include "rankone/dynseq.hpp"
#include "rankone/polynomial.hpp"
#include "rankone/tower.hpp"

#include <string>
#include <utility>
#include <vector>

namespace rankone {

/// Default budget of the averaging operations: the piece cap of apply_power
/// with a deeper column allowance, since orbits near a column top descend
/// roughly one column per last-spacer length.
inline Budget averaging_budget()
{
    Budget b;
    b.max_depth = 32;
    return b;
}

struct AverageResult {
    /// Integral (or sum) over C_M, divided by mu(C_M).
    Rational value;
    /// nu(B) (mu(C_{M'}) - mu(C_M)) / mu(C_M), M' = max(M + 1, deepest image column).
    Rational tail_bound;
    /// Set when mu(C_{M'}) >= 2 mu(C_M): the reference column misses as much mass as it holds.
    bool divergent = false;
    std::size_t ref_column = 0;
    std::size_t tail_column = 0;
    std::size_t terms = 0;
};

struct CorrelationRow {
    Int t;
    /// mu(T^t A ∩ B)
    Rational raw;
    /// raw / mu_ref - (mu(A) / mu_ref)(mu(B) / mu_ref), mu_ref = mu(C_M)
    Rational normalized;
};

/// Signed t: negative t uses mu(T^t A ∩ B) = mu(A ∩ T^{|t|} B).
CorrelationRow correlation(const TowerModel& tower, const LevelSet& a, const LevelSet& b, const Int& t,
                           std::size_t ref_column, const Budget& budget = averaging_budget());

/// ∫_{C_M} |weight * sum_e chi_B o T^{-e} - nu(B)| dnu. Exponents may repeat.
AverageResult weighted_average(const TowerModel& tower, const std::vector<Int>& exponents, const Rational& weight,
                               const LevelSet& b, std::size_t ref_column, const Budget& budget = averaging_budget());

/// weighted_average with weight 1/L, L = number of exponents (L >= 1).
AverageResult ergodic_average(const TowerModel& tower, const std::vector<Int>& exponents, const LevelSet& b,
                              std::size_t ref_column, const Budget& budget = averaging_budget());

/// Exponents s^{(k)}_{n,j}, j < r_n - k.
AverageResult dynseq_ergodic_average(const TowerModel& tower, std::size_t n, std::size_t k, const LevelSet& b,
                                     std::size_t ref_column, const Budget& budget = averaging_budget());

enum class SliceNormalizer {
    /// 1 / r of the sliced stage
    cut_count,
    /// 1 / (number of terms) = 1 / (r - k)
    term_count,
};

std::string to_string(SliceNormalizer n);

/// Exponents s^{(k - alpha_q)}_{p,j} for q < Q, j in Gamma_q.
std::vector<Int> slice_exponents(const TowerModel& tower, const Slicing& s);

AverageResult slice_ergodic_average(const TowerModel& tower, const Slicing& s, const LevelSet& b,
                                    std::size_t ref_column, SliceNormalizer normalizer = SliceNormalizer::cut_count,
                                    const Budget& budget = averaging_budget());

struct UniformSum {
    AverageResult result;
    /// The stage with h_p <= a < h_{p+1}.
    std::size_t p = 0;
};

/// sum_{i < h_p} |nu(T^a I_{p,i} ∩ B) - nu(I_{p,i}) nu(B)|
UniformSum uniform_mixing_sum(const TowerModel& tower, const Int& a, const LevelSet& b, std::size_t ref_column,
                              const Budget& budget = averaging_budget());

struct PowerProfile {
    std::vector<std::pair<Int, AverageResult>> rows;
    Rational sup;
    Int argsup;
};

/// (1/n) sum_{j<n} chi_B o T^{-jk} for k = 1..k_max.
PowerProfile power_ergodic_profile(const TowerModel& tower, std::size_t n, std::size_t k_max, const LevelSet& b,
                                   std::size_t ref_column, const Budget& budget = averaging_budget());
/// Same average along a caller-supplied list of strides.
PowerProfile power_ergodic_profile(const TowerModel& tower, std::size_t n, const std::vector<Int>& strides,
                                   const LevelSet& b, std::size_t ref_column, const Budget& budget = averaging_budget());

/// Exponents p(0), ..., p(n-1); p must be integer-valued.
AverageResult polynomial_average(const TowerModel& tower, const Polynomial& p, std::size_t n, const LevelSet& b,
                                 std::size_t ref_column, const Budget& budget = averaging_budget());

struct InequalityCheck {
    Rational lhs;
    Rational rhs;
    bool holds = false;
    /// Mass that can enter C_M from outside during the average, normalized by mu(C_M).
    /// Zero when the inequality needs no finite-column correction.
    Rational boundary = 0;
    Rational slack() const { return rhs - lhs; }
    bool holds_with_boundary() const { return lhs <= rhs + boundary; }
};

/// Full Cesaro average over R against the stride-p average over L plus pL/R.
/// Over C_M the integrals are not shift invariant; boundary = (R-1)/(2 h_M)
/// bounds the mass entering through the base of C_M within R steps.
InequalityCheck block_lemma_check(const TowerModel& tower, std::size_t R, std::size_t L, std::size_t p,
                                  const LevelSet& b, std::size_t ref_column, const Budget& budget = averaging_budget());

struct FulltrickTerm {
    Int f;
    Int g;
};

/// Level-sum of sublevel correlations over Lambda against the integral of
/// (1/r_p) sum chi_B o T^{f(j)} plus (sup f)(1/h_p)(#Gamma/r_p). B must lie in C_p.
InequalityCheck fulltrick_check(const TowerModel& tower, std::size_t p, const std::vector<Int>& lambda,
                                const std::vector<FulltrickTerm>& gamma, const LevelSet& b, std::size_t ref_column,
                                const Budget& budget = averaging_budget());

/// |nu(T^a A ∩ B) - nu(A)nu(B)| against uniform_mixing_sum(a, B); A a union of column-p levels.
InequalityCheck uniform_dominates_correlation(const TowerModel& tower, const Int& a, const LevelSet& a_set,
                                              const LevelSet& b, std::size_t ref_column, const Budget& budget = averaging_budget());

}  // namespace rankone
