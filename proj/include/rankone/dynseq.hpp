#pragma once

// Dynamical sequences: materialized stages, windowed partial sums,
// monotonicity fractions, and slicings of partial-sum sequences.

#include "rankone/numeric.hpp"
#include "rankone/spacer_rule.hpp"
#include "rankone/tower.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rankone {

struct DynStage {
    std::size_t n = 0;
    Int r;
    std::vector<Int> values;
};

struct PartialSumStage {
    std::size_t n = 0;
    std::size_t k = 0;
    /// values[j] = s_{n,j} + ... + s_{n,j+k-1}, j < r_n - k
    std::vector<Int> values;
};

DynStage materialize_stage(const SpacerRule& rule, std::size_t n);

/// Requires k < r_n. k = 0 gives r_n zeros.
PartialSumStage partial_sums(const DynStage& stage, std::size_t k);

/// (1/r_n) #{j : |s_{n,j}| < M}
Rational monotonicity_fraction(const DynStage& stage, const Int& threshold);

/// Prefix table P[j] = s_{n,0} + ... + s_{n,j-1}, so s^{(w)}_{n,j} = P[j+w] - P[j].
class WindowSums {
public:
    explicit WindowSums(const DynStage& stage);
    std::size_t size() const { return prefix_.size() - 1; }
    /// s^{(w)}_j; requires j + w <= r.
    Int at(std::size_t j, std::size_t w) const;

private:
    std::vector<Int> prefix_;
};

enum class BreakRule {
    /// l_{q+1} is the first sorted index after l_q whose (k - alpha_q + 1)-window
    /// sum reaches the (k - alpha_q)-window sum at the slice head plus eps*h.
    shifted_window,
    /// Same comparison on the k-window at both ends. Slices then have diameter < eps*h.
    same_window,
};

std::string to_string(BreakRule rule);

struct Slicing {
    std::size_t p = 0;
    std::size_t k = 0;
    Int m;
    Rational epsilon;
    BreakRule rule = BreakRule::shifted_window;
    /// Stage data the slicing was built against.
    Int h;
    Int r;
    /// s^{(k)}_{p,j} for j < r - k
    std::vector<Int> values;

    std::size_t Q = 0;
    /// Sorting permutation: values[psi[0]] <= values[psi[1]] <= ...
    std::vector<std::size_t> psi;
    /// Q + 1 breakpoints; ell[Q] = r - k.
    std::vector<std::size_t> ell;
    std::vector<std::size_t> alpha;
    std::vector<Int> beta;
    std::vector<Int> beta_prime;
    std::vector<std::vector<std::size_t>> gamma;
    /// Threshold bounds a_q <= s^{(k)}_j < b_q defining gamma[q]; b of the last slice is open.
    std::vector<Int> lower;
    std::vector<std::optional<Int>> upper;

    /// Whether alpha[0] differs from the value 1 the construction starts from.
    bool alpha0_differs_from_one() const { return !alpha.empty() && alpha[0] != 1; }
};

/// Greedy slicing of the k-th partial sums at stage p with residual shift m.
Slicing build_slicing(const TowerModel& tower, std::size_t p, std::size_t k, const Int& m, const Rational& epsilon,
                      BreakRule rule = BreakRule::shifted_window);

/// The unique alpha in [0, k] with f(alpha - 1) < x <= f(alpha), where
/// f(b) = b h + s^{(b)}_{head+k-b} and x = s^{(k)}_{head} - m (f(-1) = -inf).
std::size_t solve_alpha(const WindowSums& sums, const Int& h, std::size_t head, std::size_t k, const Int& m);

struct SlicingCheck {
    std::string name;
    bool passed = true;
    /// Informational checks are reported but do not count towards all_passed.
    bool informational = false;
    std::string detail;
};

struct SlicingReport {
    std::vector<SlicingCheck> checks;
    bool all_passed() const;
    const SlicingCheck* find(const std::string& name) const;
};

/// Checks every slicing invariant; failures are returned as data.
/// Throws DomainError if the slicing was built for a different stage.
SlicingReport validate_slicing(const Slicing& s, const TowerModel& tower);

/// eps_n = max(sqrt(mu(S_n)/mu(C_n)), 1/n), with the square root rounded up
/// to a multiple of 2^-32 so the value stays rational; eps_0 uses 1.
Rational epsilon_schedule(const TowerModel& tower, std::size_t n);

}  // namespace rankone
