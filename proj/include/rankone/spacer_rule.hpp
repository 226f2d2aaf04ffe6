#pragma once

// Spacer rules: generators of the cut counts r_n and spacer counts s_{n,j}
// that define a rank-one cutting-and-stacking construction.

#include "rankone/numeric.hpp"
#include "rankone/polynomial.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rankone {

/// r_n = slope * n + offset, overridden by `table[n]` for n < table.size().
struct CutRule {
    Int slope = 1;
    Int offset = 2;
    std::vector<Int> table;

    static CutRule affine(Int slope, Int offset);
    static CutRule constant(Int value);
    static CutRule listed(std::vector<Int> values, Int slope = 0, Int offset = 2);

    Int at(std::size_t n) const;
    /// True when r_n does not tend to infinity (slope zero past the table).
    bool bounded() const { return slope <= 0; }
    std::string describe() const;
};

enum class RuleKind { staircase, polynomial, simple_polystair, ornstein, constant, table };

std::string to_string(RuleKind kind);

namespace detail {
class RuleImpl;
}

/// Immutable, cheaply copyable handle to a spacer rule. Memo tables inside
/// stochastic and self-referential rules are internally synchronized.
class SpacerRule {
public:
    explicit SpacerRule(std::shared_ptr<const detail::RuleImpl> impl);

    RuleKind kind() const;
    std::string describe() const;
    std::optional<std::uint64_t> seed() const;

    /// r_n; throws ConstructionError when r_n < 2.
    Int cuts(std::size_t n) const;
    /// s_{n,j}; throws DomainError when j is outside Z_{r_n} and
    /// ConstructionError naming (n, j) when the value is negative.
    Int spacer(std::size_t n, const Int& j) const;
    /// sum_{z<j} s_{n,z} for 0 <= j <= r_n.
    Int prefix_sum(std::size_t n, const Int& j) const;
    Int stage_sum(std::size_t n) const { return prefix_sum(n, cuts(n)); }
    /// All of s_{n,0..r_n-1}, validated.
    std::vector<Int> stage(std::size_t n) const;

    /// Warnings gathered so far (bounded index sequence, clamped cut counts).
    std::vector<std::string> notes() const;

private:
    std::shared_ptr<const detail::RuleImpl> impl_;
};

/// Largest cut count the engine will materialize as an explicit array.
inline constexpr std::size_t kMaxMaterializedCuts = std::size_t{1} << 24;

namespace detail {

class RuleImpl {
public:
    virtual ~RuleImpl() = default;
    virtual RuleKind kind() const = 0;
    virtual std::string describe() const = 0;
    virtual std::optional<std::uint64_t> seed() const { return std::nullopt; }
    virtual Int cuts(std::size_t n) const = 0;
    /// j already range-checked by the handle.
    virtual Int spacer(std::size_t n, const Int& j) const = 0;
    /// Default sums the materialized stage.
    virtual Int prefix_sum(std::size_t n, const Int& j) const;
    /// Default evaluates spacer() for every j.
    virtual std::vector<Int> stage(std::size_t n) const;
    virtual std::vector<std::string> notes() const { return {}; }
};

}  // namespace detail

// Rule constructors. Family-specific builders with hypothesis validation
// live in families.hpp; these are the raw generators.

SpacerRule staircase_rule(CutRule cuts);
SpacerRule polynomial_rule(PolynomialSpec spec, CutRule cuts);
SpacerRule constant_rule(Int value, CutRule cuts);
/// Explicit stages; stage n has r_n = stages[n].size().
SpacerRule table_rule(std::vector<std::vector<Int>> stages);
/// s_{n,j} = j^D with r_n = max(2, floor(h_n^(1/(D+delta)))).
SpacerRule simple_polystair_rule(std::size_t degree, Rational delta);
/// s_{n,j} i.i.d. uniform on {0, ..., bound(n)} keyed by (seed, n, j).
SpacerRule ornstein_rule(std::uint64_t seed, CutRule bound, CutRule cuts);

/// Counter-based generator used by the Ornstein family: SplitMix64's
/// output function chained over (seed, n, j, attempt).
std::uint64_t splitmix64_mix(std::uint64_t x);
std::uint64_t keyed_word(std::uint64_t seed, std::uint64_t n, std::uint64_t j, std::uint64_t attempt);
/// Uniform draw on {0, ..., bound} by rejection over keyed words.
std::uint64_t keyed_uniform(std::uint64_t seed, std::uint64_t n, std::uint64_t j, std::uint64_t bound);

}  // namespace rankone
