#pragma once

#include "rankone/numeric.hpp"

#include <optional>
#include <vector>

namespace rankone {

/// Polynomial with rational coefficients, stored in ascending powers.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<Rational> ascending);

    static Polynomial monomial(std::size_t degree, Rational coefficient = 1);

    const std::vector<Rational>& coefficients() const { return coeffs_; }
    /// Degree of the highest nonzero coefficient; 0 for the zero polynomial.
    std::size_t degree() const;
    Rational lead() const;
    bool is_zero() const { return coeffs_.empty(); }

    Rational operator()(const Rational& x) const;
    /// Evaluates at an integer and requires an integer result.
    Int eval_int(const Int& x) const;

    /// True iff the polynomial maps Z into Z. A polynomial of degree D does so
    /// exactly when it takes integer values on D+1 consecutive integers.
    bool integer_valued() const;

    /// Coefficients b_i of p(x) = sum_i b_i * C(x, i), i.e. b_i = (Delta^i p)(0).
    std::vector<Rational> binomial_basis() const;

    /// sum_{j=0}^{count-1} p(j), exact, for count >= 0.
    Rational prefix_sum(const Int& count) const;

    friend bool operator==(const Polynomial&, const Polynomial&) = default;

private:
    void trim();
    std::vector<Rational> coeffs_;
};

/// A family of polynomials p_n of bounded degree. Coefficients vary affinely
/// with the stage: c_{n,a} = base[a] + slope[a] * n.
struct PolynomialSpec {
    std::size_t degree = 0;
    std::vector<Rational> base;
    std::vector<Rational> slope;
    std::size_t first_stage = 0;
    std::optional<std::size_t> last_stage;

    /// Constant-coefficient family.
    static PolynomialSpec fixed(std::vector<Rational> ascending);

    bool covers(std::size_t n) const;
    /// p_n. Throws DomainError outside the validity range or when the
    /// coefficient vectors exceed the declared degree.
    Polynomial at(std::size_t n) const;
    /// c_{n,D}, the degree-D coefficient at stage n.
    Rational lead(std::size_t n) const;
};

}  // namespace rankone
