#include "rankone/polynomial.hpp"

namespace rankone {

Polynomial::Polynomial(std::vector<Rational> ascending) : coeffs_(std::move(ascending))
{
    for (auto& c : coeffs_)
        c.canonicalize();
    trim();
}

Polynomial Polynomial::monomial(std::size_t degree, Rational coefficient)
{
    std::vector<Rational> c(degree + 1, Rational(0));
    c[degree] = std::move(coefficient);
    return Polynomial(std::move(c));
}

void Polynomial::trim()
{
    while (!coeffs_.empty() && coeffs_.back() == 0)
        coeffs_.pop_back();
}

std::size_t Polynomial::degree() const { return coeffs_.empty() ? 0 : coeffs_.size() - 1; }

Rational Polynomial::lead() const { return coeffs_.empty() ? Rational(0) : coeffs_.back(); }

Rational Polynomial::operator()(const Rational& x) const
{
    Rational acc = 0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it)
        acc = acc * x + *it;
    return acc;
}

Int Polynomial::eval_int(const Int& x) const
{
    Rational v = (*this)(Rational(x));
    if (v.get_den() != 1)
        throw DomainError("polynomial value at " + x.get_str() + " is not an integer: " + to_text(v));
    return v.get_num();
}

bool Polynomial::integer_valued() const
{
    for (std::size_t i = 0; i <= degree(); ++i)
        if ((*this)(Rational(static_cast<long>(i))).get_den() != 1)
            return false;
    return true;
}

std::vector<Rational> Polynomial::binomial_basis() const
{
    const std::size_t d = degree();
    std::vector<Rational> values;
    values.reserve(d + 1);
    for (std::size_t i = 0; i <= d; ++i)
        values.push_back((*this)(Rational(static_cast<long>(i))));
    // forward differences in place: b_i = Delta^i p(0)
    std::vector<Rational> basis;
    basis.reserve(d + 1);
    for (std::size_t i = 0; i <= d; ++i) {
        basis.push_back(values[0]);
        for (std::size_t k = 0; k + 1 < values.size(); ++k)
            values[k] = values[k + 1] - values[k];
        values.pop_back();
    }
    return basis;
}

namespace {

// C(n, k) for an arbitrary integer n >= 0 given as Int
Int choose(const Int& n, unsigned long k)
{
    Int r;
    mpz_bin_ui(r.get_mpz_t(), n.get_mpz_t(), k);
    return r;
}

}  // namespace

Rational Polynomial::prefix_sum(const Int& count) const
{
    if (count < 0)
        throw DomainError("prefix_sum with negative count");
    // sum_{j<n} C(j, i) = C(n, i+1)
    Rational total = 0;
    const auto basis = binomial_basis();
    for (std::size_t i = 0; i < basis.size(); ++i)
        total += basis[i] * Rational(choose(count, static_cast<unsigned long>(i + 1)));
    return total;
}

PolynomialSpec PolynomialSpec::fixed(std::vector<Rational> ascending)
{
    PolynomialSpec spec;
    spec.degree = ascending.empty() ? 0 : ascending.size() - 1;
    spec.slope.assign(ascending.size(), Rational(0));
    spec.base = std::move(ascending);
    return spec;
}

bool PolynomialSpec::covers(std::size_t n) const
{
    return n >= first_stage && (!last_stage || n <= *last_stage);
}

Polynomial PolynomialSpec::at(std::size_t n) const
{
    if (!covers(n))
        throw DomainError("polynomial family has no stage " + std::to_string(n));
    if (base.size() > degree + 1 || slope.size() > degree + 1)
        throw DomainError("polynomial coefficients exceed declared degree " + std::to_string(degree));
    std::vector<Rational> c(degree + 1, Rational(0));
    const Rational nn(static_cast<long>(n));
    for (std::size_t a = 0; a < base.size(); ++a)
        c[a] += base[a];
    for (std::size_t a = 0; a < slope.size(); ++a)
        c[a] += slope[a] * nn;
    return Polynomial(std::move(c));
}

Rational PolynomialSpec::lead(std::size_t n) const
{
    Rational c = 0;
    if (degree < base.size())
        c += base[degree];
    if (degree < slope.size())
        c += slope[degree] * Rational(static_cast<long>(n));
    return c;
}

}  // namespace rankone
