#pragma once

// Exact integer and rational helpers shared by every module.

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rankone {

using Int = mpz_class;
using Rational = mpq_class;

/// Base of the engine's exception hierarchy.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A spacer rule produced an invalid stage (r_n < 2, negative spacer, ...).
class ConstructionError : public Error {
public:
    using Error::Error;
};

/// An operation was called outside its domain (window too large, column mismatch, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Arithmetic found a state the construction guarantees cannot exist.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// A computation needed more pieces or depth than its budget allowed.
class ResourceError : public Error {
public:
    using Error::Error;
};

inline Int to_int(std::int64_t v) { return Int(static_cast<long>(v)); }

/// Converts to std::size_t, throwing DomainError when the value is negative or too large.
std::size_t to_size(const Int& v, std::string_view what);

/// Exact "p/q" text, or "p" when q == 1.
std::string to_text(const Rational& x);
std::string to_text(const Int& x);

/// Parses "p", "-p" or "p/q" exactly; throws DomainError on malformed input.
Rational parse_rational(std::string_view text);
Int parse_int(std::string_view text);

/// Deterministic decimal rendering. Fixed notation with `digits` fractional
/// digits when |x| < 1e15, otherwise scientific with `digits` significant
/// digits. Rounds half away from zero using integer arithmetic only.
std::string to_decimal(const Rational& x, int digits = 15);

/// floor(x^(1/n)) for x >= 0, n >= 1.
Int floor_root(const Int& x, unsigned long n);

/// floor(q) and ceil(q).
Int floor_of(const Rational& q);
Int ceil_of(const Rational& q);

Int binomial(unsigned long n, unsigned long k);

inline Int pow_int(const Int& base, unsigned long e)
{
    Int r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
    return r;
}

/// num/den in lowest terms; den != 0.
inline Rational ratio(const Int& num, const Int& den)
{
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline Rational abs_of(const Rational& q) { return q < 0 ? Rational(-q) : q; }

}  // namespace rankone
