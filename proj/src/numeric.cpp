#include "rankone/numeric.hpp"

#include <algorithm>
#include <cctype>

namespace rankone {

std::size_t to_size(const Int& v, std::string_view what)
{
    if (v < 0 || !v.fits_ulong_p())
        throw DomainError(std::string(what) + " out of range: " + v.get_str());
    return static_cast<std::size_t>(v.get_ui());
}

std::string to_text(const Rational& x)
{
    if (x.get_den() == 1)
        return x.get_num().get_str();
    return x.get_num().get_str() + "/" + x.get_den().get_str();
}

std::string to_text(const Int& x) { return x.get_str(); }

namespace {

bool is_integer_text(std::string_view s)
{
    if (s.empty())
        return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size())
        return false;
    return std::all_of(s.begin() + static_cast<std::ptrdiff_t>(i), s.end(),
                       [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; });
}

std::string trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos)
        return {};
    auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

Int parse_int(std::string_view text)
{
    std::string s = trim(text);
    if (!is_integer_text(s))
        throw DomainError("not an integer: '" + std::string(text) + "'");
    if (s[0] == '+')
        s.erase(0, 1);
    return Int(s, 10);
}

Rational parse_rational(std::string_view text)
{
    std::string s = trim(text);
    auto slash = s.find('/');
    if (slash == std::string::npos)
        return Rational(parse_int(s));
    Int num = parse_int(std::string_view(s).substr(0, slash));
    std::string den_text = trim(std::string_view(s).substr(slash + 1));
    if (!den_text.empty() && den_text[0] == '-')
        throw DomainError("denominator must be positive: '" + std::string(text) + "'");
    Int den = parse_int(den_text);
    if (den == 0)
        throw DomainError("zero denominator: '" + std::string(text) + "'");
    Rational q(num, den);
    q.canonicalize();
    return q;
}

namespace {

// round(|num|/den) half away from zero
Int round_div(const Int& num, const Int& den)
{
    Int q, r;
    mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    if (2 * r >= den)
        q += 1;
    return q;
}

std::string pad_left(std::string s, std::size_t width)
{
    if (s.size() < width)
        s.insert(0, width - s.size(), '0');
    return s;
}

}  // namespace

std::string to_decimal(const Rational& x, int digits)
{
    if (digits < 1)
        digits = 1;
    const bool negative = x < 0;
    Rational a = negative ? Rational(-x) : x;
    const Int num = a.get_num();
    const Int den = a.get_den();
    std::string sign = negative ? "-" : "";

    static const Int limit = pow_int(Int(10), 15);
    if (a < Rational(limit)) {
        Int scaled = round_div(num * pow_int(Int(10), static_cast<unsigned long>(digits)), den);
        if (scaled == 0)
            sign.clear();
        std::string s = pad_left(scaled.get_str(), static_cast<std::size_t>(digits) + 1);
        std::size_t split = s.size() - static_cast<std::size_t>(digits);
        return sign + s.substr(0, split) + "." + s.substr(split);
    }

    // scientific: find e with 10^e <= a < 10^(e+1)
    Int ip = num / den;
    long e = static_cast<long>(ip.get_str().size()) - 1;
    // mantissa digits: round(a * 10^(digits-1) / 10^e)
    Int m;
    long shift = static_cast<long>(digits) - 1 - e;
    if (shift >= 0)
        m = round_div(num * pow_int(Int(10), static_cast<unsigned long>(shift)), den);
    else
        m = round_div(num, den * pow_int(Int(10), static_cast<unsigned long>(-shift)));
    std::string ms = m.get_str();
    if (ms.size() > static_cast<std::size_t>(digits)) {  // rounding carried into a new digit
        ++e;
        ms.pop_back();
    }
    std::string out = sign + ms.substr(0, 1);
    if (ms.size() > 1)
        out += "." + ms.substr(1);
    return out + "e+" + std::to_string(e);
}

Int floor_root(const Int& x, unsigned long n)
{
    if (x < 0)
        throw DomainError("floor_root of a negative number");
    if (n == 0)
        throw DomainError("floor_root with zero index");
    Int r;
    mpz_root(r.get_mpz_t(), x.get_mpz_t(), n);
    return r;
}

Int floor_of(const Rational& q)
{
    Int r;
    mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

Int ceil_of(const Rational& q)
{
    Int r;
    mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

Int binomial(unsigned long n, unsigned long k)
{
    Int r;
    mpz_bin_uiui(r.get_mpz_t(), n, k);
    return r;
}

}  // namespace rankone
