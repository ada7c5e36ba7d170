#pragma once

#include <cctype>
#include <ostream>
#include <string>
#include <string_view>

#include "ocf/bigint.hpp"
#include "ocf/error.hpp"
#include "ocf/qfield.hpp"

namespace ocf {

/// 2x2 integer matrix (a b; c d).
struct Mat2 {
    BigInt a = 1, b = 0, c = 0, d = 1;

    static Mat2 identity() { return {}; }

    BigInt det() const { return a * d - b * c; }
    BigInt trace() const { return a + d; }

    friend Mat2 operator*(const Mat2& x, const Mat2& y)
    {
        return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
    }
    Mat2& operator*=(const Mat2& y) { return *this = *this * y; }

    friend bool operator==(const Mat2&, const Mat2&) = default;

    Mat2 pow(unsigned k) const
    {
        Mat2 out, base = *this;
        while (k != 0) {
            if (k & 1U)
                out *= base;
            base *= base;
            k >>= 1U;
        }
        return out;
    }
};

/// (a x + b)/(c x + d), exact.
inline Quadratic qi_mobius(const Mat2& m, const Quadratic& x)
{
    if (m.det() == 0)
        throw Error(Errc::degenerate_input, "singular matrix");
    const Quadratic den = Quadratic(m.c) * x + Quadratic(m.d);
    if (den.is_zero())
        throw Error(Errc::pole, "Mobius denominator vanishes");
    return (Quadratic(m.a) * x + Quadratic(m.b)) / den;
}

inline std::string to_string(const Mat2& m)
{
    return "[[" + m.a.str() + "," + m.b.str() + "],[" + m.c.str() + "," + m.d.str() + "]]";
}

inline std::ostream& operator<<(std::ostream& os, const Mat2& m) { return os << to_string(m); }

/// Parses "[[a,b],[c,d]]" (whitespace allowed).
inline Mat2 parse_mat2(std::string_view text)
{
    std::string s;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch)))
            s += ch;
    std::size_t pos = 0;
    auto fail = [&](const char* msg) -> void {
        throw Error(Errc::parse_error, "cannot parse matrix '" + std::string(text) + "': " + msg);
    };
    auto expect = [&](char ch) {
        if (pos >= s.size() || s[pos] != ch)
            fail("unexpected character");
        ++pos;
    };
    auto integer = [&]() {
        const std::size_t start = pos;
        if (pos < s.size() && (s[pos] == '-' || s[pos] == '+'))
            ++pos;
        const std::size_t digits = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
            ++pos;
        if (digits == pos)
            fail("expected an integer");
        std::string tok = s.substr(start, pos - start);
        if (tok.front() == '+')
            tok.erase(0, 1);
        return BigInt(tok);
    };
    Mat2 m;
    expect('[');
    expect('[');
    m.a = integer();
    expect(',');
    m.b = integer();
    expect(']');
    expect(',');
    expect('[');
    m.c = integer();
    expect(',');
    m.d = integer();
    expect(']');
    expect(']');
    if (pos != s.size())
        fail("trailing characters");
    return m;
}

}  // namespace ocf
