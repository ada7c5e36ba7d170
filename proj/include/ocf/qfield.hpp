#pragma once

// Exact arithmetic in real quadratic fields Q(sqrt(d)).

#include <cctype>
#include <cmath>
#include <compare>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>

#include "ocf/bigint.hpp"
#include "ocf/error.hpp"

namespace ocf {

namespace detail {

/// Exact sign of p + q*sqrt(d), d > 0.
inline int sign_of_surd(const BigInt& p, const BigInt& q, const BigInt& d)
{
    const int sp = sign(p);
    const int sq = sign(q);
    if (sq == 0)
        return sp;
    if (sp == 0 || sp == sq)
        return sq;
    const BigInt lhs = p * p;
    const BigInt rhs = q * q * d;
    if (lhs == rhs)
        return 0;
    return lhs > rhs ? sp : sq;
}

}  // namespace detail

/// A number (p + q*sqrt(d))/r in canonical form: r > 0, gcd(p, q, r) = 1, and
/// either q != 0 with d > 1 squarefree, or q == 0 and d == 1 (a rational).
class Quadratic {
public:
    Quadratic() = default;
    Quadratic(long long n) : p_(n) {}
    Quadratic(const BigInt& n) : p_(n) {}
    Quadratic(const Rational& v) : p_(numerator(v)), r_(denominator(v)) {}

    /// Canonicalizes (p + q*sqrt(d))/r. Square factors of d move into q; a
    /// perfect-square d or q == 0 yields a rational (is_rational() is the flag).
    static Quadratic make(BigInt p, BigInt q, const BigInt& d, BigInt r)
    {
        if (r == 0)
            throw Error(Errc::invalid_denominator, "denominator must be nonzero");
        if (d <= 0)
            throw Error(Errc::unsupported_field, "radicand must be positive");
        BigInt core = 1;
        if (q != 0) {
            const SquarefreeSplit split = squarefree_split(d);
            q *= split.root;
            core = split.core;
            if (core == 1) {
                p += q;
                q = 0;
            }
        }
        Quadratic out;
        out.p_ = std::move(p);
        out.q_ = std::move(q);
        out.d_ = core;
        out.r_ = std::move(r);
        out.normalize();
        return out;
    }

    /// Builds (p + q*sqrt(d))/r where d is already known to be squarefree.
    static Quadratic from_squarefree(BigInt p, BigInt q, BigInt d, BigInt r)
    {
        Quadratic out;
        out.p_ = std::move(p);
        out.q_ = std::move(q);
        out.d_ = out.q_ == 0 ? BigInt(1) : std::move(d);
        out.r_ = std::move(r);
        if (out.r_ == 0)
            throw Error(Errc::invalid_denominator, "denominator must be nonzero");
        out.normalize();
        return out;
    }

    static Quadratic sqrt_of(const BigInt& d) { return make(0, 1, d, 1); }

    const BigInt& p() const noexcept { return p_; }
    const BigInt& q() const noexcept { return q_; }
    const BigInt& d() const noexcept { return d_; }
    const BigInt& r() const noexcept { return r_; }

    bool is_rational() const noexcept { return q_ == 0; }
    bool is_zero() const noexcept { return p_ == 0 && q_ == 0; }

    Rational to_rational() const
    {
        if (!is_rational())
            throw Error(Errc::domain, "value is irrational");
        return Rational(p_, r_);
    }

    int sign() const { return detail::sign_of_surd(p_, q_, d_); }

    Quadratic conjugate() const
    {
        Quadratic out = *this;
        out.q_ = -out.q_;
        return out;
    }

    /// Exact floor.
    BigInt floor() const
    {
        if (is_rational())
            return floor_div(p_, r_);
        const BigInt root = isqrt(q_ * q_ * d_);
        const BigInt lower = q_ > 0 ? root : BigInt(-root - 1);
        return floor_div(p_ + lower, r_);
    }

    BigInt ceil() const
    {
        const BigInt f = floor();
        return (is_rational() && f * r_ == p_) ? f : BigInt(f + 1);
    }

    double to_double() const
    {
        const long double p = static_cast<long double>(p_);
        const long double r = static_cast<long double>(r_);
        if (is_rational())
            return static_cast<double>(p / r);
        const long double q = static_cast<long double>(q_);
        const long double root = std::sqrt(static_cast<long double>(d_));
        if ((p_ > 0) == (q_ > 0) || p_ == 0)
            return static_cast<double>((p + q * root) / r);
        // p and q of opposite sign: use the conjugate to avoid cancellation.
        const long double norm = static_cast<long double>(BigInt(p_ * p_ - q_ * q_ * d_));
        return static_cast<double>(norm / (r * (p - q * root)));
    }

    Quadratic operator-() const
    {
        Quadratic out = *this;
        out.p_ = -out.p_;
        out.q_ = -out.q_;
        return out;
    }

    friend Quadratic operator+(const Quadratic& x, const Quadratic& y)
    {
        const BigInt d = common_field(x, y);
        return from_squarefree(x.p_ * y.r_ + y.p_ * x.r_, x.q_ * y.r_ + y.q_ * x.r_, d, x.r_ * y.r_);
    }

    friend Quadratic operator-(const Quadratic& x, const Quadratic& y) { return x + (-y); }

    friend Quadratic operator*(const Quadratic& x, const Quadratic& y)
    {
        const BigInt d = common_field(x, y);
        return from_squarefree(x.p_ * y.p_ + x.q_ * y.q_ * d, x.p_ * y.q_ + x.q_ * y.p_, d, x.r_ * y.r_);
    }

    Quadratic reciprocal() const
    {
        if (is_zero())
            throw Error(Errc::pole, "reciprocal of zero");
        // r/(p + q sqrt d) = r (p - q sqrt d)/(p^2 - q^2 d)
        return from_squarefree(r_ * p_, -r_ * q_, d_, p_ * p_ - q_ * q_ * d_);
    }

    friend Quadratic operator/(const Quadratic& x, const Quadratic& y) { return x * y.reciprocal(); }

    Quadratic& operator+=(const Quadratic& y) { return *this = *this + y; }
    Quadratic& operator-=(const Quadratic& y) { return *this = *this - y; }
    Quadratic& operator*=(const Quadratic& y) { return *this = *this * y; }
    Quadratic& operator/=(const Quadratic& y) { return *this = *this / y; }

    friend bool operator==(const Quadratic& x, const Quadratic& y)
    {
        return x.p_ == y.p_ && x.q_ == y.q_ && x.d_ == y.d_ && x.r_ == y.r_;
    }

    /// Exact ordering. Values from different fields are compared by isolating
    /// one radical and squaring with sign bookkeeping.
    friend std::strong_ordering operator<=>(const Quadratic& x, const Quadratic& y)
    {
        const int s = compare_sign(x, y);
        return s < 0 ? std::strong_ordering::less
                     : (s > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    bool same_field(const Quadratic& y) const { return is_rational() || y.is_rational() || d_ == y.d_; }

    std::size_t hash() const
    {
        std::size_t h = std::hash<std::string>{}(p_.str());
        h ^= std::hash<std::string>{}(q_.str()) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h ^= std::hash<std::string>{}(r_.str()) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h ^= std::hash<std::string>{}(d_.str()) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }

private:
    static BigInt common_field(const Quadratic& x, const Quadratic& y)
    {
        if (x.is_rational())
            return y.d_;
        if (y.is_rational() || x.d_ == y.d_)
            return x.d_;
        throw Error(Errc::mixed_field, "arithmetic across different quadratic fields");
    }

    /// sign(x - y)
    static int compare_sign(const Quadratic& x, const Quadratic& y)
    {
        if (x.same_field(y))
            return (x - y).sign();
        // x.r*y.r*(x - y) = A + B sqrt(dx) + C sqrt(dy)
        const BigInt A = x.p_ * y.r_ - y.p_ * x.r_;
        const BigInt B = x.q_ * y.r_;
        const BigInt C = -y.q_ * x.r_;
        const int su = detail::sign_of_surd(A, B, x.d_);
        const int sv = ocf::sign(C);
        if (sv == 0 || su == sv)
            return su;
        if (su == 0)
            return sv;
        // |U| vs |V| with U = A + B sqrt(dx), V = C sqrt(dy)
        const int diff = detail::sign_of_surd(A * A + B * B * x.d_ - C * C * y.d_, 2 * A * B, x.d_);
        return su > 0 ? diff : -diff;
    }

    void normalize()
    {
        if (r_ < 0) {
            p_ = -p_;
            q_ = -q_;
            r_ = -r_;
        }
        if (q_ == 0)
            d_ = 1;
        BigInt g = ocf::gcd(ocf::gcd(ocf::abs(p_), ocf::abs(q_)), r_);
        if (g > 1) {
            p_ /= g;
            q_ /= g;
            r_ /= g;
        }
    }

    BigInt p_ = 0;
    BigInt q_ = 0;
    BigInt d_ = 1;
    BigInt r_ = 1;
};

/// Short aliases for the canonical operations.
inline Quadratic qi_canonical(const BigInt& p, const BigInt& q, const BigInt& d, const BigInt& r)
{
    return Quadratic::make(p, q, d, r);
}

inline Quadratic qi_conjugate(const Quadratic& x) { return x.conjugate(); }

/// Strict comparison: both operands must share a field unless one is rational.
inline std::strong_ordering qi_compare(const Quadratic& x, const Quadratic& y)
{
    if (!x.same_field(y))
        throw Error(Errc::mixed_field, "qi_compare across different quadratic fields");
    return x <=> y;
}

inline BigInt qi_floor(const Quadratic& x) { return x.floor(); }

inline void require_irrational(const Quadratic& x, const char* where)
{
    if (x.is_rational())
        throw Error(Errc::degenerate_input, std::string(where) + ": rational input");
}

/// Golden-ratio constants in Q(sqrt 5).
namespace golden {
inline const Quadratic& G()
{
    static const Quadratic v = Quadratic::make(1, 1, 5, 2);
    return v;
}
inline const Quadratic& g()
{
    static const Quadratic v = Quadratic::make(-1, 1, 5, 2);
    return v;
}
}  // namespace golden

// ---------------------------------------------------------------------------
// Text grammar: [sign] ( "(" numer ")" [ "/" R ] | numer [ "/" R ] )
//   numer := term [ ("+"|"-") term ],  term := INT | [INT "*"] "sqrt(" INT ")"
// A bare two-term numerator cannot be followed by "/R" (precedence would lie).

namespace detail {

class ValueParser {
public:
    explicit ValueParser(std::string_view text) : s_(text) {}

    Quadratic parse()
    {
        skip_ws();
        int outer = 1;
        if (peek() == '-' || peek() == '+') {
            // only a sign directly before "(" is an outer sign
            std::size_t save = pos_;
            int sg = get() == '-' ? -1 : 1;
            skip_ws();
            if (peek() == '(')
                outer = sg;
            else
                pos_ = save;
        }
        BigInt p = 0, q = 0, d = 1, r = 1;
        int terms = 0;
        bool paren = false;
        if (peek() == '(') {
            paren = true;
            ++pos_;
            terms = numer(p, q, d);
            skip_ws();
            expect(')');
        } else {
            terms = numer(p, q, d);
        }
        skip_ws();
        if (peek() == '/') {
            if (!paren && terms > 1)
                fail("ambiguous division; parenthesize the numerator");
            ++pos_;
            skip_ws();
            r = integer(true);
        }
        skip_ws();
        if (pos_ != s_.size())
            fail("trailing characters");
        if (r == 0)
            throw Error(Errc::invalid_denominator, "denominator must be nonzero");
        if (d <= 0)
            throw Error(Errc::unsupported_field, "radicand must be positive");
        return Quadratic::make(outer * p, outer * q, d, r);
    }

private:
    int numer(BigInt& p, BigInt& q, BigInt& d)
    {
        bool have_int = false, have_sqrt = false;
        int terms = 0;
        for (;;) {
            skip_ws();
            int sg = 1;
            if (peek() == '-' || peek() == '+') {
                sg = get() == '-' ? -1 : 1;
                skip_ws();
            } else if (terms > 0) {
                break;
            }
            BigInt coef = 1;
            bool is_sqrt = false;
            if (std::isdigit(static_cast<unsigned char>(peek()))) {
                coef = integer(false);
                skip_ws();
                if (peek() == '*') {
                    ++pos_;
                    skip_ws();
                    is_sqrt = true;
                    d = sqrt_arg();
                }
            } else if (starts_with("sqrt")) {
                is_sqrt = true;
                d = sqrt_arg();
            } else {
                fail("expected a number or sqrt(...)");
            }
            if (is_sqrt) {
                if (have_sqrt)
                    fail("more than one radical term");
                have_sqrt = true;
                q = sg * coef;
            } else {
                if (have_int)
                    fail("more than one integer term");
                have_int = true;
                p = sg * coef;
            }
            if (++terms == 2)
                break;
        }
        return terms;
    }

    BigInt sqrt_arg()
    {
        if (!starts_with("sqrt"))
            fail("expected sqrt");
        pos_ += 4;
        skip_ws();
        expect('(');
        skip_ws();
        BigInt d = integer(true);
        skip_ws();
        expect(')');
        return d;
    }

    BigInt integer(bool allow_sign)
    {
        int sg = 1;
        if (allow_sign && (peek() == '-' || peek() == '+')) {
            sg = get() == '-' ? -1 : 1;
        }
        const std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
        if (start == pos_)
            fail("expected digits");
        return sg * BigInt(std::string(s_.substr(start, pos_ - start)));
    }

    bool starts_with(std::string_view w) const { return s_.substr(pos_, w.size()) == w; }
    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
    char get() { return s_[pos_++]; }
    void skip_ws()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }
    void expect(char c)
    {
        if (peek() != c)
            fail(std::string("expected '") + c + "'");
        ++pos_;
    }
    [[noreturn]] void fail(const std::string& msg) const
    {
        throw Error(Errc::parse_error,
                    "cannot parse value '" + std::string(s_) + "' at offset " + std::to_string(pos_) + ": " + msg);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline Quadratic parse_quadratic(std::string_view text) { return detail::ValueParser(text).parse(); }

inline std::string to_string(const Quadratic& x)
{
    if (x.is_rational())
        return x.r() == 1 ? x.p().str() : x.p().str() + "/" + x.r().str();
    std::string numer;
    if (x.p() != 0)
        numer = x.p().str();
    const bool neg = x.q() < 0;
    const BigInt mag = ocf::abs(x.q());
    if (!numer.empty() || neg)
        numer += neg ? "-" : "+";
    if (mag != 1)
        numer += mag.str() + "*";
    numer += "sqrt(" + x.d().str() + ")";
    if (x.r() == 1)
        return numer;
    if (numer.front() == '+')
        numer.erase(0, 1);
    return "(" + numer + ")/" + x.r().str();
}

inline std::ostream& operator<<(std::ostream& os, const Quadratic& x) { return os << to_string(x); }

}  // namespace ocf

template <>
struct std::hash<ocf::Quadratic> {
    std::size_t operator()(const ocf::Quadratic& x) const { return x.hash(); }
};
