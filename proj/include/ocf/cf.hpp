#pragma once

// Odd, regular and grotesque continued fractions over exact quadratic values.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ocf/bigint.hpp"
#include "ocf/error.hpp"
#include "ocf/mat2.hpp"
#include "ocf/qfield.hpp"

namespace ocf {

/// One partial quotient with its sign. OCF admissibility: a odd, a + e >= 2.
struct Digit {
    std::int64_t a = 1;
    int e = 1;
    friend bool operator==(const Digit&, const Digit&) = default;
    friend auto operator<=>(const Digit&, const Digit&) = default;
};

using Word = std::vector<Digit>;

inline bool is_admissible(const Digit& dg) noexcept
{
    return dg.a >= 1 && (dg.a % 2 == 1) && (dg.e == 1 || dg.e == -1) && dg.a + dg.e >= 2;
}

inline bool is_admissible(const Word& w) noexcept
{
    if (w.empty())
        return false;
    for (const Digit& dg : w)
        if (!is_admissible(dg))
            return false;
    return true;
}

inline void require_admissible(const Word& w, const char* where)
{
    if (!is_admissible(w))
        throw Error(Errc::precondition, std::string(where) + ": word is empty or not OCF-admissible");
}

/// (-e_1)(-e_2)...(-e_n)
inline int sign_product(const Word& w) noexcept
{
    int s = 1;
    for (const Digit& dg : w)
        s *= -dg.e;
    return s;
}

/// True unless w is a k-fold repetition (k >= 2) of a shorter block.
inline bool is_primitive(const Word& w)
{
    const std::size_t n = w.size();
    if (n == 0)
        return false;
    std::vector<std::size_t> fail(n, 0);
    for (std::size_t i = 1, k = 0; i < n; ++i) {
        while (k > 0 && !(w[i] == w[k]))
            k = fail[k - 1];
        if (w[i] == w[k])
            ++k;
        fail[i] = k;
    }
    const std::size_t period = n - fail[n - 1];
    return period == n || n % period != 0;
}

/// Least block u with w = u^k.
inline Word primitive_root(const Word& w)
{
    const std::size_t n = w.size();
    for (std::size_t len = 1; len <= n; ++len) {
        if (n % len != 0)
            continue;
        bool ok = true;
        for (std::size_t i = len; i < n && ok; ++i)
            ok = w[i] == w[i - len];
        if (ok)
            return Word(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(len));
    }
    return w;
}

// ---------------------------------------------------------------------------
// Text forms

inline std::string to_string(const Digit& dg)
{
    return "(" + std::to_string(dg.a) + "," + (dg.e > 0 ? "+1" : "-1") + ")";
}

inline std::string to_string(const Word& w)
{
    std::string s;
    for (const Digit& dg : w)
        s += to_string(dg);
    return s;
}

/// Parses "(3,-1)(1,+1)...". Signs may be written 1, +1 or -1. Admissibility is
/// not checked here; callers decide which digit system applies.
inline Word parse_word(std::string_view text)
{
    Word w;
    std::size_t pos = 0;
    auto fail = [&](const char* msg) {
        throw Error(Errc::parse_error, "cannot parse word '" + std::string(text) + "': " + msg);
    };
    auto skip = [&] {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t'))
            ++pos;
    };
    auto integer = [&]() -> std::int64_t {
        skip();
        const std::size_t start = pos;
        if (pos < text.size() && (text[pos] == '+' || text[pos] == '-'))
            ++pos;
        const std::size_t digits = pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9')
            ++pos;
        if (digits == pos || pos - digits > 18)
            fail("expected an integer");
        std::string tok(text.substr(start, pos - start));
        skip();
        return std::stoll(tok);
    };
    skip();
    while (pos < text.size()) {
        if (text[pos] != '(')
            fail("expected '('");
        ++pos;
        const std::int64_t a = integer();
        if (pos >= text.size() || text[pos] != ',')
            fail("expected ','");
        ++pos;
        const std::int64_t e = integer();
        if (pos >= text.size() || text[pos] != ')')
            fail("expected ')'");
        ++pos;
        if (e != 1 && e != -1)
            fail("sign must be +1 or -1");
        w.push_back({a, static_cast<int>(e)});
        skip();
    }
    if (w.empty())
        fail("empty word");
    return w;
}

// ---------------------------------------------------------------------------
// Expansions

struct ExpansionResult {
    Word preperiod;
    Word period;
    bool purely_periodic = false;
};

inline nlohmann::json to_json(const ExpansionResult& r)
{
    return {{"preperiod", to_string(r.preperiod)}, {"period", to_string(r.period)},
            {"purely_periodic", r.purely_periodic}};
}

inline constexpr std::size_t default_max_steps = 10000;

/// One step of the odd Gauss map: the digit (a, e) and e/(x - a).
inline std::pair<Digit, Quadratic> ocf_step(const Quadratic& x)
{
    require_irrational(x, "ocf_step");
    if (x <= Quadratic(1))
        throw Error(Errc::domain, "ocf_step: x must exceed 1");
    const BigInt fl = x.floor();
    Digit dg;
    if (fl % 2 != 0) {
        dg = {to_int64(fl, "digit"), 1};
    } else {
        dg = {to_int64(fl + 1, "digit"), -1};
    }
    Quadratic next = Quadratic(dg.e) / (x - Quadratic(dg.a));
    return {dg, std::move(next)};
}

/// One step of the regular Gauss map on (1, inf): (floor x, +1) and 1/(x - floor x).
inline std::pair<Digit, Quadratic> rcf_step(const Quadratic& x)
{
    require_irrational(x, "rcf_step");
    if (x <= Quadratic(1))
        throw Error(Errc::domain, "rcf_step: x must exceed 1");
    const BigInt fl = x.floor();
    Quadratic next = (x - Quadratic(fl)).reciprocal();
    return {Digit{to_int64(fl, "digit"), 1}, std::move(next)};
}

/// One grotesque step on [G-2, G]: v = e/(a + v') with v' in [G-2, G).
inline std::pair<Digit, Quadratic> grotesque_step(const Quadratic& v)
{
    require_irrational(v, "grotesque_step");
    using golden::G;
    if (v < G() - Quadratic(2) || v > G())
        throw Error(Errc::domain, "grotesque_step: value outside [G-2, G]");
    const int e = v.sign() > 0 ? 1 : -1;
    const Quadratic t = Quadratic(e) / v;
    // a is the odd integer in (t - G, t - G + 2]
    // t may live in another field, so step down from floor(t) + 1 using ordering only
    const Quadratic shift = G() - Quadratic(2);
    BigInt a = t.floor() + 1;
    while (a % 2 == 0 || Quadratic(a) + shift > t)
        --a;
    const Digit dg{to_int64(a, "digit"), e};
    if (!is_admissible(dg))
        throw Error(Errc::domain, "grotesque_step: inadmissible digit");
    return {dg, t - Quadratic(a)};
}

namespace detail {

template <class Step>
ExpansionResult expand_with(const Quadratic& x0, std::size_t max_steps, Step step)
{
    std::unordered_map<Quadratic, std::size_t> seen;
    Word digits;
    Quadratic x = x0;
    for (std::size_t i = 0; i <= max_steps; ++i) {
        auto [it, fresh] = seen.emplace(x, i);
        if (!fresh) {
            const std::size_t start = it->second;
            ExpansionResult r;
            r.preperiod.assign(digits.begin(), digits.begin() + static_cast<std::ptrdiff_t>(start));
            r.period.assign(digits.begin() + static_cast<std::ptrdiff_t>(start), digits.end());
            r.purely_periodic = start == 0;
            return r;
        }
        if (i == max_steps)
            break;
        auto [dg, next] = step(x);
        digits.push_back(dg);
        x = std::move(next);
    }
    throw Error(Errc::period_not_found, "no period within " + std::to_string(max_steps) + " steps");
}

}  // namespace detail

inline ExpansionResult ocf_expand(const Quadratic& x, std::size_t max_steps = default_max_steps)
{
    require_irrational(x, "ocf_expand");
    return detail::expand_with(x, max_steps, [](const Quadratic& v) { return ocf_step(v); });
}

inline ExpansionResult rcf_expand(const Quadratic& x, std::size_t max_steps = default_max_steps)
{
    require_irrational(x, "rcf_expand");
    return detail::expand_with(x, max_steps, [](const Quadratic& v) { return rcf_step(v); });
}

inline ExpansionResult grotesque_expand(const Quadratic& v, std::size_t max_steps = default_max_steps)
{
    require_irrational(v, "grotesque_expand");
    return detail::expand_with(v, max_steps, [](const Quadratic& u) { return grotesque_step(u); });
}

// ---------------------------------------------------------------------------
// Convergents and evaluation

struct ConvergentPair {
    BigInt p;
    BigInt q;
};

/// Levels 0..n with p0 = 1, q0 = 0, p1 = a1, q1 = 1 and
/// p_k = a_k p_{k-1} + e_{k-1} p_{k-2}.
inline std::vector<ConvergentPair> convergents(const Word& w)
{
    std::vector<ConvergentPair> out;
    out.reserve(w.size() + 1);
    BigInt pm = 0, qm = 1;  // level -1
    BigInt p = 1, q = 0;    // level 0
    out.push_back({p, q});
    int prev_e = 1;
    for (const Digit& dg : w) {
        BigInt pn = dg.a * p + prev_e * pm;
        BigInt qn = dg.a * q + prev_e * qm;
        pm = std::move(p);
        qm = std::move(q);
        p = std::move(pn);
        q = std::move(qn);
        out.push_back({p, q});
        prev_e = dg.e;
    }
    return out;
}

/// Product of blocks (a_i, e_i; 1, 0).
inline Mat2 word_to_matrix(const Word& w)
{
    Mat2 m;
    for (const Digit& dg : w)
        m *= Mat2{dg.a, dg.e, 1, 0};
    return m;
}

/// a1 + e1/(a2 + ... + e_n/tail). Without a tail the expansion is cut after a_n.
inline Quadratic evaluate_finite(const Word& w, const std::optional<Quadratic>& tail = std::nullopt)
{
    if (w.empty())
        throw Error(Errc::precondition, "evaluate_finite: empty word");
    const Mat2 m = word_to_matrix(w);
    if (!tail) {
        // p_n / q_n: first column of the product
        if (m.c == 0)
            throw Error(Errc::pole, "evaluate_finite: pole");
        return Quadratic(Rational(m.a, m.c));
    }
    if (tail->is_zero())
        throw Error(Errc::pole, "evaluate_finite: zero tail");
    return qi_mobius(m, *tail);
}

/// Larger root of c t^2 + (d - a) t - b = 0 and the smaller one.
inline std::pair<Quadratic, Quadratic> mobius_fixed_points(const Mat2& m)
{
    if (m.c == 0)
        throw Error(Errc::degenerate_input, "fixed points: c = 0");
    const BigInt tr = m.trace();
    const BigInt disc = tr * tr - 4 * m.det();
    if (disc <= 0 || is_perfect_square(disc))
        throw Error(Errc::degenerate_input, "fixed points: matrix is not hyperbolic");
    const BigInt am = m.a - m.d;
    Quadratic hi = Quadratic::make(am, 1, disc, 2 * m.c);
    Quadratic lo = Quadratic::make(am, -1, disc, 2 * m.c);
    if (hi < lo)
        std::swap(hi, lo);
    return {hi, lo};
}

/// The purely periodic value [overline(w)] (> 1).
inline Quadratic periodic_value(const Word& w)
{
    require_admissible(w, "periodic_value");
    return mobius_fixed_points(word_to_matrix(w)).first;
}

/// Conjugate of [overline(period)], computed independently from the reversed
/// period's grotesque fixed point.
inline Quadratic galois_conjugate(const Word& period)
{
    require_admissible(period, "galois_conjugate");
    // t -> e_n/(a_n + ... e_1/(a_1 + t)): compose (0, e_i; 1, a_i) for i = 1..n
    Mat2 m;
    for (const Digit& dg : period)
        m = Mat2{0, dg.e, 1, dg.a} * m;
    const auto [hi, lo] = mobius_fixed_points(m);
    using golden::G;
    const Quadratic lo_bound = G() - Quadratic(2);
    auto inside = [&](const Quadratic& t) { return t >= lo_bound && t <= G(); };
    const Quadratic& t = inside(hi) ? hi : lo;
    if (!inside(t))
        throw Error(Errc::domain, "galois_conjugate: no fixed point in [G-2, G]");
    return -t;
}

// ---------------------------------------------------------------------------
// Digit recovery from convergents

/// Position of a ratio p/q > g among the sets
///   F1 = (2k+g, 2k+1), F2 = [2k-1, 2k), F3 = [2k, 2k+g).
enum class RatioClass { F1, F2, F3 };

struct RatioDigits {
    RatioClass cls;
    BigInt a;  // digit
    int e;     // sign
};

inline RatioDigits classify_ratio(const BigInt& num, const BigInt& den)
{
    if (den <= 0 || num <= 0)
        throw Error(Errc::not_convergent_pair, "ratio must be positive");
    const Quadratic r(Rational(num, den));
    if (r <= golden::g())
        throw Error(Errc::not_convergent_pair, "ratio does not exceed g");
    const BigInt fl = floor_div(num, den);
    if (fl % 2 != 0)
        return {RatioClass::F2, fl, 1};
    if (fl >= 2 && r - Quadratic(fl) < golden::g())
        return {RatioClass::F3, fl - 1, 1};
    return {RatioClass::F1, fl + 1, -1};
}

/// (a_n, e_{n-1}) from p_n and p_{n-1}.
inline std::pair<std::int64_t, int> digits_from_convergents(const BigInt& p_n, const BigInt& p_prev)
{
    const RatioDigits rd = classify_ratio(p_n, p_prev);
    return {to_int64(rd.a, "digit"), rd.e};
}

// ---------------------------------------------------------------------------
// Reduction classes

struct ReducedFlags {
    bool R = false;  // regular
    bool E = false;
    bool O = false;
    bool B = false;
    friend bool operator==(const ReducedFlags&, const ReducedFlags&) = default;
};

inline std::string to_string(const ReducedFlags& f)
{
    std::string s;
    if (f.R)
        s += 'R';
    if (f.E)
        s += 'E';
    if (f.O)
        s += 'O';
    if (f.B)
        s += 'B';
    return s;
}

/// Interval tests on the conjugate. O uses (-G, 2-G].
inline ReducedFlags classify_reduced(const Quadratic& x)
{
    require_irrational(x, "classify_reduced");
    if (x <= Quadratic(1))
        throw Error(Errc::domain, "classify_reduced: x must exceed 1");
    const Quadratic s = x.conjugate();
    const Quadratic one(1), zero(0), minus_one(-1);
    ReducedFlags f;
    f.R = s >= minus_one && s <= zero;
    f.E = s >= minus_one && s <= one;
    f.B = s >= zero && s <= one;
    f.O = s > -golden::G() && s <= Quadratic(2) - golden::G();
    return f;
}

// ---------------------------------------------------------------------------
// Natural extension and the unit-interval map

/// (u, v) -> (T_o(u), e_1(u)/(a_1(u) + v)) for u > 1, v in [G-2, G].
inline std::pair<Quadratic, Quadratic> natural_extension_step(const Quadratic& u, const Quadratic& v)
{
    if (v < golden::G() - Quadratic(2) || v > golden::G())
        throw Error(Errc::domain, "natural_extension_step: v outside [G-2, G]");
    auto [dg, next] = ocf_step(u);
    return {std::move(next), Quadratic(dg.e) / (Quadratic(dg.a) + v)};
}

/// The odd Gauss map on (0, 1): e(1/x - 2k + 1) on its branch B(e, k).
inline Quadratic unit_gauss_step(const Quadratic& x)
{
    if (x <= Quadratic(0) || x >= Quadratic(1))
        throw Error(Errc::domain, "unit_gauss_step: x outside (0, 1)");
    const Quadratic y = x.reciprocal();
    const BigInt fl = y.floor();
    if (y.is_rational() && Quadratic(fl) == y)
        throw Error(Errc::domain, "unit_gauss_step: x is a branch endpoint");
    if (fl % 2 != 0)
        return y - Quadratic(fl);
    return Quadratic(BigInt(fl + 1)) - y;
}

/// Floating counterpart for orbit sampling; endpoints map to 0.
inline double unit_gauss_step(double x)
{
    const double y = 1.0 / x;
    const double fl = std::floor(y);
    if (std::fmod(fl, 2.0) != 0.0)
        return y - fl;
    return fl + 1.0 - y;
}

// ---------------------------------------------------------------------------
// Insertion identity
//   A + eps/(B + xi) = (A + eps) - eps/(1 + 1/(B - 1 + xi)),  xi in [-1, 1]

/// Rewrites digits index, index+1 = (A, eps), (B, e') into
/// (A + eps, -eps), (1, +1), (B - 1, e'). Digits need not be odd. When a tail is
/// given, xi is evaluated exactly and must lie in [-1, 1]; without a tail the
/// word is read as finite (xi after the last digit is 0).
inline Word insert_at(const Word& w, std::size_t index, int epsilon, const std::optional<Quadratic>& tail = std::nullopt)
{
    if (epsilon != 1 && epsilon != -1)
        throw Error(Errc::inapplicable_site, "insert_at: epsilon must be +1 or -1");
    if (index + 1 >= w.size())
        throw Error(Errc::inapplicable_site, "insert_at: site needs a following digit");
    const Digit first = w[index];
    const Digit second = w[index + 1];
    if (first.e != epsilon)
        throw Error(Errc::inapplicable_site, "insert_at: sign at the site differs from epsilon");
    if (second.a < 1)
        throw Error(Errc::inapplicable_site, "insert_at: B must be at least 1");
    if (index + 2 < w.size() || tail) {
        Quadratic xi(0);
        if (index + 2 < w.size()) {
            const Word rest(w.begin() + static_cast<std::ptrdiff_t>(index) + 2, w.end());
            xi = Quadratic(second.e) / evaluate_finite(rest, tail);
        } else {
            xi = Quadratic(second.e) / *tail;
        }
        if (xi < Quadratic(-1) || xi > Quadratic(1))
            throw Error(Errc::inapplicable_site, "insert_at: xi outside [-1, 1]");
    }
    Word out(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(index));
    out.push_back({first.a + epsilon, -epsilon});
    out.push_back({1, 1});
    out.push_back({second.a - 1, second.e});
    out.insert(out.end(), w.begin() + static_cast<std::ptrdiff_t>(index) + 2, w.end());
    return out;
}

}  // namespace ocf
