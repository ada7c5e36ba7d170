#pragma once

// Arithmetic functions, Kloosterman sums, modular-hyperbola lattice counts,
// closed-form main terms and the invariant measures.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "ocf/bigint.hpp"
#include "ocf/error.hpp"
#include "ocf/qfield.hpp"

namespace ocf {

namespace constants {
inline constexpr long double zeta2 = 1.644934066848226436472415166646025189219L;
inline constexpr long double log_G = 0.4812118250596034474977589134243684231352L;
inline constexpr long double euler_gamma = 0.5772156649015328606065120900824024310422L;
inline constexpr long double zeta2_log_derivative = -0.5699609930945328063998643600197300024035L;  // zeta'(2)/zeta(2)
inline constexpr long double G = 1.618033988749894848204586834365638117720L;
inline constexpr long double g = 0.618033988749894848204586834365638117720L;
inline constexpr long double log2 = 0.6931471805599453094172321214581765680755L;
}  // namespace constants

// ---------------------------------------------------------------------------
// Arithmetic functions

namespace detail {
inline void require_positive(std::int64_t n, const char* what)
{
    if (n <= 0)
        throw Error(Errc::precondition, std::string(what) + ": argument must be positive");
}
}  // namespace detail

inline std::int64_t euler_phi(std::int64_t n)
{
    detail::require_positive(n, "phi");
    std::int64_t out = n;
    for (std::int64_t p = 2; p * p <= n; ++p) {
        if (n % p != 0)
            continue;
        while (n % p == 0)
            n /= p;
        out -= out / p;
    }
    if (n > 1)
        out -= out / n;
    return out;
}

/// Number of divisors.
inline std::int64_t sigma0(std::int64_t n)
{
    detail::require_positive(n, "sigma0");
    std::int64_t out = 1;
    for (std::int64_t p = 2; p * p <= n; ++p) {
        int k = 0;
        while (n % p == 0) {
            n /= p;
            ++k;
        }
        out *= k + 1;
    }
    if (n > 1)
        out *= 2;
    return out;
}

inline std::int64_t gcd3(std::int64_t a, std::int64_t b, std::int64_t c) { return std::gcd(std::gcd(a, b), c); }

/// phi(0..n) by sieve.
inline std::vector<std::int64_t> phi_table(std::int64_t n)
{
    std::vector<std::int64_t> phi(static_cast<std::size_t>(n + 1));
    std::iota(phi.begin(), phi.end(), std::int64_t{0});
    for (std::int64_t p = 2; p <= n; ++p)
        if (phi[p] == p)
            for (std::int64_t k = p; k <= n; k += p)
                phi[k] -= phi[k] / p;
    return phi;
}

// ---------------------------------------------------------------------------
// Totient sums

enum class TotientVariant {
    even_phi2m_over_m,   // sum_{m <= N even} phi(2m)/m
    even_phi2m,          // sum_{m <= N even} phi(2m)
    even_phi2m_over_m2,  // sum_{m <= N even} phi(2m)/m^2
    odd_phi,             // sum_{m <= N odd} phi(m)
    odd_phi_over_m,      // sum_{m <= N odd} phi(m)/m
    odd_phi_over_m2,     // sum_{m <= N odd} phi(m)/m^2
};

inline const char* to_string(TotientVariant v)
{
    switch (v) {
    case TotientVariant::even_phi2m_over_m: return "even_phi2m_over_m";
    case TotientVariant::even_phi2m: return "even_phi2m";
    case TotientVariant::even_phi2m_over_m2: return "even_phi2m_over_m2";
    case TotientVariant::odd_phi: return "odd_phi";
    case TotientVariant::odd_phi_over_m: return "odd_phi_over_m";
    case TotientVariant::odd_phi_over_m2: return "odd_phi_over_m2";
    }
    return "?";
}

inline TotientVariant parse_totient_variant(std::string_view s)
{
    for (TotientVariant v : {TotientVariant::even_phi2m_over_m, TotientVariant::even_phi2m, TotientVariant::even_phi2m_over_m2,
                             TotientVariant::odd_phi, TotientVariant::odd_phi_over_m, TotientVariant::odd_phi_over_m2})
        if (s == to_string(v))
            return v;
    throw Error(Errc::precondition, "unknown totient variant '" + std::string(s) + "'");
}

struct TotientSum {
    std::optional<Rational> exact;  // present when N <= exact_cap
    long double value = 0;          // floating sum (exact for the integer variants)
    long double main_term = 0;
    long double residual() const { return value - main_term; }
};

/// Rational sums grow huge denominators; beyond this N only the floating sum is kept.
inline constexpr std::int64_t totient_exact_cap = 2000;

inline long double totient_main_term(TotientVariant v, std::int64_t N)
{
    using namespace constants;
    const long double n = static_cast<long double>(N);
    const long double c = 2.0L / (3.0L * zeta2);
    switch (v) {
    case TotientVariant::even_phi2m_over_m: return 2.0L * n / (3.0L * zeta2);
    case TotientVariant::even_phi2m: return n * n / (3.0L * zeta2);
    case TotientVariant::even_phi2m_over_m2: return c * (std::log(n) + euler_gamma - 4.0L * log2 / 3.0L - zeta2_log_derivative);
    case TotientVariant::odd_phi: return n * n / (3.0L * zeta2);
    case TotientVariant::odd_phi_over_m: return 2.0L * n / (3.0L * zeta2);
    case TotientVariant::odd_phi_over_m2: return c * (std::log(n) + euler_gamma + 2.0L * log2 / 3.0L - zeta2_log_derivative);
    }
    return 0;
}

inline TotientSum totient_sum(TotientVariant v, std::int64_t N)
{
    detail::require_positive(N, "totient_sum");
    const bool even = v == TotientVariant::even_phi2m_over_m || v == TotientVariant::even_phi2m ||
                      v == TotientVariant::even_phi2m_over_m2;
    const int power = (v == TotientVariant::even_phi2m || v == TotientVariant::odd_phi) ? 0
                      : (v == TotientVariant::even_phi2m_over_m || v == TotientVariant::odd_phi_over_m) ? 1
                                                                                                         : 2;
    const std::vector<std::int64_t> phi = phi_table(2 * N);
    const bool keep_exact = N <= totient_exact_cap || power == 0;
    Rational exact = 0;
    long double value = 0, comp = 0;  // Kahan
    for (std::int64_t m = even ? 2 : 1; m <= N; m += 2) {
        const std::int64_t f = even ? phi[2 * m] : phi[m];
        const long double mm = static_cast<long double>(m);
        const long double term = power == 0 ? f : (power == 1 ? f / mm : f / (mm * mm));
        const long double y = term - comp;
        const long double t = value + y;
        comp = (t - value) - y;
        value = t;
        if (keep_exact)
            exact += power == 0 ? Rational(f) : Rational(f, power == 1 ? BigInt(m) : BigInt(m) * m);
    }
    TotientSum out;
    if (keep_exact) {
        out.exact = exact;
        if (power == 0)
            value = static_cast<long double>(numerator(exact));
    }
    out.value = value;
    out.main_term = totient_main_term(v, N);
    return out;
}

// ---------------------------------------------------------------------------
// Kloosterman sums

namespace detail {
inline std::int64_t inverse_mod(std::int64_t a, std::int64_t m)
{
    std::int64_t g = m, x = 0, x1 = 1, r = ((a % m) + m) % m;
    while (r != 0) {
        const std::int64_t q = g / r;
        std::int64_t t = g - q * r;
        g = r;
        r = t;
        t = x - q * x1;
        x = x1;
        x1 = t;
    }
    if (g != 1)
        throw Error(Errc::precondition, "not invertible");
    return ((x % m) + m) % m;
}
}  // namespace detail

/// K_{q,h}(m, n) = sum over x y = h (mod q) of e((m x + n y)/q).
inline std::complex<double> kloosterman(std::int64_t q, std::int64_t h, std::int64_t m, std::int64_t n)
{
    if (q < 2)
        throw Error(Errc::precondition, "kloosterman: q must be at least 2");
    if (std::gcd(((h % q) + q) % q, q) != 1)
        throw Error(Errc::precondition, "kloosterman: gcd(h, q) must be 1");
    const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
    long double re = 0, im = 0;
    const std::int64_t hq = ((h % q) + q) % q;
    for (std::int64_t x = 1; x < q; ++x) {
        if (std::gcd(x, q) != 1)
            continue;
        const std::int64_t y = static_cast<std::int64_t>((static_cast<__int128>(hq) * detail::inverse_mod(x, q)) % q);
        const std::int64_t k = ((static_cast<__int128>(m) * x + static_cast<__int128>(n) * y) % q + q) % q;
        const long double t = two_pi * static_cast<long double>(k) / static_cast<long double>(q);
        re += std::cos(t);
        im += std::sin(t);
    }
    return {static_cast<double>(re), static_cast<double>(im)};
}

inline double weil_bound(std::int64_t q, std::int64_t m, std::int64_t n)
{
    const std::int64_t d = gcd3(q, std::llabs(m), std::llabs(n));
    return static_cast<double>(sigma0(q)) * std::sqrt(static_cast<double>(q)) * std::sqrt(static_cast<double>(d));
}

inline bool weil_check(std::int64_t q, std::int64_t h, std::int64_t m, std::int64_t n)
{
    return std::abs(kloosterman(q, h, m, n)) <= weil_bound(q, m, n) + 1e-9;
}

// ---------------------------------------------------------------------------
// Regions and modular hyperbolas

/// y >= c + k x (lower) or y <= c + k x (upper).
struct AffineBound {
    Quadratic c;
    std::int64_t k = 0;
    bool inclusive = true;
};

struct Region {
    enum class Kind { rectangle, trapezoid, triangle, under_line };
    Kind kind = Kind::rectangle;
    Quadratic x_lo, x_hi;
    bool x_lo_inclusive = true, x_hi_inclusive = true;
    std::vector<AffineBound> lower, upper;

    /// Exact integer range of x.
    std::pair<std::int64_t, std::int64_t> x_range() const;
    /// Lebesgue area (floating, exact for the piecewise-linear boundary).
    double area() const;

    static Region rectangle(const Quadratic& x1, const Quadratic& x2, const Quadratic& y1, const Quadratic& y2,
                            bool right_open = false)
    {
        Region r;
        r.kind = Kind::rectangle;
        r.x_lo = x1;
        r.x_hi = x2;
        r.x_hi_inclusive = !right_open;
        r.lower.push_back({y1, 0, true});
        r.upper.push_back({y2, 0, !right_open});
        return r;
    }

    /// {m beta <= x <= N, 0 <= y <= N - x}
    static Region triangle(const Quadratic& x_start, std::int64_t N)
    {
        Region r;
        r.kind = Kind::triangle;
        r.x_lo = x_start;
        r.x_hi = Quadratic(N);
        r.lower.push_back({Quadratic(0), 0, true});
        r.upper.push_back({Quadratic(N), -1, true});
        return r;
    }

    /// {x in I, 0 <= y <= c + slope x}
    static Region under_line(const Quadratic& x1, const Quadratic& x2, const Quadratic& c, std::int64_t slope)
    {
        Region r;
        r.kind = Kind::under_line;
        r.x_lo = x1;
        r.x_hi = x2;
        r.lower.push_back({Quadratic(0), 0, true});
        r.upper.push_back({c, slope, true});
        return r;
    }

    /// Omega_m(e, alpha, beta; N) = {x >= m beta, 0 <= y <= m/alpha, x + e y <= N}.
    static Region trapezoid(std::int64_t m, int e, const Quadratic& alpha, const Quadratic& beta, std::int64_t N)
    {
        if (e != 1 && e != -1)
            throw Error(Errc::precondition, "trapezoid: e must be +1 or -1");
        Region r;
        r.kind = Kind::trapezoid;
        const Quadratic y_top = Quadratic(m) / alpha;
        r.x_lo = Quadratic(m) * beta;
        r.lower.push_back({Quadratic(0), 0, true});
        r.upper.push_back({y_top, 0, true});
        if (e == 1) {
            r.x_hi = Quadratic(N);
            r.upper.push_back({Quadratic(N), -1, true});
        } else {
            r.x_hi = Quadratic(N) + y_top;
            r.lower.push_back({Quadratic(-N), 1, true});
        }
        return r;
    }
};

namespace detail {

inline std::int64_t lower_int(const Quadratic& v, bool inclusive)
{
    const BigInt f = v.floor();
    if (!inclusive || Quadratic(f) != v)
        return to_int64(f) + 1;
    return to_int64(f);
}

inline std::int64_t upper_int(const Quadratic& v, bool inclusive)
{
    const BigInt c = v.ceil();
    if (!inclusive || Quadratic(c) != v)
        return to_int64(c) - 1;
    return to_int64(c);
}

}  // namespace detail

inline std::pair<std::int64_t, std::int64_t> Region::x_range() const
{
    return {detail::lower_int(x_lo, x_lo_inclusive), detail::upper_int(x_hi, x_hi_inclusive)};
}

inline double Region::area() const
{
    const double a = x_lo.to_double(), b = x_hi.to_double();
    if (!(b > a))
        return 0.0;
    struct Line {
        double c, k;
    };
    std::vector<Line> lo, up;
    for (const auto& l : lower)
        lo.push_back({l.c.to_double(), static_cast<double>(l.k)});
    for (const auto& u : upper)
        up.push_back({u.c.to_double(), static_cast<double>(u.k)});
    std::vector<double> xs{a, b};
    std::vector<Line> all(lo);
    all.insert(all.end(), up.begin(), up.end());
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j)
            if (all[i].k != all[j].k) {
                const double x = (all[j].c - all[i].c) / (all[i].k - all[j].k);
                if (x > a && x < b)
                    xs.push_back(x);
            }
    std::sort(xs.begin(), xs.end());
    auto height = [&](double x) {
        double L = -std::numeric_limits<double>::infinity(), U = std::numeric_limits<double>::infinity();
        for (const Line& l : lo)
            L = std::max(L, l.c + l.k * x);
        for (const Line& u : up)
            U = std::min(U, u.c + u.k * x);
        return std::max(0.0, U - L);
    };
    double area = 0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
        area += 0.5 * (xs[i + 1] - xs[i]) * (height(xs[i]) + height(xs[i + 1]));
    return area;
}

/// N_{m,h}(region) = #{(x, y) in region : x y = h mod m}, exact.
inline std::int64_t hyperbola_count(std::int64_t m, std::int64_t h, const Region& region)
{
    if (m < 1)
        throw Error(Errc::precondition, "hyperbola_count: m must be positive");
    const std::int64_t hm = ((h % m) + m) % m;
    if (std::gcd(hm, m) != 1 && m > 1)
        throw Error(Errc::precondition, "hyperbola_count: gcd(h, m) must be 1");
    if (region.lower.empty() || region.upper.empty())
        throw Error(Errc::precondition, "hyperbola_count: region must be bounded in y");
    struct IntBound {
        std::int64_t c, k;
    };
    std::vector<IntBound> lo, up;
    // floor/ceil of c + k x equal floor/ceil of c shifted by the integer k x
    for (const auto& l : region.lower)
        lo.push_back({detail::lower_int(l.c, l.inclusive), l.k});
    for (const auto& u : region.upper)
        up.push_back({detail::upper_int(u.c, u.inclusive), u.k});
    // y = h x^{-1} mod m, tabulated per residue of x
    std::vector<std::int64_t> target(static_cast<std::size_t>(m), -1);
    for (std::int64_t r = 0; r < m; ++r)
        if (m == 1)
            target[0] = 0;
        else if (std::gcd(r, m) == 1)
            target[r] = static_cast<std::int64_t>((static_cast<__int128>(hm) * detail::inverse_mod(r, m)) % m);
    const auto [x0, x1] = region.x_range();
    std::int64_t total = 0;
    for (std::int64_t x = x0; x <= x1; ++x) {
        const std::int64_t t = target[((x % m) + m) % m];
        if (t < 0)
            continue;
        std::int64_t ylo = std::numeric_limits<std::int64_t>::min(), yhi = std::numeric_limits<std::int64_t>::max();
        for (const auto& l : lo)
            ylo = std::max(ylo, l.c + l.k * x);
        for (const auto& u : up)
            yhi = std::min(yhi, u.c + u.k * x);
        if (yhi < ylo)
            continue;
        auto fdiv = [](std::int64_t a, std::int64_t b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); };
        total += fdiv(yhi - t, m) - fdiv(ylo - 1 - t, m);
    }
    return total;
}

/// phi(m)/m^2 times the area.
inline double hyperbola_main_term(std::int64_t m, const Region& region)
{
    const double f = static_cast<double>(euler_phi(m)) / (static_cast<double>(m) * static_cast<double>(m));
    return f * region.area();
}

/// Error envelope C m^{0.6} (1 + |I1|/m)(1 + |I2|/m) for rectangles.
inline double hyperbola_envelope(double C, std::int64_t m, double len1, double len2)
{
    const double mm = static_cast<double>(m);
    return C * std::pow(mm, 0.6) * (1.0 + len1 / mm) * (1.0 + len2 / mm);
}

// ---------------------------------------------------------------------------
// Main terms

struct MainTermParams {
    double N = 0;
    double alpha = 1;
    double beta = 1;
    double beta1 = static_cast<double>(constants::G + 1);
    double beta2 = static_cast<double>(constants::G - 1);
};

/// Selectors: "S+1", "S-1", "A+1" / "A-1" (each triple set), "estimate", "theorem".
inline double main_term(std::string_view selector, const MainTermParams& p)
{
    const long double n2 = static_cast<long double>(p.N) * p.N;
    const long double z4 = 4.0L * constants::zeta2;
    auto need = [](bool ok, const char* msg) {
        if (!ok)
            throw Error(Errc::precondition, std::string("main_term: ") + msg);
    };
    need(p.N > 0, "N must be positive");
    const long double ab = static_cast<long double>(p.alpha) * p.beta;
    if (selector == "S+1" || selector == "A+1") {
        need(p.alpha >= 1 && ab > 0, "need alpha >= 1 and beta > 0");
        const long double v = n2 / z4 * std::log((ab + 1) / ab);
        return static_cast<double>(selector == "S+1" ? v : v / 3);
    }
    if (selector == "S-1" || selector == "A-1") {
        need(p.alpha >= 1 && ab > 1, "need alpha >= 1 and alpha*beta > 1");
        const long double v = n2 / z4 * std::log(ab / (ab - 1));
        return static_cast<double>(selector == "S-1" ? v : v / 3);
    }
    if (selector == "estimate")
        return static_cast<double>(3.0L * constants::log_G / z4 * n2);
    if (selector == "theorem") {
        const long double a1 = static_cast<long double>(p.alpha) * p.beta1;
        const long double a2 = static_cast<long double>(p.alpha) * p.beta2;
        need(p.alpha >= 1 && a1 > 1 && a2 > 0, "parameters out of range");
        return static_cast<double>(n2 / z4 * std::log((a1 / (a1 - 1)) * ((a2 + 1) / a2)));
    }
    throw Error(Errc::precondition, "main_term: unknown selector '" + std::string(selector) + "'");
}

// ---------------------------------------------------------------------------
// Measures

enum class MeasureId { mu_o, mu_tilde_o, mu_G, mu_o_unit };

inline MeasureId parse_measure(std::string_view s)
{
    if (s == "mu_o")
        return MeasureId::mu_o;
    if (s == "mu_tilde_o")
        return MeasureId::mu_tilde_o;
    if (s == "mu_G")
        return MeasureId::mu_G;
    if (s == "mu_o_unit")
        return MeasureId::mu_o_unit;
    throw Error(Errc::precondition, "unknown measure '" + std::string(s) + "'");
}

/// Box [x1, x2] x [y1, y2]; x2 may be +infinity. One-dimensional measures use x only.
struct MeasureRegion {
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
};

namespace detail {
inline const double kG = static_cast<double>(constants::G);
inline const double kNorm = 3.0 * static_cast<double>(constants::log_G);
inline constexpr double kTol = 1e-12;
}  // namespace detail

/// Density of mu_o on [1, inf): marginal of 1/(x+y)^2 over y in [G-2, G].
inline double mu_o_density(double x)
{
    return (1.0 / (x + detail::kG - 2.0) - 1.0 / (x + detail::kG)) / detail::kNorm;
}

inline double mu_tilde_o_density(double x, double y) { return 1.0 / ((x + y) * (x + y)) / detail::kNorm; }

inline double mu_G_density(double x) { return 1.0 / (x + 1.0) / detail::kNorm; }

inline double mu_o_unit_density(double x)
{
    return (1.0 / (detail::kG - 1.0 + x) + 1.0 / (detail::kG + 1.0 - x)) / detail::kNorm;
}

/// mu_o([alpha, inf)).
inline double mu_o_tail(double alpha)
{
    if (alpha < 1.0 - detail::kTol)
        throw Error(Errc::domain, "mu_o: alpha must be at least 1");
    const double G = detail::kG;
    return std::log((G + 1.0) / ((G + 1.0) * alpha - 1.0) * ((G - 1.0) * alpha + 1.0) / (G - 1.0)) / detail::kNorm;
}

inline double measure_mass(MeasureId id, const MeasureRegion& r)
{
    const double G = detail::kG;
    auto check = [](bool ok) {
        if (!ok)
            throw Error(Errc::domain, "measure_mass: region outside the measure's domain");
    };
    const bool x_inf = std::isinf(r.x2);
    switch (id) {
    case MeasureId::mu_o: {
        check(r.x1 >= 1.0 - detail::kTol && r.x2 >= r.x1);
        if (x_inf)
            return mu_o_tail(r.x1);
        return mu_o_tail(r.x1) - mu_o_tail(r.x2);
    }
    case MeasureId::mu_tilde_o: {
        check(r.x1 >= 1.0 - detail::kTol && r.x2 >= r.x1 && r.y1 >= G - 2.0 - detail::kTol && r.y2 <= G + detail::kTol &&
              r.y2 >= r.y1);
        // integral over x of 1/(x+y1) - 1/(x+y2)
        const double tail = std::log((r.x1 + r.y2) / (r.x1 + r.y1));
        if (x_inf)
            return tail / detail::kNorm;
        return (tail - std::log((r.x2 + r.y2) / (r.x2 + r.y1))) / detail::kNorm;
    }
    case MeasureId::mu_G: {
        check(r.x1 >= G - 2.0 - detail::kTol && r.x2 <= G + detail::kTol && r.x2 >= r.x1);
        return std::log((1.0 + r.x2) / (1.0 + r.x1)) / detail::kNorm;
    }
    case MeasureId::mu_o_unit: {
        check(r.x1 >= -detail::kTol && r.x2 <= 1.0 + detail::kTol && r.x2 >= r.x1);
        return (std::log((G - 1.0 + r.x2) / (G - 1.0 + r.x1)) + std::log((G + 1.0 - r.x1) / (G + 1.0 - r.x2))) /
               detail::kNorm;
    }
    }
    return 0;
}

/// Numerical integral of the density over the region (reference for measure_mass).
inline double measure_quadrature(MeasureId id, const MeasureRegion& r)
{
    boost::math::quadrature::tanh_sinh<double> ts;
    switch (id) {
    case MeasureId::mu_o:
        if (std::isinf(r.x2)) {
            boost::math::quadrature::exp_sinh<double> es;
            return es.integrate([&](double t) { return mu_o_density(r.x1 + t); }, 0.0, std::numeric_limits<double>::infinity());
        }
        return ts.integrate(mu_o_density, r.x1, r.x2);
    case MeasureId::mu_tilde_o: {
        auto inner = [&](double x) {
            return ts.integrate([&](double y) { return mu_tilde_o_density(x, y); }, r.y1, r.y2);
        };
        if (std::isinf(r.x2)) {
            boost::math::quadrature::exp_sinh<double> es;
            return es.integrate([&](double t) { return inner(r.x1 + t); }, 0.0, std::numeric_limits<double>::infinity());
        }
        return ts.integrate(inner, r.x1, r.x2);
    }
    case MeasureId::mu_G: return ts.integrate(mu_G_density, r.x1, r.x2);
    case MeasureId::mu_o_unit: return ts.integrate(mu_o_unit_density, r.x1, r.x2);
    }
    return 0;
}

}  // namespace ocf
