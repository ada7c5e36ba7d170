#pragma once

// Matrix side of the word/matrix correspondence.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ocf/cf.hpp"
#include "ocf/mat2.hpp"
#include "ocf/qfield.hpp"

namespace ocf {

/// Reduction mod 2 of an integer matrix, among I, A = (0 1; 1 1), B = (1 1; 1 0).
enum class CongruenceClass { I, A, B, other };

inline const char* to_string(CongruenceClass c)
{
    switch (c) {
    case CongruenceClass::I: return "I";
    case CongruenceClass::A: return "A";
    case CongruenceClass::B: return "B";
    case CongruenceClass::other: return "other";
    }
    return "other";
}

inline CongruenceClass mod2_class(const Mat2& m)
{
    auto bit = [](const BigInt& v) { return static_cast<int>(v % 2 != 0); };
    const int a = bit(m.a), b = bit(m.b), c = bit(m.c), d = bit(m.d);
    if (a == 1 && b == 0 && c == 0 && d == 1)
        return CongruenceClass::I;
    if (a == 0 && b == 1 && c == 1 && d == 1)
        return CongruenceClass::A;
    if (a == 1 && b == 1 && c == 1 && d == 0)
        return CongruenceClass::B;
    return CongruenceClass::other;
}

/// Product in the cyclic group {I, B, A = B^2}; `other` absorbs.
inline CongruenceClass operator*(CongruenceClass x, CongruenceClass y)
{
    auto power = [](CongruenceClass c) { return c == CongruenceClass::I ? 0 : (c == CongruenceClass::B ? 1 : 2); };
    if (x == CongruenceClass::other || y == CongruenceClass::other)
        return CongruenceClass::other;
    static constexpr CongruenceClass by_power[3] = {CongruenceClass::I, CongruenceClass::B, CongruenceClass::A};
    return by_power[(power(x) + power(y)) % 3];
}

namespace detail {

/// a/b > bound for a, b > 0, bound in Q(sqrt 5).
inline bool ratio_exceeds(const BigInt& a, const BigInt& b, const Quadratic& bound)
{
    if (b <= 0)
        return false;
    return Quadratic(Rational(a, b)) > bound;
}

/// Shape shared by both signs: (a, b; c, d) with the sign of b and d already removed.
inline bool in_S_shape(const Mat2& m, const Quadratic& ratio_bound)
{
    if (mod2_class(m) == CongruenceClass::other)
        return false;
    const BigInt det = m.det();
    if (det != 1 && det != -1)
        return false;
    if (m.d < 0 || m.d > m.b || m.c < 1 || m.c > m.a)
        return false;
    return ratio_exceeds(m.a, m.b, ratio_bound);
}

inline Mat2 flip_second_column(const Mat2& m) { return {m.a, -m.b, m.c, -m.d}; }

}  // namespace detail

/// sigma in S: class I, A or B mod 2, det +-1, 0 <= d <= b, 1 <= c <= a, a/b > g.
inline bool in_S(const Mat2& m) { return detail::in_S_shape(m, golden::g()); }

/// e = +1: S itself. e = -1: (a, -b; c, -d) with the same shape and a/b > G + 1.
inline bool in_S_e(const Mat2& m, int e)
{
    if (e == 1)
        return in_S(m);
    if (e == -1)
        return detail::in_S_shape(detail::flip_second_column(m), golden::G() + Quadratic(1));
    throw Error(Errc::precondition, "in_S_e: e must be +1 or -1");
}

/// Building block M(a, e) = (a, 1; e, 0).
struct Block {
    std::int64_t k = 1;
    int e = 1;
    Mat2 matrix() const { return {k, 1, e, 0}; }
    friend bool operator==(const Block&, const Block&) = default;
};

inline std::string to_string(const Block& blk)
{
    return "M(" + std::to_string(blk.k) + "," + (blk.e > 0 ? "+1" : "-1") + ")";
}

inline Mat2 multiply_blocks(const std::vector<Block>& blocks)
{
    Mat2 m;
    for (const Block& blk : blocks)
        m *= blk.matrix();
    return m;
}

/// Unique factorization sigma = M(k_n, 1) ... M(k_0, e_0) M(k, e) of sigma in S.
inline std::vector<Block> factor_matrix(const Mat2& sigma)
{
    if (!in_S(sigma))
        throw Error(Errc::not_in_set, "factor_matrix: matrix " + to_string(sigma) + " is not in S");
    std::vector<Block> tail;  // collected right to left
    Mat2 s = sigma;
    for (;;) {
        if (s.a == 1) {
            tail.push_back({1, 1});
            break;
        }
        if (s.b == 1) {
            if (s.d == 0) {
                tail.push_back({to_int64(s.a, "digit"), 1});
            } else {
                tail.push_back({to_int64(s.c, "digit"), 1});
                tail.push_back({1, 1});
            }
            break;
        }
        const RatioDigits rd = classify_ratio(s.a, s.b);
        const int e = rd.e;
        tail.push_back({to_int64(rd.a, "digit"), e});
        // s * M(k, e)^{-1} = (b, e(a - k b); d, e(c - k d))
        Mat2 next{s.b, e * (s.a - rd.a * s.b), s.d, e * (s.c - rd.a * s.d)};
        s = std::move(next);
    }
    return {tail.rbegin(), tail.rend()};
}

/// Word whose matrix is sigma in S_e.
inline Word word_from_matrix(const Mat2& sigma, int e)
{
    if (!in_S_e(sigma, e))
        throw Error(Errc::not_in_set, "word_from_matrix: matrix is not in S_e");
    const Mat2 base = e == 1 ? sigma : detail::flip_second_column(sigma);
    const std::vector<Block> blocks = factor_matrix(base);
    Word w;
    w.reserve(blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const int sign = i + 1 < blocks.size() ? blocks[i + 1].e : e;
        w.push_back({blocks[i].k, sign});
    }
    return w;
}

// ---------------------------------------------------------------------------
// Period matrix

struct OmegaTilde {
    Word period;        // least period
    Mat2 omega;         // matrix of the least period
    Mat2 omega_tilde;   // omega, or omega^2 when the sign product is -1
    int sign_product = 1;
};

inline OmegaTilde omega_tilde_info(const Word& period)
{
    require_admissible(period, "omega_tilde");
    OmegaTilde out;
    out.period = period;
    out.omega = word_to_matrix(period);
    out.sign_product = sign_product(period);
    out.omega_tilde = out.sign_product == 1 ? out.omega : out.omega * out.omega;
    return out;
}

inline OmegaTilde omega_tilde_info(const Quadratic& w, std::size_t max_steps = default_max_steps)
{
    const ExpansionResult r = ocf_expand(w, max_steps);
    if (!r.purely_periodic)
        throw Error(Errc::not_reduced, "omega_tilde: expansion of " + to_string(w) + " is not purely periodic");
    return omega_tilde_info(r.period);
}

inline Mat2 omega_tilde(const Quadratic& w) { return omega_tilde_info(w).omega_tilde; }

// ---------------------------------------------------------------------------
// Spectral data

struct Eigenvalues {
    Quadratic lambda1;  // larger
    Quadratic lambda2;
};

inline Eigenvalues eigen(const Mat2& m)
{
    const BigInt tr = m.trace();
    const BigInt disc = tr * tr - 4 * m.det();
    if (disc <= 0 || is_perfect_square(disc))
        throw Error(Errc::degenerate_input, "eigen: matrix is not hyperbolic");
    return {Quadratic::make(tr, 1, disc, 2), Quadratic::make(tr, -1, disc, 2)};
}

inline Quadratic spectral_radius(const Mat2& m)
{
    const Eigenvalues ev = eigen(m);
    const Quadratic a1 = ev.lambda1.sign() < 0 ? -ev.lambda1 : ev.lambda1;
    const Quadratic a2 = ev.lambda2.sign() < 0 ? -ev.lambda2 : ev.lambda2;
    return a1 > a2 ? a1 : a2;
}

/// Attracting and repelling fixed points (omega, omega*) of z -> (a z + b)/(c z + d).
inline std::pair<Quadratic, Quadratic> fixed_points(const Mat2& m) { return mobius_fixed_points(m); }

/// 2 log r(Omega~(omega)).
inline double length_o(const Quadratic& w)
{
    return 2.0 * std::log(spectral_radius(omega_tilde(w)).to_double());
}

inline double length_o(const Word& period)
{
    return 2.0 * std::log(spectral_radius(omega_tilde_info(period).omega_tilde).to_double());
}

/// 2 log r of the regular period matrix, squared when its determinant is -1 so
/// that both lengths refer to orientation-preserving matrices.
inline double length_rcf(const Quadratic& w, std::size_t max_steps = default_max_steps)
{
    const ExpansionResult r = rcf_expand(w, max_steps);
    if (!r.purely_periodic)
        throw Error(Errc::not_reduced, "length_rcf: regular expansion is not purely periodic");
    Mat2 m;
    for (const Digit& dg : r.period)
        m *= Mat2{dg.a, 1, 1, 0};
    if (m.det() == -1)
        m = m * m;
    return 2.0 * std::log(spectral_radius(m).to_double());
}

}  // namespace ocf
