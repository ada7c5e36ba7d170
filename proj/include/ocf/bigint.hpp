#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/miller_rabin.hpp>

#include <algorithm>
#include <vector>
#include <cstdint>
#include <limits>
#include <string>

#include "ocf/error.hpp"

namespace ocf {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline int sign(const BigInt& v) { return v.sign(); }

inline BigInt abs(const BigInt& v) { return v.sign() < 0 ? BigInt(-v) : v; }

/// Floor division, b != 0.
inline BigInt floor_div(const BigInt& a, const BigInt& b)
{
    BigInt q = a / b;
    if ((a % b != 0) && ((a.sign() < 0) != (b.sign() < 0)))
        --q;
    return q;
}

inline BigInt ceil_div(const BigInt& a, const BigInt& b) { return -floor_div(-a, b); }

/// Floor of the square root of n >= 0.
inline BigInt isqrt(const BigInt& n)
{
    if (n.sign() < 0)
        throw Error(Errc::domain, "isqrt of a negative number");
    return boost::multiprecision::sqrt(n);
}

inline bool is_perfect_square(const BigInt& n)
{
    if (n.sign() < 0)
        return false;
    const BigInt s = isqrt(n);
    return s * s == n;
}

inline BigInt gcd(const BigInt& a, const BigInt& b) { return boost::multiprecision::gcd(a, b); }

/// n = root^2 * core with core squarefree.
struct SquarefreeSplit {
    BigInt root;
    BigInt core;
};

namespace detail {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

inline u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

inline u64 powmod(u64 a, u64 e, u64 m)
{
    u64 r = 1 % m;
    a %= m;
    while (e) {
        if (e & 1)
            r = mulmod(r, a, m);
        a = mulmod(a, a, m);
        e >>= 1;
    }
    return r;
}

/// Deterministic for 64-bit inputs.
inline bool is_prime_u64(u64 n)
{
    if (n < 2)
        return false;
    for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % p == 0)
            return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        u64 x = powmod(a, d, n);
        if (x == 1 || x == n - 1)
            continue;
        bool composite = true;
        for (int i = 1; i < s && composite; ++i) {
            x = mulmod(x, x, n);
            composite = x != n - 1;
        }
        if (composite)
            return false;
    }
    return true;
}

inline u64 gcd_u64(u64 a, u64 b)
{
    while (b) {
        a %= b;
        std::swap(a, b);
    }
    return a;
}

/// A nontrivial factor of an odd composite n (Pollard-Brent).
inline u64 rho_u64(u64 n)
{
    for (u64 c = 1;; ++c) {
        auto f = [&](u64 x) { return (mulmod(x, x, n) + c) % n; };
        u64 y = 2, x = 2, q = 1, g = 1, ys = 2;
        std::size_t r = 1;
        constexpr std::size_t m = 64;
        do {
            x = y;
            for (std::size_t i = 0; i < r; ++i)
                y = f(y);
            std::size_t k = 0;
            do {
                ys = y;
                for (std::size_t i = 0; i < std::min(m, r - k); ++i) {
                    y = f(y);
                    q = mulmod(q, x > y ? x - y : y - x, n);
                }
                g = gcd_u64(q, n);
                k += m;
            } while (k < r && g == 1);
            r *= 2;
        } while (g == 1);
        if (g == n) {
            do {
                ys = f(ys);
                g = gcd_u64(x > ys ? x - ys : ys - x, n);
            } while (g == 1);
        }
        if (g != n)
            return g;
    }
}

inline void factor_u64(u64 n, std::vector<u64>& primes)
{
    if (n == 1)
        return;
    if (is_prime_u64(n)) {
        primes.push_back(n);
        return;
    }
    const u64 d = rho_u64(n);
    factor_u64(d, primes);
    factor_u64(n / d, primes);
}

/// Factor of a composite BigInt (generic Pollard rho).
inline BigInt rho_big(const BigInt& n)
{
    for (unsigned c = 1;; ++c) {
        BigInt x = 2, y = 2, g = 1;
        while (g == 1) {
            x = (x * x + c) % n;
            y = (y * y + c) % n;
            y = (y * y + c) % n;
            g = boost::multiprecision::gcd(BigInt(x > y ? BigInt(x - y) : BigInt(y - x)), n);
        }
        if (g != n)
            return g;
    }
}

inline void factor_big(const BigInt& n, std::vector<BigInt>& primes)
{
    if (n == 1)
        return;
    if (n <= std::numeric_limits<u64>::max()) {
        std::vector<u64> small;
        factor_u64(static_cast<u64>(n), small);
        for (u64 p : small)
            primes.emplace_back(p);
        return;
    }
    if (boost::multiprecision::miller_rabin_test(n, 40)) {
        primes.push_back(n);
        return;
    }
    const BigInt d = rho_big(n);
    factor_big(d, primes);
    factor_big(BigInt(n / d), primes);
}

}  // namespace detail

/// Full factorization by trial division of small primes, then Miller-Rabin and
/// Pollard rho on the cofactor.
inline SquarefreeSplit squarefree_split(BigInt n)
{
    if (n.sign() <= 0)
        throw Error(Errc::domain, "squarefree_split expects a positive integer");
    SquarefreeSplit out{1, 1};
    auto absorb = [&](const BigInt& p, int e) {
        for (int i = 0; i < e / 2; ++i)
            out.root *= p;
        if (e % 2 == 1)
            out.core *= p;
    };
    for (unsigned p = 2; p < 1000; p += (p == 2 ? 1 : 2)) {
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        if (e)
            absorb(BigInt(p), e);
    }
    std::vector<BigInt> primes;
    detail::factor_big(n, primes);
    std::sort(primes.begin(), primes.end());
    for (std::size_t i = 0; i < primes.size();) {
        std::size_t j = i;
        while (j < primes.size() && primes[j] == primes[i])
            ++j;
        absorb(primes[i], static_cast<int>(j - i));
        i = j;
    }
    return out;
}

inline std::int64_t to_int64(const BigInt& v, const char* what = "value")
{
    if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
        throw Error(Errc::domain, std::string(what) + " does not fit in 64 bits");
    return static_cast<std::int64_t>(v);
}

inline std::string to_string(const BigInt& v) { return v.str(); }

}  // namespace ocf
