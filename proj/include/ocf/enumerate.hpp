#pragma once

// Enumeration of O-reduced quadratic irrationals and the matrix/triple counts.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "ocf/cf.hpp"
#include "ocf/matword.hpp"
#include "ocf/qfield.hpp"

namespace ocf {

using i64 = std::int64_t;
using i128 = __int128;

// ---------------------------------------------------------------------------
// Parameters

/// Exact parameter text: integers, p/q, the tokens G, g, G+1, G-1, or the
/// value grammar of parse_quadratic.
inline Quadratic parse_param(std::string_view text)
{
    std::string s;
    for (char ch : text)
        if (ch != ' ')
            s += ch;
    const Quadratic G = golden::G();
    if (s == "G")
        return G;
    if (s == "g")
        return golden::g();
    if (s == "G+1")
        return G + Quadratic(1);
    if (s == "G-1")
        return G - Quadratic(1);
    const auto slash = s.find('/');
    if (slash != std::string::npos && s.find_first_of("()*sqrt") == std::string::npos) {
        try {
            const BigInt num(s.substr(0, slash));
            const BigInt den(s.substr(slash + 1));
            if (den == 0)
                throw Error(Errc::invalid_denominator, "parameter denominator is zero");
            return Quadratic(Rational(num, den));
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            throw Error(Errc::parse_error, "cannot parse parameter '" + std::string(text) + "'");
        }
    }
    return parse_quadratic(s);
}

struct EnumParams {
    i64 N = 0;
    std::optional<Quadratic> alpha;  // omega >= alpha
    std::optional<Quadratic> beta1;  // omega* <= 1/beta1
    std::optional<Quadratic> beta2;  // omega* >= -1/beta2

    void validate() const
    {
        if (N < 0)
            throw Error(Errc::precondition, "N must be non-negative");
        if (alpha && *alpha < Quadratic(1))
            throw Error(Errc::precondition, "alpha must be at least 1");
        if (beta1 && *beta1 < golden::G() + Quadratic(1))
            throw Error(Errc::precondition, "beta1 must be at least G+1");
        if (beta2 && *beta2 < golden::G() - Quadratic(1))
            throw Error(Errc::precondition, "beta2 must be at least G-1");
    }

    bool has_filters() const { return alpha || beta1 || beta2; }

    /// Exact window test on (omega, omega*).
    bool accepts(const Quadratic& omega, const Quadratic& omega_star) const
    {
        if (alpha && omega < *alpha)
            return false;
        if (beta1 && omega_star > beta1->reciprocal())
            return false;
        if (beta2 && omega_star < -beta2->reciprocal())
            return false;
        return true;
    }
};

/// N = floor(exp(R/2)).
inline i64 trace_bound_from_length(double R)
{
    if (!(R >= 0) || R > 80)
        throw Error(Errc::precondition, "R out of range");
    return static_cast<i64>(std::floor(std::exp(R / 2.0)));
}

// ---------------------------------------------------------------------------
// Word tree

/// A node of the word tree, i.e. an admissible word w with its convergents.
struct WordNode {
    const Word* word = nullptr;
    i64 p = 0, p_prev = 0, q = 0, q_prev = 0;  // p_n, p_{n-1}, q_n, q_{n-1}
    i64 trace = 0;        // Tr M(w) = p_n + e_n q_{n-1}
    int sign_product = 1; // det M(w)
    i64 trace_tilde = 0;  // Tr M(w), or Tr(M(w)^2) = trace^2 + 2 when det = -1

    Mat2 matrix() const
    {
        const int e = word->back().e;
        return {p, e * p_prev, q, e * q_prev};
    }
};

/// Admissible first digits (a1, e1) whose subtree can contain a word of trace <= N.
inline std::vector<Digit> root_digits(i64 N)
{
    std::vector<Digit> roots;
    for (i64 a = 1; 618 * a <= 1000 * N; a += 2) {
        if (a > 1)
            roots.push_back({a, -1});
        roots.push_back({a, 1});
    }
    return roots;
}

namespace detail {

inline i64 isqrt64(i64 n)
{
    if (n <= 0)
        return 0;
    i64 r = static_cast<i64>(std::sqrt(static_cast<double>(n)));
    while (r * r > n)
        --r;
    while ((r + 1) * (r + 1) <= n)
        ++r;
    return r;
}

/// Depth-first walk below a fixed prefix. The parent state is (p_k, p_{k-1},
/// q_k, q_{k-1}) with e_k the sign of the last digit.
///
/// Pruning: Tr M(w) >= g p_n for every word, and any admissible suffix multiplies
/// p by at least g, so a subtree is abandoned once g^2 p > N (integer bound
/// 381/1000 < g^2); a node itself needs g p <= N (618/1000 < g).
class WordWalker {
public:
    WordWalker(i64 N, const std::function<void(const WordNode&)>& visit) : N_(N), sqrt_bound_(N >= 2 ? isqrt64(N - 2) : 0), visit_(visit) {}

    void walk_root(const Digit& root)
    {
        word_.clear();
        child(root, 1, 0, 0, 1, 1, 1);
    }

private:
    void expand(i64 p, i64 pp, i64 q, i64 qp, int e_last, int sp)
    {
        for (i64 a = 1;; a += 2) {
            const i64 pn = a * p + e_last * pp;
            if (618 * static_cast<i128>(pn) > 1000 * static_cast<i128>(N_))
                break;
            for (int e : {-1, 1}) {
                if (a + e < 2)
                    continue;
                child({a, e}, p, pp, q, qp, e_last, sp);
            }
        }
    }

    void child(const Digit& dg, i64 p, i64 pp, i64 q, i64 qp, int e_last, int sp)
    {
        const i64 pn = dg.a * p + e_last * pp;
        const i64 qn = dg.a * q + e_last * qp;
        if (618 * static_cast<i128>(pn) > 1000 * static_cast<i128>(N_))
            return;
        word_.push_back(dg);
        const int spn = sp * -dg.e;
        const i64 tr = pn + dg.e * q;
        bool ok = false;
        i64 tilde = tr;
        if (spn == 1) {
            ok = tr <= N_;
        } else if (tr <= sqrt_bound_) {
            tilde = tr * tr + 2;
            ok = tilde <= N_;
        }
        if (ok) {
            WordNode node;
            node.word = &word_;
            node.p = pn;
            node.p_prev = p;
            node.q = qn;
            node.q_prev = q;
            node.trace = tr;
            node.sign_product = spn;
            node.trace_tilde = tilde;
            visit_(node);
        }
        if (381 * static_cast<i128>(pn) <= 1000 * static_cast<i128>(N_))
            expand(pn, p, qn, q, dg.e, spn);
        word_.pop_back();
    }

    i64 N_;
    i64 sqrt_bound_;
    const std::function<void(const WordNode&)>& visit_;
    Word word_;
};

}  // namespace detail

/// Visits every admissible word w with Tr M(w) <= N (det +1) or
/// Tr(M(w)^2) <= N (det -1), in lexicographic order within each root.
inline void for_each_word(i64 N, const Digit& root, const std::function<void(const WordNode&)>& visit)
{
    detail::WordWalker walker(N, visit);
    walker.walk_root(root);
}

/// Runs `per_root(root_index)` for every root digit on `partitions` threads.
/// Results keyed by root index make the merge independent of scheduling.
inline void run_partitioned(std::size_t roots, unsigned partitions, const std::function<void(std::size_t)>& per_root)
{
    if (partitions <= 1 || roots <= 1) {
        for (std::size_t i = 0; i < roots; ++i)
            per_root(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    const unsigned workers = std::min<unsigned>(partitions, static_cast<unsigned>(roots));
    for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            (void)t;
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= roots || failed.load())
                    return;
                try {
                    per_root(i);
                } catch (...) {
                    if (!failed.exchange(true))
                        failure = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool)
        th.join();
    if (failure)
        std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Records

struct QiRecord {
    Quadratic omega;
    Word period;
    Quadratic omega_star;
    i64 trace = 0;  // Tr of Omega~
    double length_o = 0;
    int sign_product = 1;
};

/// omega = attracting fixed point of M(w), exact.
inline Quadratic omega_of_node(const WordNode& n)
{
    const int e = n.word->back().e;
    const i64 a = n.p, d = e * n.q_prev, c = n.q;
    const i64 disc = n.trace * n.trace - 4 * n.sign_product;
    return Quadratic::make(a - d, 1, disc, 2 * c);
}

/// 2 log of the larger root of x^2 - T x + 1.
inline double length_from_trace(i64 trace_tilde)
{
    const double t = static_cast<double>(trace_tilde);
    return 2.0 * std::log((t + std::sqrt(t * t - 4.0)) / 2.0);
}

inline QiRecord make_record(const WordNode& n, const Quadratic& omega)
{
    QiRecord r;
    r.omega = omega;
    r.period = *n.word;
    r.omega_star = omega.conjugate();
    r.trace = n.trace_tilde;
    r.length_o = length_from_trace(n.trace_tilde);
    r.sign_product = n.sign_product;
    return r;
}

/// Primitive periods with Tr(Omega~) <= N passing the optional window, in
/// lexicographic word order. Identical for every partition count.
inline std::vector<QiRecord> enumerate_primitive(const EnumParams& params, unsigned partitions = 1)
{
    params.validate();
    const std::vector<Digit> roots = root_digits(params.N);
    std::vector<std::vector<QiRecord>> chunks(roots.size());
    run_partitioned(roots.size(), partitions, [&](std::size_t i) {
        for_each_word(params.N, roots[i], [&](const WordNode& n) {
            if (!is_primitive(*n.word))
                return;
            Quadratic omega = omega_of_node(n);
            if (params.has_filters() && !params.accepts(omega, omega.conjugate()))
                return;
            chunks[i].push_back(make_record(n, omega));
        });
    });
    std::vector<QiRecord> out;
    for (auto& c : chunks)
        std::move(c.begin(), c.end(), std::back_inserter(out));
    return out;
}

/// Records for a single root digit (checkpointable unit of work).
inline std::vector<QiRecord> enumerate_root(const EnumParams& params, const Digit& root)
{
    params.validate();
    std::vector<QiRecord> out;
    for_each_word(params.N, root, [&](const WordNode& n) {
        if (!is_primitive(*n.word))
            return;
        Quadratic omega = omega_of_node(n);
        if (params.has_filters() && !params.accepts(omega, omega.conjugate()))
            return;
        out.push_back(make_record(n, omega));
    });
    return out;
}

/// Number of primitive periods with Tr(Omega~) <= N (no window).
inline i64 count_primitive(i64 N, unsigned partitions = 1)
{
    const std::vector<Digit> roots = root_digits(N);
    std::vector<i64> counts(roots.size(), 0);
    run_partitioned(roots.size(), partitions, [&](std::size_t i) {
        for_each_word(N, roots[i], [&](const WordNode& n) {
            if (is_primitive(*n.word))
                ++counts[i];
        });
    });
    return std::accumulate(counts.begin(), counts.end(), i64{0});
}

// ---------------------------------------------------------------------------
// Fast integer tests on ratios

namespace detail {

/// a/b > g for a, b > 0.
inline bool ratio_gt_g(i64 a, i64 b)
{
    const i128 l = 2 * static_cast<i128>(a) + b;
    return l * l > 5 * static_cast<i128>(b) * b;
}

/// a/b > G + 1 for a, b > 0.
inline bool ratio_gt_G1(i64 a, i64 b)
{
    const i128 l = 2 * static_cast<i128>(a) - 3 * static_cast<i128>(b);
    return l > 0 && l * l > 5 * static_cast<i128>(b) * b;
}

/// Class I, A or B mod 2.
inline bool good_class(i64 a, i64 b, i64 c, i64 d)
{
    const int x = static_cast<int>(a & 1), y = static_cast<int>(b & 1), z = static_cast<int>(c & 1),
              w = static_cast<int>(d & 1);
    return (x == 1 && y == 0 && z == 0 && w == 1) || (x == 0 && y == 1 && z == 1 && w == 1) ||
           (x == 1 && y == 1 && z == 1 && w == 0);
}

/// (a, eb; c, ed) in S_e, entries given without signs.
inline bool in_S_e_fast(i64 a, i64 b, i64 c, i64 d, int e)
{
    if (b <= 0 || d < 0 || d > b || c < 1 || c > a)
        return false;
    const i128 det = static_cast<i128>(a) * d - static_cast<i128>(b) * c;
    if (det != 1 && det != -1)
        return false;
    if (!good_class(a, b, c, d))
        return false;
    return e == 1 ? ratio_gt_g(a, b) : ratio_gt_G1(a, b);
}

inline i64 mod_inverse(i64 a, i64 m)
{
    // assumes gcd(a, m) = 1, m >= 1
    i64 g = m, x = 0, x1 = 1, r = ((a % m) + m) % m;
    while (r != 0) {
        const i64 q = g / r;
        i64 t = g - q * r;
        g = r;
        r = t;
        t = x - q * x1;
        x = x1;
        x1 = t;
    }
    return ((x % m) + m) % m;
}

inline i64 floor_div64(i64 a, i64 b)
{
    i64 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        --q;
    return q;
}

/// #{x in [lo, hi] : x = r mod m}
inline i64 count_progression(i64 lo, i64 hi, i64 r, i64 m)
{
    if (hi < lo)
        return 0;
    return floor_div64(hi - r, m) - floor_div64(lo - 1 - r, m);
}

inline i64 to_i64_floor(const Quadratic& x) { return to_int64(x.floor(), "bound"); }
inline i64 to_i64_ceil(const Quadratic& x) { return to_int64(x.ceil(), "bound"); }

}  // namespace detail

// ---------------------------------------------------------------------------
// S~_e(alpha, beta; N)

/// sigma = (a, e b; c, e d) described by its unsigned entries.
struct SignedMatrix {
    i64 a = 0, b = 0, c = 0, d = 0;
    int e = 1;
    Mat2 matrix() const { return {a, e * b, c, e * d}; }
    i64 trace() const { return a + e * d; }
    friend bool operator==(const SignedMatrix&, const SignedMatrix&) = default;
    friend auto operator<=>(const SignedMatrix&, const SignedMatrix&) = default;
};

inline SignedMatrix to_signed(const Mat2& m, int e)
{
    return {to_int64(m.a), to_int64(e * m.b), to_int64(m.c), to_int64(e * m.d), e};
}

/// Exact membership in S~_e(alpha, beta; N).
inline bool in_S_tilde(const SignedMatrix& s, const Quadratic& alpha, const Quadratic& beta, i64 N)
{
    if (!in_S_e(s.matrix(), s.e))
        return false;
    if (s.matrix().det() != 1 || s.trace() > N)
        return false;
    if (s.d != 0 && Quadratic(Rational(s.b, s.d)) < alpha)
        return false;
    return !(Quadratic(Rational(s.a, s.b)) < beta);
}

inline void check_S_params(int e, const Quadratic& alpha, const Quadratic& beta)
{
    if (e != 1 && e != -1)
        throw Error(Errc::precondition, "e must be +1 or -1");
    if (alpha < Quadratic(1))
        throw Error(Errc::precondition, "alpha must be at least 1");
    if (beta.sign() <= 0)
        throw Error(Errc::precondition, "beta must be positive");
}

/// a/b >= beta together with the ratio bound built into S_e.
inline Quadratic effective_beta(int e, const Quadratic& beta)
{
    const Quadratic floor_beta = e == 1 ? golden::g() : golden::G() + Quadratic(1);
    return beta < floor_beta ? floor_beta : beta;
}

/// Calls `visit` on every element of S~_e(alpha, beta; N) by a direct scan of
/// integer matrices. Oracle use only: O(N^3).
inline void scan_S_tilde(int e, const Quadratic& alpha, const Quadratic& beta, i64 N,
                         const std::function<void(const SignedMatrix&)>& visit, const Budget& budget = {})
{
    check_S_params(e, alpha, beta);
    if (N < 1)
        return;
    // e = +1: a <= N. e = -1: a - d <= N with d < a/(G+1) gives a < G N.
    const i64 a_max = e == 1 ? N : to_int64((golden::G() * Quadratic(N)).floor());
    for (i64 a = 1; a <= a_max; ++a) {
        budget.check("scan_S_tilde");
        for (i64 b = 1; b <= a * 2; ++b) {
            for (i64 d = 0; d <= b; ++d) {
                if (a + e * d > N)
                    continue;
                // det (a, eb; c, ed) = e (a d - b c) = 1
                const i64 num = a * d - e;
                if (num <= 0 || num % b != 0)
                    continue;
                const SignedMatrix s{a, b, num / b, d, e};
                if (in_S_tilde(s, alpha, beta, N))
                    visit(s);
            }
        }
    }
}

inline i64 count_S_brute(int e, const Quadratic& alpha, const Quadratic& beta, i64 N, const Budget& budget = {})
{
    i64 n = 0;
    scan_S_tilde(e, alpha, beta, N, [&](const SignedMatrix&) { ++n; }, budget);
    return n;
}

// ---------------------------------------------------------------------------
// Triples (z, x, y) = (b, a, d)

struct TripleCount {
    i64 A1 = 0, A2 = 0, A3 = 0;
    i64 exceptions = 0;  // triples whose preimage leaves S_e
    i64 total() const { return A1 + A2 + A3 - exceptions; }
};

/// Which triple set (1, 2, 3) a triple belongs to by parity, 0 if none.
inline int triple_set(i64 z, i64 x, i64 y)
{
    if (z % 2 == 0)
        return (x % 2 == 1 && y % 2 == 1) ? 1 : 0;
    if (y % 2 == 1 && x % 2 == 0)
        return 2;
    if (x % 2 == 1 && y % 2 == 0)
        return 3;
    return 0;
}

/// Phi_e(sigma) = (b, a, d).
inline std::array<i64, 3> phi_e(const SignedMatrix& s) { return {s.b, s.a, s.d}; }

/// |S~_e(alpha, beta; N)| from the triple sets: for each z and y the admissible
/// x form one residue class, counted in O(1).
inline TripleCount count_S_triples(int e, const Quadratic& alpha, const Quadratic& beta_in, i64 N)
{
    check_S_params(e, alpha, beta_in);
    const Quadratic beta = effective_beta(e, beta_in);
    TripleCount out;
    if (N < 1)
        return out;
    const Quadratic& g = golden::g();
    // x <= N + y <= N + z/alpha and x >= z beta bound z.
    const i64 z_max = e == 1 ? detail::to_i64_floor(Quadratic(N) / beta)
                             : detail::to_i64_floor(Quadratic(N) / (beta - Quadratic(1) / alpha));
    for (i64 z = 1; z <= z_max; ++z) {
        const Quadratic zq(z);
        const i64 y_max = detail::to_i64_floor(zq / alpha);
        const i64 x_lo = std::max(detail::to_i64_ceil(zq * beta), detail::to_i64_floor(zq * g) + 1);
        for (i64 y = 0; y <= y_max; ++y) {
            const i64 x_hi = N - e * y;
            if (x_hi < x_lo)
                continue;
            if (z % 2 == 0) {
                if (y % 2 == 0 || std::gcd(y, 2 * z) != 1)
                    continue;
                const i64 m = 2 * z;
                const i64 r = ((e * detail::mod_inverse(y, m)) % m + m) % m;
                out.A1 += detail::count_progression(x_lo, x_hi, r, m);
            } else {
                if (std::gcd(y, z) != 1)
                    continue;
                const i64 r0 = z == 1 ? 0 : ((e * detail::mod_inverse(y, z)) % z + z) % z;
                const bool want_even = y % 2 == 1;  // A2: x even; A3: x odd
                const i64 r = ((r0 % 2 == 0) == want_even) ? r0 : r0 + z;
                const i64 cnt = detail::count_progression(x_lo, x_hi, r, 2 * z);
                (want_even ? out.A2 : out.A3) += cnt;
            }
        }
    }
    // Preimages outside S_e: e = -1 with y = z = 1 gives (x, -1; x+1, -1);
    // e = +1 with z = 1, y = 0 gives c = -1.
    const i64 x_lo1 = std::max(detail::to_i64_ceil(beta), i64{1});
    if (e == -1) {
        if (alpha == Quadratic(1))
            out.exceptions = detail::count_progression(x_lo1, N + 1, 0, 2);
    } else {
        out.exceptions = detail::count_progression(x_lo1, N, 1, 2);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Exceptional sets A_{N,r}(K)

/// b(b - (2-G)d) <= G N, exact: 2b^2 - 3bd - N + sqrt5 (bd - N) <= 0.
inline bool a1_condition(i64 b, i64 d, i64 N)
{
    const BigInt p = BigInt(2) * b * b - BigInt(3) * b * d - N;
    const BigInt q = BigInt(b) * d - N;
    return detail::sign_of_surd(p, q, 5) <= 0;
}

inline bool in_A_Nr(const SignedMatrix& s, int r, const Quadratic& K, i64 N)
{
    if (!detail::in_S_e_fast(s.a, s.b, s.c, s.d, s.e))
        return false;
    if (Quadratic(s.a) > K * Quadratic(N))
        return false;
    if (r == 1)
        return a1_condition(s.b, s.d, N);
    if (r == 2)
        return static_cast<i128>(s.c) * s.d <= N;
    throw Error(Errc::precondition, "r must be 1 or 2");
}

/// Exact |A_{N,r}(K)| over both signs, by solving ad - bc = +-1 along the
/// pair that the defining inequality bounds ((b, d) for r = 1, (c, d) for r = 2).
inline i64 count_A_Nr(int r, const Quadratic& K, i64 N, const Budget& budget = {})
{
    if (r != 1 && r != 2)
        throw Error(Errc::precondition, "r must be 1 or 2");
    if (K <= Quadratic(0))
        throw Error(Errc::precondition, "K must be positive");
    const i64 a_max = detail::to_i64_floor(K * Quadratic(N));
    i64 total = 0;
    // d = 0 forces b = c = 1 and det -1: (a, e; 1, 0) with a odd.
    for (int e : {1, -1})
        for (i64 a = 1; a <= a_max; a += 2)
            if (detail::in_S_e_fast(a, 1, 1, 0, e))
                ++total;
    if (r == 2) {
        for (i64 d = 1; d <= N; ++d) {
            budget.check("count_A_Nr");
            for (i64 c = 1; c * d <= N; ++c) {
                if (std::gcd(c, d) != 1)
                    continue;
                for (int delta : {1, -1}) {
                    // a d - b c = delta  =>  a = delta d^{-1} (mod c)
                    const i64 r0 = c == 1 ? 0 : ((delta * detail::mod_inverse(d, c)) % c + c) % c;
                    i64 a = r0;
                    if (a < c)
                        a += ((c - a + c - 1) / c) * c;
                    for (; a <= a_max; a += c) {
                        const i64 num = a * d - delta;
                        if (num <= 0)
                            continue;
                        const i64 b = num / c;
                        for (int e : {1, -1})
                            if (detail::in_S_e_fast(a, b, c, d, e))
                                ++total;
                    }
                }
            }
        }
    } else {
        const i64 b_max = detail::isqrt64(4 * N) + 2;  // b^2 g <= b(b - (2-G)d) <= G N
        for (i64 b = 1; b <= b_max; ++b) {
            budget.check("count_A_Nr");
            for (i64 d = 1; d <= b; ++d) {
                if (std::gcd(b, d) != 1 || !a1_condition(b, d, N))
                    continue;
                for (int delta : {1, -1}) {
                    const i64 r0 = b == 1 ? 0 : ((delta * detail::mod_inverse(d, b)) % b + b) % b;
                    for (i64 a = r0 == 0 ? b : r0; a <= a_max; a += b) {
                        const i64 num = a * d - delta;
                        if (num <= 0)
                            continue;
                        const i64 c = num / b;
                        for (int e : {1, -1})
                            if (detail::in_S_e_fast(a, b, c, d, e))
                                ++total;
                    }
                }
            }
        }
    }
    return total;
}

/// Reference count by scanning all (a, b, d); oracle for count_A_Nr.
inline i64 count_A_Nr_brute(int r, const Quadratic& K, i64 N, const Budget& budget = {})
{
    const i64 a_max = detail::to_i64_floor(K * Quadratic(N));
    i64 total = 0;
    for (i64 a = 1; a <= a_max; ++a) {
        budget.check("count_A_Nr_brute");
        for (i64 b = 1; b <= 2 * a; ++b)
            for (i64 d = 0; d <= b; ++d)
                for (int delta : {1, -1}) {
                    const i64 num = a * d - delta;
                    if (num <= 0 || num % b != 0)
                        continue;
                    for (int e : {1, -1})
                        if (in_A_Nr({a, b, num / b, d, e}, r, K, N))
                            ++total;
                }
    }
    return total;
}

// ---------------------------------------------------------------------------
// Word set W(alpha, beta1, beta2; N)

struct WCount {
    i64 minus = 0;  // e_n = -1
    i64 plus = 0;   // e_n = +1
    i64 total() const { return minus + plus; }
};

/// Words with sign product +1 and Tr(w) <= N in the window, counted with
/// multiplicity (powers of a period count separately).
inline WCount count_words_W(const EnumParams& params, unsigned partitions = 1,
                            const std::function<void(const WordNode&, const Quadratic&)>& on_word = {})
{
    params.validate();
    const std::vector<Digit> roots = root_digits(params.N);
    std::vector<WCount> counts(roots.size());
    run_partitioned(roots.size(), on_word ? 1 : partitions, [&](std::size_t i) {
        for_each_word(params.N, roots[i], [&](const WordNode& n) {
            if (n.sign_product != 1)
                return;
            const Quadratic omega = omega_of_node(n);
            if (!params.accepts(omega, omega.conjugate()))
                return;
            (n.word->back().e == 1 ? counts[i].plus : counts[i].minus) += 1;
            if (on_word)
                on_word(n, omega);
        });
    });
    WCount out;
    for (const WCount& c : counts) {
        out.minus += c.minus;
        out.plus += c.plus;
    }
    return out;
}

/// Both accountings of the multiplicity in W: the exact sum over j of
/// #{omega : Tr(Omega~^j) <= N}, and the sum over k of |R_O(floor(N^{1/k}))|.
struct OverCounting {
    i64 words = 0;              // |W|
    i64 by_powers = 0;          // sum_j #{omega : Tr(Omega~^j) <= N}
    i64 by_root_bounds = 0;     // sum_k |R_O(N^{1/k})|
};

inline OverCounting over_counting(const EnumParams& params)
{
    OverCounting out;
    out.words = count_words_W(params).total();
    const std::vector<QiRecord> recs = enumerate_primitive(params);
    for (const QiRecord& r : recs) {
        // Tr(X^{j}) for X in SL2 with trace t: t_{j+1} = t t_j - t_{j-1}
        i128 prev = 2, cur = r.trace;
        while (cur <= params.N) {
            ++out.by_powers;
            const i128 next = static_cast<i128>(r.trace) * cur - prev;
            prev = cur;
            cur = next;
        }
    }
    for (int k = 1;; ++k) {
        const i64 Nk = static_cast<i64>(std::floor(std::pow(static_cast<double>(params.N), 1.0 / k) + 1e-9));
        if (Nk < 3)
            break;
        EnumParams sub = params;
        sub.N = Nk;
        out.by_root_bounds += static_cast<i64>(enumerate_primitive(sub).size());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Unpruned reference enumeration

/// Periods found by scanning S_{+1} and S_{-1} for matrices with the trace
/// bound and factoring each; independent of the word-tree pruning.
inline std::vector<Word> enumerate_reference(i64 N, const Budget& budget = {})
{
    std::vector<Word> out;
    if (N < 3)
        return out;
    const i64 t_minus = detail::isqrt64(N - 2);
    for (int e : {1, -1}) {
        const i64 a_max = e == 1 ? N : to_int64((golden::G() * Quadratic(N)).floor()) + 1;
        for (i64 a = 1; a <= a_max; ++a) {
            budget.check("enumerate_reference");
            for (i64 b = 1; b <= 2 * a; ++b) {
                for (i64 d = 0; d <= b; ++d) {
                    const i64 tr = a + e * d;
                    if (tr > N || tr < 1)
                        continue;
                    for (int delta : {1, -1}) {
                        // det(a, eb; c, ed) = e(ad - bc); ad - bc = delta
                        const i64 num = a * d - delta;
                        if (num <= 0 || num % b != 0)
                            continue;
                        const SignedMatrix s{a, b, num / b, d, e};
                        const int det = e * delta;
                        if (det == -1 && tr > t_minus)
                            continue;
                        if (!in_S_e(s.matrix(), e))
                            continue;
                        Word w = word_from_matrix(s.matrix(), e);
                        if (is_primitive(w))
                            out.push_back(std::move(w));
                    }
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Reduction chain between W and S~

struct ReductionReport {
    i64 N = 0;
    WCount W;
    i64 S_minus = 0;  // |S~_{-1}(alpha, beta1; N)|
    i64 S_plus = 0;   // |S~_{+1}(alpha, beta2; N)|
    double normalized_gap = 0;  // |W - S_minus - S_plus| / N^{3/2}
    i64 checked_minus_injection = 0, failed_minus_injection = 0;   // W_{-1} into S~_{-1}
    i64 checked_minus_cover = 0, failed_minus_cover = 0;           // S~_{-1}(+1/N) into W_{-1} or A(G)
    i64 checked_plus_injection = 0, failed_plus_injection = 0;     // W_{+1} into S~_{+1}(-1/N) or A(1)
    i64 checked_plus_cover = 0, failed_plus_cover = 0;             // S~_{+1}(+1/N) into W_{+1} or A(1)
    bool ok() const
    {
        return failed_minus_injection == 0 && failed_minus_cover == 0 && failed_plus_injection == 0 &&
               failed_plus_cover == 0;
    }
};

inline ReductionReport verify_reduction_chain(const EnumParams& params, const Budget& budget = {})
{
    params.validate();
    const i64 N = params.N;
    const Quadratic G = golden::G();
    const Quadratic alpha = params.alpha.value_or(Quadratic(1));
    const Quadratic beta1 = params.beta1.value_or(G + Quadratic(1));
    const Quadratic beta2 = params.beta2.value_or(G - Quadratic(1));
    EnumParams full = params;
    full.alpha = alpha;
    full.beta1 = beta1;
    full.beta2 = beta2;

    ReductionReport rep;
    rep.N = N;
    const Quadratic inv_n(Rational(1, N));
    std::vector<SignedMatrix> w_minus, w_plus;
    rep.W = count_words_W(full, 1, [&](const WordNode& n, const Quadratic&) {
        const int e = n.word->back().e;
        (e == -1 ? w_minus : w_plus).push_back(to_signed(n.matrix(), e));
    });
    rep.S_minus = count_S_brute(-1, alpha, beta1, N, budget);
    rep.S_plus = count_S_brute(1, alpha, beta2, N, budget);
    rep.normalized_gap = std::abs(static_cast<double>(rep.W.total() - rep.S_minus - rep.S_plus)) /
                         std::pow(static_cast<double>(N), 1.5);

    auto in_A = [&](const SignedMatrix& s, const Quadratic& K) {
        return in_A_Nr(s, 1, K, N) || in_A_Nr(s, 2, K, N);
    };
    std::sort(w_minus.begin(), w_minus.end());
    std::sort(w_plus.begin(), w_plus.end());

    for (const SignedMatrix& s : w_minus) {
        ++rep.checked_minus_injection;
        if (!in_S_tilde(s, alpha, beta1, N))
            ++rep.failed_minus_injection;
    }
    scan_S_tilde(-1, alpha + inv_n, beta1 + inv_n, N, [&](const SignedMatrix& s) {
        ++rep.checked_minus_cover;
        if (!in_A(s, G) && !std::binary_search(w_minus.begin(), w_minus.end(), s))
            ++rep.failed_minus_cover;
    }, budget);
    const Quadratic alpha_lo = alpha - inv_n;
    const Quadratic beta2_lo = beta2 - inv_n;
    for (const SignedMatrix& s : w_plus) {
        ++rep.checked_plus_injection;
        const bool in_lowered = in_S_e(s.matrix(), 1) && s.matrix().det() == 1 && s.trace() <= N &&
                                (s.d == 0 || Quadratic(Rational(s.b, s.d)) >= alpha_lo) &&
                                Quadratic(Rational(s.a, s.b)) >= beta2_lo;
        if (!in_lowered && !in_A(s, Quadratic(1)))
            ++rep.failed_plus_injection;
    }
    scan_S_tilde(1, alpha + inv_n, beta2 + inv_n, N, [&](const SignedMatrix& s) {
        ++rep.checked_plus_cover;
        if (!in_A(s, Quadratic(1)) && !std::binary_search(w_plus.begin(), w_plus.end(), s))
            ++rep.failed_plus_cover;
    }, budget);
    return rep;
}

// ---------------------------------------------------------------------------
// Output

inline std::string shortest_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

enum class TableFormat { csv, tsv, json };

inline const char* record_header() { return "omega_p,omega_q,omega_d,omega_r,period,trace,sign_product,length_o,omega_float,omega_star_float"; }

inline void write_record(std::ostream& os, const QiRecord& r, TableFormat fmt)
{
    const std::string fields[] = {r.omega.p().str(),
                                  r.omega.q().str(),
                                  r.omega.d().str(),
                                  r.omega.r().str(),
                                  to_string(r.period),
                                  std::to_string(r.trace),
                                  std::to_string(r.sign_product),
                                  shortest_double(r.length_o),
                                  shortest_double(r.omega.to_double()),
                                  shortest_double(r.omega_star.to_double())};
    if (fmt == TableFormat::json) {
        nlohmann::ordered_json j;
        j["omega_p"] = fields[0];
        j["omega_q"] = fields[1];
        j["omega_d"] = fields[2];
        j["omega_r"] = fields[3];
        j["period"] = fields[4];
        j["trace"] = r.trace;
        j["sign_product"] = r.sign_product;
        j["length_o"] = r.length_o;
        j["omega_float"] = r.omega.to_double();
        j["omega_star_float"] = r.omega_star.to_double();
        os << j.dump();
        return;
    }
    const char sep = fmt == TableFormat::csv ? ',' : '\t';
    for (std::size_t i = 0; i < 10; ++i) {
        if (i)
            os << sep;
        if (i == 4 && fmt == TableFormat::csv)
            os << '"' << fields[i] << '"';
        else
            os << fields[i];
    }
}

}  // namespace ocf
