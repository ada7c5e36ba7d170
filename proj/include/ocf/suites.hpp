#pragma once

// Self-check suites over random reduced quadratic irrationals and the counting layers.

#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "ocf/analytic.hpp"
#include "ocf/cf.hpp"
#include "ocf/enumerate.hpp"
#include "ocf/matword.hpp"

namespace ocf {

struct SuiteResult {
    std::string name;
    std::int64_t checked = 0;
    std::int64_t failures = 0;
    std::vector<std::string> messages;  // first few failures

    bool passed() const { return failures == 0 && checked > 0; }

    void expect(bool ok, const std::string& what)
    {
        ++checked;
        if (ok)
            return;
        ++failures;
        if (messages.size() < 20)
            messages.push_back(what);
    }
};

inline nlohmann::ordered_json to_json(const SuiteResult& r)
{
    nlohmann::ordered_json j;
    j["suite"] = r.name;
    j["checked"] = r.checked;
    j["failures"] = r.failures;
    j["passed"] = r.passed();
    j["messages"] = r.messages;
    return j;
}

// ---------------------------------------------------------------------------
// Corpus

/// Random admissible word of length 1..max_len with odd digits up to max_digit.
inline Word random_period(std::mt19937_64& rng, std::size_t max_len = 8, std::int64_t max_digit = 15)
{
    std::uniform_int_distribution<std::size_t> len(1, max_len);
    std::uniform_int_distribution<std::int64_t> half(0, (max_digit - 1) / 2);
    std::uniform_int_distribution<int> coin(0, 1);
    Word w(len(rng));
    for (Digit& dg : w) {
        dg.a = 2 * half(rng) + 1;
        dg.e = coin(rng) ? 1 : -1;
        if (dg.a == 1)
            dg.e = 1;
    }
    return w;
}

inline std::vector<Word> make_corpus(std::uint64_t seed, std::size_t count = 1000, std::size_t max_len = 8,
                                     std::int64_t max_digit = 15)
{
    std::mt19937_64 rng(seed);
    std::vector<Word> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(random_period(rng, max_len, max_digit));
    return out;
}

// ---------------------------------------------------------------------------
// Word-level suites

/// Expansion of the periodic value, digit recovery, factorization and conjugate.
inline SuiteResult roundtrip_suite(const std::vector<Word>& corpus)
{
    SuiteResult r{"roundtrip"};
    for (const Word& w : corpus) {
        const std::string tag = to_string(w);
        const Quadratic omega = periodic_value(w);
        const ExpansionResult ex = ocf_expand(omega);
        r.expect(ex.purely_periodic && ex.period == primitive_root(w), "expand " + tag);

        const auto conv = convergents(w);
        bool digits_ok = true;
        for (std::size_t n = 1; n < conv.size(); ++n) {
            const auto [a, e] = digits_from_convergents(conv[n].p, conv[n - 1].p);
            const int e_prev = n >= 2 ? w[n - 2].e : 1;
            digits_ok = digits_ok && a == w[n - 1].a && e == e_prev;
        }
        r.expect(digits_ok, "digits " + tag);

        const int en = w.back().e;
        const Mat2 m = word_to_matrix(w);
        r.expect(in_S_e(m, en), "in S_e " + tag);
        r.expect(word_from_matrix(m, en) == w, "word_from_matrix " + tag);
        const Mat2 base = en == 1 ? m : Mat2{m.a, -m.b, m.c, -m.d};
        r.expect(multiply_blocks(factor_matrix(base)) == base, "factor " + tag);

        r.expect(galois_conjugate(w) == omega.conjugate(), "conjugate " + tag);
    }
    return r;
}

/// Ratio bounds, q_n >= 2 for n >= 3, p_n >= q_n, determinant identity.
inline SuiteResult appendix3_suite(const std::vector<Word>& corpus, int repeats = 3)
{
    SuiteResult r{"appendix3"};
    const Quadratic g = golden::g();
    const Quadratic G1 = golden::G() + Quadratic(1);
    for (const Word& base : corpus) {
        Word w;
        for (int i = 0; i < repeats; ++i)
            w.insert(w.end(), base.begin(), base.end());
        const std::string tag = to_string(base);
        const auto c = convergents(w);
        int sign_prod = 1;  // prod_{i <= n} (-e_i)
        for (std::size_t n = 1; n < c.size(); ++n) {
            const int en = w[n - 1].e;
            const Quadratic& bound = en == 1 ? g : G1;
            r.expect(Quadratic(Rational(c[n].p, c[n - 1].p)) > bound, "p ratio " + tag);
            if (n >= 2)
                r.expect(Quadratic(Rational(c[n].q, c[n - 1].q)) > bound, "q ratio " + tag);
            if (n >= 3)
                r.expect(c[n].q >= 2, "q_n >= 2 " + tag);
            r.expect(c[n].p >= c[n].q, "p_n >= q_n " + tag);
            sign_prod *= -en;
            // det (p_n, e_n p_{n-1}; q_n, e_n q_{n-1})
            const BigInt det = en * (c[n].p * c[n - 1].q - c[n - 1].p * c[n].q);
            r.expect(det == sign_prod, "determinant " + tag);
        }
    }
    return r;
}

/// r(X) < Tr X < r(X) + 1 for X = Omega~^k, k <= kmax, and Tr(Omega^2) = Tr(Omega)^2 + 2 when det = -1.
inline SuiteResult trace_sandwich_suite(const std::vector<Word>& corpus, unsigned kmax = 5)
{
    SuiteResult r{"trace_sandwich"};
    for (const Word& w : corpus) {
        const std::string tag = to_string(w);
        const OmegaTilde info = omega_tilde_info(primitive_root(w));
        if (info.sign_product == -1) {
            const BigInt t = info.omega.trace();
            r.expect(info.omega_tilde.trace() == t * t + 2, "square trace " + tag);
        }
        Mat2 x;
        for (unsigned k = 1; k <= kmax; ++k) {
            x *= info.omega_tilde;
            const BigInt t = x.trace();
            const BigInt disc = t * t - 4 * x.det();
            // 2 r = t + sqrt(disc): r < t  <=>  sqrt(disc) < t;  t < r + 1  <=>  t - 2 < sqrt(disc)
            const bool lower = detail::sign_of_surd(-t, 1, disc) < 0;
            const bool upper = detail::sign_of_surd(BigInt(2 - t), 1, disc) > 0;
            r.expect(x.det() == 1 && lower && upper, "sandwich k=" + std::to_string(k) + " " + tag);
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Counting suites

inline SuiteResult bijection_suite(std::int64_t N)
{
    SuiteResult r{"bijection"};
    const Quadratic one(1), G = golden::G();
    const std::vector<std::pair<Quadratic, Quadratic>> pairs{{one, golden::g()}, {one, G + one}, {Quadratic(Rational(3, 2)), Quadratic(2)}};
    for (int e : {1, -1})
        for (const auto& [alpha, beta] : pairs) {
            const std::int64_t brute = count_S_brute(e, alpha, beta, N);
            const TripleCount tri = count_S_triples(e, alpha, beta, N);
            r.expect(brute == tri.total(), "e=" + std::to_string(e) + " alpha=" + to_string(alpha) + " beta=" +
                                               to_string(beta) + ": brute " + std::to_string(brute) + " vs triples " +
                                               std::to_string(tri.total()));
            // every matrix maps into the triple set its parity dictates
            scan_S_tilde(e, alpha, beta, N, [&](const SignedMatrix& s) {
                const auto [z, x, y] = phi_e(s);
                const int set = triple_set(z, x, y);
                const std::int64_t mod = set == 1 ? 2 * z : z;
                const bool congr = set != 0 && (((static_cast<__int128>(x) * y - e) % mod) == 0);
                r.expect(congr && x + e * y <= N, "phi_e " + to_string(s.matrix()));
            });
        }
    return r;
}

inline SuiteResult reduction_chain_suite(std::int64_t N)
{
    SuiteResult r{"reduction-chain"};
    EnumParams p;
    p.N = N;
    const ReductionReport rep = verify_reduction_chain(p);
    r.expect(rep.failed_minus_injection == 0 && rep.checked_minus_injection == rep.W.minus, "W-1 into S~-1");
    r.expect(rep.failed_minus_cover == 0, "S~-1(+1/N) covered by W-1 and A(G)");
    r.expect(rep.failed_plus_injection == 0, "W+1 into S~+1(-1/N) and A(1)");
    r.expect(rep.failed_plus_cover == 0, "S~+1(+1/N) covered by W+1 and A(1)");
    r.expect(std::isfinite(rep.normalized_gap), "finite gap");
    return r;
}

inline SuiteResult kloosterman_suite(std::int64_t q_max = 500)
{
    SuiteResult r{"kloosterman"};
    for (std::int64_t q = 2; q <= q_max; ++q)
        for (std::int64_t h : {std::int64_t{1}, q - 1}) {
            r.expect(std::abs(kloosterman(q, h, 0, 0) - std::complex<double>(static_cast<double>(euler_phi(q)), 0)) < 1e-6,
                     "K(0,0) q=" + std::to_string(q));
            for (std::int64_t m = 0; m < 10; ++m)
                for (std::int64_t n = 0; n < 10; ++n)
                    r.expect(weil_check(q, h, m, n), "weil q=" + std::to_string(q) + " h=" + std::to_string(h) +
                                                          " m=" + std::to_string(m) + " n=" + std::to_string(n));
        }
    return r;
}

inline SuiteResult totient_suite(std::int64_t N = 100000)
{
    SuiteResult r{"totient"};
    for (TotientVariant v : {TotientVariant::even_phi2m_over_m, TotientVariant::even_phi2m, TotientVariant::odd_phi,
                             TotientVariant::odd_phi_over_m}) {
        const TotientSum s = totient_sum(v, N);
        r.expect(std::abs(s.residual()) <= 0.01 * std::abs(s.main_term), std::string(to_string(v)) + " within 1%");
    }
    const long double n = static_cast<long double>(N);
    const long double scale = std::log(n) * std::log(n) / n;
    for (TotientVariant v : {TotientVariant::even_phi2m_over_m2, TotientVariant::odd_phi_over_m2}) {
        const TotientSum s = totient_sum(v, N);
        r.expect(std::abs(s.residual()) <= scale, std::string(to_string(v)) + " within log^2 N / N");
    }
    return r;
}

inline SuiteResult measures_suite()
{
    SuiteResult r{"measures"};
    const double G = detail::kG, inf = std::numeric_limits<double>::infinity();
    auto close = [&](double a, double b, const std::string& what) { r.expect(std::abs(a - b) <= 1e-9, what); };
    close(measure_mass(MeasureId::mu_o, {1, inf}), 1.0, "mu_o total");
    close(measure_mass(MeasureId::mu_tilde_o, {1, inf, G - 2, G}), 1.0, "mu_tilde_o total");
    close(measure_mass(MeasureId::mu_G, {G - 2, G}), 1.0, "mu_G total");
    close(measure_mass(MeasureId::mu_o_unit, {0, 1}), 1.0, "mu_o_unit total");
    close(measure_quadrature(MeasureId::mu_o, {1, inf}), 1.0, "mu_o quadrature");
    close(measure_quadrature(MeasureId::mu_o_unit, {0, 1}), 1.0, "mu_o_unit quadrature");
    close(measure_quadrature(MeasureId::mu_G, {G - 2, G}), 1.0, "mu_G quadrature");
    for (double a : {1.0, 1.5, 2.0, 3.0, 7.5, 20.0})
        close(measure_mass(MeasureId::mu_o, {a, inf}), measure_quadrature(MeasureId::mu_o, {a, inf}),
              "mu_o tail quadrature " + std::to_string(a));
    double prev = 2.0;
    for (double a = 1.0; a < 50.0; a *= 1.25) {
        const double m = mu_o_tail(a);
        r.expect(m < prev, "mu_o tail decreasing");
        prev = m;
    }
    return r;
}

inline SuiteResult run_suite(std::string_view name, std::int64_t N, std::uint64_t seed)
{
    if (name == "roundtrip")
        return roundtrip_suite(make_corpus(seed));
    if (name == "appendix3")
        return appendix3_suite(make_corpus(seed));
    if (name == "trace-sandwich")
        return trace_sandwich_suite(make_corpus(seed));
    if (name == "bijection")
        return bijection_suite(N > 0 ? N : 50);
    if (name == "reduction-chain")
        return reduction_chain_suite(N > 0 ? N : 50);
    if (name == "kloosterman")
        return kloosterman_suite(N > 0 ? N : 500);
    if (name == "totient")
        return totient_suite(N > 0 ? N : 100000);
    if (name == "measures")
        return measures_suite();
    throw Error(Errc::precondition, "unknown suite '" + std::string(name) + "'");
}

}  // namespace ocf
