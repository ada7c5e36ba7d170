#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ocf/mat2.hpp"
#include "ocf/qfield.hpp"

using namespace ocf;

namespace {

Quadratic Q(long long p, long long q, long long d, long long r) { return qi_canonical(p, q, d, r); }

// Is a <= q*sqrt(d)? Independent of the library: square with explicit sign cases.
bool le_qsqrt(__int128 a, __int128 q, __int128 d)
{
    if (q >= 0)
        return a < 0 || a * a <= q * q * d;
    return a < 0 && a * a >= q * q * d;
}

// floor((p + q sqrt d)/r) for r > 0 by integer isolation.
long long floor_oracle(long long p, long long q, long long d, long long r)
{
    long long k = static_cast<long long>(std::floor((p + q * std::sqrt(static_cast<long double>(d))) / r)) - 2;
    while (le_qsqrt(static_cast<__int128>(r) * (k + 1) - p, q, d))
        ++k;
    return k;
}

bool squarefree_small(long long d)
{
    for (long long f = 2; f * f <= d; ++f)
        if (d % (f * f) == 0)
            return false;
    return true;
}

struct RandomQi {
    std::mt19937_64 rng{7};
    Quadratic next(long long& p, long long& q, long long& d, long long& r)
    {
        std::uniform_int_distribution<long long> coef(-40, 40), den(1, 30), rad(2, 60);
        do {
            d = rad(rng);
        } while (!squarefree_small(d));
        do {
            q = coef(rng);
        } while (q == 0);
        p = coef(rng);
        r = den(rng);
        return Quadratic::from_squarefree(p, q, d, r);
    }
    Quadratic next()
    {
        long long p, q, d, r;
        return next(p, q, d, r);
    }
};

void expect_canonical(const Quadratic& x, long long p, long long q, long long d, long long r)
{
    EXPECT_EQ(x.p(), p);
    EXPECT_EQ(x.q(), q);
    EXPECT_EQ(x.d(), d);
    EXPECT_EQ(x.r(), r);
}

}  // namespace

TEST(QField, CanonicalGcdReduction) { expect_canonical(Q(2, 2, 5, 4), 1, 1, 5, 2); }

TEST(QField, CanonicalSquarefreeExtraction) { expect_canonical(Q(3, 1, 20, 2), 3, 2, 5, 2); }

TEST(QField, CanonicalSignNormalization) { expect_canonical(Q(1, 1, 2, -1), -1, -1, 2, 1); }

TEST(QField, DegenerateInputsAreTaggedRational)
{
    const Quadratic square = Q(1, 2, 9, 1);
    EXPECT_TRUE(square.is_rational());
    EXPECT_EQ(square, Quadratic(7));
    const Quadratic zero_q = Q(6, 0, 7, 4);
    EXPECT_TRUE(zero_q.is_rational());
    EXPECT_EQ(zero_q.to_rational(), Rational(3, 2));
}

TEST(QField, ConstructorErrors)
{
    try {
        Q(1, 1, 2, 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::invalid_denominator);
    }
    for (long long d : {0LL, -3LL}) {
        try {
            Q(1, 1, d, 1);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::unsupported_field);
        }
    }
}

TEST(QField, ConjugateExamples)
{
    EXPECT_EQ(qi_conjugate(Q(3, 1, 5, 2)), Q(3, -1, 5, 2));
    EXPECT_EQ(qi_conjugate(Q(1, 1, 2, 1)), Q(1, -1, 2, 1));
}

TEST(QField, ConjugateIsInvolution)
{
    RandomQi gen;
    for (int i = 0; i < 100; ++i) {
        const Quadratic x = gen.next();
        EXPECT_EQ(qi_conjugate(qi_conjugate(x)), x);
    }
}

TEST(QField, ConjugateOrderMatchesSignOfRadicalPart)
{
    RandomQi gen;
    for (int i = 0; i < 200; ++i) {
        const Quadratic x = gen.next();
        const auto ord = qi_compare(x, qi_conjugate(x));
        EXPECT_EQ(ord == std::strong_ordering::greater, x.q() > 0);
        EXPECT_EQ(ord == std::strong_ordering::less, x.q() < 0);
    }
}

TEST(QField, FloorExamples)
{
    EXPECT_EQ(qi_floor(Q(1, 1, 2, 1)), floor_oracle(1, 1, 2, 1));
    EXPECT_EQ(qi_floor(Q(1, 1, 2, 1)), 2);
    EXPECT_EQ(qi_floor(Q(3, 1, 5, 2)), floor_oracle(3, 1, 5, 2));
    EXPECT_EQ(qi_floor(Q(3, 1, 5, 2)), 2);
}

TEST(QField, FloorMatchesIsolationOracleAndBrackets)
{
    RandomQi gen;
    for (int i = 0; i < 1000; ++i) {
        long long p, q, d, r;
        const Quadratic x = gen.next(p, q, d, r);
        // canonical form may rescale, but the value is unchanged
        const BigInt fl = qi_floor(x);
        EXPECT_EQ(fl, floor_oracle(p, q, d, r)) << to_string(x);
        EXPECT_LE(Quadratic(fl), x);
        EXPECT_LT(x, Quadratic(BigInt(fl + 1)));
    }
}

TEST(QField, CompareAgainstRational)
{
    // (3+sqrt5)/2 > 13/5  <=>  5 sqrt5 > 11  <=>  125 > 121
    EXPECT_GT(5LL * 5 * 5, 11LL * 11);
    EXPECT_EQ(qi_compare(Q(3, 1, 5, 2), Quadratic(Rational(13, 5))), std::strong_ordering::greater);
    EXPECT_EQ(qi_compare(Quadratic(Rational(13, 5)), Q(3, 1, 5, 2)), std::strong_ordering::less);
}

TEST(QField, CompareAgreesWithCrossMultiplication)
{
    RandomQi gen;
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<long long> num(-200, 200), den(1, 50);
    for (int i = 0; i < 1000; ++i) {
        long long p, q, d, r;
        const Quadratic x = gen.next(p, q, d, r);
        const long long a = num(rng), b = den(rng);
        // x > a/b  <=>  a r - b p < b q sqrt d  (no ties: sqrt d is irrational)
        const bool greater = le_qsqrt(static_cast<__int128>(a) * r - static_cast<__int128>(b) * p, b * q, d);
        EXPECT_EQ(x > Quadratic(Rational(a, b)), greater);
    }
}

TEST(QField, ArithmeticAgreesWithFloatingPoint)
{
    RandomQi gen;
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        long long p, q, d, r;
        const Quadratic x = gen.next(p, q, d, r);
        const Quadratic y = Quadratic::from_squarefree(static_cast<long long>(rng() % 21) - 10,
                                                       static_cast<long long>(rng() % 9) + 1, d,
                                                       static_cast<long long>(rng() % 7) + 1);
        const double xd = x.to_double(), yd = y.to_double();
        EXPECT_NEAR((x + y).to_double(), xd + yd, 1e-9 * (1 + std::abs(xd + yd)));
        EXPECT_NEAR((x * y).to_double(), xd * yd, 1e-9 * (1 + std::abs(xd * yd)));
        EXPECT_NEAR((x / y).to_double(), xd / yd, 1e-9 * (1 + std::abs(xd / yd)));
        EXPECT_EQ((x * y) / y, x);
        EXPECT_EQ((x - y) + y, x);
    }
}

TEST(QField, MixedFieldArithmeticRejectedOrderingExact)
{
    const Quadratic s2 = Quadratic::sqrt_of(2), s3 = Quadratic::sqrt_of(3);
    try {
        (void)(s2 + s3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::mixed_field);
    }
    EXPECT_LT(s2, s3);
    // 1 + sqrt2 = 2.41421... vs 1.5 + sqrt(5)/2 = 2.61803...
    EXPECT_LT(Q(1, 1, 2, 1), Q(3, 1, 5, 2));
    // (7 + sqrt 2) vs (5 + 3 sqrt 3): 8.414 vs 10.196
    EXPECT_GT(Q(5, 3, 3, 1), Q(7, 1, 2, 1));
}

TEST(QField, MobiusExamples)
{
    const Quadratic x = Q(1, 1, 2, 1);
    EXPECT_EQ(qi_mobius(Mat2{1, 0, 0, 1}, x), x);
    EXPECT_EQ(qi_mobius(Mat2{0, 1, 1, 0}, x), x.reciprocal());
    // fixed point of (5,2;2,1) solves 2w^2 - 4w - 2 = 0
    const Quadratic w = qi_mobius(Mat2{5, 2, 2, 1}, x);
    EXPECT_EQ(w, x);
    EXPECT_TRUE((Quadratic(2) * x * x - Quadratic(4) * x - Quadratic(2)).is_zero());
}

TEST(QField, MobiusComposition)
{
    RandomQi gen;
    std::mt19937_64 rng(5);
    auto entry = [&] { return static_cast<long long>(rng() % 11) - 5; };
    int done = 0;
    while (done < 300) {
        const Mat2 m1{entry(), entry(), entry(), entry()}, m2{entry(), entry(), entry(), entry()};
        if (m1.det() == 0 || m2.det() == 0)
            continue;
        const Quadratic x = gen.next();
        EXPECT_EQ(qi_mobius(m1 * m2, x), qi_mobius(m1, qi_mobius(m2, x)));
        ++done;
    }
}

TEST(QField, MobiusPole)
{
    try {
        qi_mobius(Mat2{0, 1, 1, -1}, Quadratic(1));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::pole);
    }
}

TEST(QField, TextGrammar)
{
    EXPECT_EQ(parse_quadratic("(1+1*sqrt(2))/1"), Q(1, 1, 2, 1));
    EXPECT_EQ(parse_quadratic("(3+sqrt(5))/2"), Q(3, 1, 5, 2));
    EXPECT_EQ(parse_quadratic("-(1-2*sqrt(20))/3"), Q(-1, 2, 20, 3));
    EXPECT_EQ(parse_quadratic("sqrt(8)"), Q(0, 2, 2, 1));
    EXPECT_EQ(parse_quadratic("7/4"), Quadratic(Rational(7, 4)));
    for (const char* bad : {"(1+1*sqrt(2))/1+1", "1+sqrt(2)/2", "(1+sqrt(2)", "sqrt(2)+sqrt(3)", "abc", ""}) {
        try {
            parse_quadratic(bad);
            FAIL() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::parse_error) << bad;
        }
    }
}

TEST(QField, TextRoundTrip)
{
    RandomQi gen;
    for (int i = 0; i < 500; ++i) {
        const Quadratic x = gen.next();
        EXPECT_EQ(parse_quadratic(to_string(x)), x) << to_string(x);
    }
}

TEST(QField, SquarefreeSplitAgainstTrialDivision)
{
    for (long long n = 1; n < 5000; ++n) {
        long long core = 1, root = 1, m = n;
        for (long long f = 2; f * f <= m; ++f)
            while (m % f == 0) {
                m /= f;
                if (core % f == 0) {
                    core /= f;
                    root *= f;
                } else {
                    core *= f;
                }
            }
        if (m > 1) {
            if (core % m == 0) {
                core /= m;
                root *= m;
            } else {
                core *= m;
            }
        }
        const SquarefreeSplit s = squarefree_split(n);
        EXPECT_EQ(s.core, core) << n;
        EXPECT_EQ(s.root, root) << n;
    }
}

TEST(QField, GoldenConstants)
{
    const Quadratic& G = golden::G();
    const Quadratic& g = golden::g();
    EXPECT_EQ(G * g, Quadratic(1));
    EXPECT_EQ(G - g, Quadratic(1));
    EXPECT_EQ(Quadratic(2) - G, g * g);
}
