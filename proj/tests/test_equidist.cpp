#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include "ocf/equidist.hpp"

using namespace ocf;

namespace {

const double kG = (1.0 + std::sqrt(5.0)) / 2.0;
const double kNorm = 3.0 * std::log(kG);

// Closed form of the box integral of 1/(x+y)^2, normalized.
double box_mass(double x1, double x2, double y1, double y2)
{
    if (std::isinf(x2))
        return std::log((x1 + y2) / (x1 + y1)) / kNorm;
    return std::log((x1 + y2) * (x2 + y1) / ((x1 + y1) * (x2 + y2))) / kNorm;
}

std::size_t bin_linear(const std::vector<double>& edges, double v, std::size_t cells)
{
    std::size_t i = 0;
    while (i + 1 < cells && v >= edges[i + 1])
        ++i;
    return i;
}

const std::vector<QiRecord>& sample(std::int64_t N)
{
    static std::map<std::int64_t, std::vector<QiRecord>> cache;
    auto it = cache.find(N);
    if (it == cache.end()) {
        EnumParams p;
        p.N = N;
        it = cache.emplace(N, enumerate_primitive(p)).first;
    }
    return it->second;
}

}  // namespace

TEST(Equidist, GridCellMassesMatchClosedFormAndSumToOne)
{
    const Grid2D grid = Grid2D::standard();
    EXPECT_EQ(grid.nx(), 25u);
    EXPECT_EQ(grid.ny(), 16u);
    double total = 0;
    for (std::size_t i = 0; i < grid.nx(); ++i)
        for (std::size_t j = 0; j < grid.ny(); ++j) {
            const double m = grid.cell_mass(i, j);
            EXPECT_NEAR(m, box_mass(grid.x_edges[i], grid.x_hi(i), grid.y_edges[j], grid.y_edges[j + 1]), 1e-12);
            EXPECT_GT(m, 0.0);
            total += m;
        }
    EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(Equidist, SingleCellGridIsTrivial)
{
    const DiscrepancyReport rep = empirical_report(sample(100), 100, Grid2D::single());
    ASSERT_EQ(rep.cells.size(), 1u);
    EXPECT_DOUBLE_EQ(rep.cells[0].frequency, 1.0);
    EXPECT_NEAR(rep.cells[0].mass, 1.0, 1e-12);
    EXPECT_NEAR(rep.sup_cell, 0.0, 1e-12);
}

TEST(Equidist, CellCountsMatchLinearBinning)
{
    const auto& recs = sample(300);
    const Grid2D grid = Grid2D::standard();
    const DiscrepancyReport rep = empirical_report(recs, 300, grid);
    EXPECT_EQ(rep.sample_size, static_cast<std::int64_t>(recs.size()));
    std::vector<std::int64_t> counts(grid.nx() * grid.ny(), 0);
    for (const QiRecord& r : recs) {
        const double x = r.omega.to_double(), y = -r.omega_star.to_double();
        ++counts[bin_linear(grid.x_edges, x, grid.nx()) * grid.ny() + bin_linear(grid.y_edges, y, grid.ny())];
    }
    double freq_sum = 0, sup = 0;
    for (const Cell& c : rep.cells) {
        EXPECT_EQ(c.count, counts[c.ix * grid.ny() + c.iy]);
        freq_sum += c.frequency;
        sup = std::max(sup, std::abs(c.frequency - c.mass));
    }
    EXPECT_NEAR(freq_sum, 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(rep.sup_cell, sup);
    for (std::size_t j = 0; j < grid.ny(); ++j) {
        double s = 0;
        for (std::size_t i = 0; i < grid.nx(); ++i)
            s += rep.cells[i * grid.ny() + j].mass;
        EXPECT_NEAR(rep.y_marginal_mass[j], s, 1e-12);
        // y-marginal of the 2D measure is the Gauss-type measure on [G-2, G]
        EXPECT_NEAR(s, std::log((1 + grid.y_edges[j + 1]) / (1 + grid.y_edges[j])) / kNorm, 1e-9);
    }
}

TEST(Equidist, KolmogorovDistancesAgainstDirectComputation)
{
    const auto& recs = sample(300);
    const DiscrepancyReport rep = empirical_report(recs, 300, Grid2D::standard());
    std::vector<double> ys, xs;
    for (const QiRecord& r : recs) {
        ys.push_back(-r.omega_star.to_double());
        xs.push_back(r.omega.to_double());
    }
    std::sort(ys.begin(), ys.end());
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(ys.size());
    double ky = 0, kx = 0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        const double Fy = std::log((1 + ys[i]) / (kG - 1)) / kNorm;
        ky = std::max({ky, std::abs((i + 1) / n - Fy), std::abs(Fy - i / n)});
        // mu_o([1, x)) from the density 1/(x+G-2) - 1/(x+G)
        const double Fx = std::log((xs[i] + kG - 2) / (kG - 1) * (1 + kG) / (xs[i] + kG)) / kNorm;
        kx = std::max({kx, std::abs((i + 1) / n - Fx), std::abs(Fx - i / n)});
    }
    EXPECT_NEAR(rep.y_marginal_ks, ky, 1e-9);
    EXPECT_NEAR(rep.x_marginal_ks, kx, 1e-9);
}

TEST(Equidist, DiscrepancyShrinksWithN)
{
    const Grid2D grid = Grid2D::standard();
    const DiscrepancyReport small = empirical_report(sample(100), 100, grid);
    const DiscrepancyReport large = empirical_report(sample(800), 800, grid);
    EXPECT_LT(large.y_marginal_ks, small.y_marginal_ks);
    EXPECT_LT(large.x_marginal_ks, small.x_marginal_ks);
    EXPECT_LT(large.sup_cell, small.sup_cell);
    EXPECT_LT(large.y_marginal_ks, 0.01);
}

TEST(Equidist, EmptySampleRejected)
{
    try {
        empirical_report({}, 10, Grid2D::standard());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::precondition);
    }
}

TEST(Equidist, ConjugatesLieInGrotesqueRange)
{
    const auto& recs = sample(400);
    for (const QiRecord& r : recs)
        EXPECT_TRUE(in_grotesque_range(r)) << to_string(r.period);
    // the closed left end is attained by (3+sqrt5)/2
    const Quadratic edge = parse_quadratic("(3+sqrt(5))/2");
    const auto it = std::find_if(recs.begin(), recs.end(), [&](const QiRecord& r) { return r.omega == edge; });
    ASSERT_NE(it, recs.end());
    EXPECT_EQ(-it->omega_star, golden::G() - Quadratic(2));
    QiRecord outside = *it;
    outside.omega_star = -golden::G();
    EXPECT_FALSE(in_grotesque_range(outside));
}

TEST(Equidist, CorollaryRatioExamples)
{
    const auto& recs = sample(200);
    const CorollaryRatio one = corollary_ratio(recs, Quadratic(1));
    EXPECT_DOUBLE_EQ(one.ratio, 1.0);
    EXPECT_NEAR(one.limit, 1.0, 1e-12);
    const Quadratic three(3);
    const CorollaryRatio c = corollary_ratio(recs, three);
    const auto hits = std::count_if(recs.begin(), recs.end(), [&](const QiRecord& r) { return r.omega >= three; });
    EXPECT_EQ(c.hits, hits);
    EXPECT_EQ(c.total, static_cast<std::int64_t>(recs.size()));
    try {
        corollary_ratio(recs, Quadratic(Rational(1, 2)));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::precondition);
    }
}

TEST(Equidist, CorollaryRatioApproachesTail)
{
    const double limit = std::log(std::sqrt(5.0)) / kNorm;
    for (std::int64_t N : {250, 500, 1000}) {
        const CorollaryRatio c = corollary_ratio(sample(N), Quadratic(2));
        EXPECT_NEAR(c.limit, limit, 1e-12);
        EXPECT_NEAR(c.ratio, limit, 0.01) << N;
    }
}

TEST(Equidist, WindowCountsAgainstRecount)
{
    const auto& recs = sample(400);
    const Quadratic G = golden::G();
    const WindowCount full = window_count(recs, 400, Quadratic(1), G + Quadratic(1), G - Quadratic(1));
    EXPECT_EQ(full.count, static_cast<std::int64_t>(recs.size()));
    EXPECT_NEAR(full.predicted, 3 * std::log(kG) / (4 * std::numbers::pi * std::numbers::pi / 6), 1e-9);
    EXPECT_LT(full.relative_error(), 0.01);

    const Quadratic alpha(Rational(3, 2)), b1(3), b2(2);
    const WindowCount w = window_count(recs, 400, alpha, b1, b2);
    const auto recount = std::count_if(recs.begin(), recs.end(), [&](const QiRecord& r) {
        return r.omega >= alpha && r.omega_star >= -Quadratic(1) / b2 && r.omega_star <= Quadratic(1) / b1;
    });
    EXPECT_EQ(w.count, recount);
    EXPECT_LT(w.relative_error(), 0.05);
}

TEST(Equidist, JsonAndCsvOutput)
{
    const Grid2D grid = Grid2D::standard(4, 8.0, 2);
    const DiscrepancyReport rep = empirical_report(sample(100), 100, grid);
    const auto j = to_json(rep);
    EXPECT_EQ(j["N"], 100);
    EXPECT_EQ(j["cells"].size(), grid.nx() * grid.ny());
    EXPECT_DOUBLE_EQ(j["y_marginal_ks"].get<double>(), rep.y_marginal_ks);

    std::ostringstream os;
    write_csv(os, rep);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "ix,iy,count,frequency,mass,residual");
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        const Cell& c = rep.cells[rows++];
        std::istringstream ls(line);
        std::string f[6];
        for (auto& s : f)
            std::getline(ls, s, ',');
        EXPECT_EQ(std::stoull(f[0]), c.ix);
        EXPECT_EQ(std::stoll(f[2]), c.count);
        EXPECT_DOUBLE_EQ(std::stod(f[4]), c.mass);
    }
    EXPECT_EQ(rows, rep.cells.size());

    std::ostringstream dump;
    write_marginal_dump(dump, rep, grid);
    EXPECT_NE(dump.str().find("# y-marginal"), std::string::npos);
}
