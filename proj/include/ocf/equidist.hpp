#pragma once

// Empirical distribution of (omega, -omega*) against the limiting measures.

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "ocf/analytic.hpp"
#include "ocf/enumerate.hpp"

namespace ocf {

struct Grid2D {
    std::vector<double> x_edges;  // finite edges; the last cell runs to +infinity
    std::vector<double> y_edges;

    /// 24 geometric x-cells on [1, 16], a tail cell, 16 uniform y-cells on [G-2, G].
    static Grid2D standard(int x_cells = 24, double x_max = 16.0, int y_cells = 16)
    {
        Grid2D grid;
        for (int i = 0; i <= x_cells; ++i)
            grid.x_edges.push_back(std::pow(x_max, static_cast<double>(i) / x_cells));
        grid.x_edges.back() = x_max;
        const double lo = detail::kG - 2.0, hi = detail::kG;
        for (int j = 0; j <= y_cells; ++j)
            grid.y_edges.push_back(lo + (hi - lo) * j / y_cells);
        grid.y_edges.back() = hi;
        return grid;
    }

    /// One cell: the whole domain.
    static Grid2D single() { return {{1.0}, {detail::kG - 2.0, detail::kG}}; }

    std::size_t nx() const { return x_edges.size(); }  // finite cells plus tail
    std::size_t ny() const { return y_edges.size() - 1; }

    double x_hi(std::size_t i) const
    {
        return i + 1 < x_edges.size() ? x_edges[i + 1] : std::numeric_limits<double>::infinity();
    }

    std::size_t x_cell(double x) const
    {
        const auto it = std::upper_bound(x_edges.begin(), x_edges.end(), x);
        const std::size_t i = it == x_edges.begin() ? 0 : static_cast<std::size_t>(it - x_edges.begin()) - 1;
        return std::min(i, nx() - 1);
    }

    std::size_t y_cell(double y) const
    {
        const auto it = std::upper_bound(y_edges.begin(), y_edges.end(), y);
        const std::size_t j = it == y_edges.begin() ? 0 : static_cast<std::size_t>(it - y_edges.begin()) - 1;
        return std::min(j, ny() - 1);
    }

    double cell_mass(std::size_t i, std::size_t j) const
    {
        return measure_mass(MeasureId::mu_tilde_o, {x_edges[i], x_hi(i), y_edges[j], y_edges[j + 1]});
    }
};

struct Cell {
    std::size_t ix = 0, iy = 0;
    std::int64_t count = 0;
    double frequency = 0;
    double mass = 0;
    double residual() const { return frequency - mass; }
};

struct DiscrepancyReport {
    std::int64_t N = 0;
    std::int64_t sample_size = 0;
    std::vector<Cell> cells;
    double sup_cell = 0;         // max |frequency - mass| over cells
    double y_marginal_ks = 0;    // sup |F_emp - F_{mu_G}| for -omega*
    double x_marginal_ks = 0;    // sup |F_emp - F_{mu_o}| for omega
    std::vector<double> x_marginal_freq, x_marginal_mass, y_marginal_freq, y_marginal_mass;
};

/// (omega, -omega*) as doubles.
inline std::pair<double, double> natural_point(const QiRecord& r)
{
    return {r.omega.to_double(), -r.omega_star.to_double()};
}

/// -omega* in [G-2, G), exact. The left end is attained only by (3+sqrt(5))/2.
inline bool in_grotesque_range(const QiRecord& r)
{
    const Quadratic y = -r.omega_star;
    const Quadratic& G = golden::G();
    return y >= G - Quadratic(2) && y < G;
}

namespace detail {

/// Kolmogorov distance between the sample and a continuous CDF.
template <class Cdf>
double ks_distance(std::vector<double> xs, Cdf cdf)
{
    if (xs.empty())
        return 0;
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double sup = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double F = cdf(xs[i]);
        sup = std::max({sup, std::abs(static_cast<double>(i + 1) / n - F), std::abs(F - static_cast<double>(i) / n)});
    }
    return sup;
}

}  // namespace detail

inline DiscrepancyReport empirical_report(const std::vector<QiRecord>& records, std::int64_t N, const Grid2D& grid)
{
    if (records.empty())
        throw Error(Errc::precondition, "empirical_report: empty sample");
    DiscrepancyReport rep;
    rep.N = N;
    rep.sample_size = static_cast<std::int64_t>(records.size());
    std::vector<std::int64_t> counts(grid.nx() * grid.ny(), 0);
    std::vector<double> xs, ys;
    xs.reserve(records.size());
    ys.reserve(records.size());
    for (const QiRecord& r : records) {
        const auto [x, y] = natural_point(r);
        xs.push_back(x);
        ys.push_back(y);
        ++counts[grid.x_cell(x) * grid.ny() + grid.y_cell(y)];
    }
    const double n = static_cast<double>(records.size());
    rep.x_marginal_freq.assign(grid.nx(), 0);
    rep.x_marginal_mass.assign(grid.nx(), 0);
    rep.y_marginal_freq.assign(grid.ny(), 0);
    rep.y_marginal_mass.assign(grid.ny(), 0);
    for (std::size_t i = 0; i < grid.nx(); ++i)
        for (std::size_t j = 0; j < grid.ny(); ++j) {
            Cell c;
            c.ix = i;
            c.iy = j;
            c.count = counts[i * grid.ny() + j];
            c.frequency = static_cast<double>(c.count) / n;
            c.mass = grid.cell_mass(i, j);
            rep.sup_cell = std::max(rep.sup_cell, std::abs(c.residual()));
            rep.x_marginal_freq[i] += c.frequency;
            rep.x_marginal_mass[i] += c.mass;
            rep.y_marginal_freq[j] += c.frequency;
            rep.y_marginal_mass[j] += c.mass;
            rep.cells.push_back(c);
        }
    const double lo = detail::kG - 2.0;
    rep.y_marginal_ks = detail::ks_distance(ys, [&](double y) {
        return measure_mass(MeasureId::mu_G, {lo, std::clamp(y, lo, detail::kG)});
    });
    rep.x_marginal_ks = detail::ks_distance(xs, [](double x) { return 1.0 - mu_o_tail(std::max(x, 1.0)); });
    return rep;
}

inline DiscrepancyReport empirical_report(std::int64_t N, const Grid2D& grid, unsigned partitions = 1)
{
    EnumParams p;
    p.N = N;
    return empirical_report(enumerate_primitive(p, partitions), N, grid);
}

struct CorollaryRatio {
    double ratio = 0;
    double limit = 0;
    std::int64_t hits = 0, total = 0;
};

/// #{omega >= alpha}/#{all} among periods with Tr(Omega~) <= N, and the mu_o tail.
inline CorollaryRatio corollary_ratio(const std::vector<QiRecord>& records, const Quadratic& alpha)
{
    if (alpha < Quadratic(1))
        throw Error(Errc::precondition, "corollary_ratio: alpha must be at least 1");
    CorollaryRatio out;
    out.total = static_cast<std::int64_t>(records.size());
    for (const QiRecord& r : records)
        if (!(r.omega < alpha))
            ++out.hits;
    out.ratio = out.total ? static_cast<double>(out.hits) / static_cast<double>(out.total) : 0.0;
    out.limit = mu_o_tail(alpha.to_double());
    return out;
}

inline CorollaryRatio corollary_ratio(const Quadratic& alpha, std::int64_t N, unsigned partitions = 1)
{
    EnumParams p;
    p.N = N;
    return corollary_ratio(enumerate_primitive(p, partitions), alpha);
}

struct WindowCount {
    std::int64_t count = 0;
    double normalized = 0;  // count / N^2
    double predicted = 0;   // theorem main term / N^2
    double relative_error() const { return std::abs(normalized - predicted) / predicted; }
};

/// Primitive periods in the window omega >= alpha, -1/beta2 <= omega* <= 1/beta1.
inline WindowCount window_count(const std::vector<QiRecord>& records, std::int64_t N, const Quadratic& alpha,
                                const Quadratic& beta1, const Quadratic& beta2)
{
    EnumParams p;
    p.N = N;
    p.alpha = alpha;
    p.beta1 = beta1;
    p.beta2 = beta2;
    p.validate();
    WindowCount out;
    for (const QiRecord& r : records)
        if (p.accepts(r.omega, r.omega_star))
            ++out.count;
    const double n2 = static_cast<double>(N) * static_cast<double>(N);
    out.normalized = static_cast<double>(out.count) / n2;
    out.predicted = main_term("theorem", {static_cast<double>(N), alpha.to_double(), 1, beta1.to_double(), beta2.to_double()}) / n2;
    return out;
}

inline nlohmann::ordered_json to_json(const DiscrepancyReport& rep)
{
    nlohmann::ordered_json j;
    j["N"] = rep.N;
    j["sample_size"] = rep.sample_size;
    j["sup_cell_discrepancy"] = rep.sup_cell;
    j["x_marginal_ks"] = rep.x_marginal_ks;
    j["y_marginal_ks"] = rep.y_marginal_ks;
    auto& cells = j["cells"] = nlohmann::ordered_json::array();
    for (const Cell& c : rep.cells)
        cells.push_back({{"ix", c.ix}, {"iy", c.iy}, {"count", c.count}, {"frequency", c.frequency}, {"mass", c.mass},
                         {"residual", c.residual()}});
    j["x_marginal"] = {{"frequency", rep.x_marginal_freq}, {"mass", rep.x_marginal_mass}};
    j["y_marginal"] = {{"frequency", rep.y_marginal_freq}, {"mass", rep.y_marginal_mass}};
    return j;
}

inline void write_csv(std::ostream& os, const DiscrepancyReport& rep)
{
    os << "ix,iy,count,frequency,mass,residual\n";
    for (const Cell& c : rep.cells)
        os << c.ix << ',' << c.iy << ',' << c.count << ',' << shortest_double(c.frequency) << ','
           << shortest_double(c.mass) << ',' << shortest_double(c.residual()) << '\n';
}

/// Two columns per marginal (cell midpoint, frequency, mass) for external plotting.
inline void write_marginal_dump(std::ostream& os, const DiscrepancyReport& rep, const Grid2D& grid)
{
    os << "# x-marginal: x_lo frequency mass\n";
    for (std::size_t i = 0; i < grid.nx(); ++i)
        os << shortest_double(grid.x_edges[i]) << ' ' << shortest_double(rep.x_marginal_freq[i]) << ' '
           << shortest_double(rep.x_marginal_mass[i]) << '\n';
    os << "\n\n# y-marginal: y_lo frequency mass\n";
    for (std::size_t j = 0; j < grid.ny(); ++j)
        os << shortest_double(grid.y_edges[j]) << ' ' << shortest_double(rep.y_marginal_freq[j]) << ' '
           << shortest_double(rep.y_marginal_mass[j]) << '\n';
}

}  // namespace ocf
