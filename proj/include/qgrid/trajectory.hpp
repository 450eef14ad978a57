#pragma once

// Discretised trajectory search space: grid columns of admissible ordinates,
// interpolated paths, the brachistochrone travel-time cost, and the
// exhaustive set computations (solution paths, marked-element projections,
// brute-force minimum) that the quantum search is checked against.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qgrid/bounds.hpp"
#include "qgrid/grover_core.hpp"
#include "qgrid/parallel.hpp"
#include "qgrid/quadrature.hpp"
#include "qgrid/tuple_space.hpp"

namespace qgrid {

using Path = Tuple;

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

/// Physical region [x_min, x_max] x [y_min, y_max]. Paths run from
/// (x_min, y_max) to (x_max, y_min).
struct Rectangle {
    double x_min = 0.0;
    double x_max = std::numbers::pi;
    double y_min = 0.0;
    double y_max = 2.0;
};

struct Boundary {
    double x_start;
    double y_start;
    double x_end;
    double y_end;
};

struct Grid {
    /// Admissible ordinates per free column, in index order.
    std::vector<std::vector<double>> columns;
    /// Abscissa of each free column, strictly increasing.
    std::vector<double> abscissae;
    Boundary boundary{};
    Rectangle rectangle{};

    std::size_t dimension() const noexcept { return columns.size(); }

    std::vector<std::size_t> shape() const {
        std::vector<std::size_t> s;
        for (const auto& c : columns) s.push_back(c.size());
        return s;
    }

    void validate() const {
        if (columns.empty()) throw std::invalid_argument("grid needs at least one column");
        if (columns.size() != abscissae.size()) throw std::invalid_argument("grid: one abscissa per column required");
        double prev = boundary.x_start;
        for (double x : abscissae) {
            if (!(x > prev)) throw std::invalid_argument("grid: abscissae must increase strictly inside the boundary");
            prev = x;
        }
        if (!(boundary.x_end > prev)) throw std::invalid_argument("grid: last abscissa must precede the end boundary");
        for (const auto& col : columns) {
            if (col.empty()) throw std::invalid_argument("grid: every column needs at least one ordinate");
            for (double y : col)
                if (y < rectangle.y_min || y > rectangle.y_max)
                    throw std::invalid_argument("grid: ordinate " + std::to_string(y) + " outside the rectangle");
        }
    }

    void check_path(const Path& p) const {
        if (p.size() != columns.size()) throw SizeMismatch(p.size(), columns.size());
        for (std::size_t i = 0; i < p.size(); ++i)
            if (p[i] >= columns[i].size())
                throw std::out_of_range("path index " + std::to_string(p[i]) + " out of range in column " +
                                        std::to_string(i));
    }

    /// The k + 2 interpolation nodes of `p`, boundaries included.
    std::pair<std::vector<double>, std::vector<double>> nodes(const Path& p) const {
        check_path(p);
        std::vector<double> xs{boundary.x_start}, ys{boundary.y_start};
        for (std::size_t i = 0; i < p.size(); ++i) {
            xs.push_back(abscissae[i]);
            ys.push_back(columns[i][p[i]]);
        }
        xs.push_back(boundary.x_end);
        ys.push_back(boundary.y_end);
        return {std::move(xs), std::move(ys)};
    }
};

/// Free columns at equally spaced interior abscissae with the given ordinates.
inline Grid make_grid(std::vector<std::vector<double>> columns, const Rectangle& rect = {}) {
    Grid g;
    const std::size_t k = columns.size();
    g.columns = std::move(columns);
    g.rectangle = rect;
    g.boundary = {rect.x_min, rect.y_max, rect.x_max, rect.y_min};
    for (std::size_t i = 1; i <= k; ++i)
        g.abscissae.push_back(rect.x_min +
                              (rect.x_max - rect.x_min) * static_cast<double>(i) / static_cast<double>(k + 1));
    g.validate();
    return g;
}

struct BrachistochroneGridOptions {
    Rectangle rectangle{};
    /// Admit the bottom edge y = y_min as an ordinate. Off by default: an
    /// interior zero makes the travel-time integral diverge.
    bool include_zero_ordinate = false;
};

/// k free columns at x_i = x_min + L i / (k + 1); column i offers ordinates
/// y_min + H j / n_i for j = 1..n_i (j = 0..n_i with include_zero_ordinate).
inline Grid build_brachistochrone_grid(std::size_t k, std::span<const std::size_t> sizes,
                                       const BrachistochroneGridOptions& opts = {}) {
    if (k == 0) throw std::invalid_argument("brachistochrone grid needs k >= 1");
    if (sizes.size() != k) throw SizeMismatch(sizes.size(), k);
    const auto& r = opts.rectangle;
    std::vector<std::vector<double>> columns;
    for (std::size_t n : sizes) {
        if (n == 0) throw std::invalid_argument("brachistochrone grid needs n_i >= 1");
        std::vector<double> col;
        for (std::size_t j = opts.include_zero_ordinate ? 0 : 1; j <= n; ++j)
            col.push_back(r.y_min + (r.y_max - r.y_min) * static_cast<double>(j) / static_cast<double>(n));
        columns.push_back(std::move(col));
    }
    return make_grid(std::move(columns), r);
}

enum class InterpolationKind {
    /// One polynomial of degree <= k + 1 through all nodes.
    Lagrange,
    PiecewiseLinear,
};

/// Continuous path through the nodes of a discrete path.
class Interpolant {
public:
    Interpolant(std::vector<double> xs, std::vector<double> ys, InterpolationKind kind = InterpolationKind::Lagrange)
        : xs_(std::move(xs)), coef_(std::move(ys)), kind_(kind) {
        if (xs_.size() != coef_.size() || xs_.size() < 2) throw std::invalid_argument("interpolant needs >= 2 nodes");
        if (kind_ == InterpolationKind::Lagrange) {
            // Newton divided differences, in place.
            const std::size_t n = xs_.size();
            for (std::size_t level = 1; level < n; ++level)
                for (std::size_t i = n - 1; i >= level; --i)
                    coef_[i] = (coef_[i] - coef_[i - 1]) / (xs_[i] - xs_[i - level]);
        }
    }

    InterpolationKind kind() const noexcept { return kind_; }
    const std::vector<double>& nodes() const noexcept { return xs_; }

    /// Newton-form coefficients; entries past index 1 vanish for collinear
    /// nodes. Only meaningful for the Lagrange kind.
    const std::vector<double>& divided_differences() const noexcept { return coef_; }

    double operator()(double x) const { return eval(x).first; }
    double derivative(double x) const { return eval(x).second; }

    /// Value and first derivative.
    std::pair<double, double> eval(double x) const {
        if (kind_ == InterpolationKind::Lagrange) {
            const std::size_t n = coef_.size();
            double p = coef_[n - 1], dp = 0.0;
            for (std::size_t i = n - 1; i-- > 0;) {
                dp = dp * (x - xs_[i]) + p;
                p = p * (x - xs_[i]) + coef_[i];
            }
            return {p, dp};
        }
        auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        std::size_t hi = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - xs_.begin(), 1,
                                                                             static_cast<std::ptrdiff_t>(xs_.size()) - 1));
        const std::size_t lo = hi - 1;
        const double slope = (coef_[hi] - coef_[lo]) / (xs_[hi] - xs_[lo]);
        return {coef_[lo] + slope * (x - xs_[lo]), slope};
    }

private:
    std::vector<double> xs_;
    std::vector<double> coef_;
    InterpolationKind kind_;
};

inline Interpolant interpolate(const Grid& grid, const Path& path,
                               InterpolationKind kind = InterpolationKind::Lagrange) {
    auto [xs, ys] = grid.nodes(path);
    return Interpolant(std::move(xs), std::move(ys), kind);
}

class QuadratureNotConverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CostConfig {
    double g = 9.8;
    std::size_t initial_panels = 16;
    std::size_t nodes_per_panel = 5;
    /// Stop when doubling the panel count changes the value by less than this.
    double relative_tolerance = 0.01;
    std::size_t max_panels = std::size_t{1} << 14;
    /// Uniform interior probes used to reject non-positive interpolants.
    std::size_t positivity_probes = 2048;
    InterpolationKind interpolation = InterpolationKind::Lagrange;
};

namespace detail {

/// True when y > 0 on the open interval between the first and last node.
inline bool positive_interior(const Interpolant& y, std::size_t probes) {
    const auto& xs = y.nodes();
    for (std::size_t i = 1; i + 1 < xs.size(); ++i)
        if (!(y(xs[i]) > 0.0)) return false;
    if (y.kind() == InterpolationKind::PiecewiseLinear) return true;
    const double lo = xs.front(), hi = xs.back();
    for (std::size_t i = 1; i <= probes; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(probes + 1);
        if (!(y(x) > 0.0)) return false;
    }
    return true;
}

}  // namespace detail

/// Travel time  integral sqrt((1 + y'^2) / (2 g y)) dx  along an interpolant.
///
/// The substitution x = x0 + L (3u^2 - 2u^3) makes dx/du vanish like the
/// distance to either end, which cancels the 1/sqrt(y) blow-up where the
/// path meets y = 0. Composite Gauss-Legendre in u never samples u = 0 or 1.
/// Returns kInfiniteCost when the interpolant is not positive inside.
inline double travel_time(const Interpolant& y, const CostConfig& cfg = {}) {
    if (!(cfg.g > 0.0)) throw std::invalid_argument("gravity must be positive");
    if (cfg.initial_panels == 0 || cfg.max_panels < cfg.initial_panels)
        throw std::invalid_argument("invalid quadrature panel settings");
    if (!detail::positive_interior(y, cfg.positivity_probes)) return kInfiniteCost;

    const double x0 = y.nodes().front();
    const double len = y.nodes().back() - x0;
    const GaussLegendre rule(cfg.nodes_per_panel);
    bool hit_nonpositive = false;
    auto integrand = [&](double u) {
        const double x = x0 + len * u * u * (3.0 - 2.0 * u);
        const double dxdu = 6.0 * len * u * (1.0 - u);
        const auto [v, dv] = y.eval(x);
        if (!(v > 0.0)) {
            hit_nonpositive = true;
            return 0.0;
        }
        return std::sqrt((1.0 + dv * dv) / (2.0 * cfg.g * v)) * dxdu;
    };

    std::size_t panels = cfg.initial_panels;
    double previous = rule.integrate(integrand, 0.0, 1.0, panels);
    while (!hit_nonpositive) {
        panels *= 2;
        if (panels > cfg.max_panels)
            throw QuadratureNotConverged("travel time did not converge within " + std::to_string(cfg.max_panels) +
                                         " panels");
        const double current = rule.integrate(integrand, 0.0, 1.0, panels);
        if (std::abs(current - previous) <= cfg.relative_tolerance * std::abs(current)) return current;
        previous = current;
    }
    return kInfiniteCost;
}

inline double brachistochrone_cost(const Grid& grid, const Path& path, const CostConfig& cfg = {}) {
    return travel_time(interpolate(grid, path, cfg.interpolation), cfg);
}

/// Travel time of the straight segment between the boundary points.
inline double straight_line_time(const Boundary& b, double g) {
    const double len = b.x_end - b.x_start;
    const double drop = b.y_end - b.y_start;
    const double slope = drop / len;
    // integral of y^(-1/2) along a line: 2 (sqrt(y_end) - sqrt(y_start)) / slope
    const double integral = std::abs(drop) < 1e-300 ? len / std::sqrt(b.y_start)
                                                     : 2.0 * (std::sqrt(b.y_end) - std::sqrt(b.y_start)) / slope;
    return std::sqrt(1.0 + slope * slope) / std::sqrt(2.0 * g) * integral;
}

/// Least travel time over all curves between the boundary points, attained
/// by the cycloid with its cusp at the end point. Requires y_end == 0.
inline double cycloid_time(const Boundary& b, double g) {
    if (b.y_end != 0.0 || !(b.y_start > 0.0))
        throw std::domain_error("cycloid_time: needs y_end == 0 < y_start");
    const double target = (b.x_end - b.x_start) / b.y_start;
    // (phi - sin phi) / (1 - cos phi) increases from 0 to +inf on (0, 2 pi).
    double lo = 1e-12, hi = 2.0 * std::numbers::pi - 1e-12;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((mid - std::sin(mid)) / (1.0 - std::cos(mid)) < target) lo = mid;
        else hi = mid;
    }
    const double phi = 0.5 * (lo + hi);
    const double radius = b.y_start / (1.0 - std::cos(phi));
    return phi * std::sqrt(radius / g);
}

/// Cost of a path (any real-valued function on the product space).
struct CostModel {
    std::function<double(const Path&)> evaluate;

    double operator()(const Path& p) const { return evaluate(p); }
};

inline CostModel brachistochrone_cost_model(Grid grid, CostConfig cfg = {}) {
    grid.validate();
    return {[grid = std::move(grid), cfg](const Path& p) { return brachistochrone_cost(grid, p, cfg); }};
}

/// offset + sum_i weights[i] * index_i; a separable toy cost on index grids.
inline CostModel index_sum_cost(double offset, std::vector<double> weights) {
    return {[offset, weights = std::move(weights)](const Path& p) {
        if (p.size() != weights.size()) throw SizeMismatch(p.size(), weights.size());
        double c = offset;
        for (std::size_t i = 0; i < p.size(); ++i) c += weights[i] * static_cast<double>(p[i]);
        return c;
    }};
}

/// Every path's cost, row-major.
class CostTable {
public:
    CostTable(std::vector<std::size_t> shape, const CostModel& cost, unsigned jobs = 1,
              std::uint64_t cap = kDefaultEnumerationCap)
        : shape_(std::move(shape)) {
        check_cap(shape_, cap);
        std::vector<Path> paths;
        paths.reserve(tuple_count(shape_));
        for_each_tuple(shape_, [&](const Path& p) { paths.push_back(p); });
        costs_ = parallel_map(paths.size(), jobs, [&](std::size_t i) { return cost(paths[i]); });
    }

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    const std::vector<double>& costs() const noexcept { return costs_; }
    double at(const Path& p) const { return costs_.at(flat_index(shape_, p)); }

    /// A CostModel that reads from the table. The table must outlive it.
    CostModel model() const {
        return {[this](const Path& p) { return at(p); }};
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> costs_;
};

/// SolutionPaths(a, b) over a product space.
struct SolutionSetQuery {
    BoundInterval bounds;
    std::vector<std::size_t> shape;
    CostModel cost;
    std::uint64_t cap = kDefaultEnumerationCap;
};

inline SolutionSetQuery make_query(const Grid& grid, CostModel cost, BoundInterval bounds) {
    return {bounds, grid.shape(), std::move(cost)};
}

inline std::vector<Path> enumerate_solution_paths(const SolutionSetQuery& q) {
    check_cap(q.shape, q.cap);
    std::vector<Path> out;
    for_each_tuple(q.shape, [&](const Path& p) {
        if (q.bounds.contains(q.cost(p))) out.push_back(p);
    });
    return out;
}

/// Marked set i = projection of SolutionPaths(a, b) onto coordinate i.
inline std::vector<MarkedSet> derive_local_marked_sets(const SolutionSetQuery& q) {
    check_cap(q.shape, q.cap);
    std::vector<std::vector<bool>> seen;
    for (std::size_t n : q.shape) seen.emplace_back(n, false);
    for_each_tuple(q.shape, [&](const Path& p) {
        if (!q.bounds.contains(q.cost(p))) return;
        for (std::size_t i = 0; i < p.size(); ++i) seen[i][p[i]] = true;
    });
    std::vector<MarkedSet> out;
    for (std::size_t i = 0; i < q.shape.size(); ++i) {
        std::vector<std::size_t> idx;
        for (std::size_t v = 0; v < q.shape[i]; ++v)
            if (seen[i][v]) idx.push_back(v);
        out.emplace_back(q.shape[i], std::move(idx));
    }
    return out;
}

/// Fraction of tuples in the product of the projected marked sets whose cost
/// is outside (a, b). Zero when the product oracle equals the range oracle.
inline double cross_path_rate(const SolutionSetQuery& q) {
    const auto sets = derive_local_marked_sets(q);
    std::vector<std::vector<std::size_t>> choices;
    for (const auto& s : sets) choices.push_back(s.indices());
    std::uint64_t total = 0, outside = 0;
    for_each_product(choices, [&](const Path& p) {
        ++total;
        if (!q.bounds.contains(q.cost(p))) ++outside;
    });
    return total == 0 ? 0.0 : static_cast<double>(outside) / static_cast<double>(total);
}

struct MinimumPath {
    Path path;
    double cost = kInfiniteCost;
};

/// Exhaustive argmin; ties go to the lexicographically smallest path.
inline MinimumPath brute_force_minimum(std::span<const std::size_t> shape, const CostModel& cost,
                                       std::uint64_t cap = kDefaultEnumerationCap) {
    check_cap(shape, cap);
    if (tuple_count(shape) == 0) throw std::invalid_argument("brute_force_minimum: empty search space");
    MinimumPath best;
    bool first = true;
    for_each_tuple(shape, [&](const Path& p) {
        const double c = cost(p);
        if (first || c < best.cost) {
            best = {p, c};
            first = false;
        }
    });
    return best;
}

inline MinimumPath brute_force_minimum(const CostTable& table) {
    const auto& costs = table.costs();
    if (costs.empty()) throw std::invalid_argument("brute_force_minimum: empty search space");
    std::size_t arg = 0;
    for (std::size_t i = 1; i < costs.size(); ++i)
        if (costs[i] < costs[arg]) arg = i;
    MinimumPath best{Path(table.shape().size()), costs[arg]};
    std::size_t rest = arg;
    for (std::size_t i = table.shape().size(); i-- > 0;) {
        best.path[i] = rest % table.shape()[i];
        rest /= table.shape()[i];
    }
    return best;
}

/// `count` evenly spaced (x, y) samples of the interpolant, both ends included.
inline std::vector<std::pair<double, double>> sample_path(const Grid& grid, const Path& path, std::size_t count,
                                                          InterpolationKind kind = InterpolationKind::Lagrange) {
    if (count < 2) throw std::invalid_argument("sample_path: need at least 2 samples");
    const Interpolant y = interpolate(grid, path, kind);
    std::vector<std::pair<double, double>> out;
    const double lo = grid.boundary.x_start, hi = grid.boundary.x_end;
    for (std::size_t i = 0; i < count; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
        out.emplace_back(x, y(x));
    }
    return out;
}

}  // namespace qgrid
