#pragma once

// Binary search on the cost bracket (a, b). Each round asks the grid search
// for a path with cost in (a, mid) and, failing that, in (mid, b); when
// neither is found the current bracket is returned.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qgrid/bounds.hpp"
#include "qgrid/grid_search.hpp"
#include "qgrid/random.hpp"
#include "qgrid/trajectory.hpp"
#include "qgrid/tuple_space.hpp"

namespace qgrid {

/// f_{a,b}: accepts a tuple iff a < cost < b.
inline GlobalOracle range_oracle(double a, double b, CostModel cost) {
    const BoundInterval range(a, b);
    return [range, cost = std::move(cost)](const Tuple& t) { return range.contains(cost(t)); };
}

/// Cost of a uniformly random path. Paths with infinite cost carry no bound
/// and are redrawn, up to `max_draws` times.
inline double initial_upper_bound(std::span<const std::size_t> shape, const CostModel& cost, Rng& rng,
                                  std::size_t max_draws = 1000) {
    if (shape.empty() || tuple_count(shape) == 0) throw std::invalid_argument("initial_upper_bound: empty grid");
    Path p(shape.size());
    for (std::size_t draw = 0; draw < max_draws; ++draw) {
        for (std::size_t i = 0; i < shape.size(); ++i) p[i] = static_cast<std::size_t>(uniform_below(rng, shape[i]));
        const double c = cost(p);
        if (std::isfinite(c)) return c;
    }
    throw std::runtime_error("initial_upper_bound: no finite-cost path in " + std::to_string(max_draws) + " draws");
}

/// Builds the grid problem whose global oracle is f_{a,b}.
using ProblemFactory = std::function<GridProblem(double a, double b)>;
/// Runs one inner search; the seed is supplied per call.
using InnerSearch = std::function<SearchOutcome(const GridProblem&, std::uint64_t seed)>;

/// Local oracles are the projections of SolutionPaths(a, b), recomputed for
/// every bracket; the global oracle is the range predicate itself.
inline ProblemFactory projected_problem_factory(std::vector<std::size_t> shape, CostModel cost,
                                                std::uint64_t cap = kDefaultEnumerationCap) {
    return [shape = std::move(shape), cost = std::move(cost), cap](double a, double b) {
        const SolutionSetQuery q{BoundInterval(a, b), shape, cost, cap};
        auto problem = GridProblem::product(derive_local_marked_sets(q));
        problem.global_oracle = range_oracle(a, b, cost);
        return problem;
    };
}

/// Grid search with the given schedule. A zero lambda or max_rounds in
/// `base` is replaced by the problem's default.
inline InnerSearch grover_inner_search(ScheduleParams base = {}) {
    return [base](const GridProblem& problem, std::uint64_t seed) {
        ScheduleParams p = base;
        if (p.lambda == 0.0) p.lambda = default_lambda(problem.dimension());
        if (p.max_rounds == 0) p.max_rounds = default_max_rounds(problem.shape(), p.lambda);
        p.seed = seed;
        return run_grid_search(problem, p);
    };
}

inline InnerSearch exhaustive_inner_search() {
    return [](const GridProblem& problem, std::uint64_t) { return exhaustive_search(problem); };
}

enum class Branch { Lower, Upper, None };

inline const char* to_string(Branch b) {
    switch (b) {
        case Branch::Lower: return "lower";
        case Branch::Upper: return "upper";
        default: return "none";
    }
}

struct BranchAttempt {
    /// Range actually handed to the oracle (epsilon included).
    double a = 0.0;
    double b = 0.0;
    bool success = false;
    std::uint64_t rounds_used = 0;
    QueryLedger ledger;
    std::optional<Path> tuple;
    std::optional<double> cost;
    /// Ground truth from an exhaustive check, when one was supplied.
    std::optional<bool> has_solution;
};

struct BisectRound {
    std::uint64_t round = 0;
    double a = 0.0;
    double b = 0.0;
    double mid = 0.0;
    Branch branch = Branch::None;
    BranchAttempt lower;
    std::optional<BranchAttempt> upper;
};

struct Witness {
    Path path;
    double cost = 0.0;
};

struct BisectResult {
    BoundInterval interval;
    std::uint64_t rounds = 0;
    std::optional<Witness> witness;
    std::vector<BisectRound> trace;
    QueryLedger total_ledger;
};

struct BisectOptions {
    /// Added to the upper end of each branch's range; 0 keeps both ends strict.
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    /// Optional exhaustive existence check for (a, b), recorded in the trace.
    std::function<bool(double, double)> has_solution;
};

/// Existence check backed by a cost table: is any cost strictly in (a, b)?
inline std::function<bool(double, double)> table_existence_check(const CostTable& table) {
    return [&table](double a, double b) {
        for (double c : table.costs())
            if (a < c && c < b) return true;
        return false;
    };
}

inline BisectResult run_bisect(const ProblemFactory& factory, const CostModel& cost, double a0, double b0,
                               std::uint64_t max_count, const InnerSearch& search, const BisectOptions& opts = {}) {
    if (max_count == 0) throw std::invalid_argument("run_bisect: max_count must be positive");
    if (!(opts.epsilon >= 0.0)) throw std::invalid_argument("run_bisect: epsilon must be non-negative");
    BisectResult result{BoundInterval(a0, b0), 0, std::nullopt, {}, {}};
    double a = a0, b = b0;

    auto attempt = [&](double lo, double hi, std::uint64_t stream) {
        BranchAttempt at;
        at.a = lo;
        at.b = hi + opts.epsilon;
        const GridProblem problem = factory(at.a, at.b);
        const SearchOutcome outcome = search(problem, derive_seed(opts.seed, stream));
        at.success = outcome.success;
        at.rounds_used = outcome.rounds_used;
        at.ledger = outcome.ledger;
        result.total_ledger += outcome.ledger;
        if (opts.has_solution) at.has_solution = opts.has_solution(at.a, at.b);
        if (outcome.success && outcome.tuple) {
            at.tuple = outcome.tuple;
            at.cost = cost(*outcome.tuple);
            if (!result.witness || *at.cost < result.witness->cost) result.witness = Witness{*at.tuple, *at.cost};
        }
        return at;
    };

    for (std::uint64_t count = 0; count < max_count; ++count) {
        BisectRound rec;
        rec.round = count + 1;
        rec.a = a;
        rec.b = b;
        rec.mid = 0.5 * (a + b);
        // The bracket can no longer be split in floating point.
        if (!(a < rec.mid && rec.mid < b)) break;
        result.rounds = count + 1;
        rec.lower = attempt(a, rec.mid, 2 * count);
        if (rec.lower.success) {
            rec.branch = Branch::Lower;
            b = rec.mid;
        } else {
            rec.upper = attempt(rec.mid, b, 2 * count + 1);
            if (rec.upper->success) {
                rec.branch = Branch::Upper;
                a = rec.mid;
            }
        }
        const bool stop = rec.branch == Branch::None;
        result.trace.push_back(std::move(rec));
        if (stop) break;
    }
    result.interval = BoundInterval(a, b);
    return result;
}

}  // namespace qgrid
