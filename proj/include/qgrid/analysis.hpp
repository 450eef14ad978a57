#pragma once

// Closed-form success probabilities and runtime bounds for the parallel
// Grover search, plus Monte Carlo utilities that check them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgrid/grid_search.hpp"
#include "qgrid/parallel.hpp"
#include "qgrid/random.hpp"

namespace qgrid {

struct BucketStats {
    std::size_t n = 1;
    std::size_t m_marked = 0;
    double theta = 0.0;
    /// 1 / sin(2 theta) = n / (2 sqrt((n - m) m)); +inf for degenerate buckets.
    double alpha = std::numeric_limits<double>::infinity();

    static BucketStats make(std::size_t n, std::size_t m_marked) {
        if (n == 0 || m_marked > n) throw std::invalid_argument("bucket stats need 0 <= m <= n, n > 0");
        BucketStats s;
        s.n = n;
        s.m_marked = m_marked;
        s.theta = AngleModel::from_counts(n, m_marked).theta;
        if (!s.degenerate()) {
            const double nd = static_cast<double>(n);
            const double md = static_cast<double>(m_marked);
            s.alpha = nd / (2.0 * std::sqrt((nd - md) * md));
        }
        return s;
    }

    bool degenerate() const noexcept { return m_marked == 0 || m_marked == n; }
};

inline std::vector<BucketStats> stats_of(const GridProblem& problem) {
    std::vector<BucketStats> out;
    for (const auto& b : problem.buckets) out.push_back(BucketStats::make(b.size(), b.marked().count()));
    return out;
}

namespace detail {
inline void require_nondegenerate(std::span<const BucketStats> stats, const char* who) {
    if (stats.empty()) throw std::invalid_argument(std::string(who) + ": no buckets");
    for (const auto& s : stats)
        if (s.degenerate())
            throw std::domain_error(std::string(who) + ": degenerate bucket (m = " + std::to_string(s.m_marked) +
                                    ", n = " + std::to_string(s.n) + ")");
}
}  // namespace detail

/// 1/2 - sin(4 m theta) / (4 m sin(2 theta)): mean of sin^2((2j+1) theta)
/// over j = 0..m-1 for one non-degenerate bucket.
inline double bucket_average_closed_form(std::size_t m, double theta) {
    const double md = static_cast<double>(m);
    return 0.5 - std::sin(4.0 * md * theta) / (4.0 * md * std::sin(2.0 * theta));
}

/// Closed-form average single-round success probability when every bucket
/// draws j uniformly from {0, ..., m-1}.
inline double avg_success_probability(std::size_t m, std::span<const BucketStats> stats) {
    if (m == 0) throw std::invalid_argument("avg_success_probability: m must be positive");
    detail::require_nondegenerate(stats, "avg_success_probability");
    double p = 1.0;
    for (const auto& s : stats) p *= bucket_average_closed_form(m, s.theta);
    return p;
}

/// Per-bucket average that also covers M = 0 (always 0) and M = n (always 1).
inline double bucket_average_success(std::size_t draw_count, const BucketStats& s) {
    if (s.m_marked == 0) return 0.0;
    if (s.m_marked == s.n) return 1.0;
    return bucket_average_closed_form(draw_count, s.theta);
}

/// |sum_{j<m} (1 - cos((2j+1) theta)) - (m - sin(2 m theta) / (2 sin theta))|
inline double trig_identity_residual(std::size_t m, double theta) {
    if (m == 0) throw std::invalid_argument("trig_identity_residual: m must be positive");
    const double s = std::sin(theta);
    if (std::abs(s) < 1e-300 || std::abs(std::remainder(theta, std::numbers::pi)) < 1e-15)
        throw std::domain_error("trig_identity_residual: theta is a multiple of pi");
    double lhs = 0.0;
    for (std::size_t j = 0; j < m; ++j) lhs += 1.0 - std::cos(static_cast<double>(2 * j + 1) * theta);
    const double md = static_cast<double>(m);
    const double rhs = md - 0.5 * std::sin(2.0 * md * theta) / s;
    return std::abs(lhs - rhs);
}

/// alpha* = max_i 1 / sin(2 theta_i). Integer budgets above it give P_m >= 4^-k.
inline double lemma_threshold(std::span<const BucketStats> stats) {
    detail::require_nondegenerate(stats, "lemma_threshold");
    double best = 0.0;
    for (const auto& s : stats) best = std::max(best, s.alpha);
    return best;
}

struct RuntimeBounds {
    double alpha_star = 0.0;
    /// Expected Grover iterations before the critical stage.
    double pre_critical = 0.0;
    /// Expected Grover iterations once the critical stage is reached.
    double post_critical = 0.0;
    std::uint64_t critical_round = 0;
    /// Some bucket has m > 0.75 n; classical sampling is the intended route there
    /// and the bounds are not claimed.
    bool classical_sampling_regime = false;

    double total() const noexcept { return pre_critical + post_critical; }
};

inline RuntimeBounds theorem_bounds(std::span<const BucketStats> stats, double lambda) {
    detail::require_nondegenerate(stats, "theorem_bounds");
    const std::size_t k = stats.size();
    if (!lambda_admissible(lambda, k))
        throw std::domain_error("theorem_bounds: lambda " + std::to_string(lambda) + " outside (1, 4^k/(4^k-1))");
    RuntimeBounds b;
    b.alpha_star = lemma_threshold(stats);
    for (const auto& s : stats)
        if (4 * s.m_marked > 3 * s.n) b.classical_sampling_regime = true;
    const double kd = static_cast<double>(k);
    const double pow4k = std::pow(4.0, kd);
    b.pre_critical = 0.5 * kd * lambda / (lambda - 1.0) * b.alpha_star;
    b.post_critical = kd * lambda / (2.0 * pow4k * (1.0 - (1.0 - 1.0 / pow4k) * lambda)) * b.alpha_star;
    b.critical_round = static_cast<std::uint64_t>(std::max(0.0, std::ceil(std::log(b.alpha_star) / std::log(lambda))));
    return b;
}

/// Closed-form single-round success probability at real budget m, using the
/// same draw range (including the large-budget policy) as run_round.
inline double round_success_closed_form(double m, std::span<const BucketStats> stats,
                                        LargeBudgetPolicy policy = LargeBudgetPolicy::Capped) {
    double p = 1.0;
    for (const auto& s : stats) p *= bucket_average_success(draw_upper_bound(m, s.n, policy) + 1, s);
    return p;
}

struct ComparisonRow {
    double m = 1.0;
    std::uint64_t trials = 0;
    std::uint64_t successes = 0;
    double empirical = 0.0;
    double closed_form = 0.0;
    /// Binomial standard error sqrt(p (1 - p) / trials) at the closed-form p.
    double sigma = 0.0;
    bool within_3sigma = false;
    /// Every draw count exceeds alpha* (all buckets non-degenerate).
    bool above_threshold = false;
    double lemma_floor = 0.0;
    bool closed_form_below_floor = false;
    bool empirical_below_floor = false;

    bool violation() const noexcept {
        return !within_3sigma || closed_form_below_floor || empirical_below_floor;
    }
};

/// Single-round success frequency of `problem` at each budget against the
/// closed form. The problem's global oracle is assumed to be the product of
/// its local oracles.
inline std::vector<ComparisonRow> empirical_vs_closed_form(const GridProblem& problem, std::span<const double> m_values,
                                                           std::uint64_t trials, std::uint64_t master_seed,
                                                           unsigned jobs = 1,
                                                           LargeBudgetPolicy policy = LargeBudgetPolicy::Capped) {
    if (trials == 0) throw std::invalid_argument("empirical_vs_closed_form: trials must be positive");
    const auto stats = stats_of(problem);
    const bool any_degenerate = std::any_of(stats.begin(), stats.end(), [](const auto& s) { return s.degenerate(); });
    const double floor = std::pow(4.0, -static_cast<double>(stats.size()));
    std::vector<ComparisonRow> rows;
    for (std::size_t mi = 0; mi < m_values.size(); ++mi) {
        const double m = m_values[mi];
        ComparisonRow row;
        row.m = m;
        row.trials = trials;
        row.lemma_floor = floor;
        row.closed_form = round_success_closed_form(m, stats, policy);

        const std::uint64_t stream = derive_seed(master_seed, mi);
        const auto hits = parallel_map(trials, jobs, [&](std::size_t t) -> char {
            Rng rng(derive_seed(stream, t));
            return run_round(problem, m, rng, policy).accepted ? 1 : 0;
        });
        for (char h : hits) row.successes += static_cast<std::uint64_t>(h);
        const double td = static_cast<double>(trials);
        row.empirical = static_cast<double>(row.successes) / td;
        row.sigma = std::sqrt(row.closed_form * (1.0 - row.closed_form) / td);
        row.within_3sigma = std::abs(row.empirical - row.closed_form) <= 3.0 * row.sigma + 1e-12;

        if (!any_degenerate) {
            const double threshold = lemma_threshold(stats);
            row.above_threshold = std::all_of(stats.begin(), stats.end(), [&](const BucketStats& s) {
                return static_cast<double>(draw_upper_bound(m, s.n, policy) + 1) > threshold;
            });
        }
        if (row.above_threshold) {
            row.closed_form_below_floor = row.closed_form < floor;
            row.empirical_below_floor = row.empirical < floor - 3.0 * row.sigma;
        }
        rows.push_back(row);
    }
    return rows;
}

struct RuntimeSummary {
    std::uint64_t trials = 0;
    std::uint64_t successes = 0;
    double mean_total_iterations = 0.0;
    double stddev_total_iterations = 0.0;
    double mean_rounds = 0.0;
    std::uint64_t max_rounds_used = 0;
    std::vector<double> mean_iterations_per_bucket;
};

/// Repeats run_grid_search with per-trial seeds derived from `master_seed`.
inline RuntimeSummary runtime_experiment(const GridProblem& problem, ScheduleParams params, std::uint64_t trials,
                                         std::uint64_t master_seed, unsigned jobs = 1) {
    if (trials == 0) throw std::invalid_argument("runtime_experiment: trials must be positive");
    const auto outcomes = parallel_map(trials, jobs, [&](std::size_t t) {
        ScheduleParams p = params;
        p.seed = derive_seed(master_seed, t);
        return run_grid_search(problem, p);
    });
    RuntimeSummary s;
    s.trials = trials;
    s.mean_iterations_per_bucket.assign(problem.dimension(), 0.0);
    double sum = 0.0, sum_sq = 0.0, rounds = 0.0;
    for (const auto& o : outcomes) {
        if (o.success) ++s.successes;
        const auto total = static_cast<double>(o.ledger.total_grover_iterations());
        sum += total;
        sum_sq += total * total;
        rounds += static_cast<double>(o.rounds_used);
        s.max_rounds_used = std::max(s.max_rounds_used, o.rounds_used);
        for (std::size_t i = 0; i < problem.dimension(); ++i)
            s.mean_iterations_per_bucket[i] += static_cast<double>(o.ledger.grover_iterations_per_bucket[i]);
    }
    const double td = static_cast<double>(trials);
    s.mean_total_iterations = sum / td;
    s.stddev_total_iterations = std::sqrt(std::max(0.0, sum_sq / td - s.mean_total_iterations * s.mean_total_iterations));
    s.mean_rounds = rounds / td;
    for (double& v : s.mean_iterations_per_bucket) v /= td;
    return s;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 paired points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        num += dx * (std::log(y[i]) - my);
        den += dx * dx;
    }
    return num / den;
}

}  // namespace qgrid
