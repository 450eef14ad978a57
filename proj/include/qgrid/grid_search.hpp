#pragma once

// Parallel Grover registers with an adaptively growing iteration budget.
//
// Each round, every bucket i draws j_i uniformly from {0, ..., ceil(m - 1)},
// runs j_i Grover iterations from the uniform state with its local oracle and
// is measured. The global oracle is evaluated classically on the measured
// tuple; on failure m is multiplied by lambda.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qgrid/grover_core.hpp"
#include "qgrid/random.hpp"
#include "qgrid/tuple_space.hpp"

namespace qgrid {

using LocalOracle = std::function<bool(std::size_t)>;
using GlobalOracle = std::function<bool(const Tuple&)>;

/// One bucket X_i: its size and local oracle f_i. The oracle is tabulated
/// into a MarkedSet on construction.
class BucketSpec {
public:
    BucketSpec(std::size_t n, LocalOracle oracle) : n_(n), oracle_(std::move(oracle)), marked_(tabulate(n, oracle_)) {}

    explicit BucketSpec(MarkedSet marked)
        : n_(marked.size()),
          oracle_([set = marked](std::size_t x) { return set.contains(x); }),
          marked_(std::move(marked)) {}

    std::size_t size() const noexcept { return n_; }
    bool local_oracle(std::size_t x) const { return oracle_(x); }
    const MarkedSet& marked() const noexcept { return marked_; }

private:
    static MarkedSet tabulate(std::size_t n, const LocalOracle& f) {
        if (n == 0) throw std::invalid_argument("bucket must hold at least one item");
        std::vector<std::size_t> idx;
        for (std::size_t x = 0; x < n; ++x)
            if (f(x)) idx.push_back(x);
        return MarkedSet(n, std::move(idx));
    }

    std::size_t n_;
    LocalOracle oracle_;
    MarkedSet marked_;
};

struct GridProblem {
    std::vector<BucketSpec> buckets;
    GlobalOracle global_oracle;

    /// Global oracle = conjunction of the local oracles.
    static GridProblem product(std::vector<BucketSpec> buckets) {
        GridProblem p{std::move(buckets), {}};
        std::vector<MarkedSet> sets;
        for (const auto& b : p.buckets) sets.push_back(b.marked());
        p.global_oracle = [sets = std::move(sets)](const Tuple& t) {
            for (std::size_t i = 0; i < sets.size(); ++i)
                if (!sets[i].contains(t[i])) return false;
            return true;
        };
        return p;
    }

    static GridProblem product(const std::vector<MarkedSet>& sets) {
        std::vector<BucketSpec> b;
        for (const auto& s : sets) b.emplace_back(s);
        return product(std::move(b));
    }

    std::size_t dimension() const noexcept { return buckets.size(); }

    std::vector<std::size_t> shape() const {
        std::vector<std::size_t> s;
        for (const auto& b : buckets) s.push_back(b.size());
        return s;
    }
};

/// What a bucket does in a round where m > sqrt(n_i).
enum class LargeBudgetPolicy {
    /// Draw j_i from [0, ceil(sqrt(n_i))].
    Capped,
    /// Leave the register uniform (j_i = 0), the literal skip reading.
    StrictPaper,
};

/// Midpoint of the admissible interval 1 < lambda < 4^k / (4^k - 1).
inline double default_lambda(std::size_t k) {
    if (k == 0) throw std::invalid_argument("default_lambda: k must be positive");
    return 1.0 + 0.5 / (std::pow(4.0, static_cast<double>(k)) - 1.0);
}

inline bool lambda_admissible(double lambda, std::size_t k) {
    const double four_k = std::pow(4.0, static_cast<double>(k));
    return lambda > 1.0 && lambda < four_k / (four_k - 1.0);
}

inline std::size_t ceil_sqrt(std::size_t n) {
    auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
    while (r * r > n) --r;
    while (r * r < n) ++r;
    return r;
}

/// 4 * ceil(log_lambda(max_i sqrt(n_i))) + 64.
inline std::uint64_t default_max_rounds(const std::vector<std::size_t>& shape, double lambda) {
    std::size_t largest = 1;
    for (std::size_t n : shape) largest = std::max(largest, n);
    const double target = std::sqrt(static_cast<double>(largest));
    const double rounds = std::ceil(std::log(target) / std::log(lambda));
    return 4 * static_cast<std::uint64_t>(std::max(0.0, rounds)) + 64;
}

/// Inclusive upper end of the iteration-count draw for one bucket.
inline std::size_t draw_upper_bound(double m, std::size_t n, LargeBudgetPolicy policy) {
    if (m <= std::sqrt(static_cast<double>(n))) return static_cast<std::size_t>(std::ceil(m - 1.0));
    return policy == LargeBudgetPolicy::Capped ? ceil_sqrt(n) : 0;
}

struct ScheduleParams {
    double lambda = 0.0;
    std::uint64_t max_rounds = 0;
    std::uint64_t seed = 0;
    LargeBudgetPolicy policy = LargeBudgetPolicy::Capped;

    /// Default lambda and round guard for `problem`.
    static ScheduleParams defaults_for(const GridProblem& problem, std::uint64_t seed = 0) {
        ScheduleParams p;
        p.lambda = default_lambda(problem.dimension());
        p.max_rounds = default_max_rounds(problem.shape(), p.lambda);
        p.seed = seed;
        return p;
    }
};

struct QueryLedger {
    std::vector<std::uint64_t> grover_iterations_per_bucket;
    std::uint64_t global_oracle_calls = 0;
    std::uint64_t rounds = 0;

    QueryLedger() = default;
    explicit QueryLedger(std::size_t k) : grover_iterations_per_bucket(k, 0) {}

    std::uint64_t total_grover_iterations() const {
        std::uint64_t s = 0;
        for (auto v : grover_iterations_per_bucket) s += v;
        return s;
    }

    QueryLedger& operator+=(const QueryLedger& o) {
        if (grover_iterations_per_bucket.size() < o.grover_iterations_per_bucket.size())
            grover_iterations_per_bucket.resize(o.grover_iterations_per_bucket.size(), 0);
        for (std::size_t i = 0; i < o.grover_iterations_per_bucket.size(); ++i)
            grover_iterations_per_bucket[i] += o.grover_iterations_per_bucket[i];
        global_oracle_calls += o.global_oracle_calls;
        rounds += o.rounds;
        return *this;
    }

    friend bool operator==(const QueryLedger&, const QueryLedger&) = default;
};

struct RoundResult {
    Tuple tuple;
    std::vector<std::size_t> draws;
    bool accepted = false;
    QueryLedger delta;
};

/// One pass over all buckets at budget m, followed by one global-oracle call.
inline RoundResult run_round(const GridProblem& problem, double m, Rng& rng,
                             LargeBudgetPolicy policy = LargeBudgetPolicy::Capped) {
    if (!(m >= 1.0)) throw std::invalid_argument("run_round: m must be >= 1");
    const std::size_t k = problem.dimension();
    RoundResult out;
    out.tuple.resize(k);
    out.draws.resize(k);
    out.delta = QueryLedger(k);
    for (std::size_t i = 0; i < k; ++i) {
        const auto& bucket = problem.buckets[i];
        const std::size_t upper = draw_upper_bound(m, bucket.size(), policy);
        const auto j = static_cast<std::size_t>(uniform_inclusive(rng, 0, upper));
        const Register reg = grover_iterate(uniform_init(bucket.size()), bucket.marked(), j);
        out.draws[i] = j;
        out.tuple[i] = measure(reg, rng);
        out.delta.grover_iterations_per_bucket[i] = j;
    }
    out.accepted = problem.global_oracle(out.tuple);
    out.delta.global_oracle_calls = 1;
    out.delta.rounds = 1;
    return out;
}

struct SearchOutcome {
    bool success = false;
    std::optional<Tuple> tuple;
    std::uint64_t rounds_used = 0;
    QueryLedger ledger;
    /// Budget m in effect during the last round.
    double final_m = 1.0;
};

/// Observer hook; sees every round with the m it was run at.
struct RoundRecord {
    std::uint64_t round;
    double m;
    const RoundResult& result;
};
using RoundObserver = std::function<void(const RoundRecord&)>;

inline void validate(const GridProblem& problem, const ScheduleParams& params) {
    if (problem.buckets.empty()) throw std::invalid_argument("grid problem needs at least one bucket");
    for (const auto& b : problem.buckets)
        if (b.size() == 0) throw std::invalid_argument("bucket with zero items");
    if (!problem.global_oracle) throw std::invalid_argument("grid problem has no global oracle");
    if (!lambda_admissible(params.lambda, problem.dimension()))
        throw std::invalid_argument("lambda " + std::to_string(params.lambda) +
                                    " outside (1, 4^k/(4^k-1)) for k = " + std::to_string(problem.dimension()));
    if (params.max_rounds == 0) throw std::invalid_argument("max_rounds must be positive");
}

inline SearchOutcome run_grid_search(const GridProblem& problem, const ScheduleParams& params,
                                     const RoundObserver& observer = {}) {
    validate(problem, params);
    Rng rng(params.seed);
    SearchOutcome out;
    out.ledger = QueryLedger(problem.dimension());
    double m = 1.0;
    for (std::uint64_t round = 0; round < params.max_rounds; ++round) {
        RoundResult r = run_round(problem, m, rng, params.policy);
        out.ledger += r.delta;
        out.rounds_used = round + 1;
        out.final_m = m;
        if (observer) observer(RoundRecord{round, m, r});
        if (r.accepted) {
            out.success = true;
            out.tuple = std::move(r.tuple);
            return out;
        }
        m *= params.lambda;
    }
    return out;
}

/// Classical baseline: lexicographic scan of the product space with the
/// global oracle, counting every evaluation.
struct ClassicalScan {
    std::optional<Tuple> first_hit;
    std::uint64_t oracle_calls_to_first_hit = 0;
    /// Evaluations a full scan needs (prod n_i); what exact minimisation costs.
    std::uint64_t exhaustive_oracle_calls = 0;
};

inline ClassicalScan classical_scan(const GridProblem& problem) {
    ClassicalScan out;
    const auto shape = problem.shape();
    out.exhaustive_oracle_calls = tuple_count(shape);
    for_each_tuple(shape, [&](const Tuple& t) {
        ++out.oracle_calls_to_first_hit;
        if (problem.global_oracle(t)) {
            out.first_hit = t;
            return false;
        }
        return true;
    });
    return out;
}

/// Inner-search stand-in that never misses: succeeds iff a satisfying tuple
/// exists, returning the first one in lexicographic order.
inline SearchOutcome exhaustive_search(const GridProblem& problem) {
    const auto scan = classical_scan(problem);
    SearchOutcome out;
    out.ledger = QueryLedger(problem.dimension());
    out.ledger.global_oracle_calls = scan.oracle_calls_to_first_hit;
    out.ledger.rounds = 1;
    out.rounds_used = 1;
    out.success = scan.first_hit.has_value();
    out.tuple = scan.first_hit;
    return out;
}

}  // namespace qgrid
