#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "qgrid/grid_search.hpp"

using namespace qgrid;

namespace {

GridProblem single_marked(std::size_t k, std::size_t n) {
    return GridProblem::product(std::vector<MarkedSet>(k, MarkedSet(n, {n / 2})));
}

// Mean of sin^2((2j+1) theta) over j = 0..draws-1, summed term by term.
double direct_bucket_average(std::size_t draws, std::size_t n, std::size_t m) {
    const double theta = std::asin(std::sqrt(static_cast<double>(m) / static_cast<double>(n)));
    double s = 0.0;
    for (std::size_t j = 0; j < draws; ++j) s += std::pow(std::sin((2.0 * j + 1.0) * theta), 2);
    return s / static_cast<double>(draws);
}

}  // namespace

TEST(DefaultLambda, Values) {
    EXPECT_NEAR(default_lambda(1), 7.0 / 6.0, 1e-15);
    EXPECT_NEAR(default_lambda(2), 31.0 / 30.0, 1e-15);
    for (std::size_t k = 1; k <= 12; ++k) {
        const double l = default_lambda(k);
        const double four_k = std::pow(4.0, static_cast<double>(k));
        EXPECT_GT(l, 1.0);
        EXPECT_LT(l, four_k / (four_k - 1.0));
        EXPECT_TRUE(lambda_admissible(l, k));
    }
    EXPECT_FALSE(lambda_admissible(1.0, 1));
    EXPECT_FALSE(lambda_admissible(4.0 / 3.0, 1));
    EXPECT_THROW(default_lambda(0), std::invalid_argument);
}

TEST(DrawRange, InclusiveUpperEndAndCap) {
    EXPECT_EQ(draw_upper_bound(1.0, 64, LargeBudgetPolicy::Capped), 0u);
    EXPECT_EQ(draw_upper_bound(1.5, 64, LargeBudgetPolicy::Capped), 1u);
    EXPECT_EQ(draw_upper_bound(2.0, 64, LargeBudgetPolicy::Capped), 1u);
    EXPECT_EQ(draw_upper_bound(8.0, 64, LargeBudgetPolicy::Capped), 7u);
    EXPECT_EQ(draw_upper_bound(8.5, 64, LargeBudgetPolicy::Capped), 8u);  // ceil(sqrt(64))
    EXPECT_EQ(draw_upper_bound(9.5, 10, LargeBudgetPolicy::Capped), 4u);  // ceil(sqrt(10))
    EXPECT_EQ(draw_upper_bound(8.5, 64, LargeBudgetPolicy::StrictPaper), 0u);
}

TEST(DefaultMaxRounds, Formula) {
    const double l = default_lambda(1);
    // log_{7/6}(8) = 13.49 -> 14
    EXPECT_EQ(default_max_rounds({64}, l), 4u * 14u + 64u);
    EXPECT_EQ(default_max_rounds({1, 1}, default_lambda(2)), 64u);
}

TEST(RunRound, BudgetOneNeverIterates) {
    Rng rng(1);
    const auto problem = single_marked(3, 5);
    std::vector<int> hist(125, 0);
    for (int i = 0; i < 25000; ++i) {
        const auto r = run_round(problem, 1.0, rng);
        for (auto j : r.draws) ASSERT_EQ(j, 0u);
        EXPECT_EQ(r.delta.total_grover_iterations(), 0u);
        EXPECT_EQ(r.delta.global_oracle_calls, 1u);
        ++hist[r.tuple[0] * 25 + r.tuple[1] * 5 + r.tuple[2]];
    }
    // Uniform over the 125 tuples: expected 200 each, sd ~14.
    for (int c : hist) EXPECT_NEAR(c, 200, 5 * 14.1);
}

TEST(RunRound, SingleBucketAtBudgetTwo) {
    // Draws j in {0, 1}: mean of sin^2(pi/6) and sin^2(pi/2) = 0.625.
    const auto problem = GridProblem::product({MarkedSet(4, {1})});
    Rng rng(77);
    int hits = 0;
    const int rounds = 40000;
    for (int i = 0; i < rounds; ++i) hits += run_round(problem, 2.0, rng).accepted ? 1 : 0;
    EXPECT_NEAR(static_cast<double>(hits) / rounds, 0.625, 0.02);
}

TEST(RunRound, AllMarkedAlwaysAccepts) {
    const auto problem = GridProblem::product(std::vector<MarkedSet>(3, MarkedSet::all(6)));
    Rng rng(5);
    for (double m : {1.0, 1.7, 3.0, 12.0}) EXPECT_TRUE(run_round(problem, m, rng).accepted);
}

TEST(RunRound, RejectsBudgetBelowOne) {
    Rng rng(0);
    EXPECT_THROW(run_round(single_marked(1, 4), 0.5, rng), std::invalid_argument);
}

TEST(RunRound, MatchesProductOfBucketAverages) {
    // Independent draws per bucket make the round success a product.
    const auto problem = GridProblem::product({MarkedSet(8, {1}), MarkedSet(16, {0, 2, 9})});
    for (double m : {2.0, 4.0}) {
        const auto draws = static_cast<std::size_t>(std::ceil(m - 1.0)) + 1;
        const double expected = direct_bucket_average(draws, 8, 1) * direct_bucket_average(draws, 16, 3);
        Rng rng(static_cast<std::uint64_t>(m * 100));
        const int trials = 100000;
        int hits = 0;
        for (int i = 0; i < trials; ++i) hits += run_round(problem, m, rng).accepted ? 1 : 0;
        const double sigma = std::sqrt(expected * (1 - expected) / trials);
        EXPECT_NEAR(static_cast<double>(hits) / trials, expected, 3 * sigma) << "m=" << m;
    }
}

TEST(GridSearch, FullyMarkedSucceedsFirstRound) {
    const auto problem = GridProblem::product(std::vector<MarkedSet>(2, MarkedSet::all(5)));
    auto params = ScheduleParams::defaults_for(problem, 1);
    const auto out = run_grid_search(problem, params);
    EXPECT_TRUE(out.success);
    EXPECT_EQ(out.rounds_used, 1u);
    ASSERT_TRUE(out.tuple.has_value());
    EXPECT_TRUE(problem.global_oracle(*out.tuple));
}

TEST(GridSearch, NoSolutionHitsRoundGuard) {
    const auto problem = GridProblem::product(std::vector<MarkedSet>(2, MarkedSet::none(9)));
    auto params = ScheduleParams::defaults_for(problem, 3);
    params.max_rounds = 50;
    const auto out = run_grid_search(problem, params);
    EXPECT_FALSE(out.success);
    EXPECT_FALSE(out.tuple.has_value());
    EXPECT_EQ(out.rounds_used, 50u);
    EXPECT_EQ(out.ledger.rounds, 50u);
    EXPECT_EQ(out.ledger.global_oracle_calls, 50u);
}

TEST(GridSearch, RejectsInvalidInputs) {
    EXPECT_THROW(BucketSpec(0, [](std::size_t) { return true; }), std::invalid_argument);
    const auto problem = single_marked(2, 4);
    auto params = ScheduleParams::defaults_for(problem);
    params.lambda = 1.2;  // above 16/15
    EXPECT_THROW(run_grid_search(problem, params), std::invalid_argument);
    params.lambda = default_lambda(2);
    params.max_rounds = 0;
    EXPECT_THROW(run_grid_search(problem, params), std::invalid_argument);
    GridProblem empty;
    EXPECT_THROW(run_grid_search(empty, ScheduleParams{1.1, 10, 0}), std::invalid_argument);
}

TEST(GridSearch, ScheduleAndLedgerInvariants) {
    const auto problem = GridProblem::product({MarkedSet(64, {7}), MarkedSet(32, {3, 4}), MarkedSet(16, {0})});
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        auto params = ScheduleParams::defaults_for(problem, seed);
        std::vector<double> ms;
        std::vector<std::uint64_t> per_bucket(3, 0);
        bool product_consistent = true;
        const auto out = run_grid_search(problem, params, [&](const RoundRecord& rec) {
            ms.push_back(rec.m);
            for (std::size_t i = 0; i < 3; ++i) per_bucket[i] += rec.result.draws[i];
            if (rec.result.accepted)
                for (std::size_t i = 0; i < 3; ++i)
                    product_consistent &= problem.buckets[i].marked().contains(rec.result.tuple[i]);
        });
        ASSERT_TRUE(out.success);
        ASSERT_EQ(ms.size(), out.rounds_used);
        double expected_m = 1.0;
        for (double m : ms) {
            EXPECT_EQ(m, expected_m);
            expected_m *= params.lambda;
        }
        EXPECT_EQ(out.ledger.grover_iterations_per_bucket, per_bucket);
        EXPECT_EQ(out.ledger.global_oracle_calls, out.rounds_used);
        EXPECT_EQ(out.ledger.rounds, out.rounds_used);
        EXPECT_TRUE(product_consistent);
    }
}

TEST(GridSearch, Reproducible) {
    const auto problem = single_marked(3, 32);
    const auto params = ScheduleParams::defaults_for(problem, 1234);
    const auto a = run_grid_search(problem, params);
    const auto b = run_grid_search(problem, params);
    EXPECT_EQ(a.success, b.success);
    EXPECT_EQ(a.tuple, b.tuple);
    EXPECT_EQ(a.rounds_used, b.rounds_used);
    EXPECT_EQ(a.ledger, b.ledger);
    EXPECT_EQ(a.final_m, b.final_m);
}

TEST(GridSearch, StrictPolicyLeavesLargeBudgetBucketsUniform) {
    const auto problem = GridProblem::product({MarkedSet(4, {0})});
    Rng rng(8);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(run_round(problem, 3.0, rng, LargeBudgetPolicy::StrictPaper).draws[0], 0u);
        EXPECT_LE(run_round(problem, 3.0, rng, LargeBudgetPolicy::Capped).draws[0], 2u);
    }
}

TEST(GridSearch, CustomGlobalOracle) {
    // Local oracles mark everything; the global oracle only accepts i0 + i1 == 6.
    GridProblem problem{{BucketSpec(4, [](std::size_t) { return true; }), BucketSpec(4, [](std::size_t) { return true; })},
                        [](const Tuple& t) { return t[0] + t[1] == 6; }};
    auto params = ScheduleParams::defaults_for(problem, 9);
    const auto out = run_grid_search(problem, params);
    ASSERT_TRUE(out.success);
    EXPECT_EQ((*out.tuple)[0] + (*out.tuple)[1], 6u);
}

TEST(ClassicalScan, CountsEvaluations) {
    const auto problem = GridProblem::product({MarkedSet(4, {2}), MarkedSet(5, {3})});
    const auto scan = classical_scan(problem);
    ASSERT_TRUE(scan.first_hit.has_value());
    EXPECT_EQ(*scan.first_hit, (Tuple{2, 3}));
    EXPECT_EQ(scan.oracle_calls_to_first_hit, 2u * 5u + 3u + 1u);
    EXPECT_EQ(scan.exhaustive_oracle_calls, 20u);

    const auto none = classical_scan(GridProblem::product({MarkedSet::none(3), MarkedSet::none(3)}));
    EXPECT_FALSE(none.first_hit.has_value());
    EXPECT_EQ(none.oracle_calls_to_first_hit, 9u);
}
