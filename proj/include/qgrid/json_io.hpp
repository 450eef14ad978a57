#pragma once

// JSON encodings of search, bisect and analysis results. Non-finite doubles
// are written as null.

#include <json.hpp>

#include "qgrid/analysis.hpp"
#include "qgrid/bound_bisect.hpp"
#include "qgrid/grid_search.hpp"

namespace qgrid {

inline constexpr int kSchemaVersion = 1;

inline nlohmann::json finite_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline nlohmann::json to_json(const QueryLedger& l) {
    return {{"grover_iterations_per_bucket", l.grover_iterations_per_bucket},
            {"total_grover_iterations", l.total_grover_iterations()},
            {"global_oracle_calls", l.global_oracle_calls},
            {"rounds", l.rounds}};
}

inline nlohmann::json to_json(const SearchOutcome& o) {
    return {{"success", o.success},
            {"tuple", o.tuple ? nlohmann::json(*o.tuple) : nlohmann::json(nullptr)},
            {"rounds_used", o.rounds_used},
            {"final_m", o.final_m},
            {"ledger", to_json(o.ledger)}};
}

inline nlohmann::json to_json(const BranchAttempt& at) {
    nlohmann::json j{{"a", finite_or_null(at.a)},
                     {"b", finite_or_null(at.b)},
                     {"success", at.success},
                     {"rounds_used", at.rounds_used},
                     {"ledger", to_json(at.ledger)},
                     {"tuple", at.tuple ? nlohmann::json(*at.tuple) : nlohmann::json(nullptr)},
                     {"cost", at.cost ? finite_or_null(*at.cost) : nlohmann::json(nullptr)}};
    if (at.has_solution) j["has_solution"] = *at.has_solution;
    return j;
}

inline nlohmann::json to_json(const BisectResult& r) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& rec : r.trace) {
        trace.push_back({{"round", rec.round},
                         {"a", finite_or_null(rec.a)},
                         {"b", finite_or_null(rec.b)},
                         {"mid", finite_or_null(rec.mid)},
                         {"branch", to_string(rec.branch)},
                         {"lower", to_json(rec.lower)},
                         {"upper", rec.upper ? to_json(*rec.upper) : nlohmann::json(nullptr)}});
    }
    nlohmann::json witness = nullptr;
    if (r.witness) witness = {{"path", r.witness->path}, {"cost", finite_or_null(r.witness->cost)}};
    return {{"interval", {{"a", finite_or_null(r.interval.lower())}, {"b", finite_or_null(r.interval.upper())}}},
            {"rounds", r.rounds},
            {"witness", witness},
            {"total_ledger", to_json(r.total_ledger)},
            {"trace", trace}};
}

inline nlohmann::json to_json(const RuntimeBounds& b) {
    return {{"alpha_star", b.alpha_star},
            {"pre_critical", b.pre_critical},
            {"post_critical", b.post_critical},
            {"total", b.total()},
            {"critical_round", b.critical_round},
            {"classical_sampling_regime", b.classical_sampling_regime}};
}

inline nlohmann::json to_json(const RuntimeSummary& s) {
    return {{"trials", s.trials},
            {"successes", s.successes},
            {"mean_total_iterations", s.mean_total_iterations},
            {"stddev_total_iterations", s.stddev_total_iterations},
            {"mean_rounds", s.mean_rounds},
            {"max_rounds_used", s.max_rounds_used},
            {"mean_iterations_per_bucket", s.mean_iterations_per_bucket}};
}

inline nlohmann::json to_json(const ComparisonRow& r) {
    return {{"m", r.m},
            {"trials", r.trials},
            {"successes", r.successes},
            {"empirical", r.empirical},
            {"closed_form", r.closed_form},
            {"sigma", r.sigma},
            {"within_3sigma", r.within_3sigma},
            {"above_threshold", r.above_threshold},
            {"lemma_floor", r.lemma_floor},
            {"violation", r.violation()}};
}

}  // namespace qgrid
