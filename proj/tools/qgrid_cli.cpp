// qgrid: run grid searches, bound bisection, brachistochrone grids and the
// Lemma / runtime sweeps from a JSON config.
//
//   qgrid --config run.json --mode bisect --seed 7 --out results/
//
// Exit codes: 0 success, 1 config or usage error, 2 search exhausted.

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "qgrid/json_io.hpp"
#include "qgrid/qgrid.hpp"

namespace fs = std::filesystem;
using namespace qgrid;
using namespace qgrid::cli;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitExhausted = 2;

/// A usage problem not tied to a config key.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fmt(double v) {
    if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, r.ptr};
}

template <class T>
std::string fmt(const T& v)
    requires std::is_integral_v<T>
{
    if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
    else return std::to_string(v);
}

class Csv {
public:
    Csv(const json& meta, std::vector<std::string> header) : width_(header.size()) {
        out_ << "# " << meta.dump() << '\n';
        row(header);
    }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != width_) throw std::logic_error("csv row width mismatch");
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }

    std::string str() const { return out_.str(); }

private:
    std::size_t width_;
    std::ostringstream out_;
};

void write_file(const fs::path& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << body;
}

struct Run {
    Config cfg;
    fs::path out;
    json effective;

    json report_head() const {
        return {{"schema_version", kSchemaVersion},
                {"mode", cfg.mode},
                {"seed", cfg.seed},
                {"generated_at", utc_now()},
                {"config", effective}};
    }

    json csv_meta() const { return {{"schema_version", kSchemaVersion}, {"seed", cfg.seed}, {"config", effective}}; }

    void write_json(const std::string& name, json report) const {
        write_file(out / name, report.dump(2) + "\n");
        std::cout << "wrote " << (out / name).string() << '\n';
    }

    void write_csv(const std::string& name, const Csv& csv) const {
        write_file(out / name, csv.str());
        std::cout << "wrote " << (out / name).string() << '\n';
    }

    LargeBudgetPolicy policy() const {
        return cfg.schedule.strict_paper ? LargeBudgetPolicy::StrictPaper : LargeBudgetPolicy::Capped;
    }

    /// Schedule for `problem`, with config overrides applied.
    ScheduleParams schedule_for(const GridProblem& problem, std::uint64_t seed) const {
        auto p = ScheduleParams::defaults_for(problem, seed);
        if (cfg.schedule.lambda) p.lambda = *cfg.schedule.lambda;
        if (cfg.schedule.max_rounds) p.max_rounds = *cfg.schedule.max_rounds;
        p.policy = policy();
        if (!lambda_admissible(p.lambda, problem.dimension()))
            throw ConfigError({"schedule", "lambda"}, "schedule.lambda: " + std::to_string(p.lambda) +
                                                          " is outside (1, 4^k/(4^k-1)) for k = " +
                                                          std::to_string(problem.dimension()));
        return p;
    }
};

GridProblem product_problem(const std::vector<BucketCfg>& buckets) {
    std::vector<MarkedSet> sets;
    for (const auto& b : buckets) sets.emplace_back(b.n, b.marked);
    return GridProblem::product(sets);
}

/// A cost config made concrete: the grid (brachistochrone only) and a table
/// of every path's cost.
struct BuiltCost {
    std::optional<Grid> grid;
    std::vector<std::size_t> shape;
    CostModel direct;
    std::unique_ptr<CostTable> table;

    CostModel model() const { return table->model(); }
};

BuiltCost build_cost(const CostCfg& c, unsigned jobs) {
    BuiltCost b;
    if (c.type == "index_sum") {
        b.shape = c.sizes;
        b.direct = index_sum_cost(c.offset, c.weights);
    } else {
        try {
            b.grid = c.columns ? make_grid(*c.columns, c.rectangle)
                               : build_brachistochrone_grid(c.k, c.n, {c.rectangle, c.include_zero_ordinate});
        } catch (const std::invalid_argument& e) {
            throw ConfigError({"cost"}, std::string("cost: ") + e.what());
        }
        b.shape = b.grid->shape();
        b.direct = brachistochrone_cost_model(*b.grid, c.quadrature);
    }
    try {
        check_cap(b.shape, c.enumeration_cap);
    } catch (const CapExceeded& e) {
        throw ConfigError({"cost"}, std::string("cost: ") + e.what());
    }
    b.table = std::make_unique<CostTable>(b.shape, b.direct, jobs, c.enumeration_cap);
    return b;
}

json path_json(const std::optional<Path>& p) { return p ? json(*p) : json(nullptr); }

int cmd_search(const Run& run) {
    const auto& cfg = run.cfg;
    const bool product = !cfg.buckets.empty();
    if (product == cfg.cost.has_value())
        throw ConfigError(std::vector<std::string>{product ? "cost" : "problem"},
                          "search needs exactly one of problem.buckets (product mode) or cost + search.interval");
    GridProblem problem;
    std::optional<BuiltCost> cost;
    if (product) {
        problem = product_problem(cfg.buckets);
    } else {
        if (!cfg.interval) throw ConfigError({"search"}, "cost-mode search needs search.interval {a, b}");
        cost = build_cost(*cfg.cost, cfg.jobs);
        problem = projected_problem_factory(cost->shape, cost->model(), cfg.cost->enumeration_cap)(
            cfg.interval->first, cfg.interval->second);
    }
    const auto params = run.schedule_for(problem, cfg.seed);
    const auto outcome = run_grid_search(problem, params);

    json marked = json::array();
    for (const auto& b : problem.buckets) marked.push_back(b.marked().count());
    json report = run.report_head();
    report["problem"] = {{"shape", problem.shape()},
                         {"marked_counts", marked},
                         {"classical_exhaustive_oracle_calls", tuple_count(problem.shape())}};
    report["schedule"] = {{"lambda", params.lambda},
                          {"max_rounds", params.max_rounds},
                          {"policy", cfg.schedule.strict_paper ? "strict_paper" : "capped"}};
    report["result"] = to_json(outcome);
    if (cost && outcome.tuple) report["result"]["cost"] = finite_or_null(cost->table->at(*outcome.tuple));
    run.write_json("search.json", report);
    std::cout << (outcome.success ? "success" : "exhausted") << " after " << outcome.rounds_used << " rounds, "
              << outcome.ledger.total_grover_iterations() << " Grover iterations\n";
    return outcome.success ? kExitOk : kExitExhausted;
}

struct BisectRun {
    double b0 = 0.0;
    bool b0_auto = false;
    BisectResult result{BoundInterval(0, 1)};
};

BisectRun bisect_on(const Run& run, const BuiltCost& cost) {
    const auto& cfg = run.cfg;
    if (cfg.bisect.max_count == 0) throw ConfigError({"bisect", "max_count"}, "bisect.max_count must be positive");
    BisectRun br;
    if (cfg.bisect.b0) {
        br.b0 = *cfg.bisect.b0;
    } else {
        Rng rng(derive_seed(cfg.seed, 0));
        br.b0 = initial_upper_bound(cost.shape, cost.model(), rng);
        br.b0_auto = true;
    }
    if (!(cfg.bisect.a0 < br.b0))
        throw ConfigError({"bisect", br.b0_auto ? "a0" : "b0"},
                          "bisect: invalid bracket (" + fmt(cfg.bisect.a0) + ", " + fmt(br.b0) + "), need a0 < b0");
    InnerSearch inner;
    if (cfg.bisect.backend == "exhaustive") {
        inner = exhaustive_inner_search();
    } else {
        ScheduleParams base;
        base.lambda = cfg.schedule.lambda.value_or(0.0);
        base.max_rounds = cfg.schedule.max_rounds.value_or(0);
        base.policy = run.policy();
        if (cfg.schedule.lambda && !lambda_admissible(*cfg.schedule.lambda, cost.shape.size()))
            throw ConfigError({"schedule", "lambda"}, "schedule.lambda is outside (1, 4^k/(4^k-1))");
        inner = grover_inner_search(base);
    }
    BisectOptions opts;
    opts.epsilon = cfg.bisect.epsilon;
    opts.seed = derive_seed(cfg.seed, 1);
    opts.has_solution = table_existence_check(*cost.table);
    br.result = run_bisect(projected_problem_factory(cost.shape, cost.model(), cfg.cost->enumeration_cap),
                           cost.model(), cfg.bisect.a0, br.b0, cfg.bisect.max_count, inner, opts);
    return br;
}

json bisect_json(const BisectRun& br) {
    auto j = to_json(br.result);
    j["b0"] = br.b0;
    j["b0_source"] = br.b0_auto ? "initial_upper_bound" : "config";
    return j;
}

int cmd_bisect(const Run& run) {
    if (!run.cfg.cost) throw ConfigError(std::vector<std::string>{"cost"}, "bisect needs a cost section");
    const auto cost = build_cost(*run.cfg.cost, run.cfg.jobs);
    const auto br = bisect_on(run, cost);
    const auto best = brute_force_minimum(*cost.table);

    json report = run.report_head();
    report["result"] = bisect_json(br);
    report["reference"] = {{"brute_force_minimum", finite_or_null(best.cost)},
                           {"brute_force_path", best.path},
                           {"in_closure", br.result.interval.closure_contains(best.cost)}};
    run.write_json("bisect.json", report);
    std::cout << "interval (" << fmt(br.result.interval.lower()) << ", " << fmt(br.result.interval.upper())
              << ") after " << br.result.rounds << " rounds\n";
    return kExitOk;
}

int cmd_brachistochrone(Run& run) {
    auto& cfg = run.cfg;
    if (!cfg.cost) {
        cfg.cost = CostCfg{};
        run.effective = effective_json(cfg);
    }
    if (cfg.cost->type != "brachistochrone")
        throw ConfigError({"cost", "type"}, "cost.type: brachistochrone mode needs a brachistochrone cost");
    if (!cfg.brachistochrone.brute_force && !cfg.brachistochrone.bisect)
        throw ConfigError({"brachistochrone"}, "brachistochrone: enable brute_force, bisect or both");
    const auto cost = build_cost(*cfg.cost, cfg.jobs);
    const auto& grid = *cost.grid;
    const double g = cfg.cost->quadrature.g;
    const double line = straight_line_time(grid.boundary, g);
    const double floor = cycloid_time(grid.boundary, g);

    json report = run.report_head();
    json result;
    std::optional<Path> best_path;
    double best_cost = kInfiniteCost;
    if (cfg.brachistochrone.brute_force) {
        const auto best = brute_force_minimum(*cost.table);
        std::size_t infinite = 0;
        for (double c : cost.table->costs()) infinite += std::isfinite(c) ? 0 : 1;
        result["brute_force"] = {{"path", best.path},
                                 {"cost", finite_or_null(best.cost)},
                                 {"paths", cost.table->costs().size()},
                                 {"infinite_cost_paths", infinite}};
        best_path = best.path;
        best_cost = best.cost;
    }
    if (cfg.brachistochrone.bisect) {
        const auto br = bisect_on(run, cost);
        result["bisect"] = bisect_json(br);
        if (br.result.witness && br.result.witness->cost < best_cost) {
            best_path = br.result.witness->path;
            best_cost = br.result.witness->cost;
        }
    }
    json ordinates = nullptr;
    if (best_path) {
        ordinates = json::array();
        for (std::size_t i = 0; i < best_path->size(); ++i) ordinates.push_back(grid.columns[i][(*best_path)[i]]);
    }
    result["best"] = {{"path", path_json(best_path)},
                      {"cost", finite_or_null(best_cost)},
                      {"abscissae", grid.abscissae},
                      {"ordinates", ordinates}};
    result["references"] = {{"straight_line_time", line},
                            {"cycloid_time", floor},
                            {"within_sandwich", best_path && best_cost >= floor - 0.01 && best_cost <= line + 1e-3}};
    report["result"] = result;
    run.write_json("brachistochrone.json", report);

    Csv csv(run.csv_meta(), {"x", "y"});
    if (best_path)
        for (const auto& [x, y] : sample_path(grid, *best_path, cfg.brachistochrone.samples, cfg.cost->quadrature.interpolation))
            csv.row({fmt(x), fmt(y)});
    run.write_csv("brachistochrone_samples.csv", csv);
    std::cout << "best cost " << fmt(best_cost) << " (line " << fmt(line) << ", cycloid " << fmt(floor) << ")\n";
    return kExitOk;
}

std::string shape_label(const std::vector<std::size_t>& shape) {
    std::string s;
    for (std::size_t n : shape) s += (s.empty() ? "" : "x") + std::to_string(n);
    return s;
}

std::vector<BucketStats> checked_stats(const GridProblem& problem, const std::vector<std::string>& where) {
    auto stats = stats_of(problem);
    for (std::size_t i = 0; i < stats.size(); ++i)
        if (stats[i].degenerate())
            throw ConfigError(where, "bucket " + std::to_string(i) +
                                         " is degenerate (marked count 0 or n); closed forms need 0 < marked < n");
    return stats;
}

int cmd_analyze(Run& run) {
    auto& cfg = run.cfg;
    if (cfg.buckets.empty()) throw ConfigError(std::vector<std::string>{"problem"}, "analyze needs problem.buckets");
    const auto problem = product_problem(cfg.buckets);
    const auto stats = checked_stats(problem, {"problem", "buckets"});
    const double alpha_star = lemma_threshold(stats);
    if (cfg.analyze.m_auto) {
        cfg.analyze.m_values.clear();
        for (double m = std::ceil(alpha_star) + 1.0; m <= 4.0 * alpha_star; m += 1.0) cfg.analyze.m_values.push_back(m);
    }
    if (cfg.analyze.m_values.empty())
        throw ConfigError({"analyze", "lemma"}, "analyze.lemma: empty m sweep");
    if (cfg.analyze.lemma_trials == 0) throw ConfigError({"analyze", "lemma", "trials"}, "trials must be positive");
    if (cfg.analyze.runtime_trials == 0) throw ConfigError({"analyze", "runtime", "trials"}, "trials must be positive");
    if (cfg.analyze.runtime_sweep.empty()) cfg.analyze.runtime_sweep.push_back(cfg.buckets);
    run.effective = effective_json(cfg);

    const auto rows = empirical_vs_closed_form(problem, cfg.analyze.m_values, cfg.analyze.lemma_trials,
                                               derive_seed(cfg.seed, 0), cfg.jobs, run.policy());
    Csv lemma(run.csv_meta(), {"m", "trials", "successes", "empirical", "closed_form", "sigma", "within_3sigma",
                               "above_threshold", "lemma_floor", "violation"});
    std::size_t violations = 0, outside_3sigma = 0;
    json lemma_rows = json::array();
    for (const auto& r : rows) {
        lemma.row({fmt(r.m), fmt(r.trials), fmt(r.successes), fmt(r.empirical), fmt(r.closed_form), fmt(r.sigma),
                   fmt(r.within_3sigma), fmt(r.above_threshold), fmt(r.lemma_floor), fmt(r.violation())});
        violations += r.violation() ? 1 : 0;
        outside_3sigma += r.within_3sigma ? 0 : 1;
        lemma_rows.push_back(to_json(r));
    }

    Csv runtime(run.csv_meta(), {"problem", "k", "shape", "alpha_star", "pre_critical", "post_critical", "bound_total",
                                 "trials", "successes", "mean_total_iterations", "stddev_total_iterations",
                                 "mean_rounds", "max_rounds_used", "classical_exhaustive_oracle_calls",
                                 "mean_within_bound"});
    json runtime_rows = json::array();
    for (std::size_t i = 0; i < cfg.analyze.runtime_sweep.size(); ++i) {
        const auto p = product_problem(cfg.analyze.runtime_sweep[i]);
        const auto st = checked_stats(p, {"analyze", "runtime", "sweep"});
        const auto params = run.schedule_for(p, 0);
        const auto bounds = theorem_bounds(st, params.lambda);
        const auto summary = runtime_experiment(p, params, cfg.analyze.runtime_trials, derive_seed(cfg.seed, i + 1), cfg.jobs);
        const bool within = summary.mean_total_iterations <= bounds.total();
        const auto classical = tuple_count(p.shape());
        runtime.row({fmt(i), fmt(p.dimension()), shape_label(p.shape()), fmt(bounds.alpha_star),
                     fmt(bounds.pre_critical), fmt(bounds.post_critical), fmt(bounds.total()), fmt(summary.trials),
                     fmt(summary.successes), fmt(summary.mean_total_iterations), fmt(summary.stddev_total_iterations),
                     fmt(summary.mean_rounds), fmt(summary.max_rounds_used), fmt(classical), fmt(within)});
        runtime_rows.push_back({{"problem", i},
                                {"shape", p.shape()},
                                {"bounds", to_json(bounds)},
                                {"summary", to_json(summary)},
                                {"classical_exhaustive_oracle_calls", classical},
                                {"mean_within_bound", within}});
    }

    run.write_csv("lemma_sweep.csv", lemma);
    run.write_csv("runtime.csv", runtime);
    json report = run.report_head();
    report["result"] = {{"alpha_star", alpha_star},
                        {"lemma_floor", std::pow(4.0, -static_cast<double>(problem.dimension()))},
                        {"lemma_rows", lemma_rows},
                        {"bound_violations", violations},
                        {"outside_3sigma", outside_3sigma},
                        {"runtime_rows", runtime_rows}};
    run.write_json("analyze.json", report);
    std::cout << rows.size() << " lemma rows, " << violations << " bound violations\n";
    return kExitOk;
}

std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot read config " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grid search and bound bisection experiments"};
    std::string config_path, mode, out;
    std::optional<std::uint64_t> seed, max_rounds, max_count;
    std::optional<unsigned> jobs;
    bool strict = false;
    app.add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Master seed");
    app.add_option("--out", out, "Output directory");
    app.add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1u, 1024u));
    app.add_option("--mode", mode, "search, bisect, brachistochrone or analyze")
        ->check(CLI::IsMember({"search", "bisect", "brachistochrone", "analyze"}));
    app.add_flag("--strict-paper", strict, "Use j = 0 for buckets whose budget exceeds sqrt(n)");
    app.add_option("--max-rounds", max_rounds, "Round guard for each grid search");
    app.add_option("--max-count", max_count, "Bisection rounds");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    const std::string source = config_path.empty() ? "<flags>" : config_path;
    std::string text = "{}";
    try {
        if (!config_path.empty()) text = read_text(config_path);
        Run run{parse_config(text), {}, {}};
        auto& cfg = run.cfg;
        if (!mode.empty()) cfg.mode = mode;
        if (seed) cfg.seed = *seed;
        if (jobs) cfg.jobs = *jobs;
        if (!out.empty()) cfg.out = out;
        if (strict) cfg.schedule.strict_paper = true;
        if (max_rounds) cfg.schedule.max_rounds = *max_rounds;
        if (max_count) cfg.bisect.max_count = *max_count;
        if (cfg.mode.empty()) throw UsageError("no mode given (--mode or \"mode\" in the config)");
        if (cfg.mode != "search" && cfg.mode != "bisect" && cfg.mode != "brachistochrone" && cfg.mode != "analyze")
            throw ConfigError({"mode"}, "mode: expected search, bisect, brachistochrone or analyze");
        if (cfg.jobs == 0) throw ConfigError({"jobs"}, "jobs must be positive");
        if (cfg.schedule.max_rounds && *cfg.schedule.max_rounds == 0)
            throw ConfigError({"schedule", "max_rounds"}, "max_rounds must be positive");
        run.effective = effective_json(cfg);
        run.out = cfg.out;
        fs::create_directories(run.out);

        if (cfg.mode == "search") return cmd_search(run);
        if (cfg.mode == "bisect") return cmd_bisect(run);
        if (cfg.mode == "brachistochrone") return cmd_brachistochrone(run);
        return cmd_analyze(run);
    } catch (const ConfigError& e) {
        const auto line = e.line ? e.line : line_of(text, e.path);
        std::cerr << "qgrid: " << source;
        if (line) std::cerr << ":" << line;
        std::cerr << ": " << e.what() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "qgrid: " << e.what() << '\n';
    }
    return kExitConfig;
}
