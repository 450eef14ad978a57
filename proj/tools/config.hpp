#pragma once

// Experiment config: parsing with line-referenced errors, and the effective
// config echoed into every output file.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qgrid/trajectory.hpp"

namespace qgrid::cli {

using nlohmann::json;

/// A config problem located at a key path; `line` is 0 when unknown.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::vector<std::string> path, const std::string& msg)
        : std::runtime_error(msg), path(std::move(path)) {}
    ConfigError(std::size_t line, const std::string& msg) : std::runtime_error(msg), line(line) {}

    std::vector<std::string> path;
    std::size_t line = 0;
};

struct BucketCfg {
    std::size_t n = 0;
    std::vector<std::size_t> marked;
};

struct CostCfg {
    std::string type = "brachistochrone";
    // index_sum
    std::vector<std::size_t> sizes;
    double offset = 0.0;
    std::vector<double> weights;
    // brachistochrone
    std::size_t k = 3;
    std::vector<std::size_t> n{8, 8, 8};
    Rectangle rectangle{};
    bool include_zero_ordinate = false;
    std::optional<std::vector<std::vector<double>>> columns;
    CostConfig quadrature{};
    std::uint64_t enumeration_cap = kDefaultEnumerationCap;
};

struct ScheduleCfg {
    std::optional<double> lambda;
    std::optional<std::uint64_t> max_rounds;
    bool strict_paper = false;
};

struct BisectCfg {
    double a0 = 0.0;
    std::optional<double> b0;  // nullopt: drawn by initial_upper_bound
    std::uint64_t max_count = 20;
    double epsilon = 0.0;
    std::string backend = "grover";
};

struct BrachCfg {
    bool brute_force = true;
    bool bisect = true;
    std::size_t samples = 101;
};

struct AnalyzeCfg {
    std::vector<double> m_values;
    bool m_auto = false;
    std::uint64_t lemma_trials = 20000;
    std::uint64_t runtime_trials = 200;
    std::vector<std::vector<BucketCfg>> runtime_sweep;
};

struct Config {
    std::string mode;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    std::string out = "out";
    ScheduleCfg schedule;
    std::vector<BucketCfg> buckets;
    std::optional<CostCfg> cost;
    std::optional<std::pair<double, double>> interval;
    BisectCfg bisect;
    BrachCfg brachistochrone;
    AnalyzeCfg analyze;
};

/// 1-based line of the key path in `text`, found by locating each key in
/// turn after the previous one. 0 when not found.
inline std::size_t line_of(const std::string& text, const std::vector<std::string>& path) {
    std::size_t pos = 0;
    bool any = false;
    for (const auto& key : path) {
        if (!key.empty() && key.front() == '[') continue;
        const auto hit = text.find('"' + key + '"', pos);
        if (hit == std::string::npos) break;
        pos = hit;
        any = true;
    }
    if (!any) return 0;
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

namespace detail {

struct Node {
    const json& j;
    std::vector<std::string> path;

    Node child(const std::string& key) const {
        auto p = path;
        p.push_back(key);
        return {j.at(key), std::move(p)};
    }
    Node element(std::size_t i) const {
        auto p = path;
        p.push_back("[" + std::to_string(i) + "]");
        return {j.at(i), std::move(p)};
    }
    bool has(const std::string& key) const { return j.contains(key) && !j.at(key).is_null(); }

    [[noreturn]] void fail(const std::string& msg) const {
        std::string where;
        for (const auto& p : path) where += (where.empty() || p.front() == '[' ? "" : ".") + p;
        throw ConfigError(path, (where.empty() ? "" : where + ": ") + msg);
    }

    void allow(std::initializer_list<const char*> keys) const {
        if (!j.is_object()) fail("expected an object");
        for (const auto& [k, v] : j.items()) {
            bool ok = false;
            for (const char* a : keys) ok |= k == a;
            if (!ok) child(k).fail("unknown key");
        }
    }

    double number() const {
        if (!j.is_number()) fail("expected a number");
        return j.get<double>();
    }
    std::uint64_t count() const {
        if (!j.is_number_integer() || j.get<std::int64_t>() < 0) fail("expected a non-negative integer");
        return j.get<std::uint64_t>();
    }
    bool boolean() const {
        if (!j.is_boolean()) fail("expected true or false");
        return j.get<bool>();
    }
    std::string string() const {
        if (!j.is_string()) fail("expected a string");
        return j.get<std::string>();
    }
    template <class F>
    auto list(F&& each) const {
        if (!j.is_array()) fail("expected an array");
        std::vector<decltype(each(element(0)))> out;
        for (std::size_t i = 0; i < j.size(); ++i) out.push_back(each(element(i)));
        return out;
    }
};

inline std::vector<std::size_t> sizes(const Node& n) {
    return n.list([](const Node& e) { return static_cast<std::size_t>(e.count()); });
}

inline std::vector<double> numbers(const Node& n) {
    return n.list([](const Node& e) { return e.number(); });
}

inline BucketCfg bucket(const Node& node) {
    node.allow({"n", "marked", "marked_count"});
    if (!node.has("n")) node.fail("missing n");
    BucketCfg b;
    b.n = node.child("n").count();
    if (b.n == 0) node.child("n").fail("bucket size must be positive");
    if (node.has("marked") && node.has("marked_count")) node.fail("give marked or marked_count, not both");
    if (node.has("marked")) {
        b.marked = sizes(node.child("marked"));
        for (std::size_t x : b.marked)
            if (x >= b.n) node.child("marked").fail("index " + std::to_string(x) + " >= n");
    } else if (node.has("marked_count")) {
        const auto m = node.child("marked_count").count();
        if (m > b.n) node.child("marked_count").fail("more marked items than n");
        for (std::size_t x = 0; x < m; ++x) b.marked.push_back(x);
    } else {
        node.fail("missing marked or marked_count");
    }
    return b;
}

inline std::vector<BucketCfg> buckets(const Node& n) {
    auto out = n.list(bucket);
    if (out.empty()) n.fail("need at least one bucket");
    return out;
}

inline CostCfg cost(const Node& node) {
    CostCfg c;
    if (!node.has("type")) node.fail("missing type");
    c.type = node.child("type").string();
    if (node.has("enumeration_cap")) c.enumeration_cap = node.child("enumeration_cap").count();
    if (c.type == "index_sum") {
        node.allow({"type", "sizes", "offset", "weights", "enumeration_cap"});
        if (!node.has("sizes")) node.fail("missing sizes");
        c.sizes = sizes(node.child("sizes"));
        if (c.sizes.empty()) node.child("sizes").fail("need at least one coordinate");
        for (std::size_t s : c.sizes)
            if (s == 0) node.child("sizes").fail("sizes must be positive");
        if (node.has("offset")) c.offset = node.child("offset").number();
        c.weights = node.has("weights") ? numbers(node.child("weights")) : std::vector<double>(c.sizes.size(), 1.0);
        if (c.weights.size() != c.sizes.size()) node.child("weights").fail("one weight per coordinate required");
        return c;
    }
    if (c.type != "brachistochrone") node.child("type").fail("expected index_sum or brachistochrone");
    node.allow({"type", "k", "n", "rectangle", "g", "quadrature", "interpolation", "include_zero_ordinate", "columns",
                "enumeration_cap"});
    if (node.has("k")) c.k = node.child("k").count();
    if (c.k == 0) node.child("k").fail("k must be positive");
    if (node.has("n")) {
        const auto& nj = node.j.at("n");
        c.n = nj.is_array() ? sizes(node.child("n")) : std::vector<std::size_t>(c.k, node.child("n").count());
    } else {
        c.n.assign(c.k, 8);
    }
    if (c.n.size() != c.k) node.child("n").fail("expected " + std::to_string(c.k) + " column sizes");
    for (std::size_t s : c.n)
        if (s == 0) node.child("n").fail("column sizes must be positive");
    if (node.has("rectangle")) {
        const auto r = node.child("rectangle");
        r.allow({"x_min", "x_max", "y_min", "y_max"});
        if (r.has("x_min")) c.rectangle.x_min = r.child("x_min").number();
        if (r.has("x_max")) c.rectangle.x_max = r.child("x_max").number();
        if (r.has("y_min")) c.rectangle.y_min = r.child("y_min").number();
        if (r.has("y_max")) c.rectangle.y_max = r.child("y_max").number();
        if (!(c.rectangle.x_min < c.rectangle.x_max && c.rectangle.y_min < c.rectangle.y_max))
            r.fail("needs x_min < x_max and y_min < y_max");
    }
    if (node.has("g")) c.quadrature.g = node.child("g").number();
    if (!(c.quadrature.g > 0.0)) node.child("g").fail("g must be positive");
    if (node.has("quadrature")) {
        const auto q = node.child("quadrature");
        q.allow({"initial_panels", "nodes_per_panel", "relative_tolerance", "max_panels", "positivity_probes"});
        if (q.has("initial_panels")) c.quadrature.initial_panels = q.child("initial_panels").count();
        if (q.has("nodes_per_panel")) c.quadrature.nodes_per_panel = q.child("nodes_per_panel").count();
        if (q.has("relative_tolerance")) c.quadrature.relative_tolerance = q.child("relative_tolerance").number();
        if (q.has("max_panels")) c.quadrature.max_panels = q.child("max_panels").count();
        if (q.has("positivity_probes")) c.quadrature.positivity_probes = q.child("positivity_probes").count();
        if (c.quadrature.initial_panels == 0 || c.quadrature.max_panels < c.quadrature.initial_panels)
            q.fail("needs 0 < initial_panels <= max_panels");
        if (c.quadrature.nodes_per_panel == 0 || c.quadrature.nodes_per_panel > 64)
            q.child("nodes_per_panel").fail("must be in 1..64");
        if (!(c.quadrature.relative_tolerance > 0.0)) q.child("relative_tolerance").fail("must be positive");
    }
    if (node.has("interpolation")) {
        const auto kind = node.child("interpolation").string();
        if (kind == "lagrange") c.quadrature.interpolation = InterpolationKind::Lagrange;
        else if (kind == "piecewise_linear") c.quadrature.interpolation = InterpolationKind::PiecewiseLinear;
        else node.child("interpolation").fail("expected lagrange or piecewise_linear");
    }
    if (node.has("include_zero_ordinate")) c.include_zero_ordinate = node.child("include_zero_ordinate").boolean();
    if (node.has("columns")) {
        const auto cols = node.child("columns");
        c.columns = cols.list([](const Node& e) { return numbers(e); });
        if (c.columns->size() != c.k) cols.fail("expected " + std::to_string(c.k) + " columns");
        for (std::size_t i = 0; i < c.k; ++i) {
            if ((*c.columns)[i].empty()) cols.element(i).fail("column needs at least one ordinate");
            c.n[i] = (*c.columns)[i].size();
        }
    }
    return c;
}

}  // namespace detail

/// Parses and validates `text`. Mode-specific requirements are checked by
/// `require_for_mode` once command-line overrides are applied.
inline Config parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        const auto line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
        throw ConfigError(line, std::string("invalid JSON: ") + e.what());
    }
    const detail::Node root{j, {}};
    root.allow({"schema_version", "mode", "seed", "jobs", "out", "schedule", "problem", "cost", "search", "bisect",
                "brachistochrone", "analyze"});
    Config c;
    if (root.has("schema_version") && root.child("schema_version").count() != 1)
        root.child("schema_version").fail("unsupported schema_version");
    if (root.has("mode")) c.mode = root.child("mode").string();
    if (root.has("seed")) c.seed = root.child("seed").count();
    if (root.has("jobs")) c.jobs = static_cast<unsigned>(root.child("jobs").count());
    if (root.has("out")) c.out = root.child("out").string();
    if (root.has("schedule")) {
        const auto s = root.child("schedule");
        s.allow({"lambda", "max_rounds", "strict_paper"});
        if (s.has("lambda")) c.schedule.lambda = s.child("lambda").number();
        if (s.has("max_rounds")) c.schedule.max_rounds = s.child("max_rounds").count();
        if (s.has("strict_paper")) c.schedule.strict_paper = s.child("strict_paper").boolean();
    }
    if (root.has("problem")) {
        const auto p = root.child("problem");
        p.allow({"buckets"});
        if (!p.has("buckets")) p.fail("missing buckets");
        c.buckets = detail::buckets(p.child("buckets"));
    }
    if (root.has("cost")) c.cost = detail::cost(root.child("cost"));
    if (root.has("search")) {
        const auto s = root.child("search");
        s.allow({"interval"});
        if (s.has("interval")) {
            const auto iv = s.child("interval");
            iv.allow({"a", "b"});
            if (!iv.has("a") || !iv.has("b")) iv.fail("needs a and b");
            c.interval = {iv.child("a").number(), iv.child("b").number()};
            if (!(c.interval->first < c.interval->second)) iv.fail("needs a < b");
        }
    }
    if (root.has("bisect")) {
        const auto b = root.child("bisect");
        b.allow({"a0", "b0", "max_count", "epsilon", "backend"});
        if (b.has("a0")) c.bisect.a0 = b.child("a0").number();
        if (b.has("b0")) {
            if (b.j.at("b0").is_string()) {
                if (b.child("b0").string() != "auto") b.child("b0").fail("expected a number or \"auto\"");
            } else {
                c.bisect.b0 = b.child("b0").number();
            }
        }
        if (b.has("max_count")) c.bisect.max_count = b.child("max_count").count();
        if (b.has("epsilon")) c.bisect.epsilon = b.child("epsilon").number();
        if (c.bisect.epsilon < 0.0) b.child("epsilon").fail("must be non-negative");
        if (b.has("backend")) c.bisect.backend = b.child("backend").string();
        if (c.bisect.backend != "grover" && c.bisect.backend != "exhaustive")
            b.child("backend").fail("expected grover or exhaustive");
    }
    if (root.has("brachistochrone")) {
        const auto b = root.child("brachistochrone");
        b.allow({"brute_force", "bisect", "samples"});
        if (b.has("brute_force")) c.brachistochrone.brute_force = b.child("brute_force").boolean();
        if (b.has("bisect")) c.brachistochrone.bisect = b.child("bisect").boolean();
        if (b.has("samples")) c.brachistochrone.samples = b.child("samples").count();
        if (c.brachistochrone.samples < 2) b.child("samples").fail("need at least 2 samples");
    }
    if (root.has("analyze")) {
        const auto a = root.child("analyze");
        a.allow({"lemma", "runtime"});
        if (a.has("lemma")) {
            const auto l = a.child("lemma");
            l.allow({"m_values", "m_range", "trials"});
            if (l.has("m_values") && l.has("m_range")) l.fail("give m_values or m_range, not both");
            if (l.has("m_values")) c.analyze.m_values = detail::numbers(l.child("m_values"));
            if (l.has("m_range")) {
                const auto r = l.child("m_range");
                if (r.j.is_string()) {
                    if (r.string() != "auto") r.fail("expected an object or \"auto\"");
                    c.analyze.m_auto = true;
                } else {
                    r.allow({"from", "to", "step"});
                    if (!r.has("from") || !r.has("to")) r.fail("needs from and to");
                    const double from = r.child("from").number(), to = r.child("to").number();
                    const double step = r.has("step") ? r.child("step").number() : 1.0;
                    if (!(step > 0.0)) r.child("step").fail("must be positive");
                    for (double m = from; m <= to + 1e-12; m += step) c.analyze.m_values.push_back(m);
                }
            }
            for (double m : c.analyze.m_values)
                if (!(m >= 1.0)) l.fail("every m must be >= 1");
            if (l.has("trials")) c.analyze.lemma_trials = l.child("trials").count();
        }
        if (a.has("runtime")) {
            const auto r = a.child("runtime");
            r.allow({"trials", "sweep"});
            if (r.has("trials")) c.analyze.runtime_trials = r.child("trials").count();
            if (r.has("sweep"))
                c.analyze.runtime_sweep = r.child("sweep").list([](const detail::Node& e) {
                    e.allow({"buckets"});
                    if (!e.has("buckets")) e.fail("missing buckets");
                    return detail::buckets(e.child("buckets"));
                });
        }
    }
    return c;
}

inline json to_json(const BucketCfg& b) { return {{"n", b.n}, {"marked", b.marked}}; }

inline json to_json(const std::vector<BucketCfg>& bs) {
    json out = json::array();
    for (const auto& b : bs) out.push_back(to_json(b));
    return out;
}

inline json to_json(const CostCfg& c) {
    if (c.type == "index_sum")
        return {{"type", c.type},
                {"sizes", c.sizes},
                {"offset", c.offset},
                {"weights", c.weights},
                {"enumeration_cap", c.enumeration_cap}};
    json j{{"type", c.type},
           {"k", c.k},
           {"n", c.n},
           {"rectangle",
            {{"x_min", c.rectangle.x_min},
             {"x_max", c.rectangle.x_max},
             {"y_min", c.rectangle.y_min},
             {"y_max", c.rectangle.y_max}}},
           {"g", c.quadrature.g},
           {"quadrature",
            {{"initial_panels", c.quadrature.initial_panels},
             {"nodes_per_panel", c.quadrature.nodes_per_panel},
             {"relative_tolerance", c.quadrature.relative_tolerance},
             {"max_panels", c.quadrature.max_panels},
             {"positivity_probes", c.quadrature.positivity_probes}}},
           {"interpolation",
            c.quadrature.interpolation == InterpolationKind::Lagrange ? "lagrange" : "piecewise_linear"},
           {"include_zero_ordinate", c.include_zero_ordinate},
           {"enumeration_cap", c.enumeration_cap}};
    if (c.columns) j["columns"] = *c.columns;
    return j;
}

/// The effective config for the selected mode, in a form parse_config
/// accepts. Jobs and output directory are left out: they do not change
/// results.
inline json effective_json(const Config& c) {
    json j{{"schema_version", 1}, {"mode", c.mode}, {"seed", c.seed}};
    j["schedule"] = {{"lambda", c.schedule.lambda ? json(*c.schedule.lambda) : json(nullptr)},
                     {"max_rounds", c.schedule.max_rounds ? json(*c.schedule.max_rounds) : json(nullptr)},
                     {"strict_paper", c.schedule.strict_paper}};
    if (!c.buckets.empty()) j["problem"] = {{"buckets", to_json(c.buckets)}};
    if (c.cost) j["cost"] = to_json(*c.cost);
    if (c.mode == "search" && c.interval) j["search"] = {{"interval", {{"a", c.interval->first}, {"b", c.interval->second}}}};
    if (c.mode == "bisect" || (c.mode == "brachistochrone" && c.brachistochrone.bisect))
        j["bisect"] = {{"a0", c.bisect.a0},
                       {"b0", c.bisect.b0 ? json(*c.bisect.b0) : json("auto")},
                       {"max_count", c.bisect.max_count},
                       {"epsilon", c.bisect.epsilon},
                       {"backend", c.bisect.backend}};
    if (c.mode == "brachistochrone")
        j["brachistochrone"] = {{"brute_force", c.brachistochrone.brute_force},
                                {"bisect", c.brachistochrone.bisect},
                                {"samples", c.brachistochrone.samples}};
    if (c.mode == "analyze") {
        json sweep = json::array();
        for (const auto& p : c.analyze.runtime_sweep) sweep.push_back({{"buckets", to_json(p)}});
        j["analyze"] = {{"lemma", {{"m_values", c.analyze.m_values}, {"trials", c.analyze.lemma_trials}}},
                        {"runtime", {{"trials", c.analyze.runtime_trials}, {"sweep", sweep}}}};
    }
    return j;
}

}  // namespace qgrid::cli
