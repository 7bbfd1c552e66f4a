/*
 * Copyright 2026 The ncgame Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "random.hpp"
#include "testplan.hpp"

namespace ncgame {

enum class Algorithm { StaticOnce, Deterministic, Random, RandomCoverage, RandomControlled, RandomWalk };

inline std::string_view to_string(Algorithm a)
{
    switch (a) {
    case Algorithm::StaticOnce: return "gmu";
    case Algorithm::Deterministic: return "s1.5";
    case Algorithm::Random: return "s2";
    case Algorithm::RandomCoverage: return "s3";
    case Algorithm::RandomControlled: return "s4";
    case Algorithm::RandomWalk: return "rdm";
    }
    return "?";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view s)
{
    for (auto a : {Algorithm::StaticOnce, Algorithm::Deterministic, Algorithm::Random, Algorithm::RandomCoverage,
                   Algorithm::RandomControlled, Algorithm::RandomWalk})
        if (to_string(a) == s) return a;
    if (s == "static") return Algorithm::StaticOnce;
    return std::nullopt;
}

inline constexpr Algorithm all_algorithms[] = {Algorithm::StaticOnce,     Algorithm::Deterministic,
                                              Algorithm::Random,         Algorithm::RandomCoverage,
                                              Algorithm::RandomControlled, Algorithm::RandomWalk};

enum class Denominator { AllNodes, Reachable };
enum class Spread { StdErr, StdDev };

struct ExperimentConfig {
    std::string label = "graph";
    std::optional<std::string> graph_file;
    std::optional<RandomGraphParams> generator;
    std::uint64_t generator_seed = 0;

    std::vector<Algorithm> strategies{std::begin(all_algorithms), std::end(all_algorithms)};
    std::vector<std::uint64_t> budgets;
    std::size_t trials = 100;
    std::uint64_t reset_cost = default_reset_cost;
    std::uint64_t base_seed = 0;
    Denominator denominator = Denominator::AllNodes;
    Spread spread = Spread::StdErr;
    /// Leave the budget out of the per-trial seed so that every budget of a
    /// strategy replays the same random streams.
    bool common_random_numbers = false;
    unsigned threads = 0;  // 0: hardware concurrency
};

struct CellStats {
    Algorithm strategy;
    std::uint64_t budget;
    std::size_t trials;
    double mean_pct;
    double spread_pct;
    double mean_resets;
    double mean_executions;
};

struct ExperimentResult {
    std::string graph;
    std::vector<CellStats> cells;
};

/// Per-trial seed: FNV-1a over (strategy name, budget, trial) XOR base seed.
inline std::uint64_t trial_seed(std::uint64_t base_seed, Algorithm a, std::uint64_t budget, std::uint64_t trial,
                                bool common_random_numbers = false)
{
    std::uint64_t h = fnv1a(to_string(a));
    if (!common_random_numbers) h = fnv1a(budget, h);
    h = fnv1a(trial, h);
    return h ^ base_seed;
}

/// One run of one algorithm. The responder uses the seed directly; the
/// strategy's own randomness uses a stream derived from it.
inline RunResult run_algorithm(const GameGraph& g, const TestSuite& suite, Algorithm a, std::uint64_t budget,
                               std::uint64_t reset_cost, std::uint64_t seed)
{
    SutResponder sut(seed);
    Rng rng(mix64(seed));
    switch (a) {
    case Algorithm::StaticOnce: return static_once(g, suite, budget, reset_cost, sut);
    case Algorithm::Deterministic: return nt_plan(g, suite, budget, PlanStrategy::Deterministic, reset_cost, sut, rng);
    case Algorithm::Random: return nt_plan(g, suite, budget, PlanStrategy::Random, reset_cost, sut, rng);
    case Algorithm::RandomCoverage: return nt_plan(g, suite, budget, PlanStrategy::RandomCoverage, reset_cost, sut, rng);
    case Algorithm::RandomControlled:
        return nt_plan(g, suite, budget, PlanStrategy::RandomControlled, reset_cost, sut, rng);
    case Algorithm::RandomWalk: return random_walk(g, budget, reset_cost, sut, rng);
    }
    throw InternalError("unknown algorithm");
}

namespace detail {

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn)
{
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::jthread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < n; i += threads) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    pool.clear();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace detail

/**
 * Monte Carlo campaign over the (strategy, budget) grid. Coverage of a trial
 * is 100 * |covered| / denominator. Each trial's seed is derived, never drawn
 * from a shared stream, and aggregation folds trials in index order, so the
 * result does not depend on the thread count.
 */
inline ExperimentResult run_experiment(const GameGraph& g, const ExperimentConfig& cfg)
{
    if (cfg.trials < 1) throw ValidationError("trials must be at least 1");
    for (auto b : cfg.budgets)
        if (b < 1) throw ValidationError("budgets must be at least 1");
    require_strict(g);
    const TestSuite suite = generate_static_suite(g);
    const double denom = static_cast<double>(cfg.denominator == Denominator::AllNodes ? g.size()
                                                                                      : reachable(g, g.init()).size());

    ExperimentResult out;
    out.graph = cfg.label;
    for (Algorithm a : cfg.strategies) {
        for (std::uint64_t budget : cfg.budgets) {
            std::vector<double> pct(cfg.trials), resets(cfg.trials), execs(cfg.trials);
            detail::parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
                auto seed = trial_seed(cfg.base_seed, a, budget, t, cfg.common_random_numbers);
                auto run = run_algorithm(g, suite, a, budget, cfg.reset_cost, seed);
                if (run.spent > run.budget) throw InternalError("run overspent its budget");
                pct[t] = 100.0 * static_cast<double>(run.covered.size()) / denom;
                resets[t] = static_cast<double>(run.resets);
                execs[t] = static_cast<double>(run.executions);
            });
            const double n = static_cast<double>(cfg.trials);
            double mean = 0, mr = 0, me = 0;
            for (std::size_t t = 0; t < cfg.trials; ++t) {
                mean += pct[t];
                mr += resets[t];
                me += execs[t];
            }
            mean /= n;
            double ss = 0;
            for (double p : pct) ss += (p - mean) * (p - mean);
            const double sd = cfg.trials > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
            const double spread = cfg.spread == Spread::StdErr ? sd / std::sqrt(n) : sd;
            out.cells.push_back({a, budget, cfg.trials, mean, spread, mr / n, me / n});
        }
    }
    return out;
}

inline GameGraph load_graph_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open `" + path + "`");
    return parse_game_graph(in);
}

/// Resolves the config's graph source (file or generator).
inline GameGraph experiment_graph(const ExperimentConfig& cfg)
{
    if (cfg.graph_file) return load_graph_file(*cfg.graph_file);
    if (cfg.generator) return generate_random(*cfg.generator, cfg.generator_seed);
    throw ValidationError("experiment config names no graph source");
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) { return run_experiment(experiment_graph(cfg), cfg); }

inline std::string format_fixed2(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

inline std::string emit_csv(const ExperimentResult& res)
{
    auto cells = res.cells;
    std::stable_sort(cells.begin(), cells.end(), [](const CellStats& a, const CellStats& b) {
        auto na = to_string(a.strategy), nb = to_string(b.strategy);
        return na != nb ? na < nb : a.budget < b.budget;
    });
    std::string out = "graph,strategy,budget,trials,mean_pct,stderr_pct,mean_resets,mean_executions\n";
    for (const auto& c : cells) {
        out += res.graph + ',' + std::string(to_string(c.strategy)) + ',' + std::to_string(c.budget) + ',' +
               std::to_string(c.trials) + ',' + format_fixed2(c.mean_pct) + ',' + format_fixed2(c.spread_pct) + ',' +
               format_fixed2(c.mean_resets) + ',' + format_fixed2(c.mean_executions) + '\n';
    }
    return out;
}

namespace detail {

template <typename T>
std::vector<T> parse_list(std::string_view value, std::size_t line, auto&& one)
{
    std::vector<T> out;
    while (!value.empty()) {
        auto comma = value.find(',');
        auto item = value.substr(0, comma);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        auto v = one(item);
        if (!v) throw ParseError(line, "bad list item `" + std::string(item) + "`");
        out.push_back(*v);
        value = comma == std::string_view::npos ? std::string_view{} : value.substr(comma + 1);
    }
    return out;
}

} // namespace detail

/**
 * Flat key=value experiment config. Recognized keys:
 *
 *   label, graph, gen.nodes, gen.sut_fraction, gen.min_out, gen.max_out,
 *   gen.forward_bias, gen.seed, strategies, budgets, trials, reset_cost, base_seed,
 *   denominator (all|reachable), spread (stderr|stddev),
 *   common_random_numbers (true|false), threads
 */
inline ExperimentConfig parse_experiment_config(std::istream& in)
{
    ExperimentConfig cfg;
    RandomGraphParams gen;
    bool have_gen = false;
    std::string raw;
    std::size_t line = 0;
    auto uint_of = [&](std::string_view v) {
        auto x = detail::parse_uint(v);
        if (!x) throw ParseError(line, "expected an unsigned integer, got `" + std::string(v) + "`");
        return *x;
    };
    auto real_of = [&](std::string_view v) {
        double x = 0;
        auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
        if (ec != std::errc{} || end != v.data() + v.size())
            throw ParseError(line, "expected a number, got `" + std::string(v) + "`");
        return x;
    };
    while (std::getline(in, raw)) {
        ++line;
        std::string_view sv = raw;
        while (!sv.empty() && (sv.back() == '\r' || sv.back() == ' ')) sv.remove_suffix(1);
        while (!sv.empty() && sv.front() == ' ') sv.remove_prefix(1);
        if (sv.empty() || sv.front() == '#') continue;
        auto eq = sv.find('=');
        if (eq == std::string_view::npos) throw ParseError(line, "expected key=value");
        auto key = sv.substr(0, eq);
        auto value = sv.substr(eq + 1);
        while (!key.empty() && key.back() == ' ') key.remove_suffix(1);
        while (!value.empty() && value.front() == ' ') value.remove_prefix(1);

        if (key == "label") cfg.label = std::string(value);
        else if (key == "graph") cfg.graph_file = std::string(value);
        else if (key == "gen.nodes") gen.node_count = uint_of(value), have_gen = true;
        else if (key == "gen.min_out") gen.min_out = uint_of(value), have_gen = true;
        else if (key == "gen.max_out") gen.max_out = uint_of(value), have_gen = true;
        else if (key == "gen.seed") cfg.generator_seed = uint_of(value), have_gen = true;
        else if (key == "gen.sut_fraction") gen.sut_fraction = real_of(value), have_gen = true;
        else if (key == "gen.forward_bias") gen.forward_bias = real_of(value), have_gen = true; else if (key == "strategies")
            cfg.strategies = detail::parse_list<Algorithm>(value, line, parse_algorithm);
        else if (key == "budgets")
            cfg.budgets = detail::parse_list<std::uint64_t>(value, line, detail::parse_uint);
        else if (key == "trials") cfg.trials = uint_of(value);
        else if (key == "reset_cost") cfg.reset_cost = uint_of(value);
        else if (key == "base_seed") cfg.base_seed = uint_of(value);
        else if (key == "threads") cfg.threads = static_cast<unsigned>(uint_of(value));
        else if (key == "denominator") {
            if (value == "all") cfg.denominator = Denominator::AllNodes;
            else if (value == "reachable") cfg.denominator = Denominator::Reachable;
            else throw ParseError(line, "denominator must be `all` or `reachable`");
        } else if (key == "spread") {
            if (value == "stderr") cfg.spread = Spread::StdErr;
            else if (value == "stddev") cfg.spread = Spread::StdDev;
            else throw ParseError(line, "spread must be `stderr` or `stddev`");
        } else if (key == "common_random_numbers") {
            if (value == "true") cfg.common_random_numbers = true;
            else if (value == "false") cfg.common_random_numbers = false;
            else throw ParseError(line, "common_random_numbers must be `true` or `false`");
        } else
            throw ParseError(line, "unknown key `" + std::string(key) + "`");
    }
    if (have_gen) cfg.generator = gen;
    return cfg;
}

inline ExperimentConfig parse_experiment_config(std::string_view text)
{
    std::istringstream in{std::string(text)};
    return parse_experiment_config(in);
}

} // namespace ncgame
