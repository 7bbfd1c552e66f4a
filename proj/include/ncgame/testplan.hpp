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

// Budgeted execution of static test suites against an SUT that resolves its
// nondeterminism at random. Every visited node costs one unit; starting a
// test case other than the first one costs reset_cost on top.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "random.hpp"

namespace ncgame {

constexpr std::uint64_t default_reset_cost = 10;

struct TestCase {
    std::string id;
    PlayPrefix path;

    friend bool operator==(const TestCase&, const TestCase&) = default;
};

struct TestSuite {
    std::vector<TestCase> cases;

    NodeSet nodes(const GameGraph& g) const
    {
        NodeSet s(g.size());
        for (const auto& tc : cases) s |= covered_nodes(g, tc.path);
        return s;
    }

    friend bool operator==(const TestSuite&, const TestSuite&) = default;
};

enum class PlanStrategy { Deterministic, Random, RandomCoverage, RandomControlled };

inline std::string_view to_string(PlanStrategy s)
{
    switch (s) {
    case PlanStrategy::Deterministic: return "s1.5";
    case PlanStrategy::Random: return "s2";
    case PlanStrategy::RandomCoverage: return "s3";
    case PlanStrategy::RandomControlled: return "s4";
    }
    return "?";
}

inline std::optional<PlanStrategy> parse_plan_strategy(std::string_view s)
{
    if (s == "s1.5") return PlanStrategy::Deterministic;
    if (s == "s2") return PlanStrategy::Random;
    if (s == "s3") return PlanStrategy::RandomCoverage;
    if (s == "s4") return PlanStrategy::RandomControlled;
    return std::nullopt;
}

/// SUT that picks a uniformly random successor at each of its nodes.
class SutResponder {
public:
    explicit SutResponder(std::uint64_t seed) : rng_(seed) {}

    NodeIndex respond(const GameGraph& g, NodeIndex v)
    {
        auto s = g.successors(v);
        if (s.empty()) throw ValidationError("SUT node `" + g.name(v) + "` is a sink");
        return s[uniform_index(rng_, s.size())];
    }

private:
    Rng rng_;
};

struct ExecutionRecord {
    std::string case_id;
    PlayPrefix realized;
    bool diverged = false;
    std::uint64_t cost = 0;
};

struct RunResult {
    NodeSet covered;
    std::uint64_t budget = 0;
    std::uint64_t spent = 0;
    std::uint64_t resets = 0;
    std::uint64_t executions = 0;
    std::vector<ExecutionRecord> log;

    std::uint64_t leftover() const { return budget - spent; }
};

/// Number of positions of p that hold SUT nodes (repeats count separately).
inline std::size_t alpha(const TestCase& tc, const GameGraph& g)
{
    return static_cast<std::size_t>(std::count_if(tc.path.nodes.begin(), tc.path.nodes.end(),
                                                  [&](NodeIndex v) { return g.owner(v) == Player::Sut; }));
}


/**
 * Selection score of a test case given the covered set.
 *
 *   s1.5  1 while the case is unexecuted in the current pass, else 0
 *   s2    1 if the case could still add coverage, else 0
 *   s3    uniform in [0, u], u = number of the case's nodes not yet covered
 *   s4    uniform in [0, u / max(1, alpha)]
 */
inline double pgain(PlanStrategy strategy, const TestCase& tc, const GameGraph& g, const NodeSet& covered,
                    bool executed_in_pass, Rng& rng)
{
    const auto uncovered = static_cast<double>((covered_nodes(g, tc.path) - covered).size());
    switch (strategy) {
    case PlanStrategy::Deterministic: return executed_in_pass ? 0.0 : 1.0;
    case PlanStrategy::Random: return uncovered > 0 ? 1.0 : 0.0;
    case PlanStrategy::RandomCoverage: return uniform_real(rng, uncovered);
    case PlanStrategy::RandomControlled:
        return uniform_real(rng, uncovered / static_cast<double>(std::max<std::size_t>(1, alpha(tc, g))));
    }
    return 0.0;
}

struct CaseExecution {
    PlayPrefix realized;
    bool diverged = false;
    std::uint64_t cost = 0;
};

inline void require_case(const GameGraph& g, const TestCase& tc)
{
    if (!is_valid_prefix(g, tc.path) || tc.path[0] != g.init())
        throw ValidationError("test case `" + tc.id + "` is not a play prefix from init");
}

/**
 * Runs one test case. The tester follows the case; at SUT positions the
 * responder picks. A differing pick is still visited and paid for, then the
 * case stops as diverged. The case also stops when its path is exhausted or
 * the budget runs out.
 */
inline CaseExecution execute_case(const GameGraph& g, const TestCase& tc, std::uint64_t budget, SutResponder& sut)
{
    require_case(g, tc);
    CaseExecution out;
    if (budget == 0) return out;
    const auto& path = tc.path.nodes;
    out.realized.nodes.push_back(path[0]);
    out.cost = 1;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        if (out.cost >= budget) break;
        const NodeIndex v = path[i];
        const NodeIndex next = g.owner(v) == Player::Sut ? sut.respond(g, v) : path[i + 1];
        out.realized.nodes.push_back(next);
        ++out.cost;
        if (next != path[i + 1]) {
            out.diverged = true;
            break;
        }
    }
    return out;
}

namespace detail {

struct Ledger {
    RunResult result;
    std::uint64_t reset_cost;
    bool started = false;

    Ledger(const GameGraph& g, std::uint64_t budget, std::uint64_t reset) : reset_cost(reset)
    {
        result.covered = NodeSet(g.size());
        result.budget = budget;
    }

    std::uint64_t remaining() const { return result.budget - result.spent; }

    bool can_start() const { return remaining() >= (started ? reset_cost + 1 : 1); }

    void start()
    {
        if (started) {
            result.spent += reset_cost;
            ++result.resets;
        }
        started = true;
    }

    void record(const GameGraph& g, const std::string& id, CaseExecution e)
    {
        result.spent += e.cost;
        ++result.executions;
        result.covered |= covered_nodes(g, e.realized);
        result.log.push_back({id, std::move(e.realized), e.diverged, e.cost});
    }
};

} // namespace detail

/**
 * Repetitive suite execution. While a new case start is affordable and some
 * node of the suite is still uncovered, pick the case with the greatest
 * pgain (uniformly among ties) and execute it. Coverage counts the nodes
 * actually visited. For s1.5 the executed marks are cleared after each full
 * pass so that it keeps going until the budget runs out.
 */
inline RunResult nt_plan(const GameGraph& g, const TestSuite& suite, std::uint64_t budget, PlanStrategy strategy,
                         std::uint64_t reset_cost, SutResponder& sut, Rng& rng)
{
    if (suite.cases.empty()) throw ValidationError("empty test suite");
    for (const auto& tc : suite.cases) require_case(g, tc);
    const NodeSet target = suite.nodes(g);
    detail::Ledger ledger(g, budget, reset_cost);
    std::vector<char> executed(suite.cases.size(), 0);
    std::vector<double> score(suite.cases.size());
    std::vector<std::size_t> ties;

    while (!target.is_subset_of(ledger.result.covered) && ledger.can_start()) {
        if (std::all_of(executed.begin(), executed.end(), [](char e) { return e != 0; }))
            std::fill(executed.begin(), executed.end(), 0);
        double best = -1.0;
        for (std::size_t i = 0; i < suite.cases.size(); ++i) {
            score[i] = pgain(strategy, suite.cases[i], g, ledger.result.covered, executed[i] != 0, rng);
            best = std::max(best, score[i]);
        }
        ties.clear();
        for (std::size_t i = 0; i < suite.cases.size(); ++i)
            if (score[i] == best) ties.push_back(i);
        const std::size_t pick = ties.size() == 1 ? ties[0] : ties[uniform_index(rng, ties.size())];

        ledger.start();
        auto e = execute_case(g, suite.cases[pick], ledger.remaining(), sut);
        ledger.record(g, suite.cases[pick].id, std::move(e));
        executed[pick] = 1;
    }
    return std::move(ledger.result);
}

/// Execute-once baseline: every case once, in suite order, until the budget
/// cannot pay for the next start.
inline RunResult static_once(const GameGraph& g, const TestSuite& suite, std::uint64_t budget,
                             std::uint64_t reset_cost, SutResponder& sut)
{
    if (suite.cases.empty()) throw ValidationError("empty test suite");
    for (const auto& tc : suite.cases) require_case(g, tc);
    detail::Ledger ledger(g, budget, reset_cost);
    for (const auto& tc : suite.cases) {
        if (!ledger.can_start()) break;
        ledger.start();
        ledger.record(g, tc.id, execute_case(g, tc, ledger.remaining(), sut));
    }
    return std::move(ledger.result);
}

/// One continuous random walk from init until the budget is spent. Tester
/// moves are uniform; SUT moves come from the responder.
inline RunResult random_walk(const GameGraph& g, std::uint64_t budget, std::uint64_t reset_cost, SutResponder& sut,
                             Rng& rng)
{
    if (budget < 1) throw ValidationError("budget must be at least 1");
    detail::Ledger ledger(g, budget, reset_cost);
    ledger.start();
    CaseExecution walk;
    walk.realized.nodes.push_back(g.init());
    walk.cost = 1;
    while (walk.cost < budget) {
        const NodeIndex v = walk.realized.last();
        auto s = g.successors(v);
        if (s.empty()) throw ValidationError("random walk reached sink `" + g.name(v) + "`");
        const NodeIndex next = g.owner(v) == Player::Sut ? sut.respond(g, v) : s[uniform_index(rng, s.size())];
        walk.realized.nodes.push_back(next);
        ++walk.cost;
    }
    ledger.record(g, "walk", std::move(walk));
    return std::move(ledger.result);
}

// --------------------------------------------------------------------------
// Static suite generation

namespace detail {

/// Lexicographically smallest shortest path from g.init() to target.
inline std::optional<PlayPrefix> shortest_path_to(const GameGraph& g, NodeIndex target)
{
    constexpr std::size_t inf = std::numeric_limits<std::size_t>::max();
    std::vector<std::vector<NodeIndex>> pred(g.size());
    for (NodeIndex v = 0; v < g.size(); ++v)
        for (NodeIndex w : g.successors(v)) pred[w].push_back(v);
    std::vector<std::size_t> dist(g.size(), inf);
    std::vector<NodeIndex> queue{target};
    dist[target] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head)
        for (NodeIndex u : pred[queue[head]])
            if (dist[u] == inf) {
                dist[u] = dist[queue[head]] + 1;
                queue.push_back(u);
            }
    if (dist[g.init()] == inf) return std::nullopt;

    PlayPrefix p;
    p.nodes.push_back(g.init());
    while (p.last() != target) {
        std::optional<NodeIndex> step;
        for (NodeIndex w : g.successors(p.last()))
            if (dist[w] + 1 == dist[p.last()] && (!step || w < *step)) step = w;
        p.nodes.push_back(*step);
    }
    return p;
}

} // namespace detail

/**
 * Deterministic node-coverage suite, reading g as if the SUT were
 * deterministic. For each node (in id order) not yet covered, emit the
 * lexicographically smallest shortest path from init to it, then keep
 * appending the smallest-id successor that is still uncovered. Cases that are
 * prefixes of other cases are dropped. Case ids are t1, t2, ...
 */
inline TestSuite generate_static_suite(const GameGraph& g)
{
    require_strict(g);
    NodeSet covered(g.size());
    std::vector<PlayPrefix> paths;
    for (NodeIndex v = 0; v < g.size(); ++v) {
        if (covered.contains(v)) continue;
        auto p = detail::shortest_path_to(g, v);
        if (!p) continue;
        covered |= covered_nodes(g, *p);
        for (;;) {
            std::optional<NodeIndex> ext;
            for (NodeIndex w : g.successors(p->last()))
                if (!covered.contains(w) && (!ext || w < *ext)) ext = w;
            if (!ext) break;
            p->nodes.push_back(*ext);
            covered.insert(*ext);
        }
        paths.push_back(std::move(*p));
    }

    auto is_prefix = [](const PlayPrefix& a, const PlayPrefix& b) {
        return a.size() <= b.size() && std::equal(a.nodes.begin(), a.nodes.end(), b.nodes.begin());
    };
    TestSuite suite;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        bool redundant = false;
        for (std::size_t j = 0; j < paths.size() && !redundant; ++j) {
            if (i == j) continue;
            redundant = is_prefix(paths[i], paths[j]) && (paths[i].size() < paths[j].size() || j < i);
        }
        if (!redundant) suite.cases.push_back({"t" + std::to_string(suite.cases.size() + 1), paths[i]});
    }
    return suite;
}

// --------------------------------------------------------------------------
// `ncsuite 1` text format

inline std::string serialize(const GameGraph& g, const TestSuite& suite)
{
    std::ostringstream out;
    out << "ncsuite 1\n";
    for (const auto& tc : suite.cases) out << "case " << tc.id << ": " << format_prefix(g, tc.path) << '\n';
    return out.str();
}

inline TestSuite parse_suite(std::istream& in, const GameGraph& g)
{
    detail::LineReader reader(in);
    std::size_t line = 0;
    std::vector<std::string_view> tok;
    if (!reader.next(line, tok) || tok.size() != 2 || tok[0] != "ncsuite" || tok[1] != "1")
        throw ParseError(line ? line : 1, "expected header `ncsuite 1`");

    TestSuite suite;
    std::set<std::string> ids;
    while (reader.next(line, tok)) {
        if (tok.size() < 3 || tok[0] != "case" || !tok[1].ends_with(':'))
            throw ParseError(line, "expected `case <id>: <node> <node> ...`");
        std::string id(tok[1].substr(0, tok[1].size() - 1));
        if (!is_valid_node_id(id)) throw ParseError(line, "invalid case id `" + id + "`");
        if (!ids.insert(id).second) throw ParseError(line, "duplicate case id `" + id + "`");
        TestCase tc{id, {}};
        for (std::size_t i = 2; i < tok.size(); ++i) {
            auto v = g.find(tok[i]);
            if (!v) throw ParseError(line, "unknown node `" + std::string(tok[i]) + "`");
            tc.path.nodes.push_back(*v);
        }
        if (!is_valid_prefix(g, tc.path) || tc.path[0] != g.init())
            throw ParseError(line, "case `" + id + "` is not a play prefix from init");
        suite.cases.push_back(std::move(tc));
    }
    return suite;
}

inline TestSuite parse_suite(std::string_view text, const GameGraph& g)
{
    std::istringstream in{std::string(text)};
    return parse_suite(in, g);
}

} // namespace ncgame
