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

// Exact maximal coverage guarantee on the product arena (node, covered set).
//
// A move from (v, C) leads to (w, C + w). Covered sets only grow, so the arena
// splits into layers, one per covered set C. Inside a layer the play either
// stays forever (payoff gain(C)) or leaves through an edge to some w outside C,
// whose value is already known from the larger layer C + w. Each layer is thus
// a quantitative reachability game; it is solved by Jacobi value iteration
// started at gain(C) everywhere, whose least fixed point is the layer's value.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "play.hpp"

namespace ncgame {

constexpr std::size_t default_solver_cap = 20;

namespace detail {

/// The reachable region of one root, re-indexed locally for bitmask sets.
struct Arena {
    std::vector<NodeIndex> nodes;     // local -> global (ascending)
    std::vector<int> local;           // global -> local, -1 outside
    std::vector<std::vector<int>> succ;
    std::vector<std::uint64_t> gain;
    std::vector<Player> owner;
    int root = 0;
    std::size_t universe = 0;

    Arena(const GameGraph& g, NodeIndex r, std::size_t cap)
    {
        if (cap > 63) throw CapacityError("solver cap cannot exceed 63 nodes");
        nodes = reachable(g, r).members();
        if (nodes.size() > cap)
            throw CapacityError(std::to_string(nodes.size()) + " reachable nodes exceed solver cap " + std::to_string(cap));
        universe = g.size();
        local.assign(g.size(), -1);
        for (std::size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = static_cast<int>(i);
        for (NodeIndex v : nodes) {
            std::vector<int> s;
            for (NodeIndex w : g.successors(v)) s.push_back(local[w]);
            succ.push_back(std::move(s));
            gain.push_back(g.gain(v));
            owner.push_back(g.owner(v));
        }
        root = local[r];
    }

    std::size_t size() const { return nodes.size(); }

    std::uint64_t gain_of(std::uint64_t mask) const
    {
        std::uint64_t total = 0;
        for (; mask; mask &= mask - 1) total += gain[static_cast<std::size_t>(std::countr_zero(mask))];
        return total;
    }

    std::uint64_t mask_of(const NodeSet& s) const
    {
        std::uint64_t m = 0;
        for (NodeIndex v : s.members()) {
            if (v >= local.size() || local[v] < 0) throw ValidationError("covered set leaves the reachable region");
            m |= std::uint64_t{1} << local[v];
        }
        return m;
    }

    NodeSet set_of(std::uint64_t mask) const
    {
        NodeSet s(universe);
        for (; mask; mask &= mask - 1) s.insert(nodes[static_cast<std::size_t>(std::countr_zero(mask))]);
        return s;
    }
};

/// Solved layers: per covered set, the value and chosen successor of every member.
struct Table {
    Arena arena;
    std::unordered_map<std::uint64_t, std::uint32_t> layer_of;
    std::vector<std::uint64_t> value;  // layer * k + local
    std::vector<std::int32_t> choice;  // local successor, -1 if none
    std::uint64_t states = 0;

    explicit Table(Arena a) : arena(std::move(a)) {}

    std::optional<std::size_t> slot(std::uint64_t mask, int v) const
    {
        if (v < 0 || !(mask >> v & 1u)) return std::nullopt;
        auto it = layer_of.find(mask);
        if (it == layer_of.end()) return std::nullopt;
        return std::size_t{it->second} * arena.size() + static_cast<std::size_t>(v);
    }
};

class LayerSolver {
public:
    LayerSolver(Table& t, bool restart) : t_(t), a_(t.arena), restart_(restart) {}

    std::uint32_t solve(std::uint64_t mask)
    {
        if (auto it = t_.layer_of.find(mask); it != t_.layer_of.end()) return it->second;

        const std::size_t k = a_.size();
        std::vector<int> members;
        for (std::uint64_t m = mask; m; m &= m - 1) members.push_back(std::countr_zero(m));

        // Exit values first: the recursion may grow the table.
        constexpr std::uint64_t none = std::numeric_limits<std::uint64_t>::max();
        std::vector<std::vector<std::uint64_t>> exit_value(k);
        for (int v : members) {
            for (int w : a_.succ[v]) {
                std::uint64_t ev = none;
                if (!(mask >> w & 1u)) {
                    std::uint64_t wider = mask | (std::uint64_t{1} << w);
                    std::uint32_t id = solve(wider);
                    ev = t_.value[std::size_t{id} * k + static_cast<std::size_t>(w)];
                }
                exit_value[v].push_back(ev);
            }
        }

        const std::uint64_t stay = a_.gain_of(mask);
        std::vector<std::uint64_t> x(k, stay), next(k, stay);
        std::vector<std::uint32_t> rank(k, 0);
        auto candidate = [&](int v, std::size_t j, const std::vector<std::uint64_t>& cur) {
            return exit_value[v][j] != none ? exit_value[v][j] : cur[a_.succ[v][j]];
        };

        for (std::uint32_t round = 1;; ++round) {
            bool changed = false;
            for (int v : members) {
                const auto& s = a_.succ[v];
                std::uint64_t own = stay;
                if (!s.empty()) {
                    if (a_.owner[v] == Player::Tester) {
                        own = 0;
                        for (std::size_t j = 0; j < s.size(); ++j) own = std::max(own, candidate(v, j, x));
                    } else {
                        own = none;
                        for (std::size_t j = 0; j < s.size(); ++j) own = std::min(own, candidate(v, j, x));
                    }
                }
                if (restart_) own = std::max(own, x[a_.root]);
                next[v] = std::max(own, stay);
                if (next[v] != x[v]) {
                    changed = true;
                    rank[v] = round;
                }
            }
            if (!changed) break;
            for (int v : members) x[v] = next[v];
        }

        const std::uint32_t id = static_cast<std::uint32_t>(t_.layer_of.size());
        t_.layer_of.emplace(mask, id);
        t_.value.resize(t_.value.size() + k, 0);
        t_.choice.resize(t_.choice.size() + k, -1);
        t_.states += members.size();
        for (int v : members) {
            const std::size_t at = std::size_t{id} * k + static_cast<std::size_t>(v);
            t_.value[at] = x[v];
            t_.choice[at] = pick(v, x, rank, exit_value);
        }
        return id;
    }

private:
    // Ties go to the smallest node id. The tester must also make progress
    // towards the move that realised its value, otherwise equal-valued
    // successors could cycle forever at the lower stay payoff.
    std::int32_t pick(int v, const std::vector<std::uint64_t>& x, const std::vector<std::uint32_t>& rank,
                      const std::vector<std::vector<std::uint64_t>>& exit_value) const
    {
        constexpr std::uint64_t none = std::numeric_limits<std::uint64_t>::max();
        const auto& s = a_.succ[v];
        std::int32_t best = -1;
        std::uint64_t best_value = 0;
        for (std::size_t j = 0; j < s.size(); ++j) {
            const int w = s[j];
            const bool is_exit = exit_value[v][j] != none;
            const std::uint64_t val = is_exit ? exit_value[v][j] : x[w];
            bool ok;
            if (a_.owner[v] == Player::Tester)
                ok = val == x[v] && (is_exit || rank[v] == 0 || rank[w] < rank[v]);
            else
                ok = best < 0 || val < best_value || (val == best_value && w < best);
            if (a_.owner[v] == Player::Tester) {
                if (ok && (best < 0 || w < best)) best = w;
            } else if (ok) {
                best = w;
                best_value = val;
            }
        }
        return best;
    }

    Table& t_;
    const Arena& a_;
    bool restart_;
};

} // namespace detail

/// Value of the coverage game from a root, plus optimal product-arena policies.
class SolveResult {
public:
    std::uint64_t value = 0;
    std::uint64_t states_explored = 0;

    NodeIndex root() const { return table_->arena.nodes[static_cast<std::size_t>(table_->arena.root)]; }

    /// Value of product state (node, covered); nullopt if the state was never explored.
    std::optional<std::uint64_t> value_at(NodeIndex node, const NodeSet& covered) const
    {
        auto at = slot(node, covered);
        if (!at) return std::nullopt;
        return table_->value[*at];
    }

    /// Optimal successor at a tester-owned product state.
    std::optional<NodeIndex> tester_move(NodeIndex node, const NodeSet& covered) const
    {
        return move(node, covered, Player::Tester);
    }

    /// Optimal successor at an SUT-owned product state.
    std::optional<NodeIndex> sut_move(NodeIndex node, const NodeSet& covered) const
    {
        return move(node, covered, Player::Sut);
    }

    std::shared_ptr<const detail::Table> table() const { return table_; }

private:
    friend SolveResult solve_mcg(const GameGraph&, NodeIndex, std::size_t);

    std::optional<std::size_t> slot(NodeIndex node, const NodeSet& covered) const
    {
        const auto& a = table_->arena;
        if (node >= a.local.size() || a.local[node] < 0) return std::nullopt;
        return table_->slot(a.mask_of(covered), a.local[node]);
    }

    std::optional<NodeIndex> move(NodeIndex node, const NodeSet& covered, Player p) const
    {
        const auto& a = table_->arena;
        auto at = slot(node, covered);
        if (!at || a.owner[static_cast<std::size_t>(a.local[node])] != p || table_->choice[*at] < 0) return std::nullopt;
        return a.nodes[static_cast<std::size_t>(table_->choice[*at])];
    }

    std::shared_ptr<const detail::Table> table_;
};

/// mcg(r) on a strict graph, with optimal policies for both players.
inline SolveResult solve_mcg(const GameGraph& g, NodeIndex r, std::size_t cap = default_solver_cap)
{
    require_strict(g);
    auto table = std::make_shared<detail::Table>(detail::Arena(g, r, cap));
    detail::LayerSolver solver(*table, false);
    const std::uint64_t root_mask = std::uint64_t{1} << table->arena.root;
    const std::uint32_t id = solver.solve(root_mask);

    SolveResult res;
    res.value = table->value[std::size_t{id} * table->arena.size() + static_cast<std::size_t>(table->arena.root)];
    res.states_explored = table->states;
    res.table_ = std::move(table);
    return res;
}

/// mcg(r) when the tester may, at any state, move the pebble back to r
/// before the owner of the current node moves. Sinks are allowed.
inline std::uint64_t solve_mcg_restart(const GameGraph& g, NodeIndex r, std::size_t cap = default_solver_cap)
{
    detail::Table table{detail::Arena(g, r, cap)};
    detail::LayerSolver solver(table, true);
    const std::uint32_t id = solver.solve(std::uint64_t{1} << table.arena.root);
    return table.value[std::size_t{id} * table.arena.size() + static_cast<std::size_t>(table.arena.root)];
}

namespace detail {

/// Policy lookup keyed on the covered set observed so far.
class PolicyMachine final : public StateMachineStrategy {
public:
    PolicyMachine(std::shared_ptr<const Table> t, Player p) : t_(std::move(t)), player_(p) {}

    State initial_state() const override { return 0; }

    State on_arrive(State s, NodeIndex v) const override
    {
        const auto& a = t_->arena;
        if (v >= a.local.size() || a.local[v] < 0) throw ValidationError("play left the solved region");
        return s | (std::uint64_t{1} << a.local[v]);
    }

    NodeIndex choose(State s, NodeIndex v) const override
    {
        const auto& a = t_->arena;
        auto at = t_->slot(s, a.local.at(v));
        if (!at || t_->choice[*at] < 0 || a.owner[static_cast<std::size_t>(a.local[v])] != player_)
            throw InternalError("no policy entry for node `" + std::to_string(v) + "` and covered set");
        return a.nodes[static_cast<std::size_t>(t_->choice[*at])];
    }

private:
    std::shared_ptr<const Table> t_;
    Player player_;
};

} // namespace detail

/// Optimal SUT strategy whose memory is the covered set.
inline std::shared_ptr<const StateMachineStrategy> extract_optimal_sut(const SolveResult& res)
{
    return std::make_shared<detail::PolicyMachine>(res.table(), Player::Sut);
}

/// Optimal tester strategy whose memory is the covered set.
inline std::shared_ptr<const StateMachineStrategy> extract_optimal_tester(const SolveResult& res)
{
    return std::make_shared<detail::PolicyMachine>(res.table(), Player::Tester);
}

/// Number of steps after which the covered set of a play between two
/// covered-set policies can no longer change.
inline std::size_t policy_play_horizon(std::size_t reachable_nodes)
{
    return reachable_nodes * (reachable_nodes + 1) + 1;
}

/**
 * Independent oracle for solve_mcg on tiny graphs.
 *
 * Layer by layer, enumerates every pair of positional strategies restricted to
 * the layer's members, simulates from every member until the play exits the
 * layer or a node repeats, and takes max over tester strategies of min over
 * SUT strategies. No fixed points are involved.
 */
inline std::uint64_t oracle_mcg(const GameGraph& g, NodeIndex r, std::size_t node_cap = 6,
                                std::uint64_t strategy_cap = 1'000'000)
{
    require_strict(g);
    const auto region = reachable(g, r).members();
    if (region.size() > node_cap || region.size() > 63)
        throw CapacityError("oracle supports at most " + std::to_string(node_cap) + " reachable nodes");
    std::vector<int> local(g.size(), -1);
    for (std::size_t i = 0; i < region.size(); ++i) local[region[i]] = static_cast<int>(i);
    const std::size_t k = region.size();

    std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> memo;

    auto layer = [&](auto&& self, std::uint64_t mask) -> const std::vector<std::uint64_t>& {
        if (auto it = memo.find(mask); it != memo.end()) return it->second;

        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < k; ++i)
            if (mask >> i & 1u) members.push_back(i);

        std::uint64_t stay = 0;
        for (std::size_t i : members) stay += g.gain(region[i]);

        // Successor table and exit values, per member.
        std::vector<std::vector<std::size_t>> succ(k);
        std::vector<std::vector<std::optional<std::uint64_t>>> exits(k);
        for (std::size_t i : members) {
            for (NodeIndex w : g.successors(region[i])) {
                const auto lw = static_cast<std::size_t>(local[w]);
                succ[i].push_back(lw);
                if (mask >> lw & 1u) {
                    exits[i].push_back(std::nullopt);
                } else {
                    const auto& wider = self(self, mask | (std::uint64_t{1} << lw));
                    exits[i].push_back(wider[lw]);
                }
            }
        }

        std::vector<std::size_t> testers, suts;
        std::uint64_t count_t = 1, count_s = 1;
        for (std::size_t i : members) {
            if (g.owner(region[i]) == Player::Tester) {
                testers.push_back(i);
                count_t *= succ[i].size();
            } else {
                suts.push_back(i);
                count_s *= succ[i].size();
            }
            if (count_t * count_s > strategy_cap) throw CapacityError("oracle strategy enumeration exceeds cap");
        }

        std::vector<std::size_t> pick(k, 0);
        std::vector<std::uint64_t> best(k, 0);
        std::vector<std::uint64_t> worst(k);
        std::vector<char> visited(k);

        auto advance = [&](const std::vector<std::size_t>& nodes) {
            for (std::size_t i = nodes.size(); i-- > 0;) {
                if (++pick[nodes[i]] < succ[nodes[i]].size()) return true;
                pick[nodes[i]] = 0;
            }
            return false;
        };

        for (std::size_t i : testers) pick[i] = 0;
        do {
            for (std::size_t i : members) worst[i] = std::numeric_limits<std::uint64_t>::max();
            for (std::size_t i : suts) pick[i] = 0;
            do {
                for (std::size_t start : members) {
                    std::fill(visited.begin(), visited.end(), 0);
                    std::size_t cur = start;
                    std::uint64_t payoff = stay;
                    for (;;) {
                        if (visited[cur]) break;
                        visited[cur] = 1;
                        const std::size_t j = pick[cur];
                        if (exits[cur][j]) {
                            payoff = *exits[cur][j];
                            break;
                        }
                        cur = succ[cur][j];
                    }
                    worst[start] = std::min(worst[start], payoff);
                }
            } while (advance(suts));
            for (std::size_t i : members) best[i] = std::max(best[i], worst[i]);
        } while (advance(testers));

        return memo.emplace(mask, std::move(best)).first->second;
    };

    const auto root = static_cast<std::size_t>(local[r]);
    return layer(layer, std::uint64_t{1} << root)[root];
}

} // namespace ncgame
