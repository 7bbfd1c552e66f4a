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
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "error.hpp"
#include "graph.hpp"

namespace ncgame {

/// Decision procedure for one player. Called with the whole prefix so far;
/// the last node is owned by the player. May keep per-play state.
using StrategyFn = std::function<NodeIndex(const PlayPrefix&)>;

/// Memoryless strategy: one fixed successor per owned node.
struct PositionalStrategy {
    std::map<NodeIndex, NodeIndex> choice;

    NodeIndex operator()(const PlayPrefix& p) const
    {
        auto it = choice.find(p.last());
        if (it == choice.end()) throw ValidationError("positional strategy has no entry for the current node");
        return it->second;
    }

    StrategyFn as_fn() const
    {
        return [self = *this](const PlayPrefix& p) { return self(p); };
    }

    friend bool operator==(const PositionalStrategy&, const PositionalStrategy&) = default;
};

inline PositionalStrategy positional(const GameGraph& g,
                                     std::initializer_list<std::pair<std::string_view, std::string_view>> entries)
{
    PositionalStrategy s;
    for (auto [from, to] : entries) {
        NodeIndex a = g.index(from), b = g.index(to);
        if (!g.has_edge(a, b)) throw ValidationError("strategy entry is not an edge: " + std::string(from) + " -> " + std::string(to));
        s.choice[a] = b;
    }
    return s;
}

/**
 * Finite-memory strategy. The machine observes every node the pebble arrives
 * at (including the start node) and, at nodes owned by its player, picks a
 * successor from its current state. States are opaque 64-bit values.
 */
class StateMachineStrategy {
public:
    using State = std::uint64_t;

    virtual ~StateMachineStrategy() = default;
    virtual State initial_state() const = 0;
    virtual State on_arrive(State s, NodeIndex v) const = 0;
    virtual NodeIndex choose(State s, NodeIndex v) const = 0;

    /// Replays the prefix through the machine and returns its choice.
    StrategyFn as_fn(std::shared_ptr<const StateMachineStrategy> self) const
    {
        return [self](const PlayPrefix& p) {
            State s = self->initial_state();
            for (NodeIndex v : p.nodes) s = self->on_arrive(s, v);
            return self->choose(s, p.last());
        };
    }
};

/// Positional strategy wrapped as a single-state machine.
class PositionalMachine final : public StateMachineStrategy {
public:
    explicit PositionalMachine(PositionalStrategy s) : s_(std::move(s)) {}

    State initial_state() const override { return 0; }
    State on_arrive(State s, NodeIndex) const override { return s; }
    NodeIndex choose(State, NodeIndex v) const override
    {
        auto it = s_.choice.find(v);
        if (it == s_.choice.end()) throw ValidationError("positional strategy has no entry for the current node");
        return it->second;
    }

private:
    PositionalStrategy s_;
};

/// Prefix of play(r, s1, s2) with max_steps nodes. s1 moves at tester nodes,
/// s2 at SUT nodes. A strategy answering with a non-successor is a contract
/// violation and reported together with the offending prefix.
inline PlayPrefix simulate_play(const GameGraph& g, NodeIndex r, const StrategyFn& s1, const StrategyFn& s2,
                                std::size_t max_steps)
{
    if (max_steps < 1) throw ValidationError("max_steps must be at least 1");
    PlayPrefix p;
    p.nodes.reserve(max_steps);
    p.nodes.push_back(r);
    while (p.size() < max_steps) {
        NodeIndex v = p.last();
        if (g.successors(v).empty()) throw ValidationError("play reached sink `" + g.name(v) + "`");
        NodeIndex next = g.owner(v) == Player::Tester ? s1(p) : s2(p);
        if (next >= g.size() || !g.has_edge(v, next))
            throw ValidationError("strategy chose a non-successor after prefix `" + format_prefix(g, p) + "`");
        p.nodes.push_back(next);
    }
    return p;
}

/// True iff every repeated SUT node in p is followed by the same successor
/// each time it occurs (except at the final position, which has no successor).
inline bool check_log_consistency(const PlayPrefix& p, const GameGraph& g)
{
    std::unordered_map<NodeIndex, NodeIndex> first_choice;
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
        if (g.owner(p[k]) != Player::Sut) continue;
        auto [it, fresh] = first_choice.emplace(p[k], p[k + 1]);
        if (!fresh && it->second != p[k + 1]) return false;
    }
    return true;
}

/**
 * Enumerates every positional strategy of one player exactly once.
 * Owned nodes are ordered by index, choices by successor-list order, and the
 * highest-indexed node varies fastest.
 */
class PositionalEnumerator {
public:
    static constexpr std::uint64_t default_cap = 1'000'000;

    PositionalEnumerator(const GameGraph& g, Player player, std::uint64_t cap = default_cap) : g_(g)
    {
        std::uint64_t total = 1;
        for (NodeIndex v = 0; v < g.size(); ++v) {
            if (g.owner(v) != player) continue;
            auto d = g.successors(v).size();
            if (d == 0) throw ValidationError("player node `" + g.name(v) + "` is a sink");
            owned_.push_back(v);
            total *= d;
            if (total > cap) throw CapacityError("positional strategy count exceeds cap " + std::to_string(cap));
        }
        count_ = total;
        digits_.assign(owned_.size(), 0);
    }

    std::uint64_t count() const noexcept { return count_; }

    std::optional<PositionalStrategy> next()
    {
        if (done_) return std::nullopt;
        PositionalStrategy s;
        for (std::size_t i = 0; i < owned_.size(); ++i) s.choice[owned_[i]] = g_.successors(owned_[i])[digits_[i]];
        // Advance the odometer.
        std::size_t i = owned_.size();
        for (;;) {
            if (i == 0) {
                done_ = true;
                break;
            }
            --i;
            if (++digits_[i] < g_.successors(owned_[i]).size()) break;
            digits_[i] = 0;
        }
        return s;
    }

private:
    const GameGraph& g_;
    std::vector<NodeIndex> owned_;
    std::vector<std::size_t> digits_;
    std::uint64_t count_ = 1;
    bool done_ = false;
};

inline std::vector<PositionalStrategy> enumerate_positional(const GameGraph& g, Player player,
                                                            std::uint64_t cap = PositionalEnumerator::default_cap)
{
    PositionalEnumerator e(g, player, cap);
    std::vector<PositionalStrategy> out;
    out.reserve(e.count());
    while (auto s = e.next()) out.push_back(std::move(*s));
    return out;
}

/**
 * Best gain the tester can force against a fixed SUT machine, starting at r.
 *
 * With the SUT fixed the game becomes a one-player search over
 * (node, covered set, SUT state). Every reachable product state can be held
 * forever on a sink-free graph, so the answer is the largest gain of any
 * covered set seen during the search.
 */
inline std::uint64_t best_response_gain(const GameGraph& g, NodeIndex r, const StateMachineStrategy& sut,
                                        std::uint64_t state_cap = 10'000'000)
{
    require_strict(g);
    const auto region = reachable(g, r).members();
    if (region.size() > 64) throw CapacityError("best response search supports at most 64 reachable nodes");
    std::vector<int> local(g.size(), -1);
    for (std::size_t i = 0; i < region.size(); ++i) local[region[i]] = static_cast<int>(i);

    struct Key {
        NodeIndex node;
        std::uint64_t covered;
        std::uint64_t state;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const
        {
            return static_cast<std::size_t>(mix64(k.covered ^ mix64(k.state ^ (std::uint64_t{k.node} << 40))));
        }
    };
    auto gain_of = [&](std::uint64_t mask) {
        std::uint64_t total = 0;
        for (std::size_t i = 0; i < region.size(); ++i)
            if (mask >> i & 1u) total += g.gain(region[i]);
        return total;
    };

    std::unordered_set<Key, KeyHash> seen;
    std::vector<Key> stack;
    auto push = [&](NodeIndex v, std::uint64_t covered, StateMachineStrategy::State s) {
        Key k{v, covered | (std::uint64_t{1} << local[v]), sut.on_arrive(s, v)};
        if (seen.insert(k).second) {
            if (seen.size() > state_cap) throw CapacityError("best response state space exceeds cap");
            stack.push_back(k);
        }
    };
    push(r, 0, sut.initial_state());

    std::uint64_t best = 0;
    std::unordered_set<std::uint64_t> scored;
    while (!stack.empty()) {
        Key k = stack.back();
        stack.pop_back();
        if (scored.insert(k.covered).second) best = std::max(best, gain_of(k.covered));
        if (g.owner(k.node) == Player::Tester) {
            for (NodeIndex w : g.successors(k.node)) push(w, k.covered, k.state);
        } else {
            NodeIndex w = sut.choose(k.state, k.node);
            if (!g.has_edge(k.node, w))
                throw ValidationError("SUT machine chose a non-successor at `" + g.name(k.node) + "`");
            push(w, k.covered, k.state);
        }
    }
    return best;
}

} // namespace ncgame
