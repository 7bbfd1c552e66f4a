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

// SUT certificates: for every node v a bound c_v on the tester's gain and a
// pseudo trap P_v that the SUT offers the tester to cover before it leaves.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "graph.hpp"
#include "play.hpp"
#include "solver.hpp"

namespace ncgame {

struct WitnessEntry {
    std::uint64_t c = 0;
    NodeSet pseudo_trap;

    friend bool operator==(const WitnessEntry&, const WitnessEntry&) = default;
};

struct Witness {
    std::map<NodeIndex, WitnessEntry> entries;

    const WitnessEntry* find(NodeIndex v) const
    {
        auto it = entries.find(v);
        return it == entries.end() ? nullptr : &it->second;
    }

    friend bool operator==(const Witness&, const Witness&) = default;
};

enum class WitnessCase { Singleton, Trapping };

/// Singleton case: P_v = {v} for an SUT node without a self-loop that is not a sink.
inline WitnessCase classify(const GameGraph& g, NodeIndex v, const NodeSet& p)
{
    const bool singleton = p.size() == 1 && p.contains(v);
    if (singleton && g.owner(v) == Player::Sut && !g.successors(v).empty() && !g.has_edge(v, v))
        return WitnessCase::Singleton;
    return WitnessCase::Trapping;
}

inline bool has_witness_shape(const GameGraph& g, NodeIndex v, const NodeSet& p)
{
    if (!p.contains(v)) return false;
    if (p.size() == 1 && g.owner(v) == Player::Sut) return true;
    for (NodeIndex u : p.members()) {
        if (g.owner(u) != Player::Sut) continue;
        auto s = g.successors(u);
        if (std::none_of(s.begin(), s.end(), [&](NodeIndex w) { return p.contains(w); })) return false;
    }
    return true;
}

namespace detail {

/// The c_v that the case equation demands, given the other entries' c values.
/// Returns nullopt and names the node if an entry the equation needs is missing.
inline std::optional<std::uint64_t> required_c(const GameGraph& g, NodeIndex v, const NodeSet& p,
                                               const auto& c_of, NodeIndex& missing)
{
    if (classify(g, v, p) == WitnessCase::Singleton) {
        std::optional<std::uint64_t> lo;
        for (NodeIndex u : g.successors(v)) {
            auto cu = c_of(u);
            if (!cu) {
                missing = u;
                return std::nullopt;
            }
            lo = lo ? std::min(*lo, *cu) : *cu;
        }
        return g.gain(v) + *lo;
    }
    std::uint64_t hi = 0;
    for (NodeIndex u : p.members()) {
        if (g.owner(u) != Player::Tester) continue;
        for (NodeIndex w : g.successors(u)) {
            if (p.contains(w)) continue;
            auto cw = c_of(w);
            if (!cw) {
                missing = w;
                return std::nullopt;
            }
            hi = std::max(hi, *cw);
        }
    }
    return hi + coverage_gain(g, p);
}

} // namespace detail

struct WitnessViolation {
    enum class Kind { MissingEntry, ZeroGain, Structure, Equation };
    Kind kind;
    std::string node;
    std::uint64_t expected = 0;
    std::uint64_t given = 0;

    std::string to_string() const
    {
        switch (kind) {
        case Kind::MissingEntry: return "missing entry: " + node;
        case Kind::ZeroGain: return "gain below 1: " + node;
        case Kind::Structure: return "structure: " + node;
        case Kind::Equation:
            return "equation: " + node + " expected c=" + std::to_string(expected) + " given c=" + std::to_string(given);
        }
        return "unknown";
    }
};

struct WitnessCheck {
    std::vector<WitnessViolation> violations;
    bool consistent() const { return violations.empty(); }
};

/**
 * Polynomial consistency check. Every node reachable from init needs an entry;
 * each entry is checked under exactly one of the two case equations:
 *
 *   singleton: c_v = gain(v) + min { c_u : v -> u }
 *   trapping:  c_v = max { c_w : u in P_v owned by the tester, u -> w, w not in P_v } + gain(P_v)
 *
 * with the empty maximum taken as 0.
 */
inline WitnessCheck check_witness(const GameGraph& g, const Witness& w)
{
    WitnessCheck out;
    using K = WitnessViolation::Kind;
    for (NodeIndex v = 0; v < g.size(); ++v)
        if (g.gain(v) < 1) out.violations.push_back({K::ZeroGain, g.name(v)});
    if (!out.consistent()) return out;
    if (!is_strict(g)) throw ValidationError("witness checking needs a strict graph");

    for (NodeIndex v : reachable(g, g.init()).members())
        if (!w.find(v)) out.violations.push_back({K::MissingEntry, g.name(v)});

    auto c_of = [&](NodeIndex u) -> std::optional<std::uint64_t> {
        if (auto e = w.find(u)) return e->c;
        return std::nullopt;
    };
    for (const auto& [v, e] : w.entries) {
        if (e.pseudo_trap.universe() != g.size() || !has_witness_shape(g, v, e.pseudo_trap)) {
            out.violations.push_back({K::Structure, g.name(v)});
            continue;
        }
        NodeIndex missing = 0;
        auto need = detail::required_c(g, v, e.pseudo_trap, c_of, missing);
        if (!need) {
            WitnessViolation m{K::MissingEntry, g.name(missing)};
            auto dup = std::find_if(out.violations.begin(), out.violations.end(),
                                    [&](const auto& x) { return x.kind == K::MissingEntry && x.node == m.node; });
            if (dup == out.violations.end()) out.violations.push_back(m);
            continue;
        }
        if (*need != e.c) out.violations.push_back({K::Equation, g.name(v), *need, e.c});
    }
    return out;
}

/**
 * The SUT strategy that follows a consistent witness. Its memory is the
 * current allowance T (empty, or one of the P sets). On arrival at v:
 * singleton-case nodes clear T; otherwise T becomes P_v unless v is already
 * in T. At its own nodes the SUT stays inside T (smallest id), or with T
 * empty moves to a successor with the least c (smallest id on ties).
 */
class WitnessGuidedSut final : public StateMachineStrategy {
public:
    WitnessGuidedSut(const GameGraph& g, const Witness& w) : g_(g), w_(w)
    {
        canon_.assign(g.size(), -1);
        singleton_.assign(g.size(), 0);
        for (const auto& [v, e] : w.entries) {
            singleton_[v] = classify(g, v, e.pseudo_trap) == WitnessCase::Singleton;
            for (const auto& [u, f] : w.entries) {
                if (f.pseudo_trap == e.pseudo_trap) {
                    canon_[v] = static_cast<int>(u);
                    break;
                }
            }
        }
    }

    State initial_state() const override { return 0; }

    State on_arrive(State s, NodeIndex v) const override
    {
        if (canon_.at(v) < 0) throw ValidationError("witness has no entry for `" + g_.name(v) + "`");
        if (singleton_[v]) return 0;
        if (s != 0 && allowance(s).contains(v)) return s;
        return static_cast<State>(canon_[v]) + 1;
    }

    NodeIndex choose(State s, NodeIndex v) const override
    {
        auto succ = g_.successors(v);
        if (s == 0) {
            std::optional<NodeIndex> best;
            for (NodeIndex u : succ) {
                const auto* e = w_.find(u);
                if (!e) throw ValidationError("witness has no entry for `" + g_.name(u) + "`");
                if (!best || e->c < w_.find(*best)->c || (e->c == w_.find(*best)->c && u < *best)) best = u;
            }
            if (!best) throw ValidationError("SUT node `" + g_.name(v) + "` is a sink");
            return *best;
        }
        const NodeSet& t = allowance(s);
        std::optional<NodeIndex> best;
        for (NodeIndex u : succ)
            if (t.contains(u) && (!best || u < *best)) best = u;
        if (!best) throw InternalError("witness certificate corrupted: no successor of `" + g_.name(v) + "` inside T");
        return *best;
    }

private:
    const NodeSet& allowance(State s) const { return w_.entries.at(static_cast<NodeIndex>(s - 1)).pseudo_trap; }

    const GameGraph& g_;
    const Witness& w_;
    std::vector<int> canon_;
    std::vector<char> singleton_;
};

/// Witness-guided SUT for a witness that passes check_witness.
/// The graph and witness must outlive the returned strategy.
inline std::shared_ptr<const StateMachineStrategy> witness_guided_sut(const GameGraph& g, const Witness& w)
{
    auto check = check_witness(g, w);
    if (!check.consistent()) throw ValidationError("inconsistent witness (" + check.violations.front().to_string() + ")");
    return std::make_shared<WitnessGuidedSut>(g, w);
}

inline GameGraph normalize_gains(const GameGraph& g)
{
    std::vector<std::uint64_t> gains(g.size());
    for (NodeIndex v = 0; v < g.size(); ++v) gains[v] = 1 + g.size() * g.gain(v);
    return g.with_gains(gains);
}

namespace detail {

/// First subset of `pool` containing v, by ascending size then lexicographic
/// order, for which accept(P) holds. Counts candidates against the cap.
template <class Accept>
std::optional<NodeSet> first_subset(const GameGraph& g, NodeIndex v, const NodeSet& pool, Accept accept,
                                    std::uint64_t& tried, std::uint64_t cap)
{
    std::vector<NodeIndex> others;
    for (NodeIndex u : pool.members())
        if (u != v) others.push_back(u);
    for (std::size_t extra = 0; extra <= others.size(); ++extra) {
        std::vector<std::size_t> idx(extra);
        for (std::size_t i = 0; i < extra; ++i) idx[i] = i;
        for (;;) {
            if (++tried > cap) throw InternalError("witness extraction exceeded subset cap at `" + g.name(v) + "`");
            NodeSet p(g.size());
            p.insert(v);
            for (std::size_t i : idx) p.insert(others[i]);
            if (accept(p)) return p;
            std::size_t i = extra;
            while (i > 0 && idx[i - 1] == others.size() - extra + (i - 1)) --i;
            if (i == 0) break;
            ++idx[i - 1];
            for (std::size_t j = i; j < extra; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    return std::nullopt;
}

} // namespace detail

/**
 * Builds a consistent witness for every node reachable from r.
 *
 * c_v is the solver's value from v. Trapping-case sets may only contain
 * trapping-case nodes: the guided SUT clears its allowance on arriving at a
 * singleton-case node, so such a member would let the tester out of P_v.
 * The trapping-case nodes are the largest set F in which every node has a
 * valid P_v within F; the remaining nodes must satisfy the singleton
 * equation. Each P_v is the first valid subset by ascending size, then
 * lexicographic order. Throws InternalError if no witness of this form is
 * found or more than subset_cap candidates are tried.
 */
inline Witness extract_witness(const GameGraph& g, NodeIndex r, std::size_t cap = default_solver_cap,
                               std::uint64_t subset_cap = std::uint64_t{1} << 22)
{
    require_strict(g);
    for (NodeIndex v = 0; v < g.size(); ++v)
        if (g.gain(v) < 1) throw ValidationError("witness extraction needs gains >= 1 (normalize first)");

    const auto region = reachable(g, r);
    std::map<NodeIndex, std::uint64_t> c;
    for (NodeIndex v : region.members()) c[v] = solve_mcg(g, v, cap).value;
    auto c_of = [&](NodeIndex u) -> std::optional<std::uint64_t> {
        auto it = c.find(u);
        if (it == c.end()) return std::nullopt;
        return it->second;
    };
    auto valid = [&](NodeIndex v, const NodeSet& p) {
        if (!has_witness_shape(g, v, p)) return false;
        NodeIndex missing = 0;
        auto need = detail::required_c(g, v, p, c_of, missing);
        return need && *need == c[v];
    };

    std::uint64_t tried = 0;
    NodeSet trapping = region;
    std::map<NodeIndex, NodeSet> chosen;
    for (bool changed = true; changed;) {
        changed = false;
        for (NodeIndex v : trapping.members()) {
            auto it = chosen.find(v);
            if (it != chosen.end() && it->second.is_subset_of(trapping)) continue;
            auto p = detail::first_subset(
                g, v, reachable(g, v) & trapping,
                [&](const NodeSet& q) { return classify(g, v, q) == WitnessCase::Trapping && valid(v, q); }, tried,
                subset_cap);
            if (p) {
                chosen.insert_or_assign(v, std::move(*p));
            } else {
                chosen.erase(v);
                trapping.erase(v);
                changed = true;
            }
        }
    }

    Witness w;
    for (NodeIndex v : region.members()) {
        NodeSet p(g.size());
        if (trapping.contains(v)) {
            p = chosen.at(v);
        } else {
            p.insert(v);
            if (classify(g, v, p) != WitnessCase::Singleton || !valid(v, p))
                throw InternalError("no consistent pseudo trap found for `" + g.name(v) +
                                    "` (c=" + std::to_string(c[v]) + ")\n" + serialize(g));
        }
        w.entries.emplace(v, WitnessEntry{c[v], std::move(p)});
    }
    return w;
}

// --------------------------------------------------------------------------
// `ncwitness 1` text format

inline std::string serialize(const GameGraph& g, const Witness& w)
{
    std::ostringstream out;
    out << "ncwitness 1\n";
    for (const auto& [v, e] : w.entries) {
        out << "entry " << g.name(v) << " c=" << e.c << " P=";
        bool first = true;
        for (NodeIndex u : e.pseudo_trap.members()) {
            out << (first ? "" : ",") << g.name(u);
            first = false;
        }
        out << '\n';
    }
    return out.str();
}

inline Witness parse_witness(std::istream& in, const GameGraph& g)
{
    detail::LineReader reader(in);
    std::size_t line = 0;
    std::vector<std::string_view> tok;
    if (!reader.next(line, tok) || tok.size() != 2 || tok[0] != "ncwitness" || tok[1] != "1")
        throw ParseError(line ? line : 1, "expected header `ncwitness 1`");

    Witness w;
    while (reader.next(line, tok)) {
        if (tok[0] != "entry" || tok.size() != 4 || !tok[2].starts_with("c=") || !tok[3].starts_with("P="))
            throw ParseError(line, "expected `entry <node> c=<uint> P=<id>[,<id>]*`");
        auto v = g.find(tok[1]);
        if (!v) throw ParseError(line, "unknown node `" + std::string(tok[1]) + "`");
        auto c = detail::parse_uint(tok[2].substr(2));
        if (!c) throw ParseError(line, "c must be an unsigned integer");
        NodeSet p(g.size());
        std::string_view list = tok[3].substr(2);
        if (list.empty()) throw ParseError(line, "P must not be empty");
        while (!list.empty()) {
            auto comma = list.find(',');
            auto id = list.substr(0, comma);
            auto u = g.find(id);
            if (!u) throw ParseError(line, "unknown node `" + std::string(id) + "` in P");
            p.insert(*u);
            list = comma == std::string_view::npos ? std::string_view{} : list.substr(comma + 1);
            if (comma != std::string_view::npos && list.empty()) throw ParseError(line, "trailing comma in P");
        }
        if (!w.entries.emplace(*v, WitnessEntry{*c, std::move(p)}).second)
            throw ParseError(line, "duplicate entry for `" + std::string(tok[1]) + "`");
    }
    return w;
}

inline Witness parse_witness(std::string_view text, const GameGraph& g)
{
    std::istringstream in{std::string(text)};
    return parse_witness(in, g);
}

} // namespace ncgame
