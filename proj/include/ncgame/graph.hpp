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
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "error.hpp"
#include "node_set.hpp"
#include "random.hpp"

namespace ncgame {

enum class Player : std::uint8_t { Tester = 1, Sut = 2 };

inline Player opponent(Player p) { return p == Player::Tester ? Player::Sut : Player::Tester; }

inline std::string_view to_string(Player p) { return p == Player::Tester ? "tester" : "sut"; }

struct NodeInfo {
    Player owner = Player::Tester;
    std::uint64_t gain = 1;

    friend bool operator==(const NodeInfo&, const NodeInfo&) = default;
};

inline bool is_valid_node_id(std::string_view id)
{
    if (id.empty()) return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
    });
}

/**
 * A finite two-player game graph with node gains and an initial node.
 *
 * Nodes are indexed 0..size()-1 in lexicographic order of their ids, so
 * "smallest index" and "smallest id" coincide everywhere. Successor lists keep
 * the order in which edges were added. Instances are immutable; use Builder.
 */
class GameGraph {
public:
    class Builder;

    std::size_t size() const noexcept { return names_.size(); }
    NodeIndex init() const noexcept { return init_; }

    const std::string& name(NodeIndex v) const { return names_.at(v); }
    const NodeInfo& info(NodeIndex v) const { return info_.at(v); }
    Player owner(NodeIndex v) const { return info_.at(v).owner; }
    std::uint64_t gain(NodeIndex v) const { return info_.at(v).gain; }
    std::span<const NodeIndex> successors(NodeIndex v) const { return succ_.at(v); }

    bool has_edge(NodeIndex from, NodeIndex to) const
    {
        auto s = successors(from);
        return std::find(s.begin(), s.end(), to) != s.end();
    }

    std::optional<NodeIndex> find(std::string_view id) const
    {
        auto it = index_.find(std::string(id));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    /// Index of a declared node; throws ValidationError for unknown ids.
    NodeIndex index(std::string_view id) const
    {
        if (auto v = find(id)) return *v;
        throw ValidationError("unknown node `" + std::string(id) + "`");
    }

    NodeSet empty_set() const { return NodeSet(size()); }
    NodeSet all_nodes() const
    {
        NodeSet s(size());
        for (NodeIndex v = 0; v < size(); ++v) s.insert(v);
        return s;
    }
    NodeSet set_of(std::initializer_list<std::string_view> ids) const
    {
        NodeSet s(size());
        for (auto id : ids) s.insert(index(id));
        return s;
    }
    NodeSet owned_by(Player p) const
    {
        NodeSet s(size());
        for (NodeIndex v = 0; v < size(); ++v)
            if (owner(v) == p) s.insert(v);
        return s;
    }

    /// Copy with gains replaced; the remaining structure is shared verbatim.
    GameGraph with_gains(std::span<const std::uint64_t> gains) const
    {
        if (gains.size() != size()) throw ValidationError("gain vector size mismatch");
        GameGraph g = *this;
        for (NodeIndex v = 0; v < size(); ++v) g.info_[v].gain = gains[v];
        return g;
    }

    /// Copy with a different initial node.
    GameGraph with_init(NodeIndex r) const
    {
        if (r >= size()) throw ValidationError("init index out of range");
        GameGraph g = *this;
        g.init_ = r;
        return g;
    }

    friend bool operator==(const GameGraph& a, const GameGraph& b)
    {
        return a.names_ == b.names_ && a.info_ == b.info_ && a.succ_ == b.succ_ && a.init_ == b.init_;
    }

private:
    GameGraph() = default;

    std::vector<std::string> names_;
    std::unordered_map<std::string, NodeIndex> index_;
    std::vector<NodeInfo> info_;
    std::vector<std::vector<NodeIndex>> succ_;
    NodeIndex init_ = 0;
};

class GameGraph::Builder {
public:
    Builder& add_node(std::string id, NodeInfo info)
    {
        if (!is_valid_node_id(id)) throw ValidationError("invalid node id `" + id + "`");
        if (!nodes_.emplace(id, info).second) throw ValidationError("duplicate node `" + id + "`");
        return *this;
    }

    Builder& add_edge(std::string_view from, std::string_view to)
    {
        require(from);
        require(to);
        std::pair<std::string, std::string> e{std::string(from), std::string(to)};
        if (!edge_set_.insert(e).second)
            throw ValidationError("duplicate edge `" + e.first + "` -> `" + e.second + "`");
        edges_.push_back(std::move(e));
        return *this;
    }

    Builder& set_init(std::string_view id)
    {
        require(id);
        init_ = std::string(id);
        return *this;
    }

    bool has_node(std::string_view id) const { return nodes_.count(std::string(id)) != 0; }

    GameGraph build() const
    {
        if (!init_) throw ValidationError("missing init");
        GameGraph g;
        g.names_.reserve(nodes_.size());
        for (const auto& [id, info] : nodes_) {
            g.index_.emplace(id, static_cast<NodeIndex>(g.names_.size()));
            g.names_.push_back(id);
            g.info_.push_back(info);
        }
        g.succ_.resize(g.names_.size());
        for (const auto& [from, to] : edges_) g.succ_[g.index_.at(from)].push_back(g.index_.at(to));
        g.init_ = g.index_.at(*init_);
        return g;
    }

private:
    void require(std::string_view id) const
    {
        if (!has_node(id)) throw ValidationError("unknown node `" + std::string(id) + "`");
    }

    std::map<std::string, NodeInfo> nodes_;
    std::vector<std::pair<std::string, std::string>> edges_;
    std::set<std::pair<std::string, std::string>> edge_set_;
    std::optional<std::string> init_;
};

/// Finite play prefix: a non-empty node sequence following edges of some graph.
struct PlayPrefix {
    std::vector<NodeIndex> nodes;

    std::size_t size() const noexcept { return nodes.size(); }
    bool empty() const noexcept { return nodes.empty(); }
    NodeIndex last() const { return nodes.back(); }
    NodeIndex operator[](std::size_t i) const { return nodes[i]; }

    friend bool operator==(const PlayPrefix&, const PlayPrefix&) = default;
};

inline PlayPrefix prefix_of(const GameGraph& g, std::initializer_list<std::string_view> ids)
{
    PlayPrefix p;
    for (auto id : ids) p.nodes.push_back(g.index(id));
    return p;
}

inline bool is_valid_prefix(const GameGraph& g, const PlayPrefix& p)
{
    if (p.empty()) return false;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] >= g.size()) return false;
        if (i > 0 && !g.has_edge(p[i - 1], p[i])) return false;
    }
    return true;
}

inline std::string format_prefix(const GameGraph& g, const PlayPrefix& p)
{
    std::string out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) out += ' ';
        out += g.name(p[i]);
    }
    return out;
}

// --------------------------------------------------------------------------
// Text format

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::optional<std::uint64_t> parse_uint(std::string_view s)
{
    if (s.empty() || s.size() > 19) return std::nullopt;
    std::uint64_t v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return std::nullopt;
        v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return v;
}

/// Reads lines, skipping blank ones and `#` comments. Yields (line number, tokens).
class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    bool next(std::size_t& line_no, std::vector<std::string_view>& tokens)
    {
        while (std::getline(in_, buf_)) {
            ++line_;
            std::string_view sv = buf_;
            auto first = sv.find_first_not_of(" \t\r");
            if (first == std::string_view::npos || sv[first] == '#') continue;
            line_no = line_;
            tokens = split_ws(sv);
            return true;
        }
        return false;
    }

    std::size_t line() const { return line_; }

private:
    std::istream& in_;
    std::string buf_;
    std::size_t line_ = 0;
};

} // namespace detail

/// Parses the `ncgame 1` text format. Throws ParseError carrying the line number.
inline GameGraph parse_game_graph(std::istream& in)
{
    detail::LineReader reader(in);
    std::size_t line = 0;
    std::vector<std::string_view> tok;

    if (!reader.next(line, tok)) throw ParseError(reader.line() + 1, "empty input, expected `ncgame 1`");
    if (tok.size() != 2 || tok[0] != "ncgame" || tok[1] != "1")
        throw ParseError(line, "expected header `ncgame 1`");

    // Nodes may be declared after the edges that use them, so edges and the
    // init line are resolved once the whole file has been read.
    struct Pending {
        std::size_t line;
        std::string a, b;
    };
    std::vector<Pending> edges;
    std::optional<Pending> init;
    GameGraph::Builder builder;

    while (reader.next(line, tok)) {
        const auto kw = tok[0];
        if (kw == "node") {
            if (tok.size() != 4) throw ParseError(line, "expected `node <id> owner=<tester|sut> gain=<uint>`");
            std::string id(tok[1]);
            if (!is_valid_node_id(id)) throw ParseError(line, "invalid node id `" + id + "`");
            std::optional<Player> owner;
            std::optional<std::uint64_t> gain;
            for (std::size_t i = 2; i < 4; ++i) {
                auto attr = tok[i];
                if (attr.starts_with("owner=") && !owner) {
                    auto val = attr.substr(6);
                    if (val == "tester") owner = Player::Tester;
                    else if (val == "sut") owner = Player::Sut;
                    else throw ParseError(line, "owner must be `tester` or `sut`");
                } else if (attr.starts_with("gain=") && !gain) {
                    gain = detail::parse_uint(attr.substr(5));
                    if (!gain) throw ParseError(line, "gain must be an unsigned integer");
                } else {
                    throw ParseError(line, "unexpected attribute `" + std::string(attr) + "`");
                }
            }
            if (builder.has_node(id)) throw ParseError(line, "duplicate node `" + id + "`");
            builder.add_node(id, NodeInfo{*owner, *gain});
        } else if (kw == "edge") {
            if (tok.size() != 3) throw ParseError(line, "expected `edge <src> <dst>`");
            edges.push_back({line, std::string(tok[1]), std::string(tok[2])});
        } else if (kw == "init") {
            if (tok.size() != 2) throw ParseError(line, "expected `init <id>`");
            if (init) throw ParseError(line, "duplicate init");
            init = Pending{line, std::string(tok[1]), {}};
        } else {
            throw ParseError(line, "unknown directive `" + std::string(kw) + "`");
        }
    }

    for (const auto& e : edges) {
        for (const auto* id : {&e.a, &e.b})
            if (!builder.has_node(*id)) throw ParseError(e.line, "unknown node `" + *id + "`");
        try {
            builder.add_edge(e.a, e.b);
        } catch (const ValidationError& err) {
            throw ParseError(e.line, err.what());
        }
    }
    if (!init) throw ParseError(reader.line(), "missing init");
    if (!builder.has_node(init->a)) throw ParseError(init->line, "unknown node `" + init->a + "`");
    builder.set_init(init->a);
    return builder.build();
}

inline GameGraph parse_game_graph(std::string_view text)
{
    std::istringstream in{std::string(text)};
    return parse_game_graph(in);
}

/// Canonical `ncgame 1` text: nodes in id order, then edges grouped by source.
inline std::string serialize(const GameGraph& g)
{
    std::ostringstream out;
    out << "ncgame 1\n";
    for (NodeIndex v = 0; v < g.size(); ++v)
        out << "node " << g.name(v) << " owner=" << to_string(g.owner(v)) << " gain=" << g.gain(v) << '\n';
    for (NodeIndex v = 0; v < g.size(); ++v)
        for (NodeIndex w : g.successors(v)) out << "edge " << g.name(v) << ' ' << g.name(w) << '\n';
    out << "init " << g.name(g.init()) << '\n';
    return out.str();
}

// --------------------------------------------------------------------------
// Structural queries

struct Violation {
    std::string kind;
    std::string node;

    std::string to_string() const { return kind + ": " + node; }
    friend bool operator==(const Violation&, const Violation&) = default;
};

/// Invariant violations of g. Strict mode additionally forbids sinks.
/// The builder already enforces declared endpoints, the owner partition and
/// edge uniqueness, so only the mode-dependent rules can fail here.
inline std::vector<Violation> validate(const GameGraph& g, bool strict = true)
{
    std::vector<Violation> out;
    if (strict)
        for (NodeIndex v = 0; v < g.size(); ++v)
            if (g.successors(v).empty()) out.push_back({"sink", g.name(v)});
    return out;
}

inline bool is_strict(const GameGraph& g) { return validate(g, true).empty(); }

inline void require_strict(const GameGraph& g)
{
    auto v = validate(g, true);
    if (!v.empty()) throw ValidationError("graph is not strict-valid (" + v.front().to_string() + ")");
}

inline std::uint64_t coverage_gain(const GameGraph& g, const NodeSet& s)
{
    if (s.universe() != g.size()) throw ValidationError("node set does not belong to this graph");
    std::uint64_t total = 0;
    for (NodeIndex v : s.members()) total += g.gain(v);
    return total;
}

inline NodeSet covered_nodes(const GameGraph& g, const PlayPrefix& p)
{
    NodeSet s(g.size());
    for (NodeIndex v : p.nodes) s.insert(v);
    return s;
}

/// Player p's trap check: p cannot leave s from its own nodes, and the
/// opponent can always stay inside s.
inline bool is_trap(const GameGraph& g, Player p, const NodeSet& s)
{
    if (s.universe() != g.size()) throw ValidationError("node set does not belong to this graph");
    for (NodeIndex v : s.members()) {
        auto succ = g.successors(v);
        if (g.owner(v) == p) {
            if (!std::all_of(succ.begin(), succ.end(), [&](NodeIndex w) { return s.contains(w); })) return false;
        } else {
            if (!std::any_of(succ.begin(), succ.end(), [&](NodeIndex w) { return s.contains(w); })) return false;
        }
    }
    return true;
}

inline NodeSet reachable(const GameGraph& g, NodeIndex r)
{
    if (r >= g.size()) throw ValidationError("unknown node index");
    NodeSet seen(g.size());
    std::vector<NodeIndex> stack{r};
    seen.insert(r);
    while (!stack.empty()) {
        NodeIndex v = stack.back();
        stack.pop_back();
        for (NodeIndex w : g.successors(v))
            if (!seen.contains(w)) {
                seen.insert(w);
                stack.push_back(w);
            }
    }
    return seen;
}

// --------------------------------------------------------------------------
// Random generation

struct RandomGraphParams {
    std::size_t node_count = 10;
    double sut_fraction = 0.3;
    std::size_t min_out = 1;
    std::size_t max_out = 2;
    /// Probability that a non-tree edge points at the node itself or at a
    /// node placed after it. 0 draws targets uniformly.
    double forward_bias = 0.0;
};

/**
 * Seeded random strict game graph with every node reachable from init.
 *
 * Owners are drawn independently (SUT with probability sut_fraction). A random
 * spanning arborescence rooted at init is laid down first; each node is then
 * topped up with distinct successors until it reaches an out-degree drawn
 * uniformly from [min_out, max_out]. Each extra successor is drawn uniformly,
 * except that with probability forward_bias it is drawn from the node itself
 * and the nodes placed after it (when any is still free). Node ids are zero-padded
 * (`n00`, `n01`, ...) so that index order matches creation order. All gains are 1.
 */
inline GameGraph generate_random(const RandomGraphParams& params, std::uint64_t seed)
{
    const std::size_t n = params.node_count;
    if (n < 1) throw ValidationError("node_count must be at least 1");
    if (params.min_out < 1 || params.min_out > params.max_out)
        throw ValidationError("need 1 <= min_out <= max_out");
    if (params.max_out > n) throw ValidationError("max_out exceeds node_count");
    if (!(params.sut_fraction >= 0.0 && params.sut_fraction <= 1.0))
        throw ValidationError("sut_fraction must lie in [0, 1]");
    if (!(params.forward_bias >= 0.0 && params.forward_bias <= 1.0))
        throw ValidationError("forward_bias must lie in [0, 1]");

    Rng rng(seed);
    std::vector<Player> owner(n);
    for (auto& o : owner) o = uniform_unit(rng) < params.sut_fraction ? Player::Sut : Player::Tester;

    std::vector<std::vector<NodeIndex>> succ(n);
    std::vector<char> has(n * n, 0);
    auto link = [&](std::size_t a, std::size_t b) {
        succ[a].push_back(static_cast<NodeIndex>(b));
        has[a * n + b] = 1;
    };

    // Arborescence from node 0 over a random permutation of the others.
    std::vector<std::size_t> order(n - 1);
    std::iota(order.begin(), order.end(), std::size_t{1});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
    std::vector<std::size_t> placed{0};
    std::vector<std::size_t> position(n, 0);
    for (std::size_t k = 0; k < order.size(); ++k) position[order[k]] = k + 1;
    for (std::size_t v : order) {
        std::vector<std::size_t> open;
        for (std::size_t p : placed)
            if (succ[p].size() < params.max_out) open.push_back(p);
        link(open[uniform_index(rng, open.size())], v);
        placed.push_back(v);
    }

    for (std::size_t v = 0; v < n; ++v) {
        std::size_t target = params.min_out + uniform_index(rng, params.max_out - params.min_out + 1);
        while (succ[v].size() < target) {
            const bool forward = params.forward_bias > 0.0 && uniform_unit(rng) < params.forward_bias;
            std::vector<std::size_t> free;
            if (forward)
                for (std::size_t w = 0; w < n; ++w)
                    if (!has[v * n + w] && position[w] >= position[v]) free.push_back(w);
            if (free.empty())
                for (std::size_t w = 0; w < n; ++w)
                    if (!has[v * n + w]) free.push_back(w);
            link(v, free[uniform_index(rng, free.size())]);
        }
        std::sort(succ[v].begin(), succ[v].end());
    }

    const std::size_t width = std::to_string(n - 1).size();
    auto id = [&](std::size_t i) {
        std::string s = std::to_string(i);
        return "n" + std::string(width - s.size(), '0') + s;
    };
    GameGraph::Builder b;
    for (std::size_t v = 0; v < n; ++v) b.add_node(id(v), NodeInfo{owner[v], 1});
    for (std::size_t v = 0; v < n; ++v)
        for (NodeIndex w : succ[v]) b.add_edge(id(v), id(w));
    b.set_init(id(0));
    return b.build();
}

} // namespace ncgame
