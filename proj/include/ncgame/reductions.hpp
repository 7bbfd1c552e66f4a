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
#include <cstdlib>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "graph.hpp"

namespace ncgame {

/// CNF formula. Literals are signed 1-based variable indices; each clause is
/// non-empty, sorted and free of duplicates.
struct Cnf {
    int variables = 0;
    std::vector<std::vector<int>> clauses;

    friend bool operator==(const Cnf&, const Cnf&) = default;
};

inline std::vector<int> normalize_clause(std::vector<int> lits)
{
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    return lits;
}

inline Cnf make_cnf(int variables, std::vector<std::vector<int>> clauses)
{
    Cnf f;
    f.variables = variables;
    for (auto& c : clauses) {
        if (c.empty()) throw ValidationError("empty clause");
        for (int l : c)
            if (l == 0 || std::abs(l) > variables) throw ValidationError("literal out of range: " + std::to_string(l));
        f.clauses.push_back(normalize_clause(std::move(c)));
    }
    return f;
}

/// DIMACS CNF (`p cnf n m`, 0-terminated clauses, `c` comment lines).
inline Cnf parse_dimacs(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    long long n = 0, m = 0;
    Cnf f;
    std::vector<int> current;
    std::size_t current_line = 0;

    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "c") continue;
        if (first == "%") break;  // SATLIB trailer
        if (first == "p") {
            std::string fmt;
            if (have_header) throw ParseError(line_no, "duplicate header");
            if (!(ls >> fmt >> n >> m) || fmt != "cnf" || n < 0 || m < 0)
                throw ParseError(line_no, "malformed header, expected `p cnf <vars> <clauses>`");
            std::string rest;
            if (ls >> rest) throw ParseError(line_no, "malformed header, trailing tokens");
            have_header = true;
            f.variables = static_cast<int>(n);
            continue;
        }
        if (!have_header) throw ParseError(line_no, "clause before `p cnf` header");
        std::istringstream toks(line);
        std::string t;
        while (toks >> t) {
            char* end = nullptr;
            long long lit = std::strtoll(t.c_str(), &end, 10);
            if (*end != '\0') throw ParseError(line_no, "bad literal `" + t + "`");
            if (current.empty()) current_line = line_no;
            if (lit == 0) {
                if (current.empty()) throw ParseError(line_no, "empty clause");
                f.clauses.push_back(normalize_clause(std::move(current)));
                current.clear();
                continue;
            }
            if (std::llabs(lit) > n) throw ParseError(line_no, "literal " + t + " exceeds variable count");
            current.push_back(static_cast<int>(lit));
        }
    }
    if (!have_header) throw ParseError(line_no + 1, "missing `p cnf` header");
    if (!current.empty()) throw ParseError(current_line, "clause not terminated by 0");
    if (static_cast<long long>(f.clauses.size()) != m)
        throw ParseError(line_no, "header declares " + std::to_string(m) + " clauses, found " +
                                      std::to_string(f.clauses.size()));
    return f;
}

inline Cnf parse_dimacs(std::string_view text)
{
    std::istringstream in{std::string(text)};
    return parse_dimacs(in);
}

inline std::string to_dimacs(const Cnf& f)
{
    std::ostringstream out;
    out << "p cnf " << f.variables << ' ' << f.clauses.size() << '\n';
    for (const auto& c : f.clauses) {
        for (int l : c) out << l << ' ';
        out << "0\n";
    }
    return out.str();
}

/// Exhaustive satisfiability check over all 2^n assignments.
inline bool brute_force_sat(const Cnf& f)
{
    if (f.variables > 20) throw CapacityError("brute_force_sat supports at most 20 variables");
    const std::uint32_t total = std::uint32_t{1} << f.variables;
    for (std::uint32_t a = 0; a < total; ++a) {
        bool all = true;
        for (const auto& c : f.clauses) {
            bool sat = false;
            for (int l : c) {
                const bool val = (a >> (std::abs(l) - 1)) & 1u;
                if ((l > 0) == val) {
                    sat = true;
                    break;
                }
            }
            if (!sat) {
                all = false;
                break;
            }
        }
        if (all) return true;
    }
    return false;
}

struct SatGame {
    GameGraph graph;
    std::uint64_t threshold;
};

/**
 * The SAT-hardness game. For each variable i: an SUT decision node dx<i>
 * choosing between tester nodes x<i> and nx<i>, which both continue to
 * dx<i+1> (or y after the last variable). From the tester node y every clause
 * node c<j> is reachable; the SUT at c<j> moves to one of the clause's literal
 * nodes. Unit gains, init dx1. The formula is satisfiable iff the tester's
 * guarantee is at most m + 2n + 1 (the returned threshold).
 */
inline SatGame sat_to_ncgame(const Cnf& f)
{
    if (f.variables < 1) throw ValidationError("formula needs at least one variable");
    if (f.clauses.empty()) throw ValidationError("formula needs at least one clause (y would be a sink)");
    const int n = f.variables;
    const int m = static_cast<int>(f.clauses.size());
    auto idx = [](const char* p, int i) { return std::string(p) + std::to_string(i); };
    auto lit = [&](int l) { return l > 0 ? idx("x", l) : idx("nx", -l); };

    GameGraph::Builder b;
    for (int i = 1; i <= n; ++i) {
        b.add_node(idx("dx", i), {Player::Sut, 1});
        b.add_node(idx("x", i), {Player::Tester, 1});
        b.add_node(idx("nx", i), {Player::Tester, 1});
    }
    b.add_node("y", {Player::Tester, 1});
    for (int j = 1; j <= m; ++j) b.add_node(idx("c", j), {Player::Sut, 1});

    for (int i = 1; i <= n; ++i) {
        b.add_edge(idx("dx", i), idx("x", i));
        b.add_edge(idx("dx", i), idx("nx", i));
        const std::string next = i < n ? idx("dx", i + 1) : "y";
        b.add_edge(idx("x", i), next);
        b.add_edge(idx("nx", i), next);
    }
    for (int j = 1; j <= m; ++j) b.add_edge("y", idx("c", j));
    for (int j = 1; j <= m; ++j) {
        if (f.clauses[j - 1].empty()) throw ValidationError("empty clause");
        for (int l : f.clauses[j - 1]) b.add_edge(idx("c", j), lit(l));
    }
    b.set_init("dx1");
    return SatGame{b.build(), static_cast<std::uint64_t>(m + 2 * n + 1)};
}

/**
 * Restart doubling. Every node v becomes v_in (tester-owned) and v_out
 * (v's owner), both with v's gain. v_in moves to r_in or v_out; an edge
 * (v, w) becomes (v_out, w_in); a sink v gets the edge (v_out, r_in).
 * Init is r_in. The result is always sink-free.
 */
inline GameGraph restart_double(const GameGraph& g)
{
    auto in = [&](NodeIndex v) { return g.name(v) + "_in"; };
    auto out = [&](NodeIndex v) { return g.name(v) + "_out"; };
    const NodeIndex r = g.init();

    GameGraph::Builder b;
    for (NodeIndex v = 0; v < g.size(); ++v) {
        if (g.find(in(v)) || g.find(out(v)))
            throw ValidationError("doubled node name collides with an existing node: " + g.name(v));
        b.add_node(in(v), {Player::Tester, g.gain(v)});
        b.add_node(out(v), {g.owner(v), g.gain(v)});
    }
    for (NodeIndex v = 0; v < g.size(); ++v) {
        b.add_edge(in(v), in(r));
        b.add_edge(in(v), out(v));
        for (NodeIndex w : g.successors(v)) b.add_edge(out(v), in(w));
        if (g.successors(v).empty()) b.add_edge(out(v), in(r));
    }
    b.set_init(in(r));
    return b.build();
}

} // namespace ncgame
