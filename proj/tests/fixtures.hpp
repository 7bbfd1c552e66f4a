#pragma once

#include <string>

#include <ncgame/ncgame.hpp>

namespace ncgame::testing {

inline const char* fig3_text = R"(ncgame 1
node v0 owner=tester gain=1
node v1 owner=tester gain=1
node v2 owner=tester gain=1
node v3 owner=sut gain=1
edge v0 v1
edge v0 v2
edge v1 v3
edge v2 v3
edge v3 v1
edge v3 v2
init v0
)";

inline const char* fig3_witness_text = R"(ncwitness 1
entry v0 c=3 P=v0
entry v1 c=2 P=v1,v3
entry v2 c=2 P=v2,v3
entry v3 c=2 P=v2,v3
)";

inline GameGraph fig3() { return parse_game_graph(fig3_text); }

inline GameGraph self_loop(Player owner = Player::Tester, std::uint64_t gain = 1)
{
    GameGraph::Builder b;
    b.add_node("a", {owner, gain}).add_edge("a", "a").set_init("a");
    return b.build();
}

/// Small random strict graph with 1..max_nodes nodes drawn from the seed.
inline GameGraph small_random(std::uint64_t seed, std::size_t max_nodes, std::size_t max_out = 3)
{
    Rng rng(mix64(seed));
    RandomGraphParams p;
    p.node_count = 1 + uniform_index(rng, max_nodes);
    p.max_out = std::min<std::size_t>(max_out, p.node_count);
    p.min_out = 1 + uniform_index(rng, p.max_out);
    p.sut_fraction = 0.2 + 0.6 * uniform_unit(rng);
    return generate_random(p, seed);
}

/// Random gains in [lo, hi] for every node.
inline GameGraph with_random_gains(const GameGraph& g, std::uint64_t seed, std::uint64_t lo, std::uint64_t hi)
{
    Rng rng(seed);
    std::vector<std::uint64_t> gains(g.size());
    for (auto& x : gains) x = lo + uniform_index(rng, hi - lo + 1);
    return g.with_gains(gains);
}

/// Copy of g with one extra edge.
inline GameGraph add_edge(const GameGraph& g, NodeIndex from, NodeIndex to)
{
    GameGraph::Builder b;
    for (NodeIndex v = 0; v < g.size(); ++v) b.add_node(g.name(v), g.info(v));
    for (NodeIndex v = 0; v < g.size(); ++v)
        for (NodeIndex w : g.successors(v)) b.add_edge(g.name(v), g.name(w));
    b.add_edge(g.name(from), g.name(to));
    b.set_init(g.name(g.init()));
    return b.build();
}

} // namespace ncgame::testing
