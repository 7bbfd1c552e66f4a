#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace ncgame;
using ncgame::testing::fig3;

namespace {

Witness fig3_witness(const GameGraph& g) { return parse_witness(ncgame::testing::fig3_witness_text, g); }

} // namespace

TEST(CheckWitness, Fig3Consistent)
{
    auto g = fig3();
    auto check = check_witness(g, fig3_witness(g));
    EXPECT_TRUE(check.consistent());
}

TEST(CheckWitness, PerturbedValue)
{
    auto g = fig3();
    auto w = fig3_witness(g);
    w.entries.at(g.index("v0")).c = 2;
    auto check = check_witness(g, w);
    ASSERT_EQ(check.violations.size(), 1u);
    EXPECT_EQ(check.violations[0].to_string(), "equation: v0 expected c=3 given c=2");
}

TEST(CheckWitness, StructureAndMissing)
{
    auto g = fig3();
    auto w = fig3_witness(g);
    // P without v itself.
    w.entries.at(g.index("v1")).pseudo_trap = g.set_of({"v3"});
    auto check = check_witness(g, w);
    ASSERT_FALSE(check.consistent());
    EXPECT_EQ(check.violations[0].kind, WitnessViolation::Kind::Structure);

    auto w2 = fig3_witness(g);
    w2.entries.erase(g.index("v2"));
    auto c2 = check_witness(g, w2);
    ASSERT_FALSE(c2.consistent());
    EXPECT_EQ(c2.violations[0].to_string(), "missing entry: v2");
}

TEST(CheckWitness, ZeroGainRejected)
{
    auto g = fig3();
    std::vector<std::uint64_t> gains{1, 0, 1, 1};
    auto h = g.with_gains(gains);
    auto check = check_witness(h, fig3_witness(h));
    ASSERT_FALSE(check.consistent());
    EXPECT_EQ(check.violations[0].to_string(), "gain below 1: v1");
}

TEST(CheckWitness, SingletonCaseEquation)
{
    // s is an SUT node with P={s}: c_s = gain(s) + min over successors.
    auto g = parse_game_graph("ncgame 1\nnode s owner=sut gain=1\nnode a owner=tester gain=1\nnode b owner=tester gain=1\n"
                              "edge s a\nedge s b\nedge a a\nedge b b\ninit s");
    Witness w;
    w.entries[g.index("a")] = {1, g.set_of({"a"})};
    w.entries[g.index("b")] = {1, g.set_of({"b"})};
    w.entries[g.index("s")] = {2, g.set_of({"s"})};
    EXPECT_TRUE(check_witness(g, w).consistent());
    w.entries[g.index("s")].c = 3;
    EXPECT_FALSE(check_witness(g, w).consistent());
}

TEST(WitnessGuidedSut, Fig3Traces)
{
    auto g = fig3();
    auto w = fig3_witness(g);
    auto sut = witness_guided_sut(g, w);
    // Via v1 the SUT keeps the play inside P_v1 = {v1, v3}.
    auto s1 = positional(g, {{"v0", "v1"}, {"v1", "v3"}, {"v2", "v3"}});
    auto p = simulate_play(g, g.init(), s1.as_fn(), sut->as_fn(sut), 6);
    EXPECT_EQ(p, prefix_of(g, {"v0", "v1", "v3", "v1", "v3", "v1"}));
    EXPECT_EQ(coverage_gain(g, covered_nodes(g, p)), 3u);
    EXPECT_EQ(best_response_gain(g, g.init(), *sut), 3u);

    auto bad = fig3_witness(g);
    bad.entries.at(g.index("v0")).c = 2;
    EXPECT_THROW(witness_guided_sut(g, bad), ValidationError);
}

TEST(ExtractWitness, Fig3)
{
    auto g = fig3();
    auto w = extract_witness(g, g.init());
    EXPECT_TRUE(check_witness(g, w).consistent());
    EXPECT_EQ(w.find(g.init())->c, 3u);
    EXPECT_EQ(w.find(g.index("v3"))->c, 2u);
    auto sut = witness_guided_sut(g, w);
    EXPECT_EQ(best_response_gain(g, g.init(), *sut), 3u);
}

TEST(ExtractWitness, TesterCycle)
{
    auto g = parse_game_graph("ncgame 1\nnode a owner=tester gain=2\nnode b owner=tester gain=3\nedge a b\nedge b a\ninit a");
    auto w = extract_witness(g, g.init());
    EXPECT_EQ(w.find(0)->c, 5u);
    EXPECT_EQ(w.find(0)->pseudo_trap, g.all_nodes());
}

// The SUT cycle n0 n3 n5 holds the tester to 7, but n5 on its own only
// satisfies the singleton equation. If n5 were a singleton-case node the
// guided SUT would clear its allowance there and concede 9.
TEST(ExtractWitness, SingletonNodesStayOutOfPseudoTraps)
{
    auto g = parse_game_graph(R"(ncgame 1
node n0 owner=sut gain=3
node n1 owner=tester gain=3
node n2 owner=sut gain=2
node n3 owner=sut gain=1
node n4 owner=tester gain=1
node n5 owner=sut gain=3
edge n0 n1
edge n0 n4
edge n0 n5
edge n1 n1
edge n1 n3
edge n1 n4
edge n2 n0
edge n2 n3
edge n2 n5
edge n3 n0
edge n3 n1
edge n3 n2
edge n4 n4
edge n4 n5
edge n5 n1
edge n5 n3
init n0
)");
    auto w = extract_witness(g, g.init());
    ASSERT_TRUE(check_witness(g, w).consistent());
    EXPECT_EQ(w.find(g.init())->c, 7u);
    for (const auto& [v, e] : w.entries) {
        if (classify(g, v, e.pseudo_trap) != WitnessCase::Trapping) continue;
        for (NodeIndex u : e.pseudo_trap.members())
            EXPECT_EQ(classify(g, u, w.find(u)->pseudo_trap), WitnessCase::Trapping) << g.name(v) << " " << g.name(u);
    }
    EXPECT_EQ(best_response_gain(g, g.init(), *witness_guided_sut(g, w)), 7u);
}

TEST(NormalizeGains, Examples)
{
    auto g = parse_game_graph("ncgame 1\nnode a owner=tester gain=0\nnode b owner=sut gain=2\nnode c owner=tester gain=1\n"
                              "node d owner=tester gain=1\nedge a b\nedge b c\nedge c d\nedge d a\ninit a");
    auto n = normalize_gains(g);
    EXPECT_EQ(n.gain(n.index("a")), 1u);
    EXPECT_EQ(n.gain(n.index("b")), 9u);
    EXPECT_EQ(n.gain(n.index("c")), 5u);
}

TEST(WitnessFormat, RoundTripAndErrors)
{
    auto g = fig3();
    auto w = fig3_witness(g);
    EXPECT_EQ(parse_witness(serialize(g, w), g), w);
    EXPECT_THROW(parse_witness("ncwitness 2\n", g), ParseError);
    EXPECT_THROW(parse_witness("ncwitness 1\nentry zz c=1 P=v0\n", g), ParseError);
    EXPECT_THROW(parse_witness("ncwitness 1\nentry v0 c=x P=v0\n", g), ParseError);
    EXPECT_THROW(parse_witness("ncwitness 1\nentry v0 c=1 P=v0,\n", g), ParseError);
    EXPECT_THROW(parse_witness("ncwitness 1\nentry v0 c=1 P=v0\nentry v0 c=1 P=v0\n", g), ParseError);
}

// Extraction on random graphs: the witness checks, c_r equals the game value,
// and the guided SUT holds every tester to at most c_r.
TEST(WitnessProperties, ExtractionSoundness)
{
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        auto g = ncgame::testing::with_random_gains(ncgame::testing::small_random(seed, 8), seed, 1, 3);
        auto w = extract_witness(g, g.init());
        auto check = check_witness(g, w);
        ASSERT_TRUE(check.consistent()) << check.violations.front().to_string() << "\n" << serialize(g);
        const auto value = solve_mcg(g, g.init()).value;
        ASSERT_EQ(w.find(g.init())->c, value);
        auto sut = witness_guided_sut(g, w);
        ASSERT_EQ(best_response_gain(g, g.init(), *sut), value) << serialize(g) << serialize(g, w);
    }
}

// After normalization, an SUT optimal for the normalized game stays optimal
// for the original gains.
TEST(WitnessProperties, NormalizedPolicyOptimal)
{
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto g = ncgame::testing::with_random_gains(ncgame::testing::small_random(seed, 7), seed, 0, 2);
        auto n = normalize_gains(g);
        auto res = solve_mcg(n, n.init());
        auto sut = extract_optimal_sut(res);
        ASSERT_EQ(best_response_gain(g, g.init(), *sut), solve_mcg(g, g.init()).value) << serialize(g);
    }
}
