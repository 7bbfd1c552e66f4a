// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.
// Pass --verbose for per-graph detail of the test-plan campaign.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "fixtures.hpp"

using namespace ncgame;

namespace {

bool verbose = false;

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::pair<int, std::string> cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "ncgame");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = ncgame::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str() + err.str()};
}

// 1. The four-node fixture end to end.
Outcome fig3_values()
{
    auto [solve_code, solve_out] = cli({"solve", "--graph", "data/fig3.ncgame"});
    auto [check_code, check_out] = cli({"witness-check", "--graph", "data/fig3.ncgame", "--witness", "data/fig3.ncwitness"});
    auto [bad_code, bad_out] = cli({"witness-check", "--graph", "data/fig3.ncgame", "--witness", "data/fig3_bad.ncwitness"});
    auto g = ncgame::testing::fig3();
    auto w = parse_witness(ncgame::testing::fig3_witness_text, g);
    const auto br = best_response_gain(g, g.init(), *witness_guided_sut(g, w));
    const bool ok = solve_code == 0 && solve_out.find("mcg=3\n") != std::string::npos && check_code == 0 &&
                    bad_code == 3 && solve_mcg(g, g.init()).value == 3 && br == 3;
    return {ok, fmt("solve exit %d, witness-check exit %d (perturbed: %d), guided best response %llu", solve_code,
                    check_code, bad_code, static_cast<unsigned long long>(br))};
}

// 2. Every CNF with 1..3 variables and 1..3 non-empty clauses (a multiset of
// literal sets): the reduced game's value is <= m+2n+1 iff the formula is
// satisfiable, with equality when it is.
Outcome sat_equivalence()
{
    std::size_t formulas = 0, mismatches = 0;
    std::string first;
    for (int n = 1; n <= 3; ++n) {
        std::vector<std::vector<int>> literal_sets;
        for (unsigned mask = 1; mask < (1u << (2 * n)); ++mask) {
            std::vector<int> c;
            for (int i = 0; i < 2 * n; ++i)
                if (mask >> i & 1u) c.push_back(i < n ? i + 1 : -(i - n + 1));
            literal_sets.push_back(c);
        }
        const std::size_t k = literal_sets.size();
        for (int m = 1; m <= 3; ++m) {
            std::vector<std::size_t> idx(m, 0);
            for (;;) {
                std::vector<std::vector<int>> clauses;
                for (auto i : idx) clauses.push_back(literal_sets[i]);
                auto f = make_cnf(n, clauses);
                auto game = sat_to_ncgame(f);
                const auto value = solve_mcg(game.graph, game.graph.init()).value;
                const bool sat = brute_force_sat(f);
                const bool ok = sat ? value == game.threshold : value > game.threshold;
                ++formulas;
                if (!ok && mismatches++ == 0) first = to_dimacs(f);
                // Next non-decreasing index tuple.
                int p = m - 1;
                while (p >= 0 && idx[p] == k - 1) --p;
                if (p < 0) break;
                ++idx[p];
                for (int q = p + 1; q < m; ++q) idx[q] = idx[p];
            }
        }
    }
    return {mismatches == 0 && formulas > 0,
            fmt("%zu formulas, %zu mismatches%s%s", formulas, mismatches, first.empty() ? "" : "; first: ",
                first.c_str())};
}

// 3. Layered solver against the brute-force oracle.
Outcome oracle_equivalence()
{
    std::size_t bad = 0;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        auto g = ncgame::testing::small_random(1000 + seed, 5);
        if (solve_mcg(g, g.init()).value != oracle_mcg(g, g.init())) ++bad;
    }
    return {bad == 0, fmt("300 graphs (|V| <= 5), %zu disagreements", bad)};
}

// 4. Extracted witnesses are consistent, match the game value, and the
// guided SUT holds every tester to that value.
Outcome witness_suite()
{
    std::size_t inconsistent = 0, wrong_value = 0, unsound = 0, not_tight = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto g = ncgame::testing::small_random(2000 + seed, 8);
        auto w = extract_witness(g, g.init());
        if (!check_witness(g, w).consistent()) {
            ++inconsistent;
            continue;
        }
        const auto value = solve_mcg(g, g.init()).value;
        const auto cr = w.find(g.init())->c;
        if (cr != value) ++wrong_value;
        const auto br = best_response_gain(g, g.init(), *witness_guided_sut(g, w));
        if (br > cr) ++unsound;
        else if (br != cr) ++not_tight;
    }
    const bool ok = inconsistent + wrong_value + unsound + not_tight == 0;
    return {ok, fmt("200 graphs (|V| <= 8, unit gains): %zu inconsistent, %zu c_r != value, %zu above c_r, %zu below c_r",
                    inconsistent, wrong_value, unsound, not_tight)};
}

// 5. Doubling turns restarts into ordinary moves at exactly twice the value.
Outcome restart_doubling()
{
    std::size_t bad = 0;
    std::string first;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto g = ncgame::testing::small_random(3000 + seed, 7);
        auto d = restart_double(g);
        const auto lhs = solve_mcg(d, d.init()).value;
        const auto rhs = 2 * solve_mcg_restart(g, g.init());
        if (lhs != rhs && bad++ == 0) first = serialize(g);
    }
    if (!first.empty()) std::fprintf(stderr, "restart doubling counterexample:\n%s", first.c_str());
    return {bad == 0, fmt("100 graphs (|V| <= 7), %zu counterexamples", bad)};
}

// 6. Property suites on generated instances.
Outcome invariants()
{
    std::size_t cases = 0;
    std::map<std::string, std::size_t> failures;
    auto fail = [&](const char* what) { ++failures[what]; };

    for (std::uint64_t seed = 0; seed < 2000; ++seed, ++cases) {
        auto g = ncgame::testing::with_random_gains(ncgame::testing::small_random(4000 + seed, 8), seed, 0, 4);
        const std::uint64_t k = 2 + seed % 4;
        std::vector<std::uint64_t> gains(g.size());
        for (NodeIndex v = 0; v < g.size(); ++v) gains[v] = k * g.gain(v);
        auto scaled = g.with_gains(gains);
        if (solve_mcg(scaled, scaled.init()).value != k * solve_mcg(g, g.init()).value) fail("gain scaling");
    }

    for (std::uint64_t seed = 0; seed < 6000; ++seed) {
        auto g = ncgame::testing::small_random(6000 + seed, 8);
        Rng rng(seed);
        auto from = static_cast<NodeIndex>(uniform_index(rng, g.size()));
        auto to = static_cast<NodeIndex>(uniform_index(rng, g.size()));
        if (g.has_edge(from, to)) continue;
        ++cases;
        const auto before = solve_mcg(g, g.init()).value;
        auto h = ncgame::testing::add_edge(g, from, to);
        const auto after = solve_mcg(h, h.init()).value;
        if (g.owner(from) == Player::Tester ? after < before : after > before) fail("edge monotonicity");
    }

    for (std::uint64_t seed = 0; seed < 2000; ++seed, ++cases) {
        auto g = ncgame::testing::small_random(9000 + seed, 10);
        Rng rng(seed);
        auto random_trap = [&] {
            // Grow a tester trap: close a random seed set under forced moves.
            NodeSet s(g.size());
            const auto total = std::uint64_t{1} << g.size();
            auto mask = uniform_index(rng, total);
            for (NodeIndex v = 0; v < g.size(); ++v)
                if (mask >> v & 1u) s.insert(v);
            for (bool grew = true; grew;) {
                grew = false;
                for (NodeIndex v : s.members()) {
                    auto succ = g.successors(v);
                    const bool tester = g.owner(v) == Player::Tester;
                    bool any_inside = false;
                    for (NodeIndex w : succ) any_inside = any_inside || s.contains(w);
                    for (NodeIndex w : succ) {
                        if (s.contains(w)) continue;
                        if (tester || !any_inside) {
                            s.insert(w);
                            grew = true;
                            if (!tester) break;
                        }
                    }
                }
            }
            return s;
        };
        auto a = random_trap();
        auto b = random_trap();
        if (!is_trap(g, Player::Tester, a) || !is_trap(g, Player::Tester, b)) fail("trap construction");
        else if (!is_trap(g, Player::Tester, a | b)) fail("trap union");
    }

    for (std::uint64_t seed = 0; seed < 2000; ++seed, ++cases) {
        auto g = ncgame::testing::with_random_gains(ncgame::testing::small_random(12000 + seed, 30), seed, 0, 9);
        if (!(parse_game_graph(serialize(g)) == g)) fail("graph round-trip");
        auto suite = generate_static_suite(g);
        if (serialize(g, parse_suite(serialize(g, suite), g)) != serialize(g, suite)) fail("suite round-trip");
        if (seed % 4 == 0) {
            auto small = ncgame::testing::small_random(12000 + seed, 7);
            auto w = extract_witness(small, small.init());
            if (!(parse_witness(serialize(small, w), small) == w)) fail("witness round-trip");
        }
        Rng rng(seed);
        const int n = 1 + static_cast<int>(uniform_index(rng, 6));
        std::vector<std::vector<int>> clauses(1 + uniform_index(rng, 6));
        for (auto& c : clauses)
            for (std::size_t i = 0, len = 1 + uniform_index(rng, 4); i < len; ++i) {
                const int var = 1 + static_cast<int>(uniform_index(rng, n));
                c.push_back(uniform_index(rng, 2) ? var : -var);
            }
        auto f = make_cnf(n, clauses);
        if (!(parse_dimacs(to_dimacs(f)) == f)) fail("dimacs round-trip");
    }

    for (std::uint64_t seed = 0; seed < 2000; ++seed, ++cases) {
        auto g = ncgame::testing::small_random(15000 + seed, 40);
        auto suite = generate_static_suite(g);
        Rng pick(seed);
        const std::uint64_t budget = 1 + uniform_index(pick, 400);
        const std::uint64_t d = uniform_index(pick, 20);
        const auto algo = all_algorithms[seed % std::size(all_algorithms)];
        auto run = run_algorithm(g, suite, algo, budget, d, mix64(seed));
        std::uint64_t costs = 0;
        NodeSet covered(g.size());
        for (const auto& e : run.log) {
            costs += e.cost;
            covered |= covered_nodes(g, e.realized);
        }
        if (run.spent != costs + d * run.resets || run.spent > budget || !(run.covered == covered))
            fail("budget accounting");
    }

    std::string detail = fmt("%zu generated cases", cases);
    for (const auto& [what, count] : failures) detail += fmt("; %s failed %zu", what.c_str(), count);
    return {failures.empty() && cases >= 10000, detail};
}

// 7 and 8. Test-plan campaign on random graphs.
struct Campaign {
    std::string csv;
    std::vector<std::map<Algorithm, double>> top;  // mean at the largest budget, per graph
    std::vector<std::string> labels;
};

Campaign run_campaign(unsigned threads)
{
    struct Plan {
        std::size_t nodes;
        std::vector<std::uint64_t> budgets;
    };
    const std::vector<Plan> plans{{19, {100, 200, 300}},     {30, {400, 600, 800}},   {40, {400, 600, 800}},
                                  {46, {600, 800, 1000}},    {60, {600, 900, 1200}},  {75, {900, 1500, 2100}},
                                  {95, {12000, 16000, 20000}}, {100, {6000, 8000, 10000}}};
    Campaign c;
    for (std::size_t i = 0; i < plans.size(); ++i) {
        ExperimentConfig cfg;
        cfg.label = fmt("G%zu", i + 1);
        cfg.generator = RandomGraphParams{plans[i].nodes, 0.3, 1, 3, 0.8};
        cfg.generator_seed = 1000 + i;
        cfg.budgets = plans[i].budgets;
        cfg.trials = 100;
        cfg.reset_cost = 10;
        cfg.base_seed = 42;
        cfg.threads = threads;
        auto res = run_experiment(cfg);
        auto csv = emit_csv(res);
        c.csv += i == 0 ? csv : csv.substr(csv.find('\n') + 1);
        std::map<Algorithm, double> top;
        for (const auto& cell : res.cells)
            if (cell.budget == plans[i].budgets.back()) top[cell.strategy] = cell.mean_pct;
        c.top.push_back(top);
        c.labels.push_back(cfg.label + fmt(" (%zu nodes)", plans[i].nodes));
    }
    return c;
}

Campaign first_campaign;

Outcome trend()
{
    first_campaign = run_campaign(0);
    const auto& c = first_campaign;
    auto wins = [&](Algorithm a, Algorithm b) {
        int n = 0;
        for (const auto& t : c.top) n += t.at(a) > t.at(b);
        return n;
    };
    const int s2_rdm = wins(Algorithm::Random, Algorithm::RandomWalk);
    const int s2_gmu = wins(Algorithm::Random, Algorithm::StaticOnce);
    const int s3_gmu = wins(Algorithm::RandomCoverage, Algorithm::StaticOnce);
    const int s4_gmu = wins(Algorithm::RandomControlled, Algorithm::StaticOnce);
    if (verbose) {
        for (std::size_t i = 0; i < c.top.size(); ++i) {
            std::printf("       %-16s", c.labels[i].c_str());
            for (auto a : all_algorithms) std::printf(" %s=%.2f", std::string(to_string(a)).c_str(), c.top[i].at(a));
            std::printf("\n");
        }
    }
    const bool ok = s2_rdm >= 6 && s2_gmu >= 6 && s3_gmu >= 6 && s4_gmu >= 6;
    return {ok, fmt("largest budget, graphs won of 8: s2>rdm %d, s2>gmu %d, s3>gmu %d, s4>gmu %d", s2_rdm, s2_gmu,
                    s3_gmu, s4_gmu)};
}

Outcome determinism()
{
    auto again = run_campaign(0);
    auto serial = run_campaign(1);
    const bool same = again.csv == first_campaign.csv && serial.csv == first_campaign.csv;
    return {same && !first_campaign.csv.empty(),
            fmt("%zu CSV bytes; rerun %s, single-threaded rerun %s", first_campaign.csv.size(),
                again.csv == first_campaign.csv ? "identical" : "DIFFERENT",
                serial.csv == first_campaign.csv ? "identical" : "DIFFERENT")};
}

} // namespace

int main(int argc, char** argv)
{
    for (int i = 1; i < argc; ++i) verbose = verbose || std::strcmp(argv[i], "--verbose") == 0;

    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"fig3 value, witness check and guided SUT", fig3_values},
        {"SAT reduction equivalence (exhaustive)", sat_equivalence},
        {"solver vs brute-force oracle", oracle_equivalence},
        {"witness extraction and guided-SUT bound", witness_suite},
        {"restart doubling equality", restart_doubling},
        {"invariant property suites", invariants},
        {"test-plan trend on random graphs", trend},
        {"campaign determinism", determinism},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s [%zu] %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
