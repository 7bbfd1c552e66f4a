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

#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <ncgame/ncgame.hpp>

namespace ncgame::cli {
namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open `" + path + "`");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Writes through a sibling temp file so a failed run never leaves a partial file.
void write_file(const std::string& path, const std::string& text)
{
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write `" + tmp.string() + "`");
        out << text;
        out.flush();
        if (!out) throw ValidationError("cannot write `" + tmp.string() + "`");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw ValidationError("cannot move output into `" + path + "`");
    }
}

// Writes to `path`, or to `out` when no path was given.
void emit(const std::string& path, const std::string& text, std::ostream& out)
{
    if (path.empty()) out << text;
    else write_file(path, text);
}

GameGraph read_graph(const std::string& path)
{
    try {
        return parse_game_graph(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(e.line(), path + ": " + e.reason());
    }
}

NodeIndex resolve_init(const GameGraph& g, const std::string& id)
{
    if (id.empty()) return g.init();
    auto v = g.find(id);
    if (!v) throw ValidationError("unknown node `" + id + "`");
    return *v;
}

struct Options {
    std::string graph, witness, cnf, suite, config, out, init, strategy = "s2";
    std::size_t cap = default_solver_cap;
    bool restart = false, lenient = false, normalize = false;
    std::size_t nodes = 20, min_out = 1, max_out = 3;
    double sut_fraction = 0.3, forward_bias = 0.0;
    std::uint64_t seed = 0, budget = 0, reset_cost = default_reset_cost, trials = 100;
    std::uint64_t base_seed = 0;
    unsigned threads = 0;
    bool have_trials = false, have_base_seed = false;
};

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err)
{
    auto g = read_graph(o.graph);
    auto violations = validate(g, !o.lenient);
    for (const auto& v : violations) err << "error: " << v.to_string() << '\n';
    if (!violations.empty()) return 3;
    out << "ok nodes=" << g.size() << " init=" << g.name(g.init()) << '\n';
    return 0;
}

int cmd_gen_random(const Options& o, std::ostream& out)
{
    auto g = generate_random({o.nodes, o.sut_fraction, o.min_out, o.max_out, o.forward_bias}, o.seed);
    emit(o.out, serialize(g), out);
    return 0;
}

int cmd_solve(const Options& o, std::ostream& out)
{
    auto g = read_graph(o.graph);
    const NodeIndex r = resolve_init(g, o.init);
    if (o.restart) {
        out << "mcg_restart=" << solve_mcg_restart(g, r, o.cap) << '\n';
        return 0;
    }
    auto res = solve_mcg(g, r, o.cap);
    out << "mcg=" << res.value << '\n';
    NodeSet start(g.size());
    start.insert(r);
    if (auto m = res.tester_move(r, start)) out << "move=" << g.name(*m) << '\n';
    else out << "move=none\n";
    out << "states=" << res.states_explored << '\n';
    return 0;
}

int cmd_witness_extract(const Options& o, std::ostream& out)
{
    auto g = read_graph(o.graph);
    if (o.normalize) g = normalize_gains(g);
    auto w = extract_witness(g, resolve_init(g, o.init), o.cap);
    emit(o.out, serialize(g, w), out);
    return 0;
}

int cmd_witness_check(const Options& o, std::ostream& out, std::ostream& err)
{
    auto g = read_graph(o.graph);
    Witness w;
    try {
        w = parse_witness(read_file(o.witness), g);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), o.witness + ": " + e.reason());
    }
    auto check = check_witness(g, w);
    for (const auto& v : check.violations) err << "error: " << v.to_string() << '\n';
    if (!check.consistent()) return 3;
    out << "consistent c=" << w.find(g.init())->c << '\n';
    return 0;
}

int cmd_reduce_sat(const Options& o, std::ostream& out)
{
    Cnf f;
    try {
        f = parse_dimacs(read_file(o.cnf));
    } catch (const ParseError& e) {
        throw ParseError(e.line(), o.cnf + ": " + e.reason());
    }
    auto game = sat_to_ncgame(f);
    write_file(o.out, serialize(game.graph));
    out << "nodes=" << game.graph.size() << '\n' << "threshold=" << game.threshold << '\n';
    return 0;
}

int cmd_transform_restart(const Options& o, std::ostream& out)
{
    emit(o.out, serialize(restart_double(read_graph(o.graph))), out);
    return 0;
}

int cmd_gen_suite(const Options& o, std::ostream& out)
{
    auto g = read_graph(o.graph);
    emit(o.out, serialize(g, generate_static_suite(g)), out);
    return 0;
}

int cmd_simulate(const Options& o, std::ostream& out)
{
    auto g = read_graph(o.graph);
    require_strict(g);
    auto algo = parse_algorithm(o.strategy);
    if (!algo) throw ValidationError("unknown strategy `" + o.strategy + "`");
    if (o.budget < 1) throw ValidationError("budget must be at least 1");
    if (o.trials < 1) throw ValidationError("trials must be at least 1");
    TestSuite suite;
    if (o.suite.empty()) {
        suite = generate_static_suite(g);
    } else {
        try {
            suite = parse_suite(read_file(o.suite), g);
        } catch (const ParseError& e) {
            throw ParseError(e.line(), o.suite + ": " + e.reason());
        }
    }
    double sum = 0;
    for (std::uint64_t t = 0; t < o.trials; ++t) {
        auto run = run_algorithm(g, suite, *algo, o.budget, o.reset_cost, trial_seed(o.seed, *algo, o.budget, t));
        const double pct = 100.0 * static_cast<double>(run.covered.size()) / static_cast<double>(g.size());
        sum += pct;
        out << "trial=" << t << " covered=" << run.covered.size() << " pct=" << format_fixed2(pct)
            << " spent=" << run.spent << " resets=" << run.resets << " executions=" << run.executions << '\n';
    }
    out << "mean_pct=" << format_fixed2(sum / static_cast<double>(o.trials)) << '\n';
    return 0;
}

int cmd_experiment(const Options& o, std::ostream& out)
{
    ExperimentConfig cfg;
    try {
        cfg = parse_experiment_config(read_file(o.config));
    } catch (const ParseError& e) {
        throw ParseError(e.line(), o.config + ": " + e.reason());
    }
    if (cfg.graph_file && fs::path(*cfg.graph_file).is_relative())
        cfg.graph_file = (fs::path(o.config).parent_path() / *cfg.graph_file).string();
    if (o.have_trials) cfg.trials = o.trials;
    if (o.have_base_seed) cfg.base_seed = o.base_seed;
    if (o.threads) cfg.threads = o.threads;
    emit(o.out, emit_csv(run_experiment(cfg)), out);
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Node coverage games: solving, witnesses, reductions and test-plan simulation", "ncgame"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");
    Options o;

    auto graph_in = [&](CLI::App* c) { c->add_option("--graph", o.graph, "Graph file (ncgame 1)")->required(); };
    auto cap_opt = [&](CLI::App* c) {
        c->add_option("--cap", o.cap, "Largest reachable region the solver accepts")->capture_default_str();
    };
    auto out_opt = [&](CLI::App* c, bool required) {
        auto* opt = c->add_option("--out", o.out, required ? "Output file" : "Output file (default: stdout)");
        if (required) opt->required();
    };

    std::function<int()> action;
    auto bind = [&](CLI::App* c, std::function<int()> f) { c->callback([&action, f] { action = f; }); };

    auto* validate_cmd = app.add_subcommand("validate", "Check a graph file");
    graph_in(validate_cmd);
    validate_cmd->add_flag("--lenient", o.lenient, "Allow sinks");
    bind(validate_cmd, [&] { return cmd_validate(o, out, err); });

    auto* gen = app.add_subcommand("gen-random", "Generate a random strict graph");
    gen->add_option("--nodes", o.nodes, "Node count")->capture_default_str();
    gen->add_option("--sut-fraction", o.sut_fraction, "Probability that a node is SUT-owned")->capture_default_str();
    gen->add_option("--min-out", o.min_out, "Minimum out-degree")->capture_default_str();
    gen->add_option("--max-out", o.max_out, "Maximum out-degree")->capture_default_str();
    gen->add_option("--forward-bias", o.forward_bias, "Probability that an extra edge points forward")
        ->capture_default_str();
    gen->add_option("--seed", o.seed, "Generator seed")->capture_default_str();
    out_opt(gen, false);
    bind(gen, [&] { return cmd_gen_random(o, out); });

    auto* solve = app.add_subcommand("solve", "Maximal coverage guarantee and the first optimal tester move");
    graph_in(solve);
    solve->add_option("--init", o.init, "Start node (default: the graph's init)");
    solve->add_flag("--restart", o.restart, "Let the tester restart at any time");
    cap_opt(solve);
    bind(solve, [&] { return cmd_solve(o, out); });

    auto* wx = app.add_subcommand("witness-extract", "Build a consistent witness");
    graph_in(wx);
    wx->add_option("--init", o.init, "Start node (default: the graph's init)");
    wx->add_flag("--normalize", o.normalize, "Replace each gain g by 1 + |V|*g first");
    cap_opt(wx);
    out_opt(wx, false);
    bind(wx, [&] { return cmd_witness_extract(o, out); });

    auto* wc = app.add_subcommand("witness-check", "Check a witness for consistency");
    graph_in(wc);
    wc->add_option("--witness", o.witness, "Witness file (ncwitness 1)")->required();
    bind(wc, [&] { return cmd_witness_check(o, out, err); });

    auto* sat = app.add_subcommand("reduce-sat", "Build the coverage game of a CNF formula");
    sat->add_option("--cnf", o.cnf, "DIMACS CNF file")->required();
    out_opt(sat, true);
    bind(sat, [&] { return cmd_reduce_sat(o, out); });

    auto* dbl = app.add_subcommand("transform-restart", "Double every node so that restarts become moves");
    graph_in(dbl);
    out_opt(dbl, false);
    bind(dbl, [&] { return cmd_transform_restart(o, out); });

    auto* suite = app.add_subcommand("gen-suite", "Deterministic node-coverage test suite");
    graph_in(suite);
    out_opt(suite, false);
    bind(suite, [&] { return cmd_gen_suite(o, out); });

    auto* sim = app.add_subcommand("simulate", "Run a test-plan strategy against a random SUT");
    graph_in(sim);
    sim->add_option("--strategy", o.strategy, "gmu, s1.5, s2, s3, s4 or rdm")->capture_default_str();
    sim->add_option("--budget", o.budget, "Budget in visits")->required();
    sim->add_option("--reset-cost", o.reset_cost, "Cost of starting another test case")->capture_default_str();
    sim->add_option("--seed", o.seed, "Base seed")->capture_default_str();
    sim->add_option("--trials", o.trials, "Number of runs")->capture_default_str();
    sim->add_option("--suite", o.suite, "Suite file (default: generated)");
    bind(sim, [&] { return cmd_simulate(o, out); });

    auto* exp = app.add_subcommand("experiment", "Monte Carlo campaign from a key=value config; writes CSV");
    exp->add_option("--config", o.config, "Experiment config file")->required();
    exp->add_option("--trials", o.trials, "Override trials")->each([&](const std::string&) { o.have_trials = true; });
    exp->add_option("--base-seed", o.base_seed, "Override base seed")->each([&](const std::string&) {
        o.have_base_seed = true;
    });
    exp->add_option("--threads", o.threads, "Worker threads (0: all cores)");
    out_opt(exp, false);
    bind(exp, [&] { return cmd_experiment(o, out); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        return action();
    } catch (const ParseError& e) {
        err << "error: parse: " << e.reason() << " (line " << e.line() << ")\n";
        return 2;
    } catch (const ValidationError& e) {
        err << "error: validation: " << e.what() << '\n';
        return 3;
    } catch (const CapacityError& e) {
        err << "error: capacity: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << '\n';
        return 5;
    }
}

} // namespace ncgame::cli
