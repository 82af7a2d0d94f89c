// Copyright (c) tptest contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tptest/analysis.hpp"
#include "tptest/error.hpp"
#include "tptest/harness.hpp"
#include "tptest/net.hpp"
#include "tptest/net_format.hpp"
#include "tptest/scheduler.hpp"
#include "tptest/sscg.hpp"
#include "tptest/suite_json.hpp"
#include "tptest/testgen.hpp"

namespace tptest {

namespace cli {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read '" + path + "'");
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline Net load_net(const std::string& path, Annotations* ann = nullptr) {
    return parse_net(read_file(path), std::filesystem::path(path).stem().string(), ann);
}

/// The SUT with its environment, or against the universal environment when none is given.
inline ComposedSystem load_system(const std::string& sut, const std::string& env) {
    Net s = load_net(sut);
    if (env.empty()) {
        return universal_system(s);
    }
    return compose(s, load_net(env));
}

inline SscgLimits class_limits() {
    SscgLimits l;
    if (const char* v = std::getenv("TPTEST_CLASS_LIMIT")) {
        l.max_classes = std::stoul(v);
    }
    return l;
}

inline Criterion parse_criterion(const std::string& s) {
    if (s == "transitions") return Criterion::Transition;
    if (s == "statements") return Criterion::Statement;
    if (s == "places") return Criterion::Place;
    if (s == "markings") return Criterion::Marking;
    if (s == "classes") return Criterion::Class;
    throw Error(Errc::Syntax, "unknown coverage criterion '" + s + "'");
}

/// `place=P`, `event=label` or `transition=t`.
inline GoalAtom parse_atom(const ComposedSystem& sys, const std::string& text) {
    auto eq = text.find('=');
    if (eq == std::string::npos) {
        throw Error(Errc::Syntax, "expected kind=value in '" + text + "'");
    }
    std::string kind = text.substr(0, eq);
    std::string value = text.substr(eq + 1);
    if (kind == "place") {
        if (auto p = sys.net.place_index(value)) {
            return GoalAtom::place(*p);
        }
        throw Error(Errc::InvalidMarking, "unknown place '" + value + "'");
    }
    if (kind == "event") {
        return GoalAtom::action(ActionLabel::parse(value));
    }
    if (kind == "transition") {
        if (auto t = sys.net.transition_index(value)) {
            return GoalAtom::transition(*t);
        }
        throw Error(Errc::UnknownTransition, "unknown transition '" + value + "'");
    }
    throw Error(Errc::Syntax, "unknown goal kind '" + kind + "'");
}

/// `reach:<atom>` or `cover:<criterion>`.
inline Goal parse_goal(const ComposedSystem& sys, const ClassGraph& g, const std::string& text) {
    if (text.rfind("reach:", 0) == 0) {
        Goal goal;
        goal.atoms.push_back(parse_atom(sys, text.substr(6)));
        return goal;
    }
    if (text.rfind("cover:", 0) == 0) {
        return goal_from_criterion(sys, parse_criterion(text.substr(6)), g);
    }
    throw Error(Errc::Syntax, "goal must be reach:<kind>=<value> or cover:<criterion>");
}

inline void print_support(std::ostream& out, const ComposedSystem& sys, const Support& s) {
    std::string line;
    for (const Move& m : s) {
        line += (line.empty() ? "" : " ") + move_name(sys, m);
    }
    out << line << "\n";
}

}  // namespace cli

/// Runs the command line tool. Exit codes: 0 success or Pass, 1 Fail or a
/// false property, 2 usage or internal error.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Time-optimal conformance test generation for time Petri nets", "tptest"};
    app.require_subcommand(1);

    std::string sut_path, env_path, out_path;
    bool naive = false;

    auto* parse = app.add_subcommand("parse", "Parse and validate a net, print it in canonical form");
    parse->add_option("net", sut_path, "Net file")->required();

    auto* comp = app.add_subcommand("compose", "Print the composition of a SUT and an environment");
    comp->add_option("sut", sut_path, "SUT net")->required();
    comp->add_option("env", env_path, "Environment net")->required();

    auto* sscg = app.add_subcommand("sscg", "Build and print the state class graph");
    sscg->add_option("sut", sut_path, "SUT net")->required();
    sscg->add_option("env", env_path, "Environment (default: universal, open semantics)");
    sscg->add_flag("--naive-priority", naive, "Literal priority reading");

    auto* check = app.add_subcommand("check", "Reachability, coverability and DIEOU checks");
    std::string reach, cover;
    bool dieou = false;
    check->add_option("sut", sut_path, "SUT net")->required();
    check->add_option("env", env_path, "Environment (default: universal)");
    check->add_option("--reach", reach, "place=P, event=label or transition=t");
    check->add_option("--cover", cover, "transitions|statements|places|markings|classes");
    check->add_flag("--dieou", dieou, "Check the DIEOU restrictions on the SUT");

    auto* plan = app.add_subcommand("plan", "Fastest schedule of a support");
    std::vector<std::string> moves;
    bool all = false;
    std::string epsilon = "1/1000";
    plan->add_option("sut", sut_path, "SUT net")->required();
    plan->add_option("env", env_path, "Environment net")->required();
    plan->add_option("moves", moves, "Move names, e.g. t0,s0 or (t8,s0)");
    plan->add_flag("--all", all, "Print the whole constraint system");
    plan->add_option("--epsilon", epsilon, "Offset above unattained bounds");
    plan->add_flag("--naive-priority", naive, "Literal priority reading");

    auto* gen = app.add_subcommand("gentest", "Generate a test suite");
    std::string purpose, optimize = "fastest", slack = "0", window = "0", reset_time = "0";
    std::vector<std::string> reset_from;
    bool reset_anywhere = false;
    gen->add_option("sut", sut_path, "SUT net")->required();
    gen->add_option("env", env_path, "Environment net")->required();
    gen->add_option("--purpose", purpose, "reach:<kind>=<value> or cover:<criterion>")->required();
    gen->add_option("--optimize", optimize, "fastest or shortest-then-fastest");
    gen->add_option("--timeout-slack", slack, "Extra time allowed for an expected output before Fail");
    gen->add_option("--window", window, "Width of the accepted observation window");
    gen->add_option("--reset-from", reset_from, "SUT marking from which a reset may be issued, e.g. p0,p2:1");
    gen->add_flag("--reset-anywhere", reset_anywhere, "Allow a reset from any marking");
    gen->add_option("--reset-time", reset_time, "Duration of one reset");
    gen->add_option("-o,--output", out_path, "Suite file (default: standard output)");

    auto* runc = app.add_subcommand("run", "Run a suite against a SUT model");
    std::string suite_path, mutation;
    runc->add_option("suite", suite_path, "Suite JSON")->required();
    runc->add_option("sut", sut_path, "SUT net")->required();
    runc->add_option("--mutate", mutation, "Apply a mutation to the SUT first");

    auto* mut = app.add_subcommand("mutate", "Print a mutant: shift:t:dl:du, flip:lo:hi, swap:t1:t2, drop:t:p");
    mut->add_option("net", sut_path, "Net file")->required();
    mut->add_option("mutation", mutation, "Mutation text")->required();

    auto* tioco = app.add_subcommand("tioco-bounded", "Bounded grid check of timed trace inclusion");
    std::string impl_path, horizon = "40", grid;
    tioco->add_option("spec", sut_path, "Specification net")->required();
    tioco->add_option("impl", impl_path, "Implementation net")->required();
    tioco->add_option("--horizon", horizon, "Time bound of the exploration (default 40)");
    tioco->add_option("--granularity", grid, "Delay grid (default: 1/(2*lcm of bound denominators))");

    auto* dot = app.add_subcommand("dot", "DOT rendering of a net, or of the class graph with --sscg");
    bool dot_graph = false;
    dot->add_option("sut", sut_path, "SUT net")->required();
    dot->add_option("env", env_path, "Environment net");
    dot->add_flag("--sscg", dot_graph, "Render the state class graph instead");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        SemanticsOptions sem;
        sem.naive_priority = naive;

        if (parse->parsed()) {
            Annotations ann;
            Net n = cli::load_net(sut_path, &ann);
            for (const Diagnostic& d : validate(n)) {
                err << "warning: " << d.subject << ": " << d.reason << "\n";
            }
            out << serialize_net(n, ann);
            return 0;
        }
        if (comp->parsed()) {
            out << serialize_net(cli::load_system(sut_path, env_path).net);
            return 0;
        }
        if (sscg->parsed()) {
            ComposedSystem sys = cli::load_system(sut_path, env_path);
            sem.open = env_path.empty();
            ClassGraph g = build_sscg(sys, cli::class_limits(), sem);
            out << "classes " << g.size() << " edges " << g.edges.size() << (g.truncated ? " truncated" : "") << "\n";
            for (std::size_t c = 0; c < g.size(); ++c) {
                out << "c" << c << " {" << sys.net.format_marking(g.classes[c].marking) << "}\n";
                for (const std::string& line : describe_domain(sys, g.classes[c], firing_domain(sys, g.classes[c]))) {
                    out << "  " << line << "\n";
                }
            }
            for (const ClassEdge& e : g.edges) {
                out << "c" << e.from << " -" << move_name(sys, e.move) << "-> c" << e.to << "\n";
            }
            return g.truncated ? 1 : 0;
        }
        if (check->parsed()) {
            if (dieou) {
                DieouReport r = check_dieou(cli::load_system(sut_path, env_path), cli::class_limits());
                for (const DieouCondition* c : r.conditions()) {
                    out << c->name << ": " << (c->pass ? "pass" : "FAIL");
                    if (!c->pass) {
                        out << " class=c" << *c->witness_class << " marking={"
                            << r.system.net.format_marking(c->witness->marking) << "} " << c->detail;
                    }
                    out << "\n";
                }
                return r.all() ? 0 : 1;
            }
            if (reach.empty() == cover.empty()) {
                err << "check: give exactly one of --reach, --cover or --dieou\n";
                return 2;
            }
            ComposedSystem sys = cli::load_system(sut_path, env_path);
            sem.open = env_path.empty();
            ClassGraph g = build_sscg(sys, cli::class_limits(), sem);
            Goal goal = cli::parse_goal(sys, g, reach.empty() ? "cover:" + cover : "reach:" + reach);
            if (!reach.empty()) {
                auto w = find_witness(sys, g, goal);
                if (!w) {
                    out << (g.truncated ? "unknown (graph truncated)\n" : "unreachable\n");
                    return g.truncated ? 2 : 1;
                }
                out << "reachable\n";
                cli::print_support(out, sys, *w);
                return 0;
            }
            try {
                CoveringPlan p = find_covering_plan(sys, g, goal);
                out << "coverable\n";
                for (const Support& s : p.segments) {
                    cli::print_support(out, sys, s);
                }
                return 0;
            } catch (const Error& e) {
                if (e.code() != Errc::Uncoverable) {
                    throw;
                }
                out << e.what() << "\n";
                return 1;
            }
        }
        if (plan->parsed()) {
            ComposedSystem sys = cli::load_system(sut_path, env_path);
            Support support;
            for (const std::string& m : moves) {
                support.push_back(parse_move(sys, m));
            }
            if (all) {
                auto system = feasibility_system(sys, support, sem);
                if (!system) {
                    out << "# structurally impossible\n";
                    return 1;
                }
                out << format_system(sys, support, *system);
                if (!system->consistent()) {
                    return 1;
                }
            }
            try {
                FastestSchedule fs = fastest_schedule(sys, support, sem, parse_rational(epsilon));
                std::string labels;
                for (const ScheduleStep& s : fs.schedule.steps) {
                    labels += (labels.empty() ? "" : " ") + to_string(s.eta) + "@" + move_label(sys, s.move);
                }
                out << format_schedule(sys, fs.schedule) << "\n" << labels << "\n";
                out << "accumulated " << to_string(fs.infimum) << (fs.attained ? "" : " unattained") << "\n";
                return 0;
            } catch (const Error& e) {
                if (e.code() != Errc::Infeasible) {
                    throw;
                }
                out << "infeasible\n";
                return 1;
            }
        }
        if (gen->parsed()) {
            ComposedSystem sys = cli::load_system(sut_path, env_path);
            ClassGraph g = build_sscg(sys, cli::class_limits());
            GenerateOptions opts;
            opts.optimize = parse_optimize(optimize);
            opts.timeout_slack = parse_rational(slack);
            opts.window = parse_rational(window);
            opts.goal_name = purpose;
            opts.resets.anywhere = reset_anywhere;
            opts.resets.duration = parse_rational(reset_time);
            for (const std::string& m : reset_from) {
                opts.resets.markings.push_back(parse_marking(sys.sut, m));
            }
            if (const char* v = std::getenv("TPTEST_CLASS_LIMIT")) {
                opts.search.max_nodes = std::stoul(v);
            }
            TestSuite suite = generate(sys, g, cli::parse_goal(sys, g, purpose), opts);
            std::string text = export_suite(suite);
            if (out_path.empty()) {
                out << text;
            } else {
                std::ofstream f(out_path, std::ios::binary);
                f << text;
                if (!f) {
                    throw std::runtime_error("cannot write '" + out_path + "'");
                }
                for (const TestCase& c : suite.cases) {
                    out << c.id << " " << format_sequence(c.sequence) << "\n";
                }
                out << "accumulated " << to_string(suite.accumulated()) << "\n";
            }
            return 0;
        }
        if (runc->parsed()) {
            TestSuite suite = parse_suite(cli::read_file(suite_path));
            Net sut = cli::load_net(sut_path);
            if (!mutation.empty()) {
                sut = mutate(sut, Mutation::parse(mutation));
            }
            bool ok = true;
            for (const TestCase& c : suite.cases) {
                Verdict v = run_test(c, sut);
                ok = ok && v.outcome == Outcome::Pass;
                out << verdict_line(c.id, v) << "\n";
            }
            return ok ? 0 : 1;
        }
        if (mut->parsed()) {
            Annotations ann;
            Net n = cli::load_net(sut_path, &ann);
            out << serialize_net(mutate(n, Mutation::parse(mutation)), ann);
            return 0;
        }
        if (tioco->parsed()) {
            Net spec = cli::load_net(sut_path);
            Net impl = cli::load_net(impl_path);
            std::optional<Rational> g;
            if (!grid.empty()) {
                g = parse_rational(grid);
            }
            TiocoLimits limits;
            if (const char* v = std::getenv("TPTEST_CLASS_LIMIT")) {
                limits.max_nodes = std::stoul(v);
            }
            TiocoResult r = bounded_tioco_check(spec, impl, parse_rational(horizon), g, limits);
            if (r.consistent) {
                out << "consistent up to " << horizon << "\n";
                return 0;
            }
            out << "counterexample: " << format_trace(r.counterexample) << "\n" << r.reason << "\n";
            return 1;
        }
        if (dot->parsed()) {
            if (!dot_graph) {
                out << (env_path.empty() ? export_dot(cli::load_net(sut_path)) : export_dot(cli::load_system(sut_path, env_path).net));
                return 0;
            }
            ComposedSystem sys = cli::load_system(sut_path, env_path);
            sem.open = env_path.empty();
            out << export_dot(sys, build_sscg(sys, cli::class_limits(), sem));
            return 0;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace tptest
