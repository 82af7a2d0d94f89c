// Copyright (c) tptest contributors.
// SPDX-License-Identifier: Apache-2.0
// Shared fixtures, brute-force oracles and property checks for the unit tests
// and the acceptance binary.
#pragma once

#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tptest/cli.hpp"
#include "tptest/tptest.hpp"

namespace tptest::fixtures {

inline std::string model_path(const std::string& name) { return std::string(TPTEST_MODELS_DIR) + "/" + name; }

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline Net model(const std::string& file) {
    std::string stem = file.substr(0, file.find('.'));
    return parse_net(slurp(model_path(file)), stem);
}

inline ComposedSystem system(const std::string& sut, const std::string& env) { return compose(model(sut), model(env)); }

inline const std::vector<std::string>& bundled_models() {
    static const std::vector<std::string> all = {
        "light_controller.net",     "user_e1.net",        "user_e1_react2.net",       "user_e2_pause.net",
        "user_e3_tp2.net",          "user_e3_tp2_react2.net", "dieou_nondeterministic.net", "dieou_missing_input.net",
        "dieou_two_outputs.net",    "dieou_lazy_output.net",
    };
    return all;
}

/// Every discrete move the composed system could ever take.
inline std::vector<Move> all_moves(const ComposedSystem& sys) {
    std::vector<Move> out;
    for (std::size_t t = 0; t < sys.net.transitions.size(); ++t) {
        const ActionLabel& l = sys.transition(t).label;
        if (!l.observable()) {
            out.push_back(Move::internal(t));
        } else if (sys.is_sut(t)) {
            for (std::size_t u : sys.partners[t]) {
                out.push_back(Move::sync(t, u));
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Discretized exhaustive oracle for fastest schedules

/// Earliest completion of `support` when every delay is a multiple of `step`
/// and nothing happens after `horizon`. Arrival states are merged keeping the
/// earliest instant, which is exact because states carry relative intervals.
class GridOracle {
public:
    GridOracle(const ComposedSystem& sys, Rational step, Rational horizon) : sys_(sys), step_(step), horizon_(horizon) {}

    using Frontier = std::map<State, Rational>;

    Frontier start() const { return {{initial_state(sys_), Rational(0)}}; }

    Frontier extend(const Frontier& from, const Move& m) const {
        Frontier next;
        for (const auto& [e, now] : from) {
            for (Rational d(0); now + d <= horizon_; d += step_) {
                if (!can_elapse(e, d)) {
                    break;
                }
                State later = elapse(sys_, e, d);
                if (!is_fireable(sys_, later, m)) {
                    continue;
                }
                State fired = apply(sys_, later, m);
                auto it = next.find(fired);
                if (it == next.end() || now + d < it->second) {
                    next[fired] = now + d;
                }
            }
        }
        return next;
    }

    static std::optional<Rational> earliest(const Frontier& f) {
        std::optional<Rational> best;
        for (const auto& [e, t] : f) {
            if (!best || t < *best) {
                best = t;
            }
        }
        return best;
    }

    std::optional<Rational> min_time(const Support& s) const {
        Frontier f = start();
        for (const Move& m : s) {
            f = extend(f, m);
        }
        return s.empty() ? Rational(0) : earliest(f);
    }

private:
    const ComposedSystem& sys_;
    Rational step_;
    Rational horizon_;
};

struct OracleReport {
    std::size_t supports = 0;
    std::size_t feasible = 0;
    std::size_t mismatches = 0;
    std::string first_mismatch;
};

/// Compares fastest_schedule with the oracle on every support up to `max_len`
/// (infeasible one-move extensions of feasible prefixes included).
inline OracleReport compare_with_oracle(const ComposedSystem& sys, std::size_t max_len, Rational step, Rational horizon) {
    GridOracle oracle(sys, step, horizon);
    std::vector<Move> moves = all_moves(sys);
    OracleReport r;
    Support prefix;
    auto mismatch = [&](const std::string& what) {
        ++r.mismatches;
        if (r.first_mismatch.empty()) {
            std::string s;
            for (const Move& m : prefix) {
                s += move_name(sys, m) + " ";
            }
            r.first_mismatch = s + ": " + what;
        }
    };
    std::function<void(const GridOracle::Frontier&)> dfs = [&](const GridOracle::Frontier& f) {
        if (prefix.size() == max_len) {
            return;
        }
        for (const Move& m : moves) {
            prefix.push_back(m);
            ++r.supports;
            GridOracle::Frontier next = oracle.extend(f, m);
            std::optional<Rational> expect = GridOracle::earliest(next);
            std::optional<Rational> got;
            bool attained = true;
            try {
                FastestSchedule fs = fastest_schedule(sys, prefix);
                got = fs.infimum;
                attained = fs.attained;
                if (!verify_schedule(sys, fs.schedule)) {
                    mismatch("returned schedule does not replay");
                }
            } catch (const Error& e) {
                if (e.code() != Errc::Infeasible) {
                    throw;
                }
            }
            if (expect) {
                ++r.feasible;
                if (!got || !attained || *got != *expect) {
                    mismatch("oracle " + to_string(*expect) + ", scheduler " + (got ? to_string(*got) : std::string("infeasible")));
                }
                dfs(next);
            } else if (got && *got + step <= horizon) {
                mismatch("scheduler " + to_string(*got) + " but oracle finds nothing");
            }
            prefix.pop_back();
        }
    };
    dfs(oracle.start());
    return r;
}

// ---------------------------------------------------------------------------
// Random exploration

/// States visited by random runs mixing discrete moves and grid delays.
inline std::vector<State> random_states(const ComposedSystem& sys, std::size_t count, unsigned seed, const SemanticsOptions& opts = {}) {
    std::mt19937 rng(seed);
    std::vector<State> out;
    State e = initial_state(sys);
    while (out.size() < count) {
        out.push_back(e);
        std::vector<Move> moves = fireable(sys, e, opts);
        bool fire = !moves.empty() && std::uniform_int_distribution<int>(0, 2)(rng) != 0;
        if (fire) {
            e = apply(sys, e, moves[std::uniform_int_distribution<std::size_t>(0, moves.size() - 1)(rng)], opts);
        } else {
            Rational d(std::uniform_int_distribution<int>(0, 60)(rng), 10);
            if (can_elapse(e, d)) {
                e = elapse(sys, e, d);
            } else if (auto m = max_delay(e); m && can_elapse(e, *m) && *m > 0) {
                e = elapse(sys, e, *m);
            } else if (moves.empty()) {
                e = initial_state(sys);
            }
        }
        if (std::uniform_int_distribution<int>(0, 40)(rng) == 0) {
            e = initial_state(sys);
        }
    }
    return out;
}

/// Time-determinism, 0-delay, additivity and continuity on the given states.
inline std::optional<std::string> check_tts_axioms(const ComposedSystem& sys, const std::vector<State>& states, unsigned seed) {
    std::mt19937 rng(seed);
    auto rnd = [&] { return Rational(std::uniform_int_distribution<int>(0, 50)(rng), std::uniform_int_distribution<int>(1, 8)(rng)); };
    for (const State& e : states) {
        if (!(elapse(sys, e, Rational(0)) == e)) {
            return "0-delay changes the state";
        }
        Rational d1 = rnd(), d2 = rnd();
        if (can_elapse(e, d1) && !(elapse(sys, e, d1) == elapse(sys, e, d1))) {
            return "time-determinism";
        }
        if (can_elapse(e, d1 + d2)) {
            if (!can_elapse(e, d1) || !can_elapse(elapse(sys, e, d1), d2)) {
                return "continuity: intermediate delay refused";
            }
            if (!(elapse(sys, elapse(sys, e, d1), d2) == elapse(sys, e, d1 + d2))) {
                return "additivity";
            }
        } else if (can_elapse(e, d1) && can_elapse(elapse(sys, e, d1), d2)) {
            return "additivity: split delay allowed but not the whole";
        }
    }
    return std::nullopt;
}

/// Random canonical matrices; canonicalization must be idempotent and
/// incremental constraints must agree with full closure.
inline std::optional<std::string> check_dbm_idempotence(std::size_t count, unsigned seed) {
    std::mt19937 rng(seed);
    for (std::size_t n = 0; n < count; ++n) {
        std::size_t dim = std::uniform_int_distribution<std::size_t>(2, 5)(rng);
        Dbm d = Dbm::nonnegative(dim);
        Dbm full = d;
        for (int k = 0; k < 6; ++k) {
            std::size_t i = std::uniform_int_distribution<std::size_t>(0, dim - 1)(rng);
            std::size_t j = std::uniform_int_distribution<std::size_t>(0, dim - 1)(rng);
            if (i == j) {
                continue;
            }
            Rational c(std::uniform_int_distribution<int>(-10, 20)(rng), std::uniform_int_distribution<int>(1, 3)(rng));
            Bound b = std::uniform_int_distribution<int>(0, 1)(rng) ? Bound::lt(c) : Bound::le(c);
            d.constrain(i, j, b);
            if (b < full.at(i, j)) {
                full.at(i, j) = b;
            }
        }
        full.canonicalize();
        if (d.empty() != full.empty()) {
            return "incremental constraint disagrees on emptiness";
        }
        if (full.empty()) {
            continue;
        }
        if (!(d == full)) {
            return "incremental constraint disagrees with closure";
        }
        Dbm again = full;
        again.canonicalize();
        if (!(again == full)) {
            return "canonicalization is not idempotent";
        }
    }
    return std::nullopt;
}

/// Random realizable runs must follow graph edges into classes containing the reached states.
inline std::optional<std::string> check_sscg_soundness(const ComposedSystem& sys, const ClassGraph& g, std::size_t walks,
                                                        unsigned seed, const SemanticsOptions& opts = {}) {
    std::mt19937 rng(seed);
    for (std::size_t w = 0; w < walks; ++w) {
        State e = initial_state(sys);
        std::vector<std::size_t> here{g.initial};
        if (!class_contains(sys, g.classes[g.initial], e)) {
            return "initial state outside the initial class";
        }
        for (int step = 0; step < 12; ++step) {
            Rational d(std::uniform_int_distribution<int>(0, 50)(rng), 2);
            if (auto m = max_delay(e); m && d > *m) {
                d = *m;
            }
            if (!can_elapse(e, d)) {
                d = Rational(0);
            }
            State later = elapse(sys, e, d);
            std::vector<Move> moves = fireable(sys, later, opts);
            if (moves.empty()) {
                break;
            }
            Move m = moves[std::uniform_int_distribution<std::size_t>(0, moves.size() - 1)(rng)];
            State next = apply(sys, later, m, opts);
            std::vector<std::size_t> targets;
            for (std::size_t c : here) {
                for (std::size_t ei : g.out[c]) {
                    const ClassEdge& edge = g.edges[ei];
                    if (edge.move == m && class_contains(sys, g.classes[edge.to], next)) {
                        targets.push_back(edge.to);
                    }
                }
            }
            if (targets.empty()) {
                return "move " + move_name(sys, m) + " at step " + std::to_string(step) + " has no matching edge";
            }
            here = std::move(targets);
            e = next;
        }
    }
    return std::nullopt;
}

/// serialize(parse(x)) parses to the same net and is a fixed point.
inline std::optional<std::string> check_roundtrip(const std::string& file) {
    Annotations ann;
    Net a = parse_net(slurp(model_path(file)), "m", &ann);
    std::string once = serialize_net(a, ann);
    Annotations ann2;
    Net b = parse_net(once, "m", &ann2);
    if (!structurally_equal(a, b)) {
        return file + ": reparsed net differs";
    }
    if (serialize_net(b, ann2) != once) {
        return file + ": serialization is not a fixed point";
    }
    return std::nullopt;
}

struct Scenario {
    std::string name;
    std::string sut;
    std::string env;
    std::string goal;  // reach:... or cover:...
    Optimize optimize = Optimize::Fastest;
};

inline const std::vector<Scenario>& bundled_scenarios() {
    static const std::vector<Scenario> all = [] {
        std::vector<Scenario> s;
        const std::string ctl = "light_controller.net";
        for (const char* env : {"user_e1.net", "user_e1_react2.net", "user_e2_pause.net"}) {
            for (Optimize o : {Optimize::Fastest, Optimize::ShortestThenFastest}) {
                for (const char* goal : {"reach:place=BRIGHT", "cover:transitions", "cover:statements", "cover:places",
                                         "cover:markings", "cover:classes"}) {
                    s.push_back({std::string(env) + " " + goal + " " + optimize_name(o), ctl, env, goal, o});
                }
            }
        }
        for (const char* env : {"user_e3_tp2.net", "user_e3_tp2_react2.net"}) {
            s.push_back({std::string(env) + " reach:place=OBJECTIF", ctl, env, "reach:place=OBJECTIF", Optimize::Fastest});
        }
        return s;
    }();
    return all;
}

inline TestSuite generate_scenario(const Scenario& sc) {
    ComposedSystem sys = system(sc.sut, sc.env);
    ClassGraph g = build_sscg(sys);
    GenerateOptions opts;
    opts.optimize = sc.optimize;
    opts.goal_name = sc.goal;
    return generate(sys, g, cli::parse_goal(sys, g, sc.goal), opts);
}

/// Every generated case passes against the SUT it was generated from.
inline std::optional<std::string> check_self_consistency() {
    for (const Scenario& sc : bundled_scenarios()) {
        TestSuite suite = generate_scenario(sc);
        Net sut = model(sc.sut);
        for (const TestCase& c : suite.cases) {
            Verdict v = run_test(c, sut);
            if (v.outcome != Outcome::Pass) {
                return sc.name + ": " + verdict_line(c.id, v);
            }
        }
    }
    return std::nullopt;
}

}  // namespace tptest::fixtures
