// Copyright (c) tptest contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "tptest/error.hpp"
#include "tptest/net.hpp"
#include "tptest/semantics.hpp"
#include "tptest/testgen.hpp"
#include "tptest/time.hpp"

namespace tptest {

enum class Outcome { Pass, Fail, Inconclusive };

inline std::string outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Pass: return "PASS";
        case Outcome::Fail: return "FAIL";
        case Outcome::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

struct Verdict {
    Outcome outcome = Outcome::Inconclusive;
    Rational at{0};
    std::string reason;
    /// Executed moves of tester and SUT, up to the verdict.
    Schedule witness;
    /// 1-based index of the sequence step where the run diverged.
    std::optional<std::size_t> step;
};

/// `CASE <id> <PASS|FAIL|INCONCLUSIVE> at=<eta> reason=<...>`
inline std::string verdict_line(const std::string& id, const Verdict& v) {
    return "CASE " + id + " " + outcome_name(v.outcome) + " at=" + to_string(v.at) + " reason=" + v.reason;
}

struct RunOptions {
    std::size_t max_steps = 100000;
    Rational epsilon{1, 1000};
};

namespace detail {

/// Splits a tester transition name such as "unexpected3_dim" into kind and step.
inline std::pair<std::string, std::size_t> tester_step(const std::string& name) {
    std::size_t i = 0;
    while (i < name.size() && (name[i] < '0' || name[i] > '9')) {
        ++i;
    }
    std::size_t j = i;
    std::size_t step = 0;
    while (j < name.size() && name[j] >= '0' && name[j] <= '9') {
        step = step * 10 + static_cast<std::size_t>(name[j] - '0');
        ++j;
    }
    return {name.substr(0, i), step};
}

}  // namespace detail

/// Executes the tester against the SUT model until Pass or Fail is marked.
inline Verdict run_test(const TestCase& tc, const Net& sut, const RunOptions& ro = {}) {
    Verdict v;
    if (tc.sequence.empty()) {
        v.outcome = Outcome::Pass;
        v.reason = "nothing-to-observe";
        return v;
    }
    ComposedSystem sys;
    try {
        sys = compose(sut, tc.observer, ComposeOptions{true});
    } catch (const Error& e) {
        throw Error(Errc::AlphabetMismatch, e.what());
    }
    std::size_t pass = sys.sut_places + *tc.observer.place_index(tc.pass_place);
    std::size_t fail = sys.sut_places + *tc.observer.place_index(tc.fail_place);

    State e = initial_state(sys);
    Rational now(0);
    std::optional<std::size_t> last_tester;
    for (std::size_t n = 0; n < ro.max_steps; ++n) {
        bool passed = e.marking[pass] > 0;
        bool failed = e.marking[fail] > 0;
        if (failed || passed) {
            v.at = now;
            v.outcome = failed ? Outcome::Fail : Outcome::Pass;
            if (passed && !failed) {
                v.reason = "complete";
                return v;
            }
            auto [kind, step] = detail::tester_step(sys.transition(*last_tester).name);
            const ActionLabel& l = sys.transition(*last_tester).label;
            v.step = step;
            std::string what = l.observable() ? l.complement().to_string() : tc.sequence.steps[step - 1].action.complement().to_string();
            v.reason = kind + ":" + what + "@step" + std::to_string(step);
            return v;
        }
        std::vector<Move> moves = fireable(sys, e);
        if (!moves.empty()) {
            const Move& m = moves.front();
            e = apply(sys, e, m);
            v.witness.steps.push_back({now, m});
            for (std::size_t f : m.fired()) {
                if (!sys.is_sut(f)) {
                    last_tester = f;
                }
            }
            continue;
        }
        std::optional<Rational> next;
        for (const auto& [t, is] : e.intervals) {
            Rational d = is.lower;
            if (d == Rational(0)) {
                if (!is.lower_strict) {
                    continue;
                }
                d = ro.epsilon;
            }
            if (!next || d < *next) {
                next = d;
            }
        }
        bool strict = false;
        std::optional<Rational> bound = max_delay(e, &strict);
        if (!next) {
            v.at = now;
            v.reason = "deadlock";
            return v;
        }
        if (bound && !can_elapse(e, *next)) {
            v.at = now;
            v.reason = "timelock";
            return v;
        }
        e = elapse(sys, e, *next);
        now += *next;
    }
    v.at = now;
    v.reason = "step-limit";
    return v;
}

// ---------------------------------------------------------------------------
// Mutations

struct Mutation {
    enum class Kind { IntervalShift, PriorityFlip, LabelSwap, ArcDrop };

    Kind kind = Kind::IntervalShift;
    std::string a;  // transition (lower-priority one for PriorityFlip)
    std::string b;  // second transition, or the place for ArcDrop
    Rational delta_lower{0};
    Rational delta_upper{0};

    static Mutation shift(std::string t, Rational dl, Rational du) { return {Kind::IntervalShift, std::move(t), {}, dl, du}; }
    static Mutation flip(std::string lo, std::string hi) { return {Kind::PriorityFlip, std::move(lo), std::move(hi)}; }
    static Mutation swap(std::string t1, std::string t2) { return {Kind::LabelSwap, std::move(t1), std::move(t2)}; }
    static Mutation drop(std::string t, std::string p) { return {Kind::ArcDrop, std::move(t), std::move(p)}; }

    std::string to_string() const {
        auto signed_str = [](const Rational& r) { return (r < 0 ? "" : "+") + tptest::to_string(r); };
        switch (kind) {
            case Kind::IntervalShift: return "shift:" + a + ":" + signed_str(delta_lower) + ":" + signed_str(delta_upper);
            case Kind::PriorityFlip: return "flip:" + a + ":" + b;
            case Kind::LabelSwap: return "swap:" + a + ":" + b;
            case Kind::ArcDrop: return "drop:" + a + ":" + b;
        }
        return "?";
    }

    /// shift:t:dl:du, flip:lo:hi, swap:t1:t2 or drop:t:p.
    static Mutation parse(const std::string& text) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (true) {
            std::size_t c = text.find(':', start);
            parts.push_back(text.substr(start, c == std::string::npos ? std::string::npos : c - start));
            if (c == std::string::npos) {
                break;
            }
            start = c + 1;
        }
        auto num = [](std::string s) {
            if (!s.empty() && s.front() == '+') {
                s.erase(0, 1);
            }
            return parse_rational(s);
        };
        if (parts[0] == "shift" && parts.size() == 4) {
            return shift(parts[1], num(parts[2]), num(parts[3]));
        }
        if (parts.size() == 3) {
            if (parts[0] == "flip") {
                return flip(parts[1], parts[2]);
            }
            if (parts[0] == "swap") {
                return swap(parts[1], parts[2]);
            }
            if (parts[0] == "drop") {
                return drop(parts[1], parts[2]);
            }
        }
        throw Error(Errc::Syntax, "bad mutation '" + text + "'");
    }
};

inline Net mutate(const Net& net, const Mutation& m) {
    auto transition = [&](const std::string& n) {
        auto i = net.transition_index(n);
        if (!i) {
            throw Error(Errc::InvalidMutation, "unknown transition '" + n + "'");
        }
        return *i;
    };
    Net out = net;
    switch (m.kind) {
        case Mutation::Kind::IntervalShift: {
            Transition& t = out.transitions[transition(m.a)];
            TimeInterval is = t.static_interval();
            is.lower += m.delta_lower;
            if (is.upper) {
                *is.upper += m.delta_upper;
            }
            if (is.lower < 0 || !is.valid()) {
                throw Error(Errc::InvalidMutation, "shifted interval of '" + m.a + "' is invalid");
            }
            t.interval = is;
            break;
        }
        case Mutation::Kind::PriorityFlip: {
            std::pair<std::size_t, std::size_t> pr{transition(m.a), transition(m.b)};
            auto it = std::find(out.priorities.begin(), out.priorities.end(), pr);
            if (it == out.priorities.end()) {
                throw Error(Errc::InvalidMutation, "no priority " + m.a + " < " + m.b);
            }
            std::swap(it->first, it->second);
            break;
        }
        case Mutation::Kind::LabelSwap: {
            std::size_t x = transition(m.a);
            std::size_t y = transition(m.b);
            if (x == y) {
                throw Error(Errc::InvalidMutation, "label swap needs two transitions");
            }
            std::swap(out.transitions[x].label, out.transitions[y].label);
            break;
        }
        case Mutation::Kind::ArcDrop: {
            Transition& t = out.transitions[transition(m.a)];
            auto p = net.place_index(m.b);
            if (!p) {
                throw Error(Errc::InvalidMutation, "unknown place '" + m.b + "'");
            }
            auto on_place = [&](const Arc& a) { return a.place == *p; };
            std::size_t before = t.pre.size() + t.post.size();
            std::erase_if(t.pre, on_place);
            std::erase_if(t.post, on_place);
            if (t.pre.size() + t.post.size() == before) {
                throw Error(Errc::InvalidMutation, "no arc between '" + m.a + "' and '" + m.b + "'");
            }
            break;
        }
    }
    for (const Diagnostic& d : validate(out)) {
        if (d.severity == Diagnostic::Severity::Error) {
            throw Error(Errc::InvalidMutation, "mutant is not a valid net: " + d.subject + ": " + d.reason);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bounded timed-trace inclusion

struct TraceEvent {
    Rational eta{0};
    /// SUT-side label; nullopt for a delay the specification cannot match.
    std::optional<ActionLabel> action;
};

struct TiocoResult {
    bool consistent = true;
    std::vector<TraceEvent> counterexample;
    std::string reason;
    std::size_t explored = 0;
};

inline std::string format_trace(const std::vector<TraceEvent>& trace) {
    std::string out;
    for (const TraceEvent& ev : trace) {
        out += (out.empty() ? "" : " ") + to_string(ev.eta) + " " + (ev.action ? ev.action->to_string() : "delay");
    }
    return out;
}

struct TiocoLimits {
    std::size_t max_nodes = 200000;
};

/// Default grid: half of one over the lcm of every bound denominator.
inline Rational default_granularity(const Net& a, const Net& b) {
    std::vector<TimeInterval> all;
    for (const Net* n : {&a, &b}) {
        for (const Transition& t : n->transitions) {
            all.push_back(t.static_interval());
        }
    }
    return Rational(1, 2 * denominator_lcm(all));
}

/// Explores the implementation's observable timed traces on a time grid up to
/// `horizon` and checks each against the specification. Inputs are only
/// explored where the specification accepts them.
inline TiocoResult bounded_tioco_check(const Net& spec, const Net& impl, const Rational& horizon,
                                       std::optional<Rational> granularity = std::nullopt, const TiocoLimits& limits = {}) {
    ComposedSystem s = universal_system(spec);
    ComposedSystem i = universal_system(impl);
    Rational h = granularity.value_or(default_granularity(spec, impl));
    if (!(h > 0)) {
        throw Error(Errc::InvalidNet, "granularity must be positive");
    }
    SemanticsOptions open;
    open.open = true;
    using SpecSet = std::set<State>;

    auto closure = [&](SpecSet set) {
        std::vector<State> work(set.begin(), set.end());
        while (!work.empty()) {
            State e = work.back();
            work.pop_back();
            for (const Move& m : fireable(s, e, open)) {
                if (m.kind == Move::Kind::Internal) {
                    State n = apply(s, e, m, open);
                    if (set.insert(n).second) {
                        work.push_back(n);
                    }
                }
            }
        }
        return set;
    };
    auto after = [&](const SpecSet& set, const ActionLabel& l) {
        SpecSet out;
        for (const State& e : set) {
            for (const Move& m : fireable(s, e, open)) {
                if (m.kind == Move::Kind::Open && s.transition(m.t).label == l) {
                    out.insert(apply(s, e, m, open));
                }
            }
        }
        return closure(std::move(out));
    };

    struct Node {
        State impl;
        SpecSet spec;
        Rational now;
        std::vector<TraceEvent> trace;
    };
    std::vector<Node> nodes;
    std::set<std::pair<State, SpecSet>> visited;
    using Key = std::tuple<Rational, std::size_t>;
    std::priority_queue<Key, std::vector<Key>, std::greater<>> open_list;
    TiocoResult r;
    auto push = [&](Node n) {
        if (!visited.insert({n.impl, n.spec}).second) {
            return;
        }
        if (nodes.size() >= limits.max_nodes) {
            throw Error(Errc::LimitExceeded, "trace inclusion check exceeded " + std::to_string(limits.max_nodes) + " nodes");
        }
        open_list.emplace(n.now, nodes.size());
        nodes.push_back(std::move(n));
    };
    push({initial_state(i), closure({initial_state(s)}), Rational(0), {}});

    while (!open_list.empty()) {
        auto [now, id] = open_list.top();
        open_list.pop();
        Node cur = nodes[id];
        ++r.explored;
        for (const Move& m : fireable(i, cur.impl, open)) {
            State next = apply(i, cur.impl, m, open);
            if (m.kind == Move::Kind::Internal) {
                push({next, cur.spec, now, cur.trace});
                continue;
            }
            const ActionLabel& l = i.transition(m.t).label;
            SpecSet matched = after(cur.spec, l);
            std::vector<TraceEvent> trace = cur.trace;
            trace.push_back({now, l});
            if (matched.empty()) {
                if (l.kind == ActionKind::Input) {
                    continue;
                }
                r.consistent = false;
                r.counterexample = std::move(trace);
                r.reason = "output " + l.to_string() + " at " + to_string(now) + " is not allowed by the specification";
                return r;
            }
            push({next, std::move(matched), now, std::move(trace)});
        }
        if (now + h > horizon || !can_elapse(cur.impl, h)) {
            continue;
        }
        SpecSet delayed;
        for (const State& e : cur.spec) {
            if (can_elapse(e, h)) {
                delayed.insert(elapse(s, e, h));
            }
        }
        if (delayed.empty()) {
            r.consistent = false;
            r.counterexample = cur.trace;
            r.counterexample.push_back({now + h, std::nullopt});
            r.reason = "the specification cannot let time pass beyond " + to_string(now);
            return r;
        }
        push({elapse(i, cur.impl, h), closure(std::move(delayed)), now + h, cur.trace});
    }
    return r;
}

}  // namespace tptest
