// Copyright (c) tptest contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "tptest/error.hpp"
#include "tptest/net.hpp"
#include "tptest/time.hpp"

namespace tptest {

/// Concrete state: marking plus the current firing interval of every enabled transition.
struct State {
    Marking marking;
    std::map<std::size_t, TimeInterval> intervals;

    friend bool operator==(const State&, const State&) = default;
    friend bool operator<(const State& a, const State& b) {
        if (!(a.marking == b.marking)) {
            return a.marking < b.marking;
        }
        if (a.intervals.size() != b.intervals.size()) {
            return a.intervals.size() < b.intervals.size();
        }
        for (auto ia = a.intervals.begin(), ib = b.intervals.begin(); ia != a.intervals.end(); ++ia, ++ib) {
            if (ia->first != ib->first) {
                return ia->first < ib->first;
            }
            const TimeInterval& x = ia->second;
            const TimeInterval& y = ib->second;
            if (x == y) {
                continue;
            }
            if (x.lower != y.lower) {
                return x.lower < y.lower;
            }
            if (x.lower_strict != y.lower_strict) {
                return x.lower_strict < y.lower_strict;
            }
            if (x.upper.has_value() != y.upper.has_value()) {
                return x.upper.has_value();
            }
            if (x.upper && *x.upper != *y.upper) {
                return *x.upper < *y.upper;
            }
            return x.upper_strict < y.upper_strict;
        }
        return false;
    }
};

/// A move of the composed system. `Open` fires an observable SUT transition
/// against an implicit environment that always offers the complement.
struct Move {
    enum class Kind { Internal, Sync, Open, Delay };

    Kind kind = Kind::Internal;
    std::size_t t = 0;
    std::size_t partner = 0;
    Rational delay{0};

    static Move internal(std::size_t t) { return {Kind::Internal, t, 0, Rational(0)}; }
    static Move sync(std::size_t t, std::size_t u) { return {Kind::Sync, t, u, Rational(0)}; }
    static Move open(std::size_t t) { return {Kind::Open, t, 0, Rational(0)}; }
    static Move elapse(Rational d) { return {Kind::Delay, 0, 0, d}; }

    bool discrete() const { return kind != Kind::Delay; }

    std::vector<std::size_t> fired() const {
        switch (kind) {
            case Kind::Sync: return {t, partner};
            case Kind::Delay: return {};
            default: return {t};
        }
    }

    friend bool operator==(const Move&, const Move&) = default;
};

using Support = std::vector<Move>;

struct ScheduleStep {
    Rational eta;
    Move move;

    friend bool operator==(const ScheduleStep&, const ScheduleStep&) = default;
};

/// Timed word: discrete moves at non-decreasing absolute instants.
struct Schedule {
    std::vector<ScheduleStep> steps;

    Rational accumulated() const { return steps.empty() ? Rational(0) : steps.back().eta; }

    Support support() const {
        Support s;
        for (const ScheduleStep& st : steps) {
            s.push_back(st.move);
        }
        return s;
    }
};

struct SemanticsOptions {
    /// Literal priority reading: any enabled higher-priority k with 0 in I(k)
    /// preempts, even when k could not actually fire for lack of a partner.
    bool naive_priority = false;
    /// Universal environment: observable SUT transitions fire alone.
    bool open = false;
};

// ---------------------------------------------------------------------------
// Naming

inline std::string move_name(const ComposedSystem& sys, const Move& m) {
    switch (m.kind) {
        case Move::Kind::Sync: return sys.transition(m.t).name + "," + sys.transition(m.partner).name;
        case Move::Kind::Delay: return to_string(m.delay);
        default: return sys.transition(m.t).name;
    }
}

inline std::string move_label(const ComposedSystem& sys, const Move& m) {
    switch (m.kind) {
        case Move::Kind::Sync:
            return "(" + sys.transition(m.t).label.to_string() + "," + sys.transition(m.partner).label.to_string() + ")";
        case Move::Kind::Delay: return to_string(m.delay);
        default: return sys.transition(m.t).label.to_string();
    }
}

/// Parses `t`, `t,u` or `(t,u)` where t is a SUT transition and u its ENV partner.
inline Move parse_move(const ComposedSystem& sys, std::string text) {
    if (!text.empty() && text.front() == '(' && text.back() == ')') {
        text = text.substr(1, text.size() - 2);
    }
    auto lookup = [&](const std::string& n) {
        auto i = sys.net.transition_index(n);
        if (!i) {
            throw Error(Errc::UnknownTransition, "unknown transition '" + n + "'");
        }
        return *i;
    };
    if (auto comma = text.find(','); comma != std::string::npos) {
        std::size_t a = lookup(text.substr(0, comma));
        std::size_t b = lookup(text.substr(comma + 1));
        if (!sys.is_sut(a)) {
            std::swap(a, b);
        }
        return Move::sync(a, b);
    }
    std::size_t t = lookup(text);
    return sys.transition(t).label.observable() ? Move::open(t) : Move::internal(t);
}

// ---------------------------------------------------------------------------
// Enabling

inline bool is_enabled(const Net& net, const Marking& m, std::size_t t) { return covers(m, net.transitions[t].pre); }

inline std::vector<std::size_t> enabled(const Net& net, const Marking& m) {
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < net.transitions.size(); ++t) {
        if (is_enabled(net, m, t)) {
            out.push_back(t);
        }
    }
    return out;
}

/// Whether `l` is newly enabled by firing `t` alone from `m`.
inline bool ne_tau(const Net& net, std::size_t l, const Marking& m, std::size_t t) {
    if (!is_enabled(net, m, t)) {
        throw Error(Errc::NotEnabled, "transition '" + net.transitions[t].name + "' is not enabled");
    }
    Marking intermediate = m;
    subtract_arcs(intermediate, net.transitions[t].pre);
    Marking after = intermediate;
    add_arcs(after, net.transitions[t].post);
    return is_enabled(net, after, l) && (!is_enabled(net, intermediate, l) || l == t);
}

/// Whether `k` is newly enabled by firing `t` and `u` simultaneously from `m`.
inline bool ne_sync(const ComposedSystem& sys, std::size_t k, const Marking& m, std::size_t t, std::size_t u) {
    const Net& net = sys.net;
    if (!is_enabled(net, m, t) || !is_enabled(net, m, u)) {
        throw Error(Errc::NotEnabled, "synchronizing pair is not enabled");
    }
    if (!net.transitions[t].label.complements(net.transitions[u].label)) {
        throw Error(Errc::NotComplementary,
                    net.transitions[t].name + " and " + net.transitions[u].name + " are not complementary");
    }
    Marking intermediate = m;
    subtract_arcs(intermediate, net.transitions[t].pre);
    subtract_arcs(intermediate, net.transitions[u].pre);
    Marking after = intermediate;
    add_arcs(after, net.transitions[t].post);
    add_arcs(after, net.transitions[u].post);
    return is_enabled(net, after, k) && (!is_enabled(net, intermediate, k) || k == t || k == u);
}

inline State initial_state(const ComposedSystem& sys) {
    State e;
    e.marking = sys.initial_marking();
    for (std::size_t t : enabled(sys.net, e.marking)) {
        e.intervals[t] = sys.transition(t).static_interval();
    }
    return e;
}

// ---------------------------------------------------------------------------
// Firability

inline bool immediately_fireable(const State& e, std::size_t t) {
    auto it = e.intervals.find(t);
    return it != e.intervals.end() && it->second.contains_zero();
}

/// Whether `k` could fire at the current instant if nothing preempted it.
inline bool dischargeable(const ComposedSystem& sys, const State& e, std::size_t k, const SemanticsOptions& opts) {
    if (!immediately_fireable(e, k)) {
        return false;
    }
    if (opts.naive_priority || opts.open || !sys.transition(k).label.observable()) {
        return true;
    }
    return std::any_of(sys.partners[k].begin(), sys.partners[k].end(),
                       [&](std::size_t p) { return immediately_fireable(e, p); });
}

/// Whether some higher-priority transition on the same side as `t` can fire now.
inline bool preempted(const ComposedSystem& sys, const State& e, std::size_t t, const SemanticsOptions& opts) {
    for (std::size_t k : sys.higher[t]) {
        if (sys.side[k] == sys.side[t] && dischargeable(sys, e, k, opts)) {
            return true;
        }
    }
    return false;
}

/// Discrete moves fireable from `e` at the current instant, in transition order.
inline std::vector<Move> fireable(const ComposedSystem& sys, const State& e, const SemanticsOptions& opts = {}) {
    std::vector<Move> out;
    for (const auto& [t, interval] : e.intervals) {
        if (!interval.contains_zero() || preempted(sys, e, t, opts)) {
            continue;
        }
        const Transition& tr = sys.transition(t);
        if (opts.open) {
            if (sys.is_sut(t)) {
                out.push_back(tr.label.observable() ? Move::open(t) : Move::internal(t));
            }
            continue;
        }
        if (!tr.label.observable()) {
            out.push_back(Move::internal(t));
            continue;
        }
        if (!sys.is_sut(t)) {
            continue;
        }
        for (std::size_t u : sys.partners[t]) {
            if (immediately_fireable(e, u) && !preempted(sys, e, u, opts)) {
                out.push_back(Move::sync(t, u));
            }
        }
    }
    return out;
}

inline bool is_fireable(const ComposedSystem& sys, const State& e, const Move& m, const SemanticsOptions& opts = {}) {
    auto moves = fireable(sys, e, opts);
    return std::find(moves.begin(), moves.end(), m) != moves.end();
}

// ---------------------------------------------------------------------------
// Time elapse

inline bool can_elapse(const State& e, const Rational& d) {
    if (d < 0) {
        return false;
    }
    return std::all_of(e.intervals.begin(), e.intervals.end(), [&](const auto& kv) { return kv.second.allows_delay(d); });
}

/// Longest admissible delay; nullopt when unbounded. `strict` reports a right-open bound.
inline std::optional<Rational> max_delay(const State& e, bool* strict = nullptr) {
    std::optional<Rational> best;
    bool best_strict = false;
    for (const auto& [t, i] : e.intervals) {
        if (!i.upper) {
            continue;
        }
        if (!best || *i.upper < *best || (*i.upper == *best && i.upper_strict)) {
            best = *i.upper;
            best_strict = i.upper_strict;
        }
    }
    if (strict) {
        *strict = best_strict;
    }
    return best;
}

inline State elapse(const ComposedSystem& sys, const State& e, const Rational& d) {
    if (d < 0) {
        throw Error(Errc::DeadlineExceeded, "negative delay " + to_string(d));
    }
    State out = e;
    for (auto& [t, i] : out.intervals) {
        if (!i.allows_delay(d)) {
            throw Error(Errc::DeadlineExceeded, "delay " + to_string(d) + " overruns the deadline of '" +
                                                    sys.transition(t).name + "' " + i.to_string());
        }
        i = i.shifted(d);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Discrete firing

namespace detail {

inline State fire_transitions(const ComposedSystem& sys, const State& e, const std::vector<std::size_t>& fired) {
    const Net& net = sys.net;
    State out;
    Marking intermediate = e.marking;
    for (std::size_t f : fired) {
        subtract_arcs(intermediate, net.transitions[f].pre);
    }
    out.marking = intermediate;
    for (std::size_t f : fired) {
        add_arcs(out.marking, net.transitions[f].post);
    }
    for (std::size_t k : enabled(net, out.marking)) {
        bool fresh = !is_enabled(net, intermediate, k) || std::find(fired.begin(), fired.end(), k) != fired.end();
        if (fresh) {
            out.intervals[k] = net.transitions[k].static_interval();
        } else {
            out.intervals[k] = e.intervals.at(k);
        }
    }
    return out;
}

}  // namespace detail

inline State fire_internal(const ComposedSystem& sys, const State& e, std::size_t t, const SemanticsOptions& opts = {}) {
    if (!is_fireable(sys, e, Move::internal(t), opts)) {
        throw Error(Errc::NotFireable, "internal transition '" + sys.transition(t).name + "' is not fireable");
    }
    return detail::fire_transitions(sys, e, {t});
}

inline State fire_sync(const ComposedSystem& sys, const State& e, std::size_t t, std::size_t u,
                       const SemanticsOptions& opts = {}) {
    if (!is_fireable(sys, e, Move::sync(t, u), opts)) {
        throw Error(Errc::NotFireable,
                    "pair (" + sys.transition(t).name + "," + sys.transition(u).name + ") is not fireable");
    }
    return detail::fire_transitions(sys, e, {t, u});
}

inline State fire_open(const ComposedSystem& sys, const State& e, std::size_t t, const SemanticsOptions& opts) {
    if (!is_fireable(sys, e, Move::open(t), opts)) {
        throw Error(Errc::NotFireable, "transition '" + sys.transition(t).name + "' is not fireable");
    }
    return detail::fire_transitions(sys, e, {t});
}

/// Applies any move, discrete or delay.
inline State apply(const ComposedSystem& sys, const State& e, const Move& m, const SemanticsOptions& opts = {}) {
    switch (m.kind) {
        case Move::Kind::Internal: return fire_internal(sys, e, m.t, opts);
        case Move::Kind::Sync: return fire_sync(sys, e, m.t, m.partner, opts);
        case Move::Kind::Open: return fire_open(sys, e, m.t, opts);
        case Move::Kind::Delay: return elapse(sys, e, m.delay);
    }
    return e;
}

// ---------------------------------------------------------------------------
// Runs

struct RunResult {
    bool ok = true;
    State state;
    /// Index of the first infeasible schedule step when !ok.
    std::size_t failed_index = 0;
    std::string reason;
    /// State reached after each successful step.
    std::vector<State> trace;
};

/// Replays a schedule from the initial state, inserting the delays between firing instants.
inline RunResult run(const ComposedSystem& sys, const Schedule& schedule, const SemanticsOptions& opts = {}) {
    RunResult r;
    r.state = initial_state(sys);
    Rational now = 0;
    for (std::size_t i = 0; i < schedule.steps.size(); ++i) {
        const ScheduleStep& step = schedule.steps[i];
        auto fail = [&](std::string why) {
            r.ok = false;
            r.failed_index = i;
            r.reason = std::move(why);
            return r;
        };
        if (step.eta < now) {
            return fail("firing instant " + to_string(step.eta) + " precedes " + to_string(now));
        }
        Rational d = step.eta - now;
        if (!can_elapse(r.state, d)) {
            return fail("delay " + to_string(d) + " overruns an urgent deadline");
        }
        r.state = elapse(sys, r.state, d);
        now = step.eta;
        if (step.move.kind == Move::Kind::Delay) {
            r.trace.push_back(r.state);
            continue;
        }
        if (!is_fireable(sys, r.state, step.move, opts)) {
            return fail(move_name(sys, step.move) + " is not fireable at " + to_string(now));
        }
        r.state = apply(sys, r.state, step.move, opts);
        r.trace.push_back(r.state);
    }
    return r;
}

}  // namespace tptest
