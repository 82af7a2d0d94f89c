// Copyright (c) tptest contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tptest/dbm.hpp"
#include "tptest/error.hpp"
#include "tptest/net.hpp"
#include "tptest/semantics.hpp"

namespace tptest {

/// eta_i - eta_j (bound). Index 0 is the origin.
struct DiffConstraint {
    std::size_t i = 0;
    std::size_t j = 0;
    Bound bound;
};

/// Realizable firing instants of a support: a conjunction of difference
/// constraints plus disjunctions contributed by priority preemption.
struct ScheduleSystem {
    std::size_t steps = 0;
    std::vector<DiffConstraint> constraints;
    std::vector<std::vector<std::vector<DiffConstraint>>> disjunctions;
    /// Canonical matrices over (origin, eta_1..eta_n), one per consistent
    /// choice of disjuncts, in choice order.
    std::vector<Dbm> branches;

    bool consistent() const { return !branches.empty(); }
};

namespace detail {

inline DiffConstraint at_least(std::size_t i, std::size_t j, const Rational& c, bool strict) {
    // eta_i - eta_j >= c  is  eta_j - eta_i <= -c.
    return {j, i, strict ? Bound::lt(-c) : Bound::le(-c)};
}

inline DiffConstraint at_most(std::size_t i, std::size_t j, const Rational& c, bool strict) {
    return {i, j, strict ? Bound::lt(c) : Bound::le(c)};
}

inline bool add(Dbm& d, const DiffConstraint& c) { return d.constrain(c.i, c.j, c.bound); }

}  // namespace detail

/// Builds the constraint system of a support replayed from the initial state.
/// Returns nullopt when the support is structurally impossible (a fired
/// transition is not enabled, or a pair is not complementary).
inline std::optional<ScheduleSystem> feasibility_system(const ComposedSystem& sys, const Support& support,
                                                        const SemanticsOptions& opts = {}) {
    const Net& net = sys.net;
    ScheduleSystem s;
    s.steps = support.size();
    Marking m = sys.initial_marking();
    std::map<std::size_t, std::size_t> since;  // enabled transition -> step that enabled it
    for (std::size_t t : enabled(net, m)) {
        since[t] = 0;
    }
    for (std::size_t i = 1; i <= support.size(); ++i) {
        const Move& mv = support[i - 1];
        for (std::size_t t : mv.fired()) {
            if (t >= net.transitions.size()) {
                throw Error(Errc::UnknownTransition, "transition index out of range");
            }
        }
        if (mv.kind == Move::Kind::Delay) {
            return std::nullopt;
        }
        if (mv.kind == Move::Kind::Sync && !sys.transition(mv.t).label.complements(sys.transition(mv.partner).label)) {
            return std::nullopt;
        }
        if (mv.kind == Move::Kind::Internal && sys.transition(mv.t).label.observable()) {
            return std::nullopt;
        }
        if ((mv.kind == Move::Kind::Open) != (opts.open && sys.transition(mv.t).label.observable())) {
            return std::nullopt;
        }
        std::vector<std::size_t> fired = mv.fired();
        for (std::size_t f : fired) {
            if (since.count(f) == 0) {
                return std::nullopt;
            }
        }
        s.constraints.push_back(detail::at_least(i, i - 1, Rational(0), false));
        for (const auto& [k, en] : since) {
            const TimeInterval& is = sys.transition(k).static_interval();
            if (is.upper) {
                s.constraints.push_back(detail::at_most(i, en, *is.upper, is.upper_strict));
            }
        }
        for (std::size_t f : fired) {
            const TimeInterval& is = sys.transition(f).static_interval();
            s.constraints.push_back(detail::at_least(i, since[f], is.lower, is.lower_strict));
        }
        std::vector<std::size_t> seen;
        for (std::size_t f : fired) {
            for (std::size_t k : sys.higher[f]) {
                if (sys.side[k] != sys.side[f] || since.count(k) == 0 ||
                    std::find(seen.begin(), seen.end(), k) != seen.end()) {
                    continue;
                }
                seen.push_back(k);
                const TimeInterval& isk = sys.transition(k).static_interval();
                std::vector<std::vector<DiffConstraint>> alt;
                alt.push_back({detail::at_most(i, since[k], isk.lower, !isk.lower_strict)});
                if (sys.transition(k).label.observable() && !opts.naive_priority && !opts.open) {
                    std::vector<DiffConstraint> b{detail::at_least(i, since[k], isk.lower, isk.lower_strict)};
                    for (std::size_t p : sys.partners[k]) {
                        if (since.count(p) != 0) {
                            const TimeInterval& isp = sys.transition(p).static_interval();
                            b.push_back(detail::at_most(i, since[p], isp.lower, !isp.lower_strict));
                        }
                    }
                    if (b.size() == 1) {
                        continue;  // no partner: k cannot fire
                    }
                    alt.push_back(std::move(b));
                }
                s.disjunctions.push_back(std::move(alt));
            }
        }
        Marking intermediate = m;
        for (std::size_t f : fired) {
            subtract_arcs(intermediate, net.transitions[f].pre);
        }
        Marking next = intermediate;
        for (std::size_t f : fired) {
            add_arcs(next, net.transitions[f].post);
        }
        std::map<std::size_t, std::size_t> next_since;
        for (std::size_t k : enabled(net, next)) {
            bool fresh = !is_enabled(net, intermediate, k) || std::find(fired.begin(), fired.end(), k) != fired.end();
            next_since[k] = fresh ? i : since.at(k);
        }
        m = next;
        since = std::move(next_since);
    }

    Dbm base = Dbm::nonnegative(s.steps + 1);
    for (const DiffConstraint& c : s.constraints) {
        if (!detail::add(base, c)) {
            return s;
        }
    }
    std::vector<Dbm> branches{base};
    for (const auto& alt : s.disjunctions) {
        std::vector<Dbm> next;
        for (const Dbm& b : branches) {
            for (const auto& conj : alt) {
                Dbm d = b;
                bool ok = true;
                for (const DiffConstraint& c : conj) {
                    ok = ok && detail::add(d, c);
                }
                if (ok) {
                    next.push_back(std::move(d));
                }
            }
        }
        branches = std::move(next);
        if (branches.empty()) {
            break;
        }
    }
    s.branches = std::move(branches);
    return s;
}

struct FastestSchedule {
    Schedule schedule;
    /// Greatest lower bound of the final instant.
    Rational infimum{0};
    /// False when the infimum lies on a strict bound and the schedule is a witness above it.
    bool attained = true;
};

/// Earliest-firing schedule minimizing the last instant. Throws Infeasible.
inline FastestSchedule fastest_schedule(const ComposedSystem& sys, const Support& support, const SemanticsOptions& opts = {},
                                        const Rational& epsilon = Rational(1, 1000)) {
    auto system = feasibility_system(sys, support, opts);
    if (!system || !system->consistent()) {
        throw Error(Errc::Infeasible, "support is not realizable");
    }
    std::size_t n = support.size();
    const Dbm* best = nullptr;
    auto key = [n](const Dbm& d) {
        std::vector<std::pair<Rational, bool>> k;
        k.push_back(d.lower(n));
        for (std::size_t i = 1; i <= n; ++i) {
            k.push_back(d.lower(i));
        }
        return k;
    };
    for (const Dbm& d : system->branches) {
        if (!best || key(d) < key(*best)) {
            best = &d;
        }
    }
    FastestSchedule r;
    auto [inf, strict] = best->lower(n);
    r.infimum = n == 0 ? Rational(0) : inf;
    r.attained = !strict;
    std::vector<Rational> point = best->sample(epsilon);
    for (std::size_t i = 1; i <= n; ++i) {
        r.schedule.steps.push_back({point[i], support[i - 1]});
    }
    return r;
}

inline bool verify_schedule(const ComposedSystem& sys, const Schedule& s, const SemanticsOptions& opts = {}) {
    return run(sys, s, opts).ok;
}

inline std::string format_constraint(const DiffConstraint& c) {
    auto name = [](std::size_t i) { return i == 0 ? std::string("0") : "eta" + std::to_string(i); };
    const char* op = c.bound.strict ? " < " : " <= ";
    if (c.j == 0) {
        return name(c.i) + op + to_string(c.bound.value);
    }
    if (c.i == 0) {
        return name(c.j) + (c.bound.strict ? " > " : " >= ") + to_string(-c.bound.value);
    }
    if (c.bound.value < 0) {
        return name(c.j) + " - " + name(c.i) + (c.bound.strict ? " > " : " >= ") + to_string(-c.bound.value);
    }
    return name(c.i) + " - " + name(c.j) + op + to_string(c.bound.value);
}

/// Readable listing of the whole system: one constraint per line, disjunctions as `a or b`.
inline std::string format_system(const ComposedSystem& sys, const Support& support, const ScheduleSystem& s) {
    std::ostringstream os;
    for (std::size_t i = 0; i < support.size(); ++i) {
        os << "# eta" << (i + 1) << " = " << move_name(sys, support[i]) << "\n";
    }
    for (const DiffConstraint& c : s.constraints) {
        os << format_constraint(c) << "\n";
    }
    for (const auto& alt : s.disjunctions) {
        std::string line;
        for (const auto& conj : alt) {
            std::string part;
            for (const DiffConstraint& c : conj) {
                part += (part.empty() ? "" : " and ") + format_constraint(c);
            }
            line += (line.empty() ? "" : " or ") + (conj.size() > 1 ? "(" + part + ")" : part);
        }
        os << line << "\n";
    }
    os << (s.consistent() ? "# consistent" : "# inconsistent") << "\n";
    return os.str();
}

}  // namespace tptest
