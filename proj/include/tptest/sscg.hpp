// Copyright (c) tptest contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "tptest/dbm.hpp"
#include "tptest/error.hpp"
#include "tptest/net.hpp"
#include "tptest/semantics.hpp"

namespace tptest {

/// Marking plus a zone over the enabling clocks of the enabled transitions,
/// taken at the instant the marking was entered. Variable i+1 of the zone is
/// the clock of clocks[i].
struct StateClass {
    Marking marking;
    std::vector<std::size_t> clocks;
    Dbm zone;

    std::size_t var(std::size_t t) const {
        auto it = std::find(clocks.begin(), clocks.end(), t);
        return it == clocks.end() ? 0 : static_cast<std::size_t>(it - clocks.begin()) + 1;
    }
    bool has_clock(std::size_t t) const { return std::find(clocks.begin(), clocks.end(), t) != clocks.end(); }

    friend bool operator==(const StateClass& a, const StateClass& b) {
        return a.marking == b.marking && a.clocks == b.clocks && a.zone == b.zone;
    }
};

struct StateClassHash {
    std::size_t operator()(const StateClass& c) const { return MarkingHash{}(c.marking) * 1099511628211ULL ^ c.zone.hash(); }
};

struct ClassEdge {
    std::size_t from = 0;
    Move move;
    std::size_t to = 0;
};

struct ClassGraph {
    std::vector<StateClass> classes;
    std::size_t initial = 0;
    std::vector<ClassEdge> edges;
    /// Edge indices leaving each class, in exploration order.
    std::vector<std::vector<std::size_t>> out;
    /// BFS depth of each class.
    std::vector<std::size_t> depth;
    bool truncated = false;

    std::size_t size() const { return classes.size(); }
};

struct SscgLimits {
    std::size_t max_classes = 100000;
    std::optional<std::size_t> max_depth;
};

// ---------------------------------------------------------------------------
// Clock constraints derived from static intervals

namespace detail {

/// x_t at or above the lower bound of Is(t).
inline Bound lower_reached(const TimeInterval& is) { return is.lower_strict ? Bound::lt(-is.lower) : Bound::le(-is.lower); }

/// x_t strictly below the lower bound of Is(t) (complement of lower_reached).
inline Bound lower_not_reached(const TimeInterval& is) { return is.lower_strict ? Bound::le(is.lower) : Bound::lt(is.lower); }

/// x_t within the upper bound of Is(t).
inline Bound upper_kept(const TimeInterval& is) {
    if (!is.upper) {
        return Bound::inf();
    }
    return is.upper_strict ? Bound::lt(*is.upper) : Bound::le(*is.upper);
}

inline std::vector<Dbm> split(std::vector<Dbm> pieces, const std::vector<std::vector<std::pair<std::pair<std::size_t, std::size_t>, Bound>>>& alternatives) {
    std::vector<Dbm> out;
    for (const Dbm& p : pieces) {
        for (const auto& conj : alternatives) {
            Dbm q = p;
            bool ok = true;
            for (const auto& [ij, b] : conj) {
                if (!q.constrain(ij.first, ij.second, b)) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                out.push_back(std::move(q));
            }
        }
    }
    return out;
}

}  // namespace detail

/// Zone of the instants at which the class can still be, after any admissible delay.
inline Dbm delay_zone(const ComposedSystem& sys, const StateClass& c) {
    Dbm z = c.zone;
    z.up();
    for (std::size_t i = 0; i < c.clocks.size(); ++i) {
        Bound b = detail::upper_kept(sys.transition(c.clocks[i]).static_interval());
        if (!b.infinite) {
            z.constrain(i + 1, 0, b);
        }
    }
    return z;
}

/// Pieces of the delay zone where transition `k` is dischargeable (can fire if nothing preempts it).
inline std::vector<Dbm> dischargeable_region(const ComposedSystem& sys, const StateClass& c, const Dbm& z, std::size_t k,
                                             const SemanticsOptions& opts) {
    std::size_t vk = c.var(k);
    if (vk == 0) {
        return {};
    }
    Dbm base = z;
    if (!base.constrain(0, vk, detail::lower_reached(sys.transition(k).static_interval()))) {
        return {};
    }
    if (opts.naive_priority || opts.open || !sys.transition(k).label.observable()) {
        return {base};
    }
    std::vector<Dbm> out;
    for (std::size_t p : sys.partners[k]) {
        std::size_t vp = c.var(p);
        if (vp == 0) {
            continue;
        }
        Dbm q = base;
        if (q.constrain(0, vp, detail::lower_reached(sys.transition(p).static_interval()))) {
            out.push_back(std::move(q));
        }
    }
    return out;
}

/// Pieces of `z` where none of the higher-priority same-side transitions of the fired set can discharge.
inline std::vector<Dbm> apply_preemption(const ComposedSystem& sys, const StateClass& c, Dbm z,
                                         const std::vector<std::size_t>& fired, const SemanticsOptions& opts) {
    using Conj = std::vector<std::pair<std::pair<std::size_t, std::size_t>, Bound>>;
    std::vector<Dbm> pieces{std::move(z)};
    std::set<std::size_t> seen;
    for (std::size_t f : fired) {
        for (std::size_t k : sys.higher[f]) {
            if (sys.side[k] != sys.side[f] || !c.has_clock(k) || !seen.insert(k).second) {
                continue;
            }
            const TimeInterval& isk = sys.transition(k).static_interval();
            std::size_t vk = c.var(k);
            std::vector<Conj> alternatives;
            alternatives.push_back({{{vk, 0}, detail::lower_not_reached(isk)}});
            bool partnered = sys.transition(k).label.observable() && !opts.naive_priority && !opts.open;
            if (partnered) {
                std::vector<std::size_t> live;
                for (std::size_t p : sys.partners[k]) {
                    if (c.has_clock(p)) {
                        live.push_back(p);
                    }
                }
                if (live.empty()) {
                    continue;  // k has no partner and cannot fire
                }
                Conj b{{{0, vk}, detail::lower_reached(isk)}};
                for (std::size_t p : live) {
                    b.push_back({{c.var(p), 0}, detail::lower_not_reached(sys.transition(p).static_interval())});
                }
                alternatives.push_back(std::move(b));
            }
            pieces = detail::split(std::move(pieces), alternatives);
            if (pieces.empty()) {
                return pieces;
            }
        }
    }
    return pieces;
}

/// Firing region of a move within the delay zone: guards plus preemption, possibly several pieces.
inline std::vector<Dbm> firing_region(const ComposedSystem& sys, const StateClass& c, const Dbm& delayed, const Move& m,
                                      const SemanticsOptions& opts) {
    Dbm z = delayed;
    for (std::size_t f : m.fired()) {
        std::size_t v = c.var(f);
        if (v == 0 || !z.constrain(0, v, detail::lower_reached(sys.transition(f).static_interval()))) {
            return {};
        }
    }
    return apply_preemption(sys, c, std::move(z), m.fired(), opts);
}

/// Extrapolation constants: M(t) = max(lower, finite upper); clocks of [0,w[
/// transitions are irrelevant. `extra` trailing variables are left untouched.
inline void normalize(const ComposedSystem& sys, StateClass& c, std::size_t extra = 0) {
    std::size_t n = c.clocks.size() + 1 + extra;
    std::vector<std::optional<Rational>> mc(n);
    std::vector<bool> irrelevant(n, false);
    mc[0] = Rational(0);
    for (std::size_t i = 0; i < c.clocks.size(); ++i) {
        const TimeInterval& is = sys.transition(c.clocks[i]).static_interval();
        if (is.lower == Rational(0) && !is.lower_strict && !is.upper) {
            irrelevant[i + 1] = true;
        }
        Rational m = is.lower;
        if (is.upper && *is.upper > m) {
            m = *is.upper;
        }
        mc[i + 1] = m;
    }
    c.zone.extrapolate(mc, irrelevant);
}

inline StateClass initial_class(const ComposedSystem& sys) {
    StateClass c;
    c.marking = sys.initial_marking();
    c.clocks = enabled(sys.net, c.marking);
    c.zone = Dbm(c.clocks.size() + 1);
    normalize(sys, c);
    return c;
}

/// Candidate discrete moves at a marking, in transition declaration order.
inline std::vector<Move> candidate_moves(const ComposedSystem& sys, const StateClass& c, const SemanticsOptions& opts) {
    std::vector<Move> out;
    for (std::size_t t : c.clocks) {
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
            if (c.has_clock(u)) {
                out.push_back(Move::sync(t, u));
            }
        }
    }
    return out;
}

/// Builds the successor class from one firing-region piece; `extra` trailing
/// zone variables are carried over unchanged.
inline StateClass fire_class(const ComposedSystem& sys, const StateClass& c, const Dbm& piece, const Move& m,
                             std::size_t extra = 0) {
    const Net& net = sys.net;
    std::vector<std::size_t> fired = m.fired();
    Marking intermediate = c.marking;
    for (std::size_t f : fired) {
        subtract_arcs(intermediate, net.transitions[f].pre);
    }
    StateClass s;
    s.marking = intermediate;
    for (std::size_t f : fired) {
        add_arcs(s.marking, net.transitions[f].post);
    }
    s.clocks = enabled(net, s.marking);
    std::vector<std::optional<std::size_t>> mapping;
    for (std::size_t k : s.clocks) {
        bool fresh = !is_enabled(net, intermediate, k) || std::find(fired.begin(), fired.end(), k) != fired.end();
        if (fresh) {
            mapping.push_back(std::nullopt);
        } else {
            mapping.push_back(c.var(k));
        }
    }
    for (std::size_t e = 0; e < extra; ++e) {
        mapping.push_back(c.clocks.size() + 1 + e);
    }
    s.zone = piece.remap(mapping);
    normalize(sys, s, extra);
    return s;
}

/// All successor classes by one move; empty when the move is infeasible.
inline std::vector<StateClass> class_successors(const ComposedSystem& sys, const StateClass& c, const Move& m,
                                                const SemanticsOptions& opts = {}) {
    std::vector<StateClass> out;
    for (std::size_t f : m.fired()) {
        if (!c.has_clock(f)) {
            return out;
        }
    }
    Dbm delayed = delay_zone(sys, c);
    for (const Dbm& piece : firing_region(sys, c, delayed, m, opts)) {
        StateClass s = fire_class(sys, c, piece, m);
        if (std::find(out.begin(), out.end(), s) == out.end()) {
            out.push_back(std::move(s));
        }
    }
    return out;
}

inline ClassGraph build_sscg(const ComposedSystem& sys, const SscgLimits& limits = {}, const SemanticsOptions& opts = {}) {
    ClassGraph g;
    std::unordered_map<StateClass, std::size_t, StateClassHash> index;
    auto intern = [&](StateClass c, std::size_t depth) -> std::optional<std::size_t> {
        auto it = index.find(c);
        if (it != index.end()) {
            return it->second;
        }
        if (g.classes.size() >= limits.max_classes) {
            g.truncated = true;
            return std::nullopt;
        }
        std::size_t id = g.classes.size();
        index.emplace(c, id);
        g.classes.push_back(std::move(c));
        g.out.emplace_back();
        g.depth.push_back(depth);
        return id;
    };
    intern(initial_class(sys), 0);
    std::deque<std::size_t> queue{0};
    while (!queue.empty()) {
        std::size_t id = queue.front();
        queue.pop_front();
        if (limits.max_depth && g.depth[id] >= *limits.max_depth) {
            if (!candidate_moves(sys, g.classes[id], opts).empty()) {
                g.truncated = true;
            }
            continue;
        }
        StateClass c = g.classes[id];
        for (const Move& m : candidate_moves(sys, c, opts)) {
            for (StateClass& s : class_successors(sys, c, m, opts)) {
                std::size_t before = g.classes.size();
                auto to = intern(std::move(s), g.depth[id] + 1);
                if (!to) {
                    continue;
                }
                if (g.classes.size() > before) {
                    queue.push_back(*to);
                }
                g.out[id].push_back(g.edges.size());
                g.edges.push_back({id, m, *to});
            }
        }
    }
    return g;
}

/// Distinct markings of a complete graph, optionally projected on the SUT places.
inline std::vector<Marking> reachable_markings(const ClassGraph& g, const ComposedSystem* project = nullptr) {
    if (g.truncated) {
        throw Error(Errc::Truncated, "class graph is truncated");
    }
    std::vector<Marking> out;
    std::set<Marking> seen;
    for (const StateClass& c : g.classes) {
        Marking m = project ? project->project_sut(c.marking) : c.marking;
        if (seen.insert(m).second) {
            out.push_back(m);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Relating classes to concrete states

/// Clock constraints implied by a concrete state: I(k) = Is(k) shifted by x_k.
inline Dbm state_clock_zone(const ComposedSystem& sys, const StateClass& c, const State& e) {
    Dbm z = Dbm::nonnegative(c.clocks.size() + 1);
    for (std::size_t i = 0; i < c.clocks.size(); ++i) {
        std::size_t k = c.clocks[i];
        auto it = e.intervals.find(k);
        if (it == e.intervals.end()) {
            z.constrain(0, 0, Bound::lt(0));
            return z;
        }
        const TimeInterval& is = sys.transition(k).static_interval();
        const TimeInterval& cur = it->second;
        std::size_t v = i + 1;
        if (is.upper && cur.upper) {
            Rational x = *is.upper - *cur.upper;
            z.constrain(v, 0, Bound::le(x));
            z.constrain(0, v, Bound::le(-x));
        } else if (cur.lower > 0 || cur.lower_strict) {
            Rational x = is.lower - cur.lower;
            z.constrain(v, 0, Bound::le(x));
            z.constrain(0, v, Bound::le(-x));
        } else {
            z.constrain(0, v, is.lower_strict ? Bound::lt(-is.lower) : Bound::le(-is.lower));
        }
    }
    return z;
}

/// Whether the concrete state (taken at the class entry instant) lies in the class.
inline bool class_contains(const ComposedSystem& sys, const StateClass& c, const State& e) {
    if (!(c.marking == e.marking)) {
        return false;
    }
    return c.zone.intersects(state_clock_zone(sys, c, e));
}

/// Concrete state for a clock valuation (index 0 ignored).
inline State state_at(const ComposedSystem& sys, const StateClass& c, const std::vector<Rational>& point) {
    State e;
    e.marking = c.marking;
    for (std::size_t i = 0; i < c.clocks.size(); ++i) {
        e.intervals[c.clocks[i]] = sys.transition(c.clocks[i]).static_interval().shifted(point[i + 1]);
    }
    return e;
}

/// Firing domain of the class: admissible firing delays phi_t of each enabled
/// transition, as a canonical matrix over (0, phi_1..phi_n) in clock order.
inline Dbm firing_domain(const ComposedSystem& sys, const StateClass& c) {
    std::size_t n = c.clocks.size();
    // Variables: 0, u_1..u_n (u = -x), phi_1..phi_n.
    Dbm d = Dbm::nonnegative(2 * n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        d.at(i, 0) = Bound::le(0);
        d.at(0, i) = Bound::inf();
    }
    for (std::size_t i = 0; i <= n; ++i) {
        for (std::size_t j = 0; j <= n; ++j) {
            if (i == j) {
                continue;
            }
            // x_i - x_j <= c  becomes  u_j - u_i <= c.
            const Bound& b = c.zone.at(i, j);
            std::size_t ui = i, uj = j;
            if (b < d.at(uj, ui)) {
                d.at(uj, ui) = b;
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const TimeInterval& is = sys.transition(c.clocks[i]).static_interval();
        std::size_t u = i + 1, phi = n + i + 1;
        // lower <= phi + x = phi - u <= upper
        d.at(u, phi) = is.lower_strict ? Bound::lt(-is.lower) : Bound::le(-is.lower);
        d.at(phi, u) = detail::upper_kept(is);
    }
    d.canonicalize();
    std::vector<std::optional<std::size_t>> keep;
    for (std::size_t i = 0; i < n; ++i) {
        keep.push_back(n + i + 1);
    }
    return d.remap(keep);
}

/// Human-readable constraints of a firing domain, one per line: `lo <= t <= hi`
/// and `t - u <= c` for the non-trivial differences.
inline std::vector<std::string> describe_domain(const ComposedSystem& sys, const StateClass& c, const Dbm& dom) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < c.clocks.size(); ++i) {
        const std::string& name = sys.transition(c.clocks[i]).name;
        const Bound& lo = dom.at(0, i + 1);
        const Bound& hi = dom.at(i + 1, 0);
        std::string s = to_string(-lo.value) + (lo.strict ? " < " : " <= ") + name;
        s += hi.infinite ? " < w" : (hi.strict ? " < " : " <= ") + to_string(hi.value);
        out.push_back(s);
    }
    for (std::size_t i = 0; i < c.clocks.size(); ++i) {
        for (std::size_t j = 0; j < c.clocks.size(); ++j) {
            const Bound& b = dom.at(i + 1, j + 1);
            if (i == j || b.infinite) {
                continue;
            }
            // Skip differences implied by the box.
            Bound implied = dom.at(i + 1, 0) + dom.at(0, j + 1);
            if (!(b < implied)) {
                continue;
            }
            out.push_back(sys.transition(c.clocks[i]).name + " - " + sys.transition(c.clocks[j]).name +
                          (b.strict ? " < " : " <= ") + to_string(b.value));
        }
    }
    return out;
}

/// Firing domain of a concrete state.
inline Dbm firing_domain(const State& e) {
    Dbm d = Dbm::nonnegative(e.intervals.size() + 1);
    std::size_t v = 1;
    for (const auto& [t, i] : e.intervals) {
        d.constrain(0, v, i.lower_strict ? Bound::lt(-i.lower) : Bound::le(-i.lower));
        d.constrain(v, 0, detail::upper_kept(i));
        ++v;
    }
    return d;
}

}  // namespace tptest
