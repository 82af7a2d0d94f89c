// Copyright (c) tptest contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "tptest/dbm.hpp"
#include "tptest/error.hpp"
#include "tptest/net.hpp"
#include "tptest/semantics.hpp"
#include "tptest/sscg.hpp"

namespace tptest {

struct GoalAtom {
    enum class Kind { TransitionFired, ActionExecuted, PlaceMarked, MarkingReached, ClassVisited };

    Kind kind = Kind::TransitionFired;
    std::size_t index = 0;  // transition, place (of the composed net) or class
    ActionLabel label;      // ActionExecuted: SUT-side label
    Marking marking;        // MarkingReached: SUT-projected marking

    static GoalAtom transition(std::size_t t) { return {Kind::TransitionFired, t, {}, {}}; }
    static GoalAtom action(ActionLabel l) { return {Kind::ActionExecuted, 0, std::move(l), {}}; }
    static GoalAtom place(std::size_t p) { return {Kind::PlaceMarked, p, {}, {}}; }
    static GoalAtom marking_of(Marking m) { return {Kind::MarkingReached, 0, {}, std::move(m)}; }
    static GoalAtom class_index(std::size_t c) { return {Kind::ClassVisited, c, {}, {}}; }

    std::string describe(const ComposedSystem& sys) const {
        switch (kind) {
            case Kind::TransitionFired: return "transition " + sys.transition(index).name;
            case Kind::ActionExecuted: return "action " + label.to_string();
            case Kind::PlaceMarked: return "place " + sys.net.places[index];
            case Kind::MarkingReached: return "marking {" + sys.sut.format_marking(marking) + "}";
            case Kind::ClassVisited: return "class " + std::to_string(index);
        }
        return "?";
    }
};

enum class GoalMode { ReachAny, CoverAll };

struct Goal {
    std::vector<GoalAtom> atoms;
    GoalMode mode = GoalMode::ReachAny;

    bool uses_classes() const {
        return std::any_of(atoms.begin(), atoms.end(), [](const GoalAtom& a) { return a.kind == GoalAtom::Kind::ClassVisited; });
    }
};

enum class Criterion { Transition, Statement, Place, Marking, Class };

using AtomSet = boost::dynamic_bitset<>;

/// Atoms satisfied on arrival in `m` (class index `cls` when known).
inline AtomSet atoms_at(const ComposedSystem& sys, const Goal& goal, const Marking& m, std::optional<std::size_t> cls) {
    AtomSet s(goal.atoms.size());
    for (std::size_t a = 0; a < goal.atoms.size(); ++a) {
        const GoalAtom& atom = goal.atoms[a];
        switch (atom.kind) {
            case GoalAtom::Kind::PlaceMarked: s[a] = m[atom.index] > 0; break;
            case GoalAtom::Kind::MarkingReached: s[a] = sys.project_sut(m) == atom.marking; break;
            case GoalAtom::Kind::ClassVisited: s[a] = cls && *cls == atom.index; break;
            default: break;
        }
    }
    return s;
}

/// Atoms satisfied by taking move `mv` into marking `m`.
inline AtomSet atoms_by(const ComposedSystem& sys, const Goal& goal, const Move& mv, const Marking& m,
                        std::optional<std::size_t> cls) {
    AtomSet s = atoms_at(sys, goal, m, cls);
    std::vector<std::size_t> fired = mv.fired();
    for (std::size_t a = 0; a < goal.atoms.size(); ++a) {
        const GoalAtom& atom = goal.atoms[a];
        if (atom.kind == GoalAtom::Kind::TransitionFired) {
            s[a] = std::find(fired.begin(), fired.end(), atom.index) != fired.end();
        } else if (atom.kind == GoalAtom::Kind::ActionExecuted) {
            for (std::size_t f : fired) {
                if (sys.is_sut(f) && sys.transition(f).label == atom.label) {
                    s[a] = true;
                }
            }
        }
    }
    return s;
}

inline bool goal_met(const Goal& goal, const AtomSet& covered) {
    if (goal.mode == GoalMode::ReachAny) {
        return covered.any();
    }
    return covered.all();
}

inline Goal goal_from_criterion(const ComposedSystem& sys, Criterion c, const ClassGraph& g) {
    Goal goal;
    goal.mode = GoalMode::CoverAll;
    switch (c) {
        case Criterion::Transition:
            for (std::size_t t = 0; t < sys.sut_transitions; ++t) {
                goal.atoms.push_back(GoalAtom::transition(t));
            }
            break;
        case Criterion::Statement:
            for (const ActionLabel& l : sys.sut.alphabet()) {
                goal.atoms.push_back(GoalAtom::action(l));
            }
            break;
        case Criterion::Place:
            for (std::size_t p = 0; p < sys.sut_places; ++p) {
                goal.atoms.push_back(GoalAtom::place(p));
            }
            break;
        case Criterion::Marking:
            for (Marking& m : reachable_markings(g, &sys)) {
                goal.atoms.push_back(GoalAtom::marking_of(std::move(m)));
            }
            break;
        case Criterion::Class:
            if (g.truncated) {
                throw Error(Errc::Truncated, "class graph is truncated");
            }
            for (std::size_t i = 0; i < g.size(); ++i) {
                goal.atoms.push_back(GoalAtom::class_index(i));
            }
            break;
    }
    return goal;
}

// ---------------------------------------------------------------------------
// Witnesses over the class graph

namespace detail {

/// Shortest edge path from `from` to the first edge accepted by `accept`, in BFS order.
template <typename Accept>
std::optional<std::vector<std::size_t>> bfs_edges(const ClassGraph& g, std::size_t from, Accept accept) {
    std::vector<std::optional<std::size_t>> via(g.size());
    std::vector<bool> seen(g.size(), false);
    std::deque<std::size_t> queue{from};
    seen[from] = true;
    auto path_to = [&](std::size_t edge) {
        std::vector<std::size_t> path{edge};
        std::size_t c = g.edges[edge].from;
        while (c != from) {
            path.push_back(*via[c]);
            c = g.edges[*via[c]].from;
        }
        std::reverse(path.begin(), path.end());
        return path;
    };
    while (!queue.empty()) {
        std::size_t c = queue.front();
        queue.pop_front();
        for (std::size_t e : g.out[c]) {
            if (accept(e)) {
                return path_to(e);
            }
            std::size_t to = g.edges[e].to;
            if (!seen[to]) {
                seen[to] = true;
                via[to] = e;
                queue.push_back(to);
            }
        }
    }
    return std::nullopt;
}

inline Support support_of(const ClassGraph& g, const std::vector<std::size_t>& path) {
    Support s;
    for (std::size_t e : path) {
        s.push_back(g.edges[e].move);
    }
    return s;
}

}  // namespace detail

/// Minimum-length support reaching any atom of the goal; nullopt when unreachable.
inline std::optional<Support> find_witness(const ComposedSystem& sys, const ClassGraph& g, const Goal& goal) {
    if (atoms_at(sys, goal, g.classes[g.initial].marking, g.initial).any()) {
        return Support{};
    }
    auto path = detail::bfs_edges(g, g.initial, [&](std::size_t e) {
        const ClassEdge& edge = g.edges[e];
        return atoms_by(sys, goal, edge.move, g.classes[edge.to].marking, edge.to).any();
    });
    if (!path) {
        return std::nullopt;
    }
    return detail::support_of(g, *path);
}

/// Markings (SUT-projected) from which a reset back to m0 may be issued.
struct ResetInfo {
    std::vector<Marking> markings;
    bool anywhere = false;
    Rational duration{0};

    bool available() const { return anywhere || !markings.empty(); }

    bool allows(const ComposedSystem& sys, const Marking& m) const {
        if (anywhere) {
            return true;
        }
        Marking p = sys.project_sut(m);
        return std::find(markings.begin(), markings.end(), p) != markings.end();
    }
};

/// Segments executed from m0, separated by resets.
struct CoveringPlan {
    std::vector<Support> segments;

    std::size_t resets() const { return segments.empty() ? 0 : segments.size() - 1; }
};

namespace detail {

[[noreturn]] inline void uncoverable(const ComposedSystem& sys, const Goal& goal, const AtomSet& dead) {
    std::string list;
    for (std::size_t a = 0; a < goal.atoms.size(); ++a) {
        if (dead[a]) {
            list += (list.empty() ? "" : ", ") + goal.atoms[a].describe(sys);
        }
    }
    throw Error(Errc::Uncoverable, "unreachable goal atoms: " + list);
}

/// Atoms satisfied somewhere in the graph.
inline AtomSet reachable_atoms(const ComposedSystem& sys, const ClassGraph& g, const Goal& goal) {
    AtomSet s = atoms_at(sys, goal, g.classes[g.initial].marking, g.initial);
    for (const ClassEdge& e : g.edges) {
        s |= atoms_by(sys, goal, e.move, g.classes[e.to].marking, e.to);
    }
    return s;
}

}  // namespace detail

/// Greedy plan: repeatedly walk to the nearest edge satisfying an uncovered
/// atom; reset to m0 when none is reachable from the current class.
inline CoveringPlan find_covering_plan(const ComposedSystem& sys, const ClassGraph& g, const Goal& goal,
                                       const ResetInfo& resets = {}) {
    AtomSet covered = atoms_at(sys, goal, g.classes[g.initial].marking, g.initial);
    AtomSet dead = ~detail::reachable_atoms(sys, g, goal);
    if (goal.mode == GoalMode::CoverAll && dead.any()) {
        detail::uncoverable(sys, goal, dead);
    }
    if (goal.mode == GoalMode::ReachAny && dead.all() && !covered.any()) {
        detail::uncoverable(sys, goal, dead);
    }
    CoveringPlan plan;
    plan.segments.emplace_back();
    std::size_t cur = g.initial;
    bool progress_since_reset = true;
    while (!goal_met(goal, covered)) {
        auto path = detail::bfs_edges(g, cur, [&](std::size_t e) {
            const ClassEdge& edge = g.edges[e];
            AtomSet got = atoms_by(sys, goal, edge.move, g.classes[edge.to].marking, edge.to);
            return (got & ~covered).any();
        });
        if (path) {
            for (std::size_t e : *path) {
                const ClassEdge& edge = g.edges[e];
                covered |= atoms_by(sys, goal, edge.move, g.classes[edge.to].marking, edge.to);
                plan.segments.back().push_back(edge.move);
            }
            cur = g.edges[path->back()].to;
            progress_since_reset = true;
            continue;
        }
        if (!resets.available() || !progress_since_reset) {
            detail::uncoverable(sys, goal, ~covered);
        }
        if (!resets.allows(sys, g.classes[cur].marking)) {
            auto to_reset = detail::bfs_edges(g, cur, [&](std::size_t e) { return resets.allows(sys, g.classes[g.edges[e].to].marking); });
            if (!to_reset) {
                detail::uncoverable(sys, goal, ~covered);
            }
            for (std::size_t e : *to_reset) {
                plan.segments.back().push_back(g.edges[e].move);
            }
        }
        plan.segments.emplace_back();
        cur = g.initial;
        progress_since_reset = false;
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Time-optimal covering search

struct FastestPlan {
    CoveringPlan plan;
    /// Least total time, resets included.
    Rational total{0};
    std::size_t explored = 0;
};

struct SearchLimits {
    std::size_t max_nodes = 2000000;
};

namespace detail {

/// Zone-based search state: enabled-clock zone extended with a global clock g
/// (last variable, never reset) whose upper bounds are dropped.
struct TimedNode {
    StateClass cls;
    AtomSet covered;
    std::optional<std::size_t> parent;
    Move move;
    bool reset = false;
    std::size_t depth = 0;

    std::size_t gvar() const { return cls.clocks.size() + 1; }
    std::pair<Rational, bool> earliest() const { return cls.zone.lower(gvar()); }
};

inline StateClass with_global_clock(const ComposedSystem& sys, const StateClass& c, const Bound& g_lower) {
    StateClass s = c;
    std::vector<std::optional<std::size_t>> mapping;
    for (std::size_t i = 0; i < c.clocks.size(); ++i) {
        mapping.push_back(i + 1);
    }
    mapping.push_back(std::nullopt);
    s.zone = c.zone.remap(mapping);
    std::size_t g = c.clocks.size() + 1;
    s.zone.relax_upper(g);
    s.zone.constrain(0, g, g_lower);
    normalize(sys, s, 1);
    return s;
}

}  // namespace detail

/// Uniform-cost search for the least total time satisfying the goal, allowing
/// resets (each costing ResetInfo::duration) from reset-able markings.
inline FastestPlan find_fastest(const ComposedSystem& sys, const Goal& goal, const ResetInfo& resets = {},
                                const SemanticsOptions& opts = {}, const SearchLimits& limits = {}) {
    using detail::TimedNode;
    std::vector<TimedNode> nodes;
    std::unordered_map<Marking, std::vector<std::size_t>, MarkingHash> stored;
    using Key = std::tuple<Rational, bool, std::size_t, std::size_t>;
    std::priority_queue<Key, std::vector<Key>, std::greater<>> open;

    auto dominated = [&](const TimedNode& n) {
        auto it = stored.find(n.cls.marking);
        if (it == stored.end()) {
            return false;
        }
        for (std::size_t i : it->second) {
            const TimedNode& s = nodes[i];
            if (n.covered.is_subset_of(s.covered) && s.cls.zone.includes(n.cls.zone)) {
                return true;
            }
        }
        return false;
    };
    auto push = [&](TimedNode n) {
        n.cls.zone.relax_upper(n.gvar());
        if (dominated(n)) {
            return;
        }
        if (nodes.size() >= limits.max_nodes) {
            throw Error(Errc::LimitExceeded, "time-optimal search exceeded " + std::to_string(limits.max_nodes) + " nodes");
        }
        auto [lo, strict] = n.earliest();
        std::size_t id = nodes.size();
        stored[n.cls.marking].push_back(id);
        open.emplace(lo, strict, n.depth, id);
        nodes.push_back(std::move(n));
    };

    StateClass init = initial_class(sys);
    TimedNode root;
    root.cls = detail::with_global_clock(sys, init, Bound::le(0));
    root.covered = atoms_at(sys, goal, init.marking, std::nullopt);
    push(std::move(root));

    while (!open.empty()) {
        auto [lo, strict, depth, id] = open.top();
        open.pop();
        if (goal_met(goal, nodes[id].covered)) {
            FastestPlan r;
            r.total = lo;
            r.explored = nodes.size();
            std::vector<std::size_t> chain;
            for (std::optional<std::size_t> c = id; c; c = nodes[*c].parent) {
                chain.push_back(*c);
            }
            std::reverse(chain.begin(), chain.end());
            r.plan.segments.emplace_back();
            for (std::size_t k = 1; k < chain.size(); ++k) {
                const TimedNode& n = nodes[chain[k]];
                if (n.reset) {
                    r.plan.segments.emplace_back();
                } else {
                    r.plan.segments.back().push_back(n.move);
                }
            }
            return r;
        }
        StateClass cls = nodes[id].cls;
        AtomSet covered = nodes[id].covered;
        Dbm delayed = delay_zone(sys, cls);
        for (const Move& m : candidate_moves(sys, cls, opts)) {
            for (const Dbm& piece : firing_region(sys, cls, delayed, m, opts)) {
                TimedNode n;
                n.cls = fire_class(sys, cls, piece, m, 1);
                n.covered = covered | atoms_by(sys, goal, m, n.cls.marking, std::nullopt);
                n.parent = id;
                n.move = m;
                n.depth = depth + 1;
                push(std::move(n));
            }
        }
        if (resets.available() && resets.allows(sys, cls.marking)) {
            TimedNode n;
            Bound g_lower = strict ? Bound::lt(-(lo + resets.duration)) : Bound::le(-(lo + resets.duration));
            n.cls = detail::with_global_clock(sys, init, g_lower);
            n.covered = covered | atoms_at(sys, goal, init.marking, std::nullopt);
            n.parent = id;
            n.reset = true;
            n.depth = depth + 1;
            push(std::move(n));
        }
    }
    AtomSet none(goal.atoms.size());
    detail::uncoverable(sys, goal, ~none);
}

/// Whether the goal can be met at all on the class graph (resets included).
inline bool coverable(const ComposedSystem& sys, const ClassGraph& g, const Goal& goal, const ResetInfo& resets = {},
                      std::size_t max_nodes = 200000) {
    using Key = std::pair<std::size_t, AtomSet>;
    std::set<Key> seen;
    std::deque<Key> queue;
    Key start{g.initial, atoms_at(sys, goal, g.classes[g.initial].marking, g.initial)};
    seen.insert(start);
    queue.push_back(start);
    while (!queue.empty()) {
        auto [c, covered] = queue.front();
        queue.pop_front();
        if (goal_met(goal, covered)) {
            return true;
        }
        if (seen.size() > max_nodes) {
            return true;  // inconclusive; let the search decide
        }
        auto visit = [&](std::size_t to, AtomSet s) {
            Key k{to, std::move(s)};
            if (seen.insert(k).second) {
                queue.push_back(std::move(k));
            }
        };
        for (std::size_t e : g.out[c]) {
            const ClassEdge& edge = g.edges[e];
            visit(edge.to, covered | atoms_by(sys, goal, edge.move, g.classes[edge.to].marking, edge.to));
        }
        if (resets.available() && resets.allows(sys, g.classes[c].marking)) {
            visit(g.initial, covered | atoms_at(sys, goal, g.classes[g.initial].marking, g.initial));
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// DIEOU restrictions

struct DieouCondition {
    explicit DieouCondition(std::string n = {}) : name(std::move(n)) {}

    std::string name;
    bool pass = true;
    std::optional<std::size_t> witness_class;
    std::optional<State> witness;
    std::string detail;
};

struct DieouReport {
    DieouCondition deterministic{"deterministic"};
    DieouCondition weak_input_enabled{"weak input enabled"};
    DieouCondition isolated_outputs{"isolated outputs"};
    DieouCondition output_urgent{"output urgency"};
    /// The SUT against a universal environment, and its class graph.
    ComposedSystem system;
    ClassGraph graph;

    bool all() const {
        return deterministic.pass && weak_input_enabled.pass && isolated_outputs.pass && output_urgent.pass;
    }
    std::vector<const DieouCondition*> conditions() const {
        return {&deterministic, &weak_input_enabled, &isolated_outputs, &output_urgent};
    }
};

/// The SUT composed with an environment that accepts and offers everything.
inline ComposedSystem universal_system(const Net& sut) {
    Net env;
    env.name = "universal";
    return compose(sut, env);
}

/// Checks the four restrictions on the SUT side of `sys` class by class.
inline DieouReport check_dieou(const ComposedSystem& sys, const SscgLimits& limits = {}) {
    DieouReport r;
    r.system = universal_system(sys.sut);
    SemanticsOptions opts;
    opts.open = true;
    r.graph = build_sscg(r.system, limits, opts);
    if (r.graph.truncated) {
        throw Error(Errc::Truncated, "class graph is truncated");
    }
    const ComposedSystem& u = r.system;
    auto violate = [&](DieouCondition& c, std::size_t cls, const Dbm& where, std::string why) {
        if (!c.pass) {
            return;
        }
        c.pass = false;
        c.witness_class = cls;
        c.witness = state_at(u, r.graph.classes[cls], where.sample());
        c.detail = std::move(why);
    };
    for (std::size_t ci = 0; ci < r.graph.size(); ++ci) {
        const StateClass& c = r.graph.classes[ci];
        Dbm z = delay_zone(u, c);
        Dbm can_delay = z;
        for (std::size_t i = 0; i < c.clocks.size(); ++i) {
            const TimeInterval& is = u.transition(c.clocks[i]).static_interval();
            if (is.upper) {
                can_delay.constrain(i + 1, 0, Bound::lt(*is.upper));
            }
        }
        std::vector<Move> moves = candidate_moves(u, c, opts);
        std::vector<std::vector<Dbm>> regions;
        for (const Move& m : moves) {
            regions.push_back(firing_region(u, c, z, m, opts));
        }
        auto label = [&](std::size_t k) { return u.transition(moves[k].t).label; };
        auto overlap = [&](std::size_t a, std::size_t b) -> std::optional<Dbm> {
            for (const Dbm& x : regions[a]) {
                for (const Dbm& y : regions[b]) {
                    Dbm both = x.intersection(y);
                    if (!both.empty()) {
                        return both;
                    }
                }
            }
            return std::nullopt;
        };
        for (std::size_t a = 0; a < moves.size(); ++a) {
            for (std::size_t b = a + 1; b < moves.size(); ++b) {
                ActionLabel la = label(a), lb = label(b);
                bool same = la == lb;
                bool two_outputs = la.kind == ActionKind::Output && lb.kind == ActionKind::Output && la.name != lb.name;
                if (!same && !two_outputs) {
                    continue;
                }
                if (auto both = overlap(a, b)) {
                    std::string why = u.transition(moves[a].t).name + " and " + u.transition(moves[b].t).name;
                    if (same) {
                        violate(r.deterministic, ci, *both, why + " fire " + la.to_string() + " at the same instant");
                    } else {
                        violate(r.isolated_outputs, ci, *both, why + " offer distinct outputs at the same instant");
                    }
                }
            }
        }
        for (std::size_t a = 0; a < moves.size(); ++a) {
            if (label(a).kind == ActionKind::Input) {
                continue;
            }
            for (const Dbm& x : regions[a]) {
                Dbm lazy = x.intersection(can_delay);
                if (!lazy.empty()) {
                    violate(r.output_urgent, ci, lazy,
                            u.transition(moves[a].t).name + " (" + label(a).to_string() + ") fireable while time may pass");
                    break;
                }
            }
        }
        if (can_delay.empty()) {
            continue;
        }
        for (const ActionLabel& in : u.sut.alphabet(ActionKind::Input)) {
            std::vector<Dbm> rest{can_delay};
            for (std::size_t a = 0; a < moves.size() && !rest.empty(); ++a) {
                if (label(a) != in) {
                    continue;
                }
                for (const Dbm& x : regions[a]) {
                    Dbm before = x;
                    before.down();
                    std::vector<Dbm> next;
                    for (const Dbm& piece : rest) {
                        for (Dbm& left : piece.subtract(before)) {
                            next.push_back(std::move(left));
                        }
                    }
                    rest = std::move(next);
                }
            }
            if (!rest.empty()) {
                violate(r.weak_input_enabled, ci, rest.front(), in.to_string() + " can never be accepted by delaying alone");
            }
        }
    }
    return r;
}

}  // namespace tptest
