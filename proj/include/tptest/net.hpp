// Copyright (c) tptest contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tptest/error.hpp"
#include "tptest/time.hpp"

namespace tptest {

enum class ActionKind { Input, Output, Internal };

struct ActionLabel {
    ActionKind kind = ActionKind::Internal;
    std::string name;  // empty for Internal

    static ActionLabel input(std::string n) { return {ActionKind::Input, std::move(n)}; }
    static ActionLabel output(std::string n) { return {ActionKind::Output, std::move(n)}; }
    static ActionLabel internal() { return {}; }

    bool observable() const { return kind != ActionKind::Internal; }

    bool complements(const ActionLabel& o) const {
        return observable() && o.observable() && kind != o.kind && name == o.name;
    }

    ActionLabel complement() const {
        if (!observable()) {
            return *this;
        }
        return {kind == ActionKind::Input ? ActionKind::Output : ActionKind::Input, name};
    }

    std::string to_string() const {
        switch (kind) {
            case ActionKind::Input: return name + "?";
            case ActionKind::Output: return name + "!";
            case ActionKind::Internal: return "tau";
        }
        return "tau";
    }

    /// Parses `a?`, `a!` or `tau`.
    static ActionLabel parse(const std::string& s) {
        if (s == "tau") {
            return internal();
        }
        if (s.size() < 2 || (s.back() != '?' && s.back() != '!')) {
            throw Error(Errc::Syntax, "malformed action label '" + s + "'");
        }
        std::string n = s.substr(0, s.size() - 1);
        return s.back() == '?' ? input(n) : output(n);
    }

    friend auto operator<=>(const ActionLabel&, const ActionLabel&) = default;
};

/// Token count per place; indices follow the owning net's place order.
struct Marking {
    std::vector<std::uint32_t> tokens;

    Marking() = default;
    explicit Marking(std::size_t places) : tokens(places, 0) {}
    explicit Marking(std::vector<std::uint32_t> t) : tokens(std::move(t)) {}

    std::uint32_t operator[](std::size_t p) const { return p < tokens.size() ? tokens[p] : 0; }
    std::size_t size() const { return tokens.size(); }
    bool empty() const {
        return std::all_of(tokens.begin(), tokens.end(), [](std::uint32_t v) { return v == 0; });
    }

    friend bool operator==(const Marking& a, const Marking& b) {
        std::size_t n = std::max(a.size(), b.size());
        for (std::size_t p = 0; p < n; ++p) {
            if (a[p] != b[p]) {
                return false;
            }
        }
        return true;
    }
    friend bool operator<(const Marking& a, const Marking& b) {
        std::size_t n = std::max(a.size(), b.size());
        for (std::size_t p = 0; p < n; ++p) {
            if (a[p] != b[p]) {
                return a[p] < b[p];
            }
        }
        return false;
    }
};

struct MarkingHash {
    std::size_t operator()(const Marking& m) const {
        std::size_t h = 0xcbf29ce484222325ULL;
        std::size_t n = m.size();
        while (n > 0 && m[n - 1] == 0) {
            --n;
        }
        for (std::size_t p = 0; p < n; ++p) {
            h = (h ^ m[p]) * 0x100000001b3ULL;
        }
        return h;
    }
};

struct Arc {
    std::size_t place = 0;
    std::uint32_t weight = 1;

    friend bool operator==(const Arc&, const Arc&) = default;
};

struct Transition {
    std::string name;
    ActionLabel label;
    std::optional<TimeInterval> interval;  // required; optional only so validate() can report it
    std::vector<Arc> pre;
    std::vector<Arc> post;

    const TimeInterval& static_interval() const {
        if (!interval) {
            throw Error(Errc::InvalidNet, "transition '" + name + "' has no static interval");
        }
        return *interval;
    }
};

struct Net {
    std::string name;
    std::vector<std::string> places;
    std::vector<Transition> transitions;
    std::vector<std::uint32_t> initial;
    /// (low, high): `high` has priority over `low`.
    std::vector<std::pair<std::size_t, std::size_t>> priorities;

    std::optional<std::size_t> place_index(const std::string& n) const {
        auto it = std::find(places.begin(), places.end(), n);
        if (it == places.end()) {
            return std::nullopt;
        }
        return static_cast<std::size_t>(it - places.begin());
    }

    std::optional<std::size_t> transition_index(const std::string& n) const {
        for (std::size_t i = 0; i < transitions.size(); ++i) {
            if (transitions[i].name == n) {
                return i;
            }
        }
        return std::nullopt;
    }

    std::size_t add_place(std::string n, std::uint32_t tokens = 0) {
        places.push_back(std::move(n));
        initial.push_back(tokens);
        return places.size() - 1;
    }

    std::size_t add_transition(Transition t) {
        transitions.push_back(std::move(t));
        return transitions.size() - 1;
    }

    Marking initial_marking() const {
        Marking m(places.size());
        for (std::size_t p = 0; p < places.size() && p < initial.size(); ++p) {
            m.tokens[p] = initial[p];
        }
        return m;
    }

    /// Distinct observable labels, in order of first occurrence.
    std::vector<ActionLabel> alphabet() const {
        std::vector<ActionLabel> out;
        for (const Transition& t : transitions) {
            if (t.label.observable() && std::find(out.begin(), out.end(), t.label) == out.end()) {
                out.push_back(t.label);
            }
        }
        return out;
    }

    std::vector<ActionLabel> alphabet(ActionKind kind) const {
        std::vector<ActionLabel> out;
        for (const ActionLabel& l : alphabet()) {
            if (l.kind == kind) {
                out.push_back(l);
            }
        }
        return out;
    }

    /// Renders a marking as `p0,q0` / `p(2)`, listing marked places only.
    std::string format_marking(const Marking& m) const {
        std::string s;
        for (std::size_t p = 0; p < places.size(); ++p) {
            if (m[p] == 0) {
                continue;
            }
            if (!s.empty()) {
                s += ",";
            }
            s += places[p];
            if (m[p] != 1) {
                s += "(" + std::to_string(m[p]) + ")";
            }
        }
        return s;
    }
};

/// Parses `p0:1,q0` (count defaults to 1) against the places of `net`.
inline Marking parse_marking(const Net& net, const std::string& text) {
    Marking m(net.places.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t comma = text.find(',', pos);
        std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        pos = comma == std::string::npos ? text.size() : comma + 1;
        if (item.empty()) {
            continue;
        }
        std::uint32_t count = 1;
        if (auto colon = item.find(':'); colon != std::string::npos) {
            Rational c = parse_rational(item.substr(colon + 1));
            if (c.denominator() != 1 || c < 0) {
                throw Error(Errc::InvalidMarking, "bad token count in '" + item + "'");
            }
            count = static_cast<std::uint32_t>(c.numerator());
            item = item.substr(0, colon);
        }
        auto p = net.place_index(item);
        if (!p) {
            throw Error(Errc::InvalidMarking, "unknown place '" + item + "'");
        }
        m.tokens[*p] = count;
    }
    return m;
}

inline bool covers(const Marking& m, const std::vector<Arc>& arcs) {
    return std::all_of(arcs.begin(), arcs.end(), [&](const Arc& a) { return m[a.place] >= a.weight; });
}

inline void subtract_arcs(Marking& m, const std::vector<Arc>& arcs) {
    for (const Arc& a : arcs) {
        m.tokens[a.place] -= a.weight;
    }
}

inline void add_arcs(Marking& m, const std::vector<Arc>& arcs) {
    for (const Arc& a : arcs) {
        m.tokens[a.place] += a.weight;
    }
}

// ---------------------------------------------------------------------------
// Validation

struct Diagnostic {
    enum class Severity { Error, Warning };
    std::string subject;
    std::string reason;
    Severity severity = Severity::Error;

    bool is_error() const { return severity == Severity::Error; }
};

/// Transitive closure of the priority relation: result[t] lists every k with t < k.
inline std::vector<std::vector<std::size_t>> priority_closure(const Net& net) {
    std::size_t n = net.transitions.size();
    std::vector<std::vector<bool>> rel(n, std::vector<bool>(n, false));
    for (auto [lo, hi] : net.priorities) {
        if (lo < n && hi < n) {
            rel[lo][hi] = true;
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!rel[i][k]) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                if (rel[k][j]) {
                    rel[i][j] = true;
                }
            }
        }
    }
    std::vector<std::vector<std::size_t>> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (rel[i][j]) {
                out[i].push_back(j);
            }
        }
    }
    return out;
}

inline std::vector<Diagnostic> validate(const Net& net) {
    std::vector<Diagnostic> out;
    auto error = [&](std::string subject, std::string reason) {
        out.push_back({std::move(subject), std::move(reason), Diagnostic::Severity::Error});
    };

    std::set<std::string> names;
    for (const std::string& p : net.places) {
        if (!names.insert(p).second) {
            error(p, "duplicate identifier");
        }
    }
    for (const Transition& t : net.transitions) {
        if (!names.insert(t.name).second) {
            error(t.name, "duplicate identifier");
        }
    }
    if (net.initial.size() != net.places.size()) {
        error(net.name, "initial marking does not match place count");
    }

    std::map<std::string, ActionKind> directions;
    for (const Transition& t : net.transitions) {
        if (!t.interval) {
            error(t.name, "missing interval");
        } else if (!t.interval->valid()) {
            error(t.name, "invalid interval " + t.interval->to_string());
        }
        if (t.label.observable() && t.label.name.empty()) {
            error(t.name, "observable label without a name");
        }
        if (!t.label.observable() && !t.label.name.empty()) {
            error(t.name, "internal label carries a name");
        }
        if (t.label.observable()) {
            auto [it, fresh] = directions.emplace(t.label.name, t.label.kind);
            if (!fresh && it->second != t.label.kind) {
                error(t.name, "label '" + t.label.name + "' used as both input and output");
            }
        }
        for (const auto* arcs : {&t.pre, &t.post}) {
            for (const Arc& a : *arcs) {
                if (a.place >= net.places.size()) {
                    error(t.name, "arc to unknown place");
                } else if (a.weight == 0) {
                    error(t.name, "zero arc weight");
                }
            }
        }
    }

    std::size_t n = net.transitions.size();
    std::set<std::pair<std::size_t, std::size_t>> pairs;
    for (auto [lo, hi] : net.priorities) {
        if (lo >= n || hi >= n) {
            error(net.name, "priority references unknown transition");
            continue;
        }
        if (lo == hi) {
            error(net.transitions[lo].name, "priority not irreflexive");
            continue;
        }
        if (pairs.count({hi, lo}) != 0) {
            error(net.transitions[lo].name + "<" + net.transitions[hi].name, "priority not asymmetric");
        }
        pairs.insert({lo, hi});
    }
    auto closure = priority_closure(net);
    for (std::size_t t = 0; t < n; ++t) {
        bool reflexive_pair = std::any_of(net.priorities.begin(), net.priorities.end(),
                                          [t](const auto& pr) { return pr.first == t && pr.second == t; });
        if (!reflexive_pair && std::find(closure[t].begin(), closure[t].end(), t) != closure[t].end()) {
            error(net.transitions[t].name, "priority relation has a cycle");
        }
    }

    if (net.initial_marking().empty()) {
        out.push_back({net.name, "no initial marking", Diagnostic::Severity::Warning});
    }
    return out;
}

inline bool has_errors(const std::vector<Diagnostic>& ds) {
    return std::any_of(ds.begin(), ds.end(), [](const Diagnostic& d) { return d.is_error(); });
}

/// Order-insensitive structural equality, matching places and transitions by name.
inline bool structurally_equal(const Net& a, const Net& b) {
    if (a.places.size() != b.places.size() || a.transitions.size() != b.transitions.size() ||
        a.priorities.size() != b.priorities.size()) {
        return false;
    }
    for (std::size_t p = 0; p < a.places.size(); ++p) {
        auto q = b.place_index(a.places[p]);
        if (!q || a.initial[p] != b.initial[*q]) {
            return false;
        }
    }
    auto arcs_by_name = [](const Net& net, const std::vector<Arc>& arcs) {
        std::map<std::string, std::uint32_t> m;
        for (const Arc& x : arcs) {
            m[net.places[x.place]] += x.weight;
        }
        return m;
    };
    for (const Transition& t : a.transitions) {
        auto j = b.transition_index(t.name);
        if (!j) {
            return false;
        }
        const Transition& u = b.transitions[*j];
        if (t.label != u.label || t.interval != u.interval || arcs_by_name(a, t.pre) != arcs_by_name(b, u.pre) ||
            arcs_by_name(a, t.post) != arcs_by_name(b, u.post)) {
            return false;
        }
    }
    std::set<std::pair<std::string, std::string>> pa, pb;
    for (auto [lo, hi] : a.priorities) {
        pa.insert({a.transitions[lo].name, a.transitions[hi].name});
    }
    for (auto [lo, hi] : b.priorities) {
        pb.insert({b.transitions[lo].name, b.transitions[hi].name});
    }
    return pa == pb;
}

// ---------------------------------------------------------------------------
// Composition

enum class Side { Sut, Env };

struct ComposeOptions {
    /// Admit internal transitions on the environment side.
    bool lenient = false;
};

/// SUT and environment subnets flattened into one net. SUT places and
/// transitions come first; environment identifiers are renamed on collision.
struct ComposedSystem {
    Net sut;
    Net env;
    Net net;
    std::vector<Side> side;
    /// Complementary transitions on the other side, per transition.
    std::vector<std::vector<std::size_t>> partners;
    /// Transitive priority closure: higher[t] lists every k with t < k.
    std::vector<std::vector<std::size_t>> higher;
    std::size_t sut_places = 0;
    std::size_t sut_transitions = 0;

    const Transition& transition(std::size_t t) const { return net.transitions[t]; }
    bool is_sut(std::size_t t) const { return side[t] == Side::Sut; }

    Marking initial_marking() const { return net.initial_marking(); }

    Marking project_sut(const Marking& m) const {
        Marking out(sut_places);
        for (std::size_t p = 0; p < sut_places; ++p) {
            out.tokens[p] = m[p];
        }
        return out;
    }

    /// All (SUT transition, ENV transition) complementary pairs.
    std::vector<std::pair<std::size_t, std::size_t>> sync_pairs() const {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (std::size_t t = 0; t < sut_transitions; ++t) {
            for (std::size_t u : partners[t]) {
                out.emplace_back(t, u);
            }
        }
        return out;
    }
};

inline ComposedSystem compose(const Net& sut, const Net& env, ComposeOptions opts = {}) {
    ComposedSystem sys;
    sys.sut = sut;
    sys.env = env;
    sys.sut_places = sut.places.size();
    sys.sut_transitions = sut.transitions.size();

    std::set<std::string> sut_alphabet;
    for (const ActionLabel& l : sut.alphabet()) {
        sut_alphabet.insert(l.to_string());
    }
    for (const Transition& t : env.transitions) {
        if (!t.label.observable()) {
            if (!opts.lenient) {
                throw Error(Errc::SideConflict, "internal transition '" + t.name + "' on the environment side");
            }
            continue;
        }
        if (sut_alphabet.count(t.label.complement().to_string()) == 0) {
            throw Error(Errc::UnmatchedLabel,
                        "environment label " + t.label.to_string() + " of '" + t.name + "' has no complement in the SUT");
        }
    }

    std::set<std::string> used;
    for (const std::string& p : sut.places) {
        used.insert(p);
    }
    for (const Transition& t : sut.transitions) {
        used.insert(t.name);
    }
    auto fresh = [&](std::string n) {
        while (used.count(n) != 0) {
            n += "_env";
        }
        used.insert(n);
        return n;
    };

    Net& flat = sys.net;
    flat.name = sut.name + "||" + env.name;
    flat.places = sut.places;
    flat.initial = sut.initial;
    flat.initial.resize(sut.places.size(), 0);
    flat.transitions = sut.transitions;
    flat.priorities = sut.priorities;
    for (std::size_t p = 0; p < env.places.size(); ++p) {
        flat.places.push_back(fresh(env.places[p]));
        flat.initial.push_back(p < env.initial.size() ? env.initial[p] : 0);
    }
    for (const Transition& t : env.transitions) {
        Transition u = t;
        u.name = fresh(t.name);
        for (Arc& a : u.pre) {
            a.place += sys.sut_places;
        }
        for (Arc& a : u.post) {
            a.place += sys.sut_places;
        }
        flat.transitions.push_back(std::move(u));
    }
    for (auto [lo, hi] : env.priorities) {
        flat.priorities.emplace_back(lo + sys.sut_transitions, hi + sys.sut_transitions);
    }

    std::size_t n = flat.transitions.size();
    sys.side.assign(n, Side::Sut);
    for (std::size_t t = sys.sut_transitions; t < n; ++t) {
        sys.side[t] = Side::Env;
    }
    sys.partners.assign(n, {});
    for (std::size_t t = 0; t < sys.sut_transitions; ++t) {
        for (std::size_t u = sys.sut_transitions; u < n; ++u) {
            if (flat.transitions[t].label.complements(flat.transitions[u].label)) {
                sys.partners[t].push_back(u);
                sys.partners[u].push_back(t);
            }
        }
    }
    sys.higher = priority_closure(flat);
    return sys;
}

// ---------------------------------------------------------------------------
// Reset augmentation

/// Adds a `reset!` transition consuming `reset_marking` into a fresh place,
/// and an internal [tr,tr] transition from that place back to m0.
inline Net add_reset(const Net& net, const Marking& reset_marking, const Rational& tr) {
    if (reset_marking.size() > net.places.size()) {
        throw Error(Errc::InvalidMarking, "reset marking references unknown places");
    }
    if (tr < 0) {
        throw Error(Errc::InvalidMarking, "negative reset duration");
    }
    Net out = net;
    auto unique = [&](std::string base) {
        std::string n = base;
        for (int i = 1; out.place_index(n) || out.transition_index(n); ++i) {
            n = base + std::to_string(i);
        }
        return n;
    };
    std::size_t q = out.add_place(unique("q_reset"));
    Transition reset;
    reset.name = unique("reset");
    reset.label = ActionLabel::output("reset");
    reset.interval = TimeInterval::at_least(0);
    for (std::size_t p = 0; p < reset_marking.size(); ++p) {
        if (reset_marking[p] > 0) {
            reset.pre.push_back({p, reset_marking[p]});
        }
    }
    reset.post.push_back({q, 1});
    out.add_transition(std::move(reset));

    Transition back;
    back.name = unique("reset_back");
    back.label = ActionLabel::internal();
    back.interval = TimeInterval::point(tr);
    back.pre.push_back({q, 1});
    for (std::size_t p = 0; p < net.places.size(); ++p) {
        if (p < net.initial.size() && net.initial[p] > 0) {
            back.post.push_back({p, net.initial[p]});
        }
    }
    out.add_transition(std::move(back));
    return out;
}

}  // namespace tptest
