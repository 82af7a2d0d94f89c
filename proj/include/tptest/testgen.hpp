// Copyright (c) tptest contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tptest/analysis.hpp"
#include "tptest/error.hpp"
#include "tptest/net.hpp"
#include "tptest/scheduler.hpp"
#include "tptest/semantics.hpp"
#include "tptest/sscg.hpp"
#include "tptest/time.hpp"

namespace tptest {

/// One environment-side action at an absolute instant.
struct TestStep {
    Rational eta{0};
    ActionLabel action;

    friend bool operator==(const TestStep&, const TestStep&) = default;
};

struct TestSequence {
    std::vector<TestStep> steps;

    bool empty() const { return steps.empty(); }
    std::size_t size() const { return steps.size(); }
    Rational duration() const { return steps.empty() ? Rational(0) : steps.back().eta; }

    friend bool operator==(const TestSequence&, const TestSequence&) = default;
};

/// "20@touch! 20@bright?"
inline std::string format_sequence(const TestSequence& seq) {
    std::string out;
    for (const TestStep& s : seq.steps) {
        out += (out.empty() ? "" : " ") + to_string(s.eta) + "@" + s.action.to_string();
    }
    return out;
}

/// Environment view of a schedule: observable moves with the environment-side label.
inline TestSequence project_env(const ComposedSystem& sys, const Schedule& schedule) {
    TestSequence seq;
    for (const ScheduleStep& s : schedule.steps) {
        switch (s.move.kind) {
            case Move::Kind::Sync: {
                std::size_t env = sys.is_sut(s.move.t) ? s.move.partner : s.move.t;
                seq.steps.push_back({s.eta, sys.transition(env).label});
                break;
            }
            case Move::Kind::Open: seq.steps.push_back({s.eta, sys.transition(s.move.t).label.complement()}); break;
            default: break;
        }
    }
    return seq;
}

struct TestCase {
    std::string id;
    TestSequence sequence;
    /// Tester net: environment-side labels, one Pass and one Fail place.
    Net observer;
    std::string pass_place = "pass";
    std::string fail_place = "fail";
    /// Time from the start of the case to its last discrete move.
    Rational accumulated{0};
};

/// Builds the tester net for a sequence. `outputs` are the SUT output labels
/// (observed as inputs by the tester). An expected observation is accepted in
/// [eta, eta + window]; earlier or wrong outputs lead to Fail, and so does
/// silence until eta + max(window, slack). Only tester tau transitions carry
/// deadlines, so the tester never stops time on its own.
inline Net build_test_case(const TestSequence& seq, const std::vector<ActionLabel>& outputs, const Rational& timeout_slack = Rational(0),
                           const Rational& window = Rational(0)) {
    if (seq.empty()) {
        throw Error(Errc::EmptySequence, "test sequence is empty");
    }
    if (timeout_slack < 0 || window < 0) {
        throw Error(Errc::InvalidNet, "negative slack or window");
    }
    Net n;
    n.name = "tester";
    std::vector<std::size_t> chain;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        chain.push_back(n.add_place("c" + std::to_string(i), i == 0 ? 1 : 0));
    }
    std::size_t pass = n.add_place("pass");
    std::size_t fail = n.add_place("fail");
    chain.push_back(pass);

    auto add = [&](std::string name, ActionLabel label, TimeInterval is, std::size_t from, std::size_t to) {
        Transition t;
        t.name = std::move(name);
        t.label = std::move(label);
        t.interval = is;
        t.pre.push_back({from, 1});
        t.post.push_back({to, 1});
        return n.add_transition(std::move(t));
    };
    // Catch-alls for every output except `skip`, from `from` to Fail.
    auto catch_all = [&](const std::string& k, const std::string& suffix, const std::string& skip, std::size_t from) {
        std::vector<std::size_t> out;
        for (const ActionLabel& o : outputs) {
            if (o.name != skip) {
                out.push_back(add("unexpected" + k + "_" + o.name + suffix, ActionLabel::input(o.name), TimeInterval::at_least(0), from, fail));
            }
        }
        return out;
    };

    Rational prev(0);
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const TestStep& step = seq.steps[i];
        Rational delta = step.eta - prev;
        if (delta < 0) {
            throw Error(Errc::InvalidNet, "test sequence is not ordered in time");
        }
        prev = step.eta;
        std::size_t from = chain[i];
        std::size_t to = chain[i + 1];
        std::string k = std::to_string(i + 1);
        if (step.action.kind == ActionKind::Output) {
            std::size_t stim = add("send" + k, step.action, TimeInterval::point(delta), from, to);
            for (std::size_t bad : catch_all(k, "", "", from)) {
                n.priorities.emplace_back(stim, bad);
            }
            continue;
        }
        if (step.action.kind != ActionKind::Input) {
            throw Error(Errc::InvalidNet, "internal action in a test sequence");
        }
        const std::string& b = step.action.name;
        std::size_t open = from;
        std::string suffix;
        if (delta > 0) {
            open = n.add_place("o" + k);
            suffix = "_open";
            std::size_t early = add("early" + k, step.action, TimeInterval::at_least(0), from, fail);
            catch_all(k, "", b, from);
            std::size_t opening = add("open" + k, ActionLabel::internal(), TimeInterval::point(delta), from, open);
            n.priorities.emplace_back(early, opening);
        }
        std::vector<std::size_t> observing = catch_all(k, suffix, b, open);
        observing.push_back(add("expect" + k, step.action, TimeInterval::at_least(0), open, to));
        std::size_t close;
        if (timeout_slack > window) {
            std::size_t wait = n.add_place("l" + k);
            close = add("expire" + k, ActionLabel::internal(), TimeInterval::point(window), open, wait);
            std::vector<std::size_t> late = catch_all(k, "_late", b, wait);
            late.push_back(add("late" + k, step.action, TimeInterval::at_least(0), wait, fail));
            std::size_t timeout = add("timeout" + k, ActionLabel::internal(), TimeInterval::point(timeout_slack - window), wait, fail);
            for (std::size_t o : late) {
                n.priorities.emplace_back(timeout, o);
            }
        } else {
            close = add("timeout" + k, ActionLabel::internal(), TimeInterval::point(window), open, fail);
        }
        for (std::size_t o : observing) {
            n.priorities.emplace_back(close, o);
        }
    }
    return n;
}

inline TestCase make_test_case(std::string id, TestSequence seq, const std::vector<ActionLabel>& outputs,
                               const Rational& timeout_slack = Rational(0), const Rational& window = Rational(0)) {
    TestCase tc;
    tc.id = std::move(id);
    tc.observer = build_test_case(seq, outputs, timeout_slack, window);
    tc.accumulated = seq.duration();
    tc.sequence = std::move(seq);
    return tc;
}

enum class Optimize { Fastest, ShortestThenFastest };

inline std::string optimize_name(Optimize o) { return o == Optimize::Fastest ? "fastest" : "shortest-then-fastest"; }

inline Optimize parse_optimize(const std::string& s) {
    if (s == "fastest") {
        return Optimize::Fastest;
    }
    if (s == "shortest-then-fastest" || s == "shortest") {
        return Optimize::ShortestThenFastest;
    }
    throw Error(Errc::Syntax, "unknown optimization '" + s + "'");
}

struct GenerateOptions {
    Optimize optimize = Optimize::Fastest;
    Rational timeout_slack{0};
    Rational window{0};
    ResetInfo resets;
    Rational epsilon{1, 1000};
    SearchLimits search;
    std::string goal_name;
};

struct TestSuite {
    std::string goal;
    Optimize optimize = Optimize::Fastest;
    Rational timeout_slack{0};
    Rational window{0};
    /// SUT outputs, needed to rebuild testers.
    std::vector<ActionLabel> outputs;
    std::vector<TestCase> cases;
    /// Full schedules behind each case (empty for parsed suites).
    std::vector<Schedule> schedules;
    std::size_t resets = 0;
    Rational reset_time{0};

    Rational accumulated() const {
        Rational total = reset_time * static_cast<std::int64_t>(resets);
        for (const TestCase& c : cases) {
            total += c.accumulated;
        }
        return total;
    }
};

/// Supports of the plan for a goal, one per reset-separated segment.
inline CoveringPlan plan_goal(const ComposedSystem& sys, const ClassGraph& g, const Goal& goal, const GenerateOptions& opts) {
    bool exact = opts.optimize == Optimize::Fastest && !goal.uses_classes();
    if (exact) {
        if (!coverable(sys, g, goal, opts.resets)) {
            find_covering_plan(sys, g, goal, opts.resets);  // throws with the dead atoms
            throw Error(Errc::Uncoverable, "goal cannot be met");
        }
        return find_fastest(sys, goal, opts.resets, {}, opts.search).plan;
    }
    if (goal.mode == GoalMode::ReachAny) {
        auto w = find_witness(sys, g, goal);
        if (!w) {
            find_covering_plan(sys, g, goal, opts.resets);
            throw Error(Errc::Uncoverable, "goal cannot be met");
        }
        return CoveringPlan{{*w}};
    }
    return find_covering_plan(sys, g, goal, opts.resets);
}

/// Plans, schedules and projects one test case per segment.
inline TestSuite generate(const ComposedSystem& sys, const ClassGraph& g, const Goal& goal, const GenerateOptions& opts = {}) {
    CoveringPlan plan = plan_goal(sys, g, goal, opts);
    TestSuite suite;
    suite.goal = opts.goal_name;
    suite.optimize = opts.optimize;
    suite.timeout_slack = opts.timeout_slack;
    suite.window = opts.window;
    suite.outputs = sys.sut.alphabet(ActionKind::Output);
    suite.reset_time = opts.resets.duration;
    suite.resets = plan.resets();
    for (std::size_t i = 0; i < plan.segments.size(); ++i) {
        FastestSchedule fs = fastest_schedule(sys, plan.segments[i], {}, opts.epsilon);
        TestSequence seq = project_env(sys, fs.schedule);
        Rational total = fs.schedule.steps.empty() ? Rational(0) : fs.schedule.steps.back().eta;
        if (seq.empty()) {
            // Nothing to observe: the segment only lets time pass.
            suite.cases.emplace_back();
            suite.cases.back().id = "tc" + std::to_string(i + 1);
            suite.cases.back().accumulated = total;
        } else {
            suite.cases.push_back(make_test_case("tc" + std::to_string(i + 1), std::move(seq), suite.outputs, opts.timeout_slack, opts.window));
            suite.cases.back().accumulated = total;
        }
        suite.schedules.push_back(std::move(fs.schedule));
    }
    return suite;
}

inline TestSuite generate(const ComposedSystem& sys, Criterion c, const GenerateOptions& opts = {}, const SscgLimits& limits = {}) {
    ClassGraph g = build_sscg(sys, limits);
    Goal goal = goal_from_criterion(sys, c, g);
    return generate(sys, g, goal, opts);
}

}  // namespace tptest
