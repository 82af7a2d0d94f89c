// Copyright (c) tptest contributors.
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>

#include "support.hpp"

using namespace tptest;
using namespace tptest::fixtures;

namespace {

struct M1 : ::testing::Test {
    ComposedSystem sys = system("light_controller.net", "user_e1.net");
    std::size_t t(const std::string& n) const { return *sys.net.transition_index(n); }
};

/// Literal reading of firability, written over label sets rather than the
/// library's helpers: a transition may fire when 0 is in its interval and no
/// higher-priority transition of its side could fire right now.
std::vector<Move> literal_fireable(const ComposedSystem& sys, const State& e, bool naive) {
    auto ready = [&](std::size_t k) {
        auto it = e.intervals.find(k);
        return it != e.intervals.end() && it->second.contains(Rational(0));
    };
    auto can_go = [&](std::size_t k) {
        if (!ready(k)) return false;
        if (naive || !sys.transition(k).label.observable()) return true;
        return std::any_of(sys.partners[k].begin(), sys.partners[k].end(), ready);
    };
    auto blocked = [&](std::size_t t) {
        for (std::size_t k = 0; k < sys.net.transitions.size(); ++k) {
            const auto& hi = sys.higher[t];
            if (std::find(hi.begin(), hi.end(), k) != hi.end() && sys.side[k] == sys.side[t] && can_go(k)) {
                return true;
            }
        }
        return false;
    };
    std::vector<Move> out;
    for (const auto& [t, is] : e.intervals) {
        if (!ready(t) || blocked(t)) continue;
        const ActionLabel& l = sys.transition(t).label;
        if (!l.observable()) {
            out.push_back(Move::internal(t));
        } else if (sys.is_sut(t)) {
            for (std::size_t u : sys.partners[t]) {
                if (ready(u) && !blocked(u)) out.push_back(Move::sync(t, u));
            }
        }
    }
    return out;
}

}  // namespace

TEST_F(M1, InitialStateUsesStaticIntervals) {
    State e = initial_state(sys);
    ASSERT_EQ(e.intervals.size(), 3u);
    EXPECT_EQ(e.intervals.at(t("t8")), TimeInterval::at_least(Rational(20)));
}

TEST_F(M1, DelayShiftsIntervals) {
    State e = elapse(sys, initial_state(sys), Rational(9, 10));
    EXPECT_EQ(e.intervals.at(t("t8")).lower, Rational(191, 10));
    EXPECT_EQ(e.intervals.at(t("t0")).lower, Rational(0));
}

TEST_F(M1, NewlyEnabledTransitionGetsStaticInterval) {
    State e = fire_sync(sys, initial_state(sys), t("t0"), t("s0"));
    EXPECT_EQ(e.intervals.at(t("t1")), TimeInterval::point(Rational(0)));
    EXPECT_FALSE(can_elapse(e, Rational(1, 100)));
}

TEST_F(M1, PriorityPreemptsIdleTouchAfterTidle) {
    State e = elapse(sys, initial_state(sys), Rational(20));
    auto moves = fireable(sys, e);
    EXPECT_TRUE(std::find(moves.begin(), moves.end(), Move::sync(t("t8"), t("s0"))) != moves.end());
    EXPECT_TRUE(std::find(moves.begin(), moves.end(), Move::sync(t("t0"), t("s0"))) == moves.end());
    EXPECT_THROW(fire_sync(sys, e, t("t0"), t("s0")), Error);
}

TEST_F(M1, FireableMatchesLiteralReadingOnRandomStates) {
    for (bool naive : {false, true}) {
        SemanticsOptions opts;
        opts.naive_priority = naive;
        for (const State& e : random_states(sys, 600, naive ? 5 : 6, opts)) {
            EXPECT_EQ(fireable(sys, e, opts), literal_fireable(sys, e, naive));
        }
    }
}

TEST(Semantics, DischargeableVersusNaivePriority) {
    // hi has priority over lo but its partner never becomes ready.
    Net sut = parse_net("pl a (1)\ntr lo : tau [0,w[ a -> a\ntr hi : go? [0,w[ a -> a\npr lo < hi\n", "sut");
    Net env = parse_net("pl b (1)\ntr g : go! [5,5] b -> b\n", "env");
    ComposedSystem sys = compose(sut, env);
    State e = initial_state(sys);
    EXPECT_EQ(fireable(sys, e), std::vector<Move>{Move::internal(0)});
    SemanticsOptions naive;
    naive.naive_priority = true;
    EXPECT_TRUE(fireable(sys, e, naive).empty());
}

TEST_F(M1, TtsAxiomsOnRandomStates) {
    std::vector<State> states = random_states(sys, 300, 21);
    ComposedSystem sys2 = system("light_controller.net", "user_e2_pause.net");
    std::vector<State> more = random_states(sys2, 300, 22);
    ASSERT_GE(states.size() + more.size(), 500u);
    auto a = check_tts_axioms(sys, states, 1);
    EXPECT_FALSE(a) << *a;
    auto b = check_tts_axioms(sys2, more, 2);
    EXPECT_FALSE(b) << *b;
}

TEST_F(M1, SixStepCycleReplays) {
    Schedule w = parse_schedule(sys, "20@(t8,s0) 20@(t11,s3) 25@(t9,s1) 25@(t10,s2) 29@(t2,s1) 29@(t3,s4)");
    RunResult r = run(sys, w);
    EXPECT_TRUE(r.ok) << r.reason;
    EXPECT_EQ(sys.project_sut(r.state.marking), sys.project_sut(sys.initial_marking()));
}

TEST_F(M1, EarlyTouchIsRejected) {
    RunResult r = run(sys, parse_schedule(sys, "19@(t8,s0)"));
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(r.failed_index, 0u);
}

TEST_F(M1, UrgentOutputBlocksTime) {
    RunResult r = run(sys, parse_schedule(sys, "0@(t0,s0) 1@(t1,s2)"));
    EXPECT_FALSE(r.ok);
}

TEST_F(M1, MoveNamesRoundTrip) {
    Move m = Move::sync(t("t8"), t("s0"));
    EXPECT_EQ(move_name(sys, m), "t8,s0");
    EXPECT_EQ(move_label(sys, m), "(touch?,touch!)");
    EXPECT_EQ(parse_move(sys, "(t8,s0)"), m);
    EXPECT_THROW(parse_move(sys, "nope"), Error);
}

TEST(Semantics, OpenModeFiresSutObservablesAlone) {
    ComposedSystem u = universal_system(fixtures::model("light_controller.net"));
    SemanticsOptions open;
    open.open = true;
    auto moves = fireable(u, initial_state(u), open);
    ASSERT_EQ(moves.size(), 1u);
    EXPECT_EQ(moves[0].kind, Move::Kind::Open);
    State e = apply(u, initial_state(u), moves[0], open);
    EXPECT_EQ(u.net.format_marking(e.marking), "p1");
}
