// Copyright (c) tptest contributors.
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "support.hpp"

using namespace tptest;
using namespace tptest::fixtures;

namespace {

const std::vector<ActionLabel> kOutputs{ActionLabel::output("dim"), ActionLabel::output("bright"), ActionLabel::output("off")};

TestCase case_of(const std::string& text, const Rational& slack = Rational(0), const Rational& window = Rational(0),
                 const std::vector<ActionLabel>& outputs = kOutputs) {
    TestSequence s;
    std::istringstream in(text);
    std::string item;
    while (in >> item) {
        auto at = item.find('@');
        s.steps.push_back({parse_rational(item.substr(0, at)), ActionLabel::parse(item.substr(at + 1))});
    }
    return make_test_case("tc1", s, outputs, slack, window);
}

// Accepts touch? and answers bright! exactly two units later.
Net slow_bright() {
    return parse_net("pl a (1)\npl b\ntr x : touch? [0,w[ a -> b\ntr y : bright! [2,2] b -> a\n", "slow");
}

}  // namespace

TEST(Harness, ReferencePassesIdleTest) {
    Verdict v = run_test(case_of("20@touch! 20@bright?"), model("light_controller.net"));
    EXPECT_EQ(verdict_line("tc1", v), "CASE tc1 PASS at=20 reason=complete");
    EXPECT_FALSE(v.witness.steps.empty());
}

TEST(Harness, LongerIdleMutantAnswersDim) {
    Net mutant = mutate(model("light_controller.net"), Mutation::shift("t8", Rational(1), Rational(0)));
    Verdict v = run_test(case_of("20@touch! 20@bright?"), mutant);
    EXPECT_EQ(v.outcome, Outcome::Fail);
    EXPECT_EQ(v.reason, "unexpected:dim!@step2");
    EXPECT_EQ(v.at, Rational(20));
    EXPECT_EQ(v.step, 2u);
}

TEST(Harness, ShorterSwitchMutantTurnsOff) {
    TestCase tc = case_of("0@touch! 0@dim? 3@touch! 3@bright?");
    EXPECT_EQ(run_test(tc, model("light_controller.net")).outcome, Outcome::Pass);
    Net mutant = mutate(model("light_controller.net"), Mutation::shift("t2", Rational(-1), Rational(0)));
    Verdict v = run_test(tc, mutant);
    EXPECT_EQ(v.outcome, Outcome::Fail);
    EXPECT_EQ(v.reason, "unexpected:off!@step4");
    EXPECT_EQ(v.at, Rational(3));
}

TEST(Harness, TimingVerdicts) {
    Net sut = slow_bright();
    const std::vector<ActionLabel> out{ActionLabel::output("bright")};
    auto run = [&](const std::string& text, int slack = 0, int window = 0) {
        return run_test(case_of(text, Rational(slack), Rational(window), out), sut);
    };
    EXPECT_EQ(run("0@touch! 2@bright?").outcome, Outcome::Pass);

    Verdict timeout = run("0@touch! 0@bright?");
    EXPECT_EQ(timeout.reason, "timeout:bright!@step2");
    EXPECT_EQ(timeout.at, Rational(0));

    EXPECT_EQ(run("0@touch! 0@bright?", 0, 3).outcome, Outcome::Pass);

    Verdict early = run("0@touch! 5@bright?");
    EXPECT_EQ(early.reason, "early:bright!@step2");
    EXPECT_EQ(early.at, Rational(2));

    Verdict late = run("0@touch! 0@bright?", 5, 1);
    EXPECT_EQ(late.reason, "late:bright!@step2");
    EXPECT_EQ(late.at, Rational(2));
}

TEST(Harness, SilentSutTimesOut) {
    // y is never enabled.
    Net sut = parse_net("pl a (1)\npl z\ntr x : touch? [0,w[ a -> a\ntr y : dim! [0,0] z -> z\n", "mute");
    Verdict v = run_test(case_of("1@touch! 1@dim?", Rational(4), Rational(0), {ActionLabel::output("dim")}), sut);
    EXPECT_EQ(v.outcome, Outcome::Fail);
    EXPECT_EQ(v.reason, "timeout:dim!@step2");
    EXPECT_EQ(v.at, Rational(5));
}

TEST(Harness, RefusedStimulusIsNotAPass) {
    // The SUT cannot take the stimulus: the run stalls instead of passing.
    Net sut = parse_net("pl a (1)\npl b\ntr x : press? [0,w[ b -> b\n", "deaf");
    Verdict v = run_test(case_of("0@press!", Rational(0), Rational(0), {}), sut);
    EXPECT_NE(v.outcome, Outcome::Pass);
}

TEST(Harness, MutationTextRoundTrip) {
    for (const char* text : {"shift:t2:-1:+0", "shift:t8:+1/2:+3", "flip:t0:t8", "swap:t1:t5", "drop:t0:p1"}) {
        EXPECT_EQ(Mutation::parse(text).to_string(), text);
    }
    for (const char* bad : {"shift:t2:1", "flip:t0", "grow:t0:t1", "", "shift:t2:x:0"}) {
        EXPECT_THROW(Mutation::parse(bad), Error) << bad;
    }
}

TEST(Harness, MutationsChangeOneThing) {
    Net ref = model("light_controller.net");
    Net shifted = mutate(ref, Mutation::parse("shift:t2:-1:+0"));
    EXPECT_EQ(shifted.transitions[2].static_interval().lower, Rational(3));
    EXPECT_FALSE(shifted.transitions[2].static_interval().upper);

    Net flipped = mutate(ref, Mutation::flip("t0", "t8"));
    EXPECT_EQ(flipped.priorities[0], std::make_pair(std::size_t{8}, std::size_t{0}));

    Net swapped = mutate(ref, Mutation::swap("t1", "t5"));
    EXPECT_EQ(swapped.transitions[1].label, ActionLabel::output("bright"));
    EXPECT_EQ(swapped.transitions[5].label, ActionLabel::output("dim"));

    Net dropped = mutate(ref, Mutation::drop("t0", "p1"));
    EXPECT_TRUE(dropped.transitions[0].post.empty());
    EXPECT_EQ(dropped.transitions[0].pre.size(), 1u);

    for (const Net* n : {&shifted, &flipped, &swapped, &dropped}) {
        EXPECT_FALSE(structurally_equal(*n, ref));
    }
}

TEST(Harness, InvalidMutations) {
    Net ref = model("light_controller.net");
    for (const char* bad : {"shift:t99:+1:+1", "shift:t1:-1:+0", "shift:t1:+2:+0", "flip:t8:t0", "flip:t1:t2", "swap:t1:t1",
                            "drop:t0:p5", "drop:t0:nowhere"}) {
        try {
            mutate(ref, Mutation::parse(bad));
            ADD_FAILURE() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::InvalidMutation) << bad;
        }
    }
}

TEST(Harness, TiocoOnTheIdleMutant) {
    Net ref = model("light_controller.net");
    Net idle21 = mutate(ref, Mutation::shift("t8", Rational(1), Rational(0)));
    EXPECT_TRUE(bounded_tioco_check(ref, ref, Rational(30)).consistent);
    TiocoResult r = bounded_tioco_check(ref, idle21, Rational(30));
    EXPECT_FALSE(r.consistent);
    EXPECT_EQ(format_trace(r.counterexample), "20 touch? 20 dim!");
    TiocoResult back = bounded_tioco_check(idle21, ref, Rational(30));
    EXPECT_FALSE(back.consistent);
    EXPECT_EQ(format_trace(back.counterexample), "20 touch? 20 bright!");
}

TEST(Harness, TiocoSeesMissingOutputs) {
    Net spec = slow_bright();
    Net slower = mutate(spec, Mutation::shift("y", Rational(1), Rational(1)));
    TiocoResult r = bounded_tioco_check(spec, slower, Rational(10));
    EXPECT_FALSE(r.consistent);
    ASSERT_FALSE(r.counterexample.empty());
    EXPECT_FALSE(r.counterexample.back().action);
    EXPECT_NE(format_trace(r.counterexample).find("delay"), std::string::npos);
    // Outputs inside the specified window are fine.
    Net wide = parse_net("pl a (1)\npl b\ntr x : touch? [0,w[ a -> b\ntr y : bright! [1,3] b -> a\n", "wide");
    EXPECT_TRUE(bounded_tioco_check(wide, spec, Rational(10)).consistent);
    EXPECT_FALSE(bounded_tioco_check(spec, wide, Rational(10)).consistent);
}

TEST(Harness, TiocoGranularity) {
    Net a = parse_net("pl p (1)\ntr x : go? [1/3,w[ p -> p\n", "a");
    Net b = parse_net("pl p (1)\ntr x : go? [1/2,2] p -> p\n", "b");
    EXPECT_EQ(default_granularity(a, b), Rational(1, 12));
    EXPECT_THROW(bounded_tioco_check(a, a, Rational(5), Rational(0)), Error);
}

TEST(Harness, KilledMutantsAreNotConforming) {
    ComposedSystem sys = system("light_controller.net", "user_e1.net");
    ClassGraph g = build_sscg(sys);
    GenerateOptions opts;
    opts.optimize = Optimize::ShortestThenFastest;
    TestSuite suite = generate(sys, g, goal_from_criterion(sys, Criterion::Statement, g), opts);
    Net ref = model("light_controller.net");
    for (const char* m : {"shift:t2:-1:+0", "shift:t8:+1:+0", "shift:t2:+1:+0", "flip:t0:t8", "swap:t1:t5", "drop:t0:p1"}) {
        Net mutant = mutate(ref, Mutation::parse(m));
        bool killed = false;
        for (const TestCase& c : suite.cases) {
            killed = killed || run_test(c, mutant).outcome == Outcome::Fail;
        }
        if (killed) {
            EXPECT_FALSE(bounded_tioco_check(ref, mutant, Rational(40)).consistent) << m;
        }
    }
}
