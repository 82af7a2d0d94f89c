// Copyright (c) tptest contributors.
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace tptest;
using namespace tptest::fixtures;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "tptest");
    std::vector<const char*> argv;
    for (const std::string& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out, err;
    Result r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string temp_file(const std::string& name, const std::string& content) {
    std::string path = ::testing::TempDir() + name;
    std::ofstream(path) << content;
    return path;
}

const std::string kCtl = model_path("light_controller.net");
const std::string kE1 = model_path("user_e1.net");

}  // namespace

TEST(Cli, ParsePrintsCanonicalText) {
    Result r = invoke({"parse", kCtl});
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(structurally_equal(parse_net(r.out), model("light_controller.net")));
    EXPECT_EQ(invoke({"parse", kCtl}).out, r.out);
}

TEST(Cli, ParseErrorsExitWithTwo) {
    Result r = invoke({"parse", temp_file("bad.net", "pl a (1)\ntr x : go? [3,1] a -> a\n")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("2:"), std::string::npos) << r.err;
    EXPECT_EQ(invoke({"parse", "/nonexistent/file.net"}).code, 2);
    EXPECT_EQ(invoke({}).code, 2);
    EXPECT_EQ(invoke({"frobnicate"}).code, 2);
    EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST(Cli, ReachAndCover) {
    Result reach = invoke({"check", kCtl, kE1, "--reach", "place=BRIGHT"});
    EXPECT_EQ(reach.code, 0);
    EXPECT_EQ(reach.out, "reachable\nt8,s0 t11,s3\n");
    Result cover = invoke({"check", kCtl, kE1, "--cover", "transitions"});
    EXPECT_EQ(cover.code, 0);
    EXPECT_EQ(cover.out.rfind("coverable", 0), 0u);
}

TEST(Cli, DieouExitCodes) {
    EXPECT_EQ(invoke({"check", kCtl, "--dieou"}).code, 0);
    Result lazy = invoke({"check", model_path("dieou_lazy_output.net"), "--dieou"});
    EXPECT_EQ(lazy.code, 1);
    EXPECT_NE(lazy.out.find("output urgency: FAIL"), std::string::npos) << lazy.out;
}

TEST(Cli, PlanPrintsTheFastestSchedule) {
    Result r = invoke({"plan", kCtl, kE1, "t8,s0", "t11,s3"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("20@(t8,s0) 20@(t11,s3)"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("accumulated 20"), std::string::npos);
    Result bad = invoke({"plan", kCtl, kE1, "t1,s2"});
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.out.find("infeasible"), std::string::npos);
}

TEST(Cli, GentestThenRun) {
    std::string suite = ::testing::TempDir() + "statements.json";
    Result gen = invoke({"gentest", kCtl, kE1, "--purpose", "cover:statements", "--optimize", "shortest", "-o", suite});
    ASSERT_EQ(gen.code, 0) << gen.err;
    EXPECT_NE(gen.out.find("0@touch! 0@dim? 4@touch! 4@off? 24@touch! 24@bright?"), std::string::npos) << gen.out;

    Result pass = invoke({"run", suite, kCtl});
    EXPECT_EQ(pass.code, 0);
    EXPECT_EQ(pass.out, "CASE tc1 PASS at=24 reason=complete\n");

    Result fail = invoke({"run", suite, kCtl, "--mutate", "shift:t8:+1:+0"});
    EXPECT_EQ(fail.code, 1);
    EXPECT_EQ(fail.out, "CASE tc1 FAIL at=24 reason=unexpected:dim!@step6\n");

    EXPECT_EQ(invoke({"run", suite, kCtl, "--mutate", "shift:t99:+1:+0"}).code, 2);
}

TEST(Cli, GentestIsDeterministic) {
    std::vector<std::string> args{"gentest", kCtl, model_path("user_e2_pause.net"), "--purpose", "cover:transitions"};
    Result a = invoke(args);
    Result b = invoke(args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out.find("\"accumulated\": 34"), std::string::npos) << a.out;
}

TEST(Cli, GentestWithResets) {
    std::string sut = temp_file("fork.net", "pl p0 (1)\npl p1\npl p2\ntr a : go? [0,w[ p0 -> p1\ntr b : go? [1,w[ p0 -> p2\n");
    std::string env = temp_file("fork_env.net", "pl e (1)\ntr u : go! [0,w[ e -> e\n");
    Result stuck = invoke({"gentest", sut, env, "--purpose", "cover:transitions"});
    EXPECT_EQ(stuck.code, 2);
    EXPECT_NE(stuck.err.find("Uncoverable"), std::string::npos) << stuck.err;
    Result r = invoke({"gentest", sut, env, "--purpose", "cover:transitions", "--reset-anywhere", "--reset-time", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("\"resets\": 1"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("\"accumulated\": 4"), std::string::npos) << r.out;
}

TEST(Cli, MutateAndTioco) {
    Result m = invoke({"mutate", kCtl, "shift:t8:+1:+0"});
    ASSERT_EQ(m.code, 0);
    EXPECT_NE(m.out.find("tr t8 : touch? [21,w["), std::string::npos) << m.out;
    std::string mutant = temp_file("idle21.net", m.out);
    Result t = invoke({"tioco-bounded", kCtl, mutant});
    EXPECT_EQ(t.code, 1);
    EXPECT_NE(t.out.find("counterexample: 20 touch? 20 dim!"), std::string::npos) << t.out;
    Result same = invoke({"tioco-bounded", kCtl, kCtl, "--horizon", "25"});
    EXPECT_EQ(same.code, 0);
    EXPECT_EQ(invoke({"mutate", kCtl, "flip:t8:t0"}).code, 2);
}

TEST(Cli, DotOutput) {
    Result net = invoke({"dot", kCtl});
    EXPECT_EQ(net.code, 0);
    EXPECT_EQ(net.out.rfind("digraph", 0), 0u);
    Result graph = invoke({"dot", kCtl, kE1, "--sscg"});
    EXPECT_EQ(graph.code, 0);
    EXPECT_NE(graph.out.find("->"), std::string::npos);
}

TEST(Cli, SscgSummary) {
    Result r = invoke({"sscg", kCtl, kE1});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("classes ", 0), 0u);
    EXPECT_NE(r.out.find("20 <= t8 < w"), std::string::npos);
}
