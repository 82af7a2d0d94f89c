// Copyright (c) tptest contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Generates a transition-covering suite for a SUT/environment pair and runs
// it against the SUT and a mutant.
//
//   generate_and_run <sut.net> <env.net> [mutation]
#include <fstream>
#include <iostream>
#include <sstream>

#include "tptest/tptest.hpp"

namespace {

tptest::Net load(const char* path) {
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    return tptest::parse_net(buf.str(), path);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: " << argv[0] << " <sut.net> <env.net> [mutation]\n";
        return 2;
    }
    try {
        tptest::Net sut = load(argv[1]);
        tptest::ComposedSystem sys = tptest::compose(sut, load(argv[2]));
        tptest::TestSuite suite = tptest::generate(sys, tptest::Criterion::Transition);
        for (const tptest::TestCase& c : suite.cases) {
            std::cout << c.id << ": " << tptest::format_sequence(c.sequence) << "\n";
        }
        std::cout << "accumulated " << tptest::to_string(suite.accumulated()) << "\n";

        tptest::Net target = argc > 3 ? tptest::mutate(sut, tptest::Mutation::parse(argv[3])) : sut;
        int failed = 0;
        for (const tptest::TestCase& c : suite.cases) {
            tptest::Verdict v = tptest::run_test(c, target);
            std::cout << tptest::verdict_line(c.id, v) << "\n";
            failed += v.outcome == tptest::Outcome::Fail;
        }
        return failed ? 1 : 0;
    } catch (const tptest::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
