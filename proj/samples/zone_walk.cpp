// Copyright (c) tptest contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Prints the state class graph of a composed system with firing domains.
#include <fstream>
#include <iostream>
#include <sstream>

#include "tptest/tptest.hpp"

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: " << argv[0] << " <sut.net> <env.net>\n";
        return 2;
    }
    auto load = [](const char* path) {
        std::ifstream in(path);
        std::stringstream buf;
        buf << in.rdbuf();
        return tptest::parse_net(buf.str(), path);
    };
    try {
        tptest::ComposedSystem sys = tptest::compose(load(argv[1]), load(argv[2]));
        tptest::ClassGraph g = tptest::build_sscg(sys);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const tptest::StateClass& c = g.classes[i];
            std::cout << "c" << i << " {" << sys.net.format_marking(c.marking) << "}\n";
            for (const std::string& line : tptest::describe_domain(sys, c, tptest::firing_domain(sys, c))) {
                std::cout << "  " << line << "\n";
            }
            for (std::size_t e : g.out[i]) {
                std::cout << "  -> c" << g.edges[e].to << " on " << tptest::move_name(sys, g.edges[e].move) << "\n";
            }
        }
    } catch (const tptest::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
