// Copyright (c) tptest contributors.
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cctype>
#include <set>

#include "support.hpp"

using namespace tptest;
using namespace tptest::fixtures;

TEST(Format, ParsesPlaceAndTransition) {
    Net n = parse_net("pl OFF (1)\npl BRIGHT\ntr t8 : touch? [20,w[ OFF -> BRIGHT\n");
    ASSERT_EQ(n.places.size(), 2u);
    EXPECT_EQ(n.initial[0], 1u);
    ASSERT_EQ(n.transitions.size(), 1u);
    const Transition& t = n.transitions[0];
    EXPECT_EQ(t.label, ActionLabel::input("touch"));
    EXPECT_EQ(t.static_interval(), TimeInterval::at_least(Rational(20)));
    EXPECT_EQ(t.pre.size(), 1u);
    EXPECT_EQ(t.post[0].place, 1u);
}

TEST(Format, RationalsStayExact) {
    Net n = parse_net("pl a (1)\ntr x : tau [0.9,9/4] a -> a\n");
    EXPECT_EQ(n.transitions[0].static_interval().lower, Rational(9, 10));
    std::string text = serialize_net(n);
    EXPECT_NE(text.find("[9/10,9/4]"), std::string::npos) << text;
}

TEST(Format, IntervalBrackets) {
    Net n = parse_net("pl a (1)\ntr x : tau ]1,3[ a -> a\ntr y : tau ]0,w[ a -> a\n");
    TimeInterval x = n.transitions[0].static_interval();
    EXPECT_TRUE(x.lower_strict);
    EXPECT_TRUE(x.upper_strict);
    EXPECT_EQ(serialize_net(parse_net(serialize_net(n))), serialize_net(n));
}

TEST(Format, ArcWeights) {
    Net n = parse_net("pl a (2)\npl b\ntr x : tau [0,0] a*2 -> b*3\n");
    EXPECT_EQ(n.transitions[0].pre[0].weight, 2u);
    EXPECT_EQ(n.transitions[0].post[0].weight, 3u);
}

namespace {

Errc code_of(const std::string& text, std::size_t* line = nullptr) {
    try {
        parse_net(text);
    } catch (const ParseError& e) {
        if (line) {
            *line = e.line();
        }
        return e.code();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error for: " << text;
    return Errc::Syntax;
}

}  // namespace

TEST(Format, ReportsErrorsWithPosition) {
    std::size_t line = 0;
    EXPECT_EQ(code_of("pl a (1)\ntr x : go? [0,w[ a -> nowhere\n", &line), Errc::Syntax);
    EXPECT_EQ(line, 2u);
    EXPECT_EQ(code_of("pl a\npl a\n"), Errc::DuplicateIdentifier);
    EXPECT_EQ(code_of("pl a (1)\ntr x : go? a -> a\n"), Errc::Syntax);
    EXPECT_EQ(code_of("pl a (1)\ntr x : go? [3,2] a -> a\n"), Errc::Syntax);
    EXPECT_EQ(code_of("pl a (1)\ntr x : go? [0,w] a -> a\n"), Errc::Syntax);
    EXPECT_EQ(code_of("pl a (1)\ntr x : go? [0,1] a -> a\npr x < y\n"), Errc::Syntax);
    EXPECT_EQ(code_of("pl a (1)\nfoo\n"), Errc::Syntax);
}

TEST(Format, CommentsAndBlankLines) {
    Annotations ann;
    Net n = parse_net("# pass: P\n\npl P (1) # trailing\n", "n", &ann);
    EXPECT_EQ(n.places.size(), 1u);
    ASSERT_EQ(ann.size(), 1u);
    EXPECT_EQ(ann[0].first, "pass");
    EXPECT_EQ(ann[0].second, "P");
}

TEST(Format, RoundTripsEveryBundledNet) {
    for (const std::string& f : bundled_models()) {
        auto problem = check_roundtrip(f);
        EXPECT_FALSE(problem) << *problem;
    }
}

TEST(Format, SchedulesRoundTrip) {
    ComposedSystem sys = system("light_controller.net", "user_e1.net");
    std::string text = "20@(t8,s0) 20@(t11,s3)";
    EXPECT_EQ(format_schedule(sys, parse_schedule(sys, text)), text);
    EXPECT_THROW(parse_schedule(sys, "20(t8,s0)"), Error);
    EXPECT_THROW(parse_schedule(sys, "20@(t8,zz)"), Error);
}

namespace {

/// Minimal DOT checker: digraph header, balanced braces, ';'-terminated
/// statements, quoted strings closed, edges between declared nodes.
std::optional<std::string> dot_problem(const std::string& dot) {
    std::vector<std::string> tok;
    for (std::size_t i = 0; i < dot.size();) {
        char c = dot[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '"') {
            std::size_t j = i + 1;
            while (j < dot.size() && dot[j] != '"') {
                j += dot[j] == '\\' ? 2 : 1;
            }
            if (j >= dot.size()) {
                return "unterminated string";
            }
            tok.push_back(dot.substr(i, j - i + 1));
            i = j + 1;
        } else if (dot.compare(i, 2, "->") == 0) {
            tok.push_back("->");
            i += 2;
        } else if (std::string("{}[];=,").find(c) != std::string::npos) {
            tok.push_back(std::string(1, c));
            ++i;
        } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-') {
            std::size_t j = i;
            while (j < dot.size() && (std::isalnum(static_cast<unsigned char>(dot[j])) || dot[j] == '_' || dot[j] == '.')) {
                ++j;
            }
            tok.push_back(dot.substr(i, j - i));
            i = j;
        } else {
            return std::string("unexpected character ") + c;
        }
    }
    if (tok.size() < 4 || tok[0] != "digraph" || tok[2] != "{" || tok.back() != "}") {
        return "bad header or trailer";
    }
    std::set<std::string> nodes;
    std::vector<std::pair<std::string, std::string>> edges;
    std::size_t i = 3;
    auto skip_attrs = [&]() -> bool {
        if (tok[i] != "[") {
            return true;
        }
        ++i;
        while (i < tok.size() && tok[i] != "]") {
            if (i + 2 >= tok.size() || tok[i + 1] != "=") {
                return false;
            }
            i += 3;
            if (tok[i] == ",") {
                ++i;
            }
        }
        ++i;
        return true;
    };
    while (i < tok.size() - 1) {
        std::string a = tok[i++];
        if (a == "node" || a == "edge" || a == "graph") {
            if (!skip_attrs()) return "bad default attributes";
        } else if (tok[i] == "=") {
            i += 2;
        } else if (tok[i] == "->") {
            std::string b = tok[i + 1];
            i += 2;
            edges.emplace_back(a, b);
            if (!skip_attrs()) return "bad edge attributes";
        } else {
            nodes.insert(a);
            if (!skip_attrs()) return "bad node attributes";
        }
        if (tok[i] != ";") {
            return "missing ';' after " + a;
        }
        ++i;
    }
    for (const auto& [a, b] : edges) {
        if (!nodes.count(a) || !nodes.count(b)) {
            return "edge " + a + " -> " + b + " uses an undeclared node";
        }
    }
    return std::nullopt;
}

}  // namespace

TEST(Format, DotExportIsWellFormed) {
    for (const std::string& f : bundled_models()) {
        auto p = dot_problem(export_dot(model(f)));
        EXPECT_FALSE(p) << f << ": " << *p;
    }
    ComposedSystem sys = system("light_controller.net", "user_e1.net");
    std::string dot = export_dot(sys, build_sscg(sys));
    auto p = dot_problem(dot);
    EXPECT_FALSE(p) << *p << "\n" << dot;
    EXPECT_NE(dot.find("peripheries=2"), std::string::npos);
}

TEST(Format, DotQuotesSpecialCharacters) { EXPECT_EQ(dot_quote("a\"b\nc"), "\"a\\\"b\\nc\""); }
