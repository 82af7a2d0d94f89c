// Copyright (c) tptest contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include <json.hpp>

#include "tptest/error.hpp"
#include "tptest/testgen.hpp"
#include "tptest/time.hpp"

namespace tptest {

namespace detail {

inline nlohmann::ordered_json time_json(const Rational& r) {
    if (r.denominator() == 1) {
        return r.numerator();
    }
    return to_string(r);
}

inline Rational time_from_json(const nlohmann::json& j) {
    if (j.is_number_integer()) {
        return Rational(j.get<std::int64_t>());
    }
    if (j.is_string()) {
        return parse_rational(j.get<std::string>());
    }
    throw Error(Errc::Syntax, "time must be an integer or a \"n/d\" string");
}

}  // namespace detail

/// Deterministic JSON rendering of a suite.
inline std::string export_suite(const TestSuite& suite) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["format"] = "tptest-suite/1";
    j["goal"] = suite.goal;
    j["optimize"] = optimize_name(suite.optimize);
    j["timeout_slack"] = detail::time_json(suite.timeout_slack);
    j["window"] = detail::time_json(suite.window);
    ordered_json outputs = ordered_json::array();
    for (const ActionLabel& l : suite.outputs) {
        outputs.push_back(l.to_string());
    }
    j["outputs"] = outputs;
    ordered_json cases = ordered_json::array();
    for (std::size_t i = 0; i < suite.cases.size(); ++i) {
        const TestCase& c = suite.cases[i];
        ordered_json jc;
        jc["id"] = c.id;
        jc["after_reset"] = i > 0;
        ordered_json steps = ordered_json::array();
        for (const TestStep& s : c.sequence.steps) {
            steps.push_back({{"time", detail::time_json(s.eta)}, {"action", s.action.to_string()}});
        }
        jc["steps"] = steps;
        jc["accumulated"] = detail::time_json(c.accumulated);
        cases.push_back(jc);
    }
    j["cases"] = cases;
    j["resets"] = suite.resets;
    j["reset_time"] = detail::time_json(suite.reset_time);
    j["accumulated"] = detail::time_json(suite.accumulated());
    return j.dump(2) + "\n";
}

/// Reads a suite back; testers are rebuilt from the steps.
inline TestSuite parse_suite(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::Syntax, std::string("suite: ") + e.what());
    }
    try {
        TestSuite s;
        s.goal = j.value("goal", "");
        s.optimize = parse_optimize(j.value("optimize", "fastest"));
        s.timeout_slack = j.contains("timeout_slack") ? detail::time_from_json(j["timeout_slack"]) : Rational(0);
        s.window = j.contains("window") ? detail::time_from_json(j["window"]) : Rational(0);
        for (const auto& o : j.at("outputs")) {
            s.outputs.push_back(ActionLabel::parse(o.get<std::string>()));
        }
        for (const auto& jc : j.at("cases")) {
            TestSequence seq;
            for (const auto& st : jc.at("steps")) {
                seq.steps.push_back({detail::time_from_json(st.at("time")), ActionLabel::parse(st.at("action").get<std::string>())});
            }
            std::string id = jc.value("id", "tc" + std::to_string(s.cases.size() + 1));
            if (seq.empty()) {
                TestCase c;
                c.id = id;
                s.cases.push_back(std::move(c));
            } else {
                s.cases.push_back(make_test_case(id, std::move(seq), s.outputs, s.timeout_slack, s.window));
            }
            if (jc.contains("accumulated")) {
                s.cases.back().accumulated = detail::time_from_json(jc["accumulated"]);
            }
        }
        s.resets = j.value("resets", std::size_t{0});
        s.reset_time = j.contains("reset_time") ? detail::time_from_json(j["reset_time"]) : Rational(0);
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::Syntax, std::string("suite: ") + e.what());
    }
}

}  // namespace tptest
