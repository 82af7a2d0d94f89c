// Copyright (c) tptest contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

#include "tptest/error.hpp"

namespace tptest {

/// Exact time value. All timing arithmetic in the library is done on this type.
using Rational = boost::rational<std::int64_t>;

inline std::string to_string(const Rational& r) {
    if (r.denominator() == 1) {
        return std::to_string(r.numerator());
    }
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

/// Parses `n`, `n/d` or a decimal literal such as `0.9` (normalized to 9/10).
inline Rational parse_rational(std::string_view text) {
    auto fail = [&] { throw Error(Errc::Syntax, "malformed rational '" + std::string(text) + "'"); };
    if (text.empty()) {
        fail();
    }
    bool negative = false;
    if (text.front() == '-') {
        negative = true;
        text.remove_prefix(1);
        if (text.empty()) {
            fail();
        }
    }
    auto digits = [&](std::string_view s) {
        if (s.empty() || s.size() > 17) {
            fail();
        }
        std::int64_t v = 0;
        for (char c : s) {
            if (c < '0' || c > '9') {
                fail();
            }
            v = v * 10 + (c - '0');
        }
        return v;
    };
    Rational value;
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        std::int64_t den = digits(text.substr(slash + 1));
        if (den == 0) {
            fail();
        }
        value = Rational(digits(text.substr(0, slash)), den);
    } else if (auto dot = text.find('.'); dot != std::string_view::npos) {
        std::string_view frac = text.substr(dot + 1);
        std::int64_t scale = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) {
            scale *= 10;
        }
        std::int64_t whole = dot == 0 ? 0 : digits(text.substr(0, dot));
        value = Rational(whole) + Rational(digits(frac), scale);
    } else {
        value = Rational(digits(text));
    }
    return negative ? -value : value;
}

/// Non-empty interval with rational bounds; an absent upper bound is +infinity.
struct TimeInterval {
    Rational lower{0};
    bool lower_strict = false;
    std::optional<Rational> upper;  // nullopt: +inf (always right-open)
    bool upper_strict = true;

    static TimeInterval closed(Rational lo, Rational hi) { return {lo, false, hi, false}; }
    static TimeInterval point(Rational v) { return closed(v, v); }
    static TimeInterval at_least(Rational lo) { return {lo, false, std::nullopt, true}; }

    bool bounded() const { return upper.has_value(); }

    bool valid() const {
        if (lower < 0) {
            return false;
        }
        if (!upper) {
            return upper_strict;
        }
        if (*upper < lower) {
            return false;
        }
        if (*upper == lower) {
            return !lower_strict && !upper_strict;
        }
        return true;
    }

    bool contains(const Rational& x) const {
        if (x < lower || (lower_strict && x == lower)) {
            return false;
        }
        if (upper && (x > *upper || (upper_strict && x == *upper))) {
            return false;
        }
        return true;
    }

    bool contains_zero() const { return contains(Rational(0)); }

    /// True when `d` time units may elapse without overrunning the upper bound.
    bool allows_delay(const Rational& d) const {
        if (!upper) {
            return true;
        }
        return upper_strict ? d < *upper : d <= *upper;
    }

    /// The interval shifted towards the origin by `d` and truncated at 0.
    TimeInterval shifted(const Rational& d) const {
        TimeInterval r = *this;
        Rational lo = lower - d;
        if (lo < 0 || (lo == Rational(0) && !lower_strict)) {
            r.lower = 0;
            r.lower_strict = false;
        } else {
            r.lower = lo;
        }
        if (upper) {
            r.upper = *upper - d;
        }
        return r;
    }

    std::string to_string() const {
        std::string s = lower_strict ? "]" : "[";
        s += tptest::to_string(lower) + ",";
        if (!upper) {
            return s + "w[";
        }
        return s + tptest::to_string(*upper) + (upper_strict ? "[" : "]");
    }

    friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const TimeInterval& i) { return os << i.to_string(); }

/// Least common multiple of the denominators of every finite bound in `intervals`.
template <typename Range>
std::int64_t denominator_lcm(const Range& intervals) {
    std::int64_t l = 1;
    for (const TimeInterval& i : intervals) {
        l = std::lcm(l, i.lower.denominator());
        if (i.upper) {
            l = std::lcm(l, i.upper->denominator());
        }
    }
    return l;
}

}  // namespace tptest
