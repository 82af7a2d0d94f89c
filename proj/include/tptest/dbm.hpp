// Copyright (c) tptest contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tptest/time.hpp"

namespace tptest {

/// Difference bound `x - y < c` or `x - y <= c`, or no bound at all.
struct Bound {
    Rational value{0};
    bool strict = false;
    bool infinite = false;

    static Bound le(Rational c) { return {c, false, false}; }
    static Bound lt(Rational c) { return {c, true, false}; }
    static Bound inf() { return {Rational(0), true, true}; }

    friend bool operator==(const Bound& a, const Bound& b) {
        if (a.infinite || b.infinite) {
            return a.infinite == b.infinite;
        }
        return a.value == b.value && a.strict == b.strict;
    }

    /// Tighter bounds compare smaller; (c,<) < (c,<=).
    friend bool operator<(const Bound& a, const Bound& b) {
        if (a.infinite) {
            return false;
        }
        if (b.infinite) {
            return true;
        }
        if (a.value != b.value) {
            return a.value < b.value;
        }
        return a.strict && !b.strict;
    }
    friend bool operator<=(const Bound& a, const Bound& b) { return !(b < a); }

    friend Bound operator+(const Bound& a, const Bound& b) {
        if (a.infinite || b.infinite) {
            return inf();
        }
        return {a.value + b.value, a.strict || b.strict, false};
    }

    std::string to_string() const {
        if (infinite) {
            return "<inf";
        }
        return std::string(strict ? "<" : "<=") + tptest::to_string(value);
    }
};

/// Square difference-bound matrix over variables 0..dim-1; variable 0 is the
/// constant zero. Entry (i,j) bounds x_i - x_j.
class Dbm {
public:
    Dbm() = default;

    /// Every variable equal to zero.
    explicit Dbm(std::size_t dim) : dim_(dim), m_(dim * dim, Bound::le(0)) {}

    /// Every variable non-negative and otherwise unconstrained.
    static Dbm nonnegative(std::size_t dim) {
        Dbm d(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = 0; j < dim; ++j) {
                if (i != j && i != 0) {
                    d.at(i, j) = Bound::inf();
                }
            }
        }
        return d;
    }

    std::size_t dim() const { return dim_; }

    const Bound& at(std::size_t i, std::size_t j) const { return m_[i * dim_ + j]; }
    Bound& at(std::size_t i, std::size_t j) { return m_[i * dim_ + j]; }

    bool empty() const { return dim_ > 0 && at(0, 0) < Bound::le(0); }

    /// All-pairs tightening. Returns false (and marks the matrix empty) on a negative cycle.
    bool canonicalize() {
        for (std::size_t k = 0; k < dim_; ++k) {
            for (std::size_t i = 0; i < dim_; ++i) {
                const Bound& ik = at(i, k);
                if (ik.infinite) {
                    continue;
                }
                for (std::size_t j = 0; j < dim_; ++j) {
                    const Bound& kj = at(k, j);
                    if (kj.infinite) {
                        continue;
                    }
                    Bound via = ik + kj;
                    if (via < at(i, j)) {
                        at(i, j) = via;
                    }
                }
            }
        }
        for (std::size_t i = 0; i < dim_; ++i) {
            if (at(i, i) < Bound::le(0)) {
                mark_empty();
                return false;
            }
        }
        return true;
    }

    /// Adds x_i - x_j (bound) to a canonical matrix and restores canonical form.
    bool constrain(std::size_t i, std::size_t j, const Bound& b) {
        if (empty()) {
            return false;
        }
        if (!(b < at(i, j))) {
            return true;
        }
        if ((b + at(j, i)) < Bound::le(0)) {
            mark_empty();
            return false;
        }
        at(i, j) = b;
        for (std::size_t x = 0; x < dim_; ++x) {
            for (std::size_t y = 0; y < dim_; ++y) {
                Bound via = at(x, i) + b + at(j, y);
                if (via < at(x, y)) {
                    at(x, y) = via;
                }
            }
        }
        return !empty();
    }

    /// Lets time elapse: removes upper bounds of every variable except those in `frozen`.
    void up(const std::vector<std::size_t>& frozen = {}) {
        for (std::size_t i = 1; i < dim_; ++i) {
            if (std::find(frozen.begin(), frozen.end(), i) == frozen.end()) {
                at(i, 0) = Bound::inf();
            }
        }
    }

    /// Time predecessors: every point from which the zone can be reached by delay.
    void down() {
        for (std::size_t i = 1; i < dim_; ++i) {
            Bound b = Bound::le(0);
            for (std::size_t j = 1; j < dim_; ++j) {
                if (at(j, i) < b) {
                    b = at(j, i);
                }
            }
            at(0, i) = b;
        }
        canonicalize();
    }

    /// Removes every upper bound of x_i relative to the other variables.
    void relax_upper(std::size_t i) {
        for (std::size_t j = 0; j < dim_; ++j) {
            if (j != i) {
                at(i, j) = Bound::inf();
            }
        }
    }

    /// x_i := 0 on a canonical matrix.
    void reset(std::size_t i) {
        for (std::size_t j = 0; j < dim_; ++j) {
            if (j == i) {
                continue;
            }
            at(i, j) = at(0, j);
            at(j, i) = at(j, 0);
        }
    }

    /// Forgets everything about x_i except x_i >= 0.
    void free(std::size_t i) {
        for (std::size_t j = 0; j < dim_; ++j) {
            if (j == i) {
                continue;
            }
            at(i, j) = Bound::inf();
            at(j, i) = at(j, 0);
        }
        at(0, i) = Bound::le(0);
    }

    /// Builds a matrix over new variables; mapping[v] is the old index of
    /// new variable v, or nullopt for a fresh variable equal to zero.
    Dbm remap(const std::vector<std::optional<std::size_t>>& mapping) const {
        std::size_t n = mapping.size() + 1;
        Dbm out(n);
        auto src = [&](std::size_t v) -> std::size_t { return v == 0 ? 0 : mapping[v - 1].value_or(0); };
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                out.at(i, j) = i == j ? Bound::le(0) : at(src(i), src(j));
            }
        }
        return out;
    }

    /// Extrapolation with per-variable maximal constants. Bounds involving a
    /// variable whose constant is nullopt are kept exactly. Variables listed in
    /// `irrelevant` are freed.
    void extrapolate(const std::vector<std::optional<Rational>>& max_constant, const std::vector<bool>& irrelevant) {
        assert(max_constant.size() == dim_ && irrelevant.size() == dim_);
        for (std::size_t i = 1; i < dim_; ++i) {
            if (irrelevant[i]) {
                free(i);
            }
        }
        for (std::size_t i = 0; i < dim_; ++i) {
            for (std::size_t j = 0; j < dim_; ++j) {
                if (i == j || irrelevant[i] || irrelevant[j] || !max_constant[i] || !max_constant[j]) {
                    continue;
                }
                Bound& b = at(i, j);
                if (b.infinite) {
                    continue;
                }
                if (Bound::le(*max_constant[i]) < b) {
                    b = Bound::inf();
                } else if (b < Bound::lt(-*max_constant[j])) {
                    b = Bound::lt(-*max_constant[j]);
                }
            }
        }
        canonicalize();
    }

    /// Set inclusion between canonical matrices: other is a subset of this.
    bool includes(const Dbm& other) const {
        if (other.empty()) {
            return true;
        }
        if (empty() || dim_ != other.dim_) {
            return false;
        }
        for (std::size_t k = 0; k < m_.size(); ++k) {
            if (m_[k] < other.m_[k]) {
                return false;
            }
        }
        return true;
    }

    bool intersects(const Dbm& other) const {
        Dbm d = intersection(other);
        return !d.empty();
    }

    Dbm intersection(const Dbm& other) const {
        assert(dim_ == other.dim_);
        Dbm d = *this;
        for (std::size_t k = 0; k < m_.size(); ++k) {
            if (other.m_[k] < d.m_[k]) {
                d.m_[k] = other.m_[k];
            }
        }
        d.canonicalize();
        return d;
    }

    /// Disjoint canonical pieces covering this minus `other`.
    std::vector<Dbm> subtract(const Dbm& other) const {
        std::vector<Dbm> out;
        if (empty()) {
            return out;
        }
        if (other.empty() || !intersects(other)) {
            out.push_back(*this);
            return out;
        }
        Dbm rest = *this;
        for (std::size_t i = 0; i < dim_; ++i) {
            for (std::size_t j = 0; j < dim_; ++j) {
                const Bound& b = other.at(i, j);
                if (i == j || b.infinite || !(b < rest.at(i, j))) {
                    continue;
                }
                // Piece violating x_i - x_j (b): x_j - x_i (negated bound).
                Bound neg = b.strict ? Bound::le(-b.value) : Bound::lt(-b.value);
                Dbm piece = rest;
                if (piece.constrain(j, i, neg)) {
                    out.push_back(piece);
                }
                if (!rest.constrain(i, j, b)) {
                    return out;
                }
            }
        }
        return out;
    }

    /// Greatest lower bound of x_i as (value, strict): x_i >= value, or > when strict.
    std::pair<Rational, bool> lower(std::size_t i) const {
        const Bound& b = at(0, i);
        return {-b.value, b.strict};
    }

    /// Some point of a canonical non-empty matrix, choosing each variable as
    /// small as possible (plus `epsilon` above an open lower bound).
    std::vector<Rational> sample(const Rational& epsilon = Rational(1, 1000)) const {
        Dbm d = *this;
        std::vector<Rational> point(dim_, Rational(0));
        for (std::size_t i = 1; i < dim_; ++i) {
            auto [lo, lo_strict] = d.lower(i);
            Rational v = lo;
            if (lo_strict) {
                v = lo + epsilon;
                const Bound& up = d.at(i, 0);
                if (!up.infinite && !(Bound::le(v) <= up)) {
                    v = (lo + up.value) / 2;
                }
            }
            point[i] = v;
            d.constrain(i, 0, Bound::le(v));
            d.constrain(0, i, Bound::le(-v));
        }
        return point;
    }

    friend bool operator==(const Dbm& a, const Dbm& b) { return a.dim_ == b.dim_ && a.m_ == b.m_; }

    std::size_t hash() const {
        std::size_t h = dim_;
        for (const Bound& b : m_) {
            std::size_t v = b.infinite ? 0x9e3779b9U
                                       : std::hash<std::int64_t>{}(b.value.numerator()) * 31 +
                                             std::hash<std::int64_t>{}(b.value.denominator()) * 7 + (b.strict ? 1 : 0);
            h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return h;
    }

private:
    void mark_empty() {
        if (dim_ > 0) {
            at(0, 0) = Bound::lt(0);
        }
    }

    std::size_t dim_ = 0;
    std::vector<Bound> m_;
};

}  // namespace tptest
