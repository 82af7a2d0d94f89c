// Copyright (c) tptest contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tptest/error.hpp"
#include "tptest/net.hpp"
#include "tptest/semantics.hpp"
#include "tptest/sscg.hpp"

namespace tptest {

/// `# key: value` comment lines, e.g. the pass/fail places of an observer.
using Annotations = std::vector<std::pair<std::string, std::string>>;

namespace detail {

struct Token {
    enum class Kind { Ident, Number, Punct, Arrow, End };
    Kind kind = Kind::End;
    std::string text;
    std::size_t column = 0;
};

class LineLexer {
public:
    LineLexer(std::string_view line, std::size_t lineno) : line_(line), lineno_(lineno) { advance(); }

    const Token& peek() const { return cur_; }

    Token next() {
        Token t = cur_;
        advance();
        return t;
    }

    [[noreturn]] void fail(const Token& at, const std::string& what) const {
        throw ParseError(Errc::Syntax, lineno_, at.column, what);
    }

    Token expect_punct(char c) {
        if (cur_.kind != Token::Kind::Punct || cur_.text[0] != c) {
            fail(cur_, std::string("expected '") + c + "'" + found());
        }
        return next();
    }

    Token expect_ident(const char* what) {
        if (cur_.kind != Token::Kind::Ident) {
            fail(cur_, std::string("expected ") + what + found());
        }
        return next();
    }

    bool at_punct(char c) const { return cur_.kind == Token::Kind::Punct && cur_.text[0] == c; }

    std::string found() const { return cur_.kind == Token::Kind::End ? ", found end of line" : ", found '" + cur_.text + "'"; }

    std::size_t lineno() const { return lineno_; }

private:
    void advance() {
        while (pos_ < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos_]))) {
            ++pos_;
        }
        cur_ = Token{};
        cur_.column = pos_ + 1;
        if (pos_ >= line_.size() || line_[pos_] == '#') {
            pos_ = line_.size();
            return;
        }
        char c = line_[pos_];
        std::size_t start = pos_;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (pos_ < line_.size() && (std::isalnum(static_cast<unsigned char>(line_[pos_])) || line_[pos_] == '_')) {
                ++pos_;
            }
            cur_.kind = Token::Kind::Ident;
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            while (pos_ < line_.size() &&
                   (std::isdigit(static_cast<unsigned char>(line_[pos_])) || line_[pos_] == '.' || line_[pos_] == '/')) {
                ++pos_;
            }
            cur_.kind = Token::Kind::Number;
        } else if (c == '-' && pos_ + 1 < line_.size() && line_[pos_ + 1] == '>') {
            pos_ += 2;
            cur_.kind = Token::Kind::Arrow;
        } else if (std::string_view("()[],:*<?!").find(c) != std::string_view::npos) {
            ++pos_;
            cur_.kind = Token::Kind::Punct;
        } else {
            throw ParseError(Errc::Syntax, lineno_, pos_ + 1, std::string("unexpected character '") + c + "'");
        }
        cur_.text = std::string(line_.substr(start, pos_ - start));
        cur_.column = start + 1;
    }

    std::string_view line_;
    std::size_t lineno_;
    std::size_t pos_ = 0;
    Token cur_;
};

struct PendingArc {
    std::string place;
    std::uint32_t weight;
    std::size_t line, column;
};

struct PendingTransition {
    Transition t;
    std::vector<PendingArc> pre, post;
    std::size_t line, column;
};

struct PendingPriority {
    std::string low, high;
    std::size_t line, column_low, column_high;
};

inline Rational parse_number(LineLexer& lx, const Token& tok) {
    try {
        return parse_rational(tok.text);
    } catch (const Error&) {
        lx.fail(tok, "malformed number '" + tok.text + "'");
    }
}

inline std::uint32_t parse_nat(LineLexer& lx) {
    Token tok = lx.next();
    if (tok.kind != Token::Kind::Number) {
        lx.fail(tok, "expected a natural number");
    }
    Rational r = parse_number(lx, tok);
    if (r.denominator() != 1 || r < 0 || r > Rational(1000000000)) {
        lx.fail(tok, "expected a natural number, found '" + tok.text + "'");
    }
    return static_cast<std::uint32_t>(r.numerator());
}

inline TimeInterval parse_interval(LineLexer& lx) {
    TimeInterval iv;
    Token open = lx.next();
    if (open.kind != Token::Kind::Punct || (open.text != "[" && open.text != "]")) {
        lx.fail(open, "expected interval");
    }
    iv.lower_strict = open.text == "]";
    Token lo = lx.next();
    if (lo.kind != Token::Kind::Number) {
        lx.fail(lo, "expected lower bound");
    }
    iv.lower = parse_number(lx, lo);
    lx.expect_punct(',');
    Token hi = lx.next();
    bool infinite = false;
    if (hi.kind == Token::Kind::Ident && hi.text == "w") {
        infinite = true;
    } else if (hi.kind == Token::Kind::Number) {
        iv.upper = parse_number(lx, hi);
    } else {
        lx.fail(hi, "expected upper bound or 'w'");
    }
    Token close = lx.next();
    if (close.kind != Token::Kind::Punct || (close.text != "[" && close.text != "]")) {
        lx.fail(close, "expected ']' or '['");
    }
    iv.upper_strict = close.text == "[";
    if (infinite && !iv.upper_strict) {
        lx.fail(close, "infinite bound must be right-open");
    }
    if (!iv.valid()) {
        lx.fail(open, "empty interval " + iv.to_string());
    }
    return iv;
}

inline std::vector<PendingArc> parse_arcs(LineLexer& lx) {
    std::vector<PendingArc> out;
    while (lx.peek().kind == Token::Kind::Ident) {
        Token p = lx.next();
        std::uint32_t w = 1;
        if (lx.at_punct('*')) {
            lx.next();
            w = parse_nat(lx);
        }
        out.push_back({p.text, w, lx.lineno(), p.column});
    }
    return out;
}

}  // namespace detail

/// Parses the line-oriented net format. Throws ParseError on syntax errors
/// and Error for well-formedness violations.
inline Net parse_net(std::string_view text, std::string name = "net", Annotations* annotations = nullptr) {
    using detail::Token;
    Net net;
    net.name = std::move(name);
    std::vector<detail::PendingTransition> trs;
    std::vector<detail::PendingPriority> prs;
    std::map<std::string, std::pair<std::size_t, std::size_t>> declared;

    auto declare = [&](const Token& tok, std::size_t line) {
        if (!declared.emplace(tok.text, std::make_pair(line, tok.column)).second) {
            throw ParseError(Errc::DuplicateIdentifier, line, tok.column, "duplicate identifier '" + tok.text + "'");
        }
    };

    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (annotations) {
            std::size_t first = line.find_first_not_of(" \t");
            if (first != std::string_view::npos && line[first] == '#') {
                std::string_view body = line.substr(first + 1);
                std::size_t colon = body.find(':');
                if (colon != std::string_view::npos) {
                    auto trim = [](std::string_view s) {
                        std::size_t a = s.find_first_not_of(" \t");
                        std::size_t b = s.find_last_not_of(" \t");
                        return a == std::string_view::npos ? std::string() : std::string(s.substr(a, b - a + 1));
                    };
                    std::string key = trim(body.substr(0, colon));
                    if (!key.empty() && key.find(' ') == std::string::npos) {
                        annotations->emplace_back(key, trim(body.substr(colon + 1)));
                    }
                }
            }
        }
        detail::LineLexer lx(line, lineno);
        if (lx.peek().kind == Token::Kind::End) {
            continue;
        }
        Token kw = lx.expect_ident("'pl', 'tr' or 'pr'");
        if (kw.text == "pl") {
            Token id = lx.expect_ident("place identifier");
            declare(id, lineno);
            std::uint32_t tokens = 0;
            if (lx.at_punct('(')) {
                lx.next();
                tokens = detail::parse_nat(lx);
                lx.expect_punct(')');
            }
            net.add_place(id.text, tokens);
        } else if (kw.text == "tr") {
            Token id = lx.expect_ident("transition identifier");
            declare(id, lineno);
            lx.expect_punct(':');
            detail::PendingTransition pt;
            pt.t.name = id.text;
            pt.line = lineno;
            pt.column = id.column;
            Token lab = lx.expect_ident("action label");
            if (lab.text == "tau" && !lx.at_punct('?') && !lx.at_punct('!')) {
                pt.t.label = ActionLabel::internal();
            } else if (lx.at_punct('?') || lx.at_punct('!')) {
                Token dir = lx.next();
                if (dir.column != lab.column + lab.text.size()) {
                    lx.fail(dir, "label direction must follow the name directly");
                }
                pt.t.label = dir.text == "?" ? ActionLabel::input(lab.text) : ActionLabel::output(lab.text);
            } else {
                lx.fail(lx.peek(), "expected '?' or '!' after label '" + lab.text + "'");
            }
            if (!lx.at_punct('[') && !lx.at_punct(']')) {
                lx.fail(lx.peek(), "missing interval" + lx.found());
            }
            pt.t.interval = detail::parse_interval(lx);
            pt.pre = detail::parse_arcs(lx);
            if (lx.peek().kind != Token::Kind::Arrow) {
                lx.fail(lx.peek(), "expected '->'" + lx.found());
            }
            lx.next();
            pt.post = detail::parse_arcs(lx);
            trs.push_back(std::move(pt));
        } else if (kw.text == "pr") {
            Token lo = lx.expect_ident("transition identifier");
            lx.expect_punct('<');
            Token hi = lx.expect_ident("transition identifier");
            prs.push_back({lo.text, hi.text, lineno, lo.column, hi.column});
        } else {
            lx.fail(kw, "unknown statement '" + kw.text + "'");
        }
        if (lx.peek().kind != Token::Kind::End) {
            lx.fail(lx.peek(), "unexpected trailing input '" + lx.peek().text + "'");
        }
    }

    for (detail::PendingTransition& pt : trs) {
        auto resolve = [&](const std::vector<detail::PendingArc>& arcs, std::vector<Arc>& into) {
            for (const detail::PendingArc& a : arcs) {
                auto p = net.place_index(a.place);
                if (!p) {
                    throw ParseError(Errc::Syntax, a.line, a.column, "unknown place '" + a.place + "'");
                }
                if (a.weight == 0) {
                    throw ParseError(Errc::Syntax, a.line, a.column, "zero arc weight");
                }
                auto same = std::find_if(into.begin(), into.end(), [&](const Arc& x) { return x.place == *p; });
                if (same != into.end()) {
                    same->weight += a.weight;
                } else {
                    into.push_back({*p, a.weight});
                }
            }
        };
        resolve(pt.pre, pt.t.pre);
        resolve(pt.post, pt.t.post);
        net.add_transition(std::move(pt.t));
    }
    for (const detail::PendingPriority& pp : prs) {
        auto lo = net.transition_index(pp.low);
        auto hi = net.transition_index(pp.high);
        if (!lo) {
            throw ParseError(Errc::Syntax, pp.line, pp.column_low, "unknown transition '" + pp.low + "'");
        }
        if (!hi) {
            throw ParseError(Errc::Syntax, pp.line, pp.column_high, "unknown transition '" + pp.high + "'");
        }
        net.priorities.emplace_back(*lo, *hi);
    }

    for (const Diagnostic& d : validate(net)) {
        if (d.is_error()) {
            throw Error(d.reason == "duplicate identifier" ? Errc::DuplicateIdentifier : Errc::InvalidNet,
                        d.subject + ": " + d.reason);
        }
    }
    return net;
}

namespace detail {

inline std::string arcs_text(const Net& net, const std::vector<Arc>& arcs) {
    std::vector<std::pair<std::string, std::uint32_t>> items;
    for (const Arc& a : arcs) {
        items.emplace_back(net.places[a.place], a.weight);
    }
    std::sort(items.begin(), items.end());
    std::string s;
    for (const auto& [p, w] : items) {
        s += " " + p;
        if (w != 1) {
            s += "*" + std::to_string(w);
        }
    }
    return s;
}

}  // namespace detail

/// Canonical text: annotations, places, transitions, priorities, each sorted by name.
inline std::string serialize_net(const Net& net, const Annotations& annotations = {}) {
    std::ostringstream os;
    for (const auto& [k, v] : annotations) {
        os << "# " << k << ": " << v << "\n";
    }
    std::vector<std::size_t> ps(net.places.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
        ps[i] = i;
    }
    std::sort(ps.begin(), ps.end(), [&](std::size_t a, std::size_t b) { return net.places[a] < net.places[b]; });
    for (std::size_t p : ps) {
        os << "pl " << net.places[p];
        if (p < net.initial.size() && net.initial[p] > 0) {
            os << " (" << net.initial[p] << ")";
        }
        os << "\n";
    }
    std::vector<std::size_t> ts(net.transitions.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        ts[i] = i;
    }
    std::sort(ts.begin(), ts.end(), [&](std::size_t a, std::size_t b) { return net.transitions[a].name < net.transitions[b].name; });
    for (std::size_t t : ts) {
        const Transition& tr = net.transitions[t];
        os << "tr " << tr.name << " : " << tr.label.to_string() << " " << tr.static_interval().to_string()
           << detail::arcs_text(net, tr.pre) << " ->" << detail::arcs_text(net, tr.post) << "\n";
    }
    std::vector<std::pair<std::string, std::string>> prs;
    for (auto [lo, hi] : net.priorities) {
        prs.emplace_back(net.transitions[lo].name, net.transitions[hi].name);
    }
    std::sort(prs.begin(), prs.end());
    prs.erase(std::unique(prs.begin(), prs.end()), prs.end());
    for (const auto& [lo, hi] : prs) {
        os << "pr " << lo << " < " << hi << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// DOT

inline std::string dot_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out + "\"";
}

inline std::string export_dot(const Net& net) {
    std::ostringstream os;
    os << "digraph " << dot_quote(net.name) << " {\n";
    for (std::size_t p = 0; p < net.places.size(); ++p) {
        std::string label = net.places[p];
        if (p < net.initial.size() && net.initial[p] > 0) {
            label += "\n(" + std::to_string(net.initial[p]) + ")";
        }
        os << "  " << dot_quote("p:" + net.places[p]) << " [shape=circle, label=" << dot_quote(label) << "];\n";
    }
    for (const Transition& t : net.transitions) {
        std::string label = t.name + "\n" + t.label.to_string() + " " + (t.interval ? t.interval->to_string() : "?");
        os << "  " << dot_quote("t:" + t.name) << " [shape=box, label=" << dot_quote(label) << "];\n";
    }
    for (const Transition& t : net.transitions) {
        for (const Arc& a : t.pre) {
            os << "  " << dot_quote("p:" + net.places[a.place]) << " -> " << dot_quote("t:" + t.name);
            if (a.weight != 1) {
                os << " [label=" << dot_quote(std::to_string(a.weight)) << "]";
            }
            os << ";\n";
        }
        for (const Arc& a : t.post) {
            os << "  " << dot_quote("t:" + t.name) << " -> " << dot_quote("p:" + net.places[a.place]);
            if (a.weight != 1) {
                os << " [label=" << dot_quote(std::to_string(a.weight)) << "]";
            }
            os << ";\n";
        }
    }
    for (auto [lo, hi] : net.priorities) {
        os << "  " << dot_quote("t:" + net.transitions[hi].name) << " -> " << dot_quote("t:" + net.transitions[lo].name)
           << " [style=dashed, arrowhead=odot];\n";
    }
    os << "}\n";
    return os.str();
}

/// Class nodes are labeled with their markings, edges with move labels.
inline std::string export_dot(const ComposedSystem& sys, const ClassGraph& g) {
    std::ostringstream os;
    os << "digraph " << dot_quote(sys.net.name) << " {\n";
    for (std::size_t c = 0; c < g.classes.size(); ++c) {
        os << "  c" << c << " [label=" << dot_quote("c" + std::to_string(c) + "\n" + sys.net.format_marking(g.classes[c].marking));
        if (c == g.initial) {
            os << ", peripheries=2";
        }
        os << "];\n";
    }
    for (const ClassEdge& e : g.edges) {
        os << "  c" << e.from << " -> c" << e.to << " [label=" << dot_quote(move_label(sys, e.move)) << "];\n";
    }
    os << "}\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Schedules as text

/// `eta@move` tokens, moves written `t`, or `(t,u)` for synchronizations.
inline std::string format_schedule(const ComposedSystem& sys, const Schedule& s) {
    std::string out;
    for (const ScheduleStep& st : s.steps) {
        if (!out.empty()) {
            out += " ";
        }
        std::string m = move_name(sys, st.move);
        if (st.move.kind == Move::Kind::Sync) {
            m = "(" + m + ")";
        }
        out += to_string(st.eta) + "@" + m;
    }
    return out;
}

inline Schedule parse_schedule(const ComposedSystem& sys, std::string_view text) {
    Schedule s;
    std::istringstream is{std::string(text)};
    std::string tok;
    while (is >> tok) {
        auto at = tok.find('@');
        if (at == std::string::npos) {
            throw Error(Errc::Syntax, "expected eta@move, found '" + tok + "'");
        }
        s.steps.push_back({parse_rational(tok.substr(0, at)), parse_move(sys, tok.substr(at + 1))});
    }
    return s;
}

/// Whitespace-separated move names.
inline Support parse_support(const ComposedSystem& sys, std::string_view text) {
    Support s;
    std::istringstream is{std::string(text)};
    std::string tok;
    while (is >> tok) {
        s.push_back(parse_move(sys, tok));
    }
    return s;
}

}  // namespace tptest
