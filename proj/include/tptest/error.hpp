// Copyright (c) tptest contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace tptest {

enum class Errc {
    Syntax,
    DuplicateIdentifier,
    InvalidNet,
    UnmatchedLabel,
    SideConflict,
    InvalidMarking,
    NotEnabled,
    NotComplementary,
    NotFireable,
    DeadlineExceeded,
    LimitExceeded,
    Truncated,
    UnknownTransition,
    Infeasible,
    Uncoverable,
    EmptySequence,
    AlphabetMismatch,
    InvalidMutation,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::Syntax: return "SyntaxError";
        case Errc::DuplicateIdentifier: return "DuplicateIdentifier";
        case Errc::InvalidNet: return "InvalidNet";
        case Errc::UnmatchedLabel: return "UnmatchedLabel";
        case Errc::SideConflict: return "SideConflict";
        case Errc::InvalidMarking: return "InvalidMarking";
        case Errc::NotEnabled: return "NotEnabled";
        case Errc::NotComplementary: return "NotComplementary";
        case Errc::NotFireable: return "NotFireable";
        case Errc::DeadlineExceeded: return "DeadlineExceeded";
        case Errc::LimitExceeded: return "LimitExceeded";
        case Errc::Truncated: return "Truncated";
        case Errc::UnknownTransition: return "UnknownTransition";
        case Errc::Infeasible: return "Infeasible";
        case Errc::Uncoverable: return "Uncoverable";
        case Errc::EmptySequence: return "EmptySequence";
        case Errc::AlphabetMismatch: return "AlphabetMismatch";
        case Errc::InvalidMutation: return "InvalidMutation";
    }
    return "Error";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Syntax error carrying a 1-based source position.
class ParseError : public Error {
public:
    ParseError(Errc code, std::size_t line, std::size_t column, const std::string& what)
        : Error(code, std::to_string(line) + ":" + std::to_string(column) + ": " + what), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

}  // namespace tptest
