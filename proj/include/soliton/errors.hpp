#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace soliton {

enum class ErrorKind {
    InvalidArgument,
    DomainError,
    NoBracket,
    NoConvergence,
    InsufficientRange,
    Unsupported,
    CriticalExponent,
    TailDominates,
    SpectrumTooShort,
    SingularSystem,
    Inadmissible,
    LineSearchFailed,
    PathStuck,
    Violation,
    Divergent,
    InsufficientFarField,
};

std::string_view to_string(ErrorKind kind);

/// Exception carrying a machine-readable kind alongside the message.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace soliton
