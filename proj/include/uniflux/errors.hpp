#pragma once

#include <stdexcept>
#include <string>

namespace uniflux {

enum class ErrorKind {
    InvalidArgument,
    DomainError,
    NonConvergence,
    InsufficientScanRange,
    OutOfDomain,
    GridTooSmall,
    ConvergenceNotReached,
    ParityViolation,
    NegativeEffectiveCapacitance,
    TruncationNotConverged,
    ResonantDivergence,
    InsufficientPoints,
    DegenerateDesign,
    UnidentifiableParameters,
    ConfigError,
    IoError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);
    ErrorKind kind() const noexcept { return kind_; }
    // Message without the kind prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) fail(kind, what);
}

}  // namespace uniflux
