#include "uniflux/errors.hpp"

namespace uniflux {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::NonConvergence: return "NonConvergence";
        case ErrorKind::InsufficientScanRange: return "InsufficientScanRange";
        case ErrorKind::OutOfDomain: return "OutOfDomain";
        case ErrorKind::GridTooSmall: return "GridTooSmall";
        case ErrorKind::ConvergenceNotReached: return "ConvergenceNotReached";
        case ErrorKind::ParityViolation: return "ParityViolation";
        case ErrorKind::NegativeEffectiveCapacitance: return "NegativeEffectiveCapacitance";
        case ErrorKind::TruncationNotConverged: return "TruncationNotConverged";
        case ErrorKind::ResonantDivergence: return "ResonantDivergence";
        case ErrorKind::InsufficientPoints: return "InsufficientPoints";
        case ErrorKind::DegenerateDesign: return "DegenerateDesign";
        case ErrorKind::UnidentifiableParameters: return "UnidentifiableParameters";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace uniflux
