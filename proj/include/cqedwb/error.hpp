#pragma once

#include <stdexcept>
#include <string>

namespace cqedwb {

enum class ErrorKind {
    NotHermitian,
    DimMismatch,
    InvalidProbability,
    InvalidInput,
    TruncationNotConverged,
    TruncationWarning,
    OutOfRegime,
    DimTooLarge,
    Divergent,
    LabelAmbiguous,
    DomainError,
    NoConvergence,
    OnWire,
    SingularNetwork,
    InfiniteLifetime,
    DegenerateBasis,
    SingularDesign,
    IllConditioned,
    RankDeficientPreps,
    NotPhaseGate,
    Unsupported,
    UsageError,
};

inline const char* error_name(ErrorKind k) {
    switch (k) {
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::InvalidProbability: return "InvalidProbability";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::TruncationNotConverged: return "TruncationNotConverged";
    case ErrorKind::TruncationWarning: return "TruncationWarning";
    case ErrorKind::OutOfRegime: return "OutOfRegime";
    case ErrorKind::DimTooLarge: return "DimTooLarge";
    case ErrorKind::Divergent: return "Divergent";
    case ErrorKind::LabelAmbiguous: return "LabelAmbiguous";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::OnWire: return "OnWire";
    case ErrorKind::SingularNetwork: return "SingularNetwork";
    case ErrorKind::InfiniteLifetime: return "InfiniteLifetime";
    case ErrorKind::DegenerateBasis: return "DegenerateBasis";
    case ErrorKind::SingularDesign: return "SingularDesign";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::RankDeficientPreps: return "RankDeficientPreps";
    case ErrorKind::NotPhaseGate: return "NotPhaseGate";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::UsageError: return "UsageError";
    }
    return "Unknown";
}

// Every library failure is an Error; kind() is stable and used by the CLI.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(error_name(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    const char* name() const noexcept { return error_name(kind_); }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

} // namespace cqedwb
