#pragma once

#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>

namespace feynpar {

enum class ErrorKind {
    MalformedGraph,
    UnknownEdge,
    NotASubgraph,
    TooLarge,
    ArityMismatch,
    ZeroPolynomial,
    Timeout,
    MomentumNotConserved,
    BadLegConfiguration,
    SingularAtPoint,
    OddDimension,
    DecorationDimension,
    TruncationUnderflow,
    CannotGenerate,
    PositiveDimensional,
    NotSingular,
    RegimeViolation,
    ToleranceNotReached,
    DivergentConfiguration,
    ConvergenceDomain,
    FitUnstable,
    Precondition,
    Parse,
};

inline const char* error_kind_name(ErrorKind k) {
    switch (k) {
    case ErrorKind::MalformedGraph: return "MalformedGraph";
    case ErrorKind::UnknownEdge: return "UnknownEdge";
    case ErrorKind::NotASubgraph: return "NotASubgraph";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::ArityMismatch: return "ArityMismatch";
    case ErrorKind::ZeroPolynomial: return "ZeroPolynomial";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::MomentumNotConserved: return "MomentumNotConserved";
    case ErrorKind::BadLegConfiguration: return "BadLegConfiguration";
    case ErrorKind::SingularAtPoint: return "SingularAtPoint";
    case ErrorKind::OddDimension: return "OddDimension";
    case ErrorKind::DecorationDimension: return "DecorationDimension";
    case ErrorKind::TruncationUnderflow: return "TruncationUnderflow";
    case ErrorKind::CannotGenerate: return "CannotGenerate";
    case ErrorKind::PositiveDimensional: return "PositiveDimensional";
    case ErrorKind::NotSingular: return "NotSingular";
    case ErrorKind::RegimeViolation: return "RegimeViolation";
    case ErrorKind::ToleranceNotReached: return "ToleranceNotReached";
    case ErrorKind::DivergentConfiguration: return "DivergentConfiguration";
    case ErrorKind::ConvergenceDomain: return "ConvergenceDomain";
    case ErrorKind::FitUnstable: return "FitUnstable";
    case ErrorKind::Precondition: return "Precondition";
    case ErrorKind::Parse: return "Parse";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

// `what` is a string or a callable producing one (evaluated only on failure).
template <class Msg>
inline void require(bool cond, ErrorKind kind, Msg&& what) {
    if (cond) return;
    if constexpr (std::is_invocable_v<Msg>) throw Error(kind, std::string(what()));
    else throw Error(kind, std::string(std::forward<Msg>(what)));
}

}  // namespace feynpar
