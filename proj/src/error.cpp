#include "msdl/error.hpp"

namespace msdl {

const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::InvalidGeometry: return "invalid-geometry";
    case ErrorKind::OutOfDomain: return "out-of-domain";
    case ErrorKind::Disjointness: return "disjointness";
    case ErrorKind::Nonvanishing: return "nonvanishing-violated";
    case ErrorKind::DegreeExhausted: return "degree-exhausted";
    case ErrorKind::Undersampled: return "undersampled";
    case ErrorKind::Conditioning: return "conditioning";
    case ErrorKind::IllDefinedImmersion: return "ill-defined-immersion";
    case ErrorKind::PerturbationFailed: return "perturbation-failed";
    case ErrorKind::NonflatnessMargin: return "nonflatness-margin";
    case ErrorKind::InfeasibleLabyrinth: return "infeasible-labyrinth";
    case ErrorKind::StarViolated: return "star-violated";
    case ErrorKind::BasisPointsExhausted: return "basis-points-exhausted";
    case ErrorKind::TauTooLarge: return "tau-too-large";
    case ErrorKind::NewtonFailed: return "newton-failed";
    case ErrorKind::HInvalid: return "h-invalid";
    case ErrorKind::InexactPeriods: return "inexact-periods";
    case ErrorKind::NoCertificate: return "no-certificate";
    case ErrorKind::FluxUnreachable: return "flux-unreachable";
    case ErrorKind::InconsistentTarget: return "inconsistent-target";
    case ErrorKind::ConfigInvalid: return "config-invalid";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

} // namespace msdl
