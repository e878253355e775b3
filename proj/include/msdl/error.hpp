#pragma once

#include <stdexcept>
#include <string>

namespace msdl {

enum class ErrorKind {
    InvalidGeometry,
    OutOfDomain,
    Disjointness,
    Nonvanishing,
    DegreeExhausted,
    Undersampled,
    Conditioning,
    IllDefinedImmersion,
    PerturbationFailed,
    NonflatnessMargin,
    InfeasibleLabyrinth,
    StarViolated,
    BasisPointsExhausted,
    TauTooLarge,
    NewtonFailed,
    HInvalid,
    InexactPeriods,
    NoCertificate,
    FluxUnreachable,
    InconsistentTarget,
    ConfigInvalid,
    Io,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace msdl
