#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bura {

enum class ErrorKind {
    InvalidArgument,
    NonConvergence,
    PrecisionExhausted,
    PoleHit,
    ComplexPoles,
    RepeatedPoles,
    WrongExtremaCount,
    NotSymmetric,
    Singular,
    NotPositiveDefinite,
    DimensionTooLarge,
    ShiftNotSpd,
    CgDivergence,
    Io,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` tells callers which
/// contract was violated.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace bura
