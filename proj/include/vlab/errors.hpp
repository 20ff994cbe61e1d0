#pragma once

#include <stdexcept>
#include <string>

namespace vlab {

// Base of the library failure taxonomy. Subclass names match the operation
// contracts so callers can map failures to exit codes without string parsing.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Map construction.
struct DegenerateWidth : Error { using Error::Error; };
struct MonotonicityViolated : Error { using Error::Error; };
struct BoundViolated : Error { using Error::Error; };
struct NoReferenceOrbit : Error { using Error::Error; };
struct NoBracket : Error { using Error::Error; };
struct NotInvariant : Error { using Error::Error; };
struct BudgetExceeded : Error { using Error::Error; };

// Constants pipeline.
struct AlphaTooLarge : Error { using Error::Error; };

// Carries the name of the specific failed inequality so reports and exit
// messages can point at it directly.
struct ConstraintViolated : Error {
    explicit ConstraintViolated(const std::string& constraintName,
                                const std::string& detail = std::string())
        : Error(detail.empty() ? constraintName : constraintName + ": " + detail),
          name(constraintName) {}
    std::string name;
};

// Curves and verification.
struct PreconditionViolated : Error { using Error::Error; };
struct NotAdmissible : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };
struct AdmissibilityLost : Error { using Error::Error; };
struct NoSeparatedSets : Error { using Error::Error; };

// Configuration / CLI.
struct ConfigError : Error { using Error::Error; };

} // namespace vlab
