#pragma once

#include <stdexcept>
#include <string>

namespace fairdyn {

// Base for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside its mathematical domain (probabilities, weights, losses).
struct DomainError : Error { using Error::Error; };

// Ill-formed object: bad support ordering, malformed tables, broken invariants.
struct StructureError : Error { using Error::Error; };

// A target rate is unreachable for the matched group.
struct RangeError : Error { using Error::Error; };

// Scenario fits none of the closed-form case enumerations.
struct CaseError : Error { using Error::Error; };

// Thetas fall outside the interior regime a stationarity condition covers.
struct RegimeError : Error { using Error::Error; };

// Operation not defined for the requested dynamics kind, or missing inputs for it.
struct ModelError : Error { using Error::Error; };

// Fixed point does not exist (retention of 1 at the given loss).
struct DivergenceError : Error { using Error::Error; };

// A group has no samples where samples are required.
struct EmptyGroupError : Error { using Error::Error; };

// Filesystem failures when reading configs or writing results.
struct IoError : Error { using Error::Error; };

// Config file fails schema or cross-field validation; message carries the field path.
struct ConfigError : Error { using Error::Error; };

} // namespace fairdyn
