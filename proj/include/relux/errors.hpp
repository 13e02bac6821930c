#pragma once

#include <stdexcept>
#include <string>

namespace relux {

/// Base of every error the library raises on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A precondition of an operation was violated by the caller.
struct ContractError : Error {
    using Error::Error;
};

struct DimensionMismatch : ContractError {
    using ContractError::ContractError;
};

/// Catalog activation asked for in exact mode, or similar mode clash.
struct ModeError : ContractError {
    using ContractError::ContractError;
};

/// Work would exceed a configured size cap.
struct BudgetExceeded : Error {
    using Error::Error;
};

/// A self-check of a construction failed.
struct VerificationFailed : Error {
    using Error::Error;
};

struct ReconstructionMismatch : VerificationFailed {
    using VerificationFailed::VerificationFailed;
};

/// Failure of a construction that is proven to succeed; indicates a bug.
struct InternalError : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

}  // namespace relux
