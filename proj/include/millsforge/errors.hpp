#pragma once
// errors.hpp - exception taxonomy shared by all modules.
//
// The CLI maps these onto exit codes: usage 2, precision/horizon 3,
// integrity 4, resource 5.

#include <stdexcept>
#include <string>

namespace millsforge {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Mathematical precondition violated (log of non-positive interval,
// division by an interval containing zero, ...).
struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Working precision insufficient to decide a floor / certify digits.
// Callers may retry at higher precision.
struct PrecisionError : Error {
    explicit PrecisionError(const std::string& msg) : Error(msg) {}
};

// Requested digits lie beyond what current prime knowledge determines.
struct HorizonError : PrecisionError {
    explicit HorizonError(const std::string& msg) : PrecisionError(msg) {}
};

// Stored data fails its own invariants (cache corruption, seed that fails
// its claimed evidence recheck, floor-recovery mismatch).
struct IntegrityError : Error {
    explicit IntegrityError(const std::string& msg) : Error(msg) {}
};

// Configured limits exceeded (dyadic exponent range, materialization size,
// extension budget). Never silent truncation.
struct ResourceError : Error {
    explicit ResourceError(const std::string& msg) : Error(msg) {}
};

// Bad command line.
struct UsageError : Error {
    explicit UsageError(const std::string& msg) : Error(msg) {}
};

// A prime interval that must contain a prime (below the guarantee
// threshold) turned out empty.
struct ConstructionFailure : Error {
    explicit ConstructionFailure(const std::string& msg) : Error(msg) {}
};

}  // namespace millsforge
