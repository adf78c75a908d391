#pragma once
// theorem.hpp - Mersenne-seeded prime-representing constants.
//
// For a Mersenne exponent p and exponent base m the constant A satisfies
// A^m in [2^p - 1, 2^p), so log A lives in [log(2^p - 1)/m, p log2/m).
// Everything is computed in the log domain: 2^-p is an exact dyadic, so
// the Taylor bound -x - x^2 < log(1-x) < -x - x^2/2 pins the lower
// endpoint without ever materializing 2^p.

#include <string>

#include <gmpxx.h>

#include "millsforge/interval.hpp"

namespace millsforge {

struct MersenneConstantReport {
    unsigned long p = 0;
    mpz_class m;
    DyadicInterval log_bracket;
    DyadicInterval a_bracket;
    DigitCertificate certificate;  // plain decimal form of A
    long horizon = 0;              // max certifiable significand digits
    bool unconditional = false;    // m above the guarantee threshold, seed certified
    bool seed_certified = false;   // p on the externally certified list
    std::string provenance;
};

// Guarantee threshold of the prime-between-consecutive-m-th-powers lemma.
inline constexpr unsigned long kGuaranteeThreshold = 1438989;

// Enclosure of log A for the chain seeded at 2^p - 1: lower endpoint from
// the Taylor bound (tightened by the direct log when 2^p is small enough
// to materialize), upper endpoint p*log2/m.
DyadicInterval theorem_log_bracket(unsigned long p, const mpz_class& m, long precision_bits);

// The weaker published window (p/m log2 - 2/(m 2^p), p/m log2) as an
// outward-rounded interval, for containment assertions.
DyadicInterval theorem_outer_window(unsigned long p, const mpz_class& m, long precision_bits);

// Largest significand digit count determined by the seed alone. Digits
// past it depend on primes nobody has found.
long theorem_horizon(unsigned long p, const mpz_class& m);

// Certified digits of A itself. `wanted` counts fractional digits of the
// normalized significand (the paper's presentation). Refuses wanted >
// horizon rather than inventing digits.
MersenneConstantReport theorem_constant_digits(unsigned long p, const mpz_class& m, long wanted);

// The log->value precision-transfer inequality A2 - A1 < 2 A1 (log A2 - log A1).
struct TransferCheck {
    enum class Status { holds_strict, holds_equality, indeterminate, violated };
    Status status;
    DyadicInterval lhs;  // A2 - A1
    DyadicInterval rhs;  // 2 A1 (log A2 - log A1)
};
TransferCheck precision_transfer_check(const DyadicInterval& a1, const DyadicInterval& a2);

}  // namespace millsforge
