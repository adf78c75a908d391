#pragma once
// dyadic.hpp - arbitrary-precision dyadic numbers with directed rounding.
//
// A Dyadic is mantissa * 2^exponent with an arbitrary-size signed mantissa.
// Canonical form: mantissa odd or zero; zero has exponent 0. All rounding
// is directed (toward -inf or +inf), which is what the interval layer
// needs for outward rounding. Exponents are bounded by a configurable
// limit; exceeding it raises ResourceError rather than wrapping.

#include <cstdint>
#include <string>

#include <gmpxx.h>

#include "millsforge/errors.hpp"

namespace millsforge {

enum class Round { down, up };  // toward -infinity / +infinity

inline Round opposite(Round r) { return r == Round::down ? Round::up : Round::down; }

// Process-wide limits. Defaults are generous: exponents to 2^40 cover the
// Mersenne constants (|exponent| ~ 8*10^7) with headroom, and the
// materialization limit allows integers up to 2^28 bits (~80 MB decimal).
struct Limits {
    static std::int64_t max_exponent();         // bound on |exponent| and msb position
    static void set_max_exponent(std::int64_t);
    static std::int64_t max_materialize_bits(); // bound for floor()/exact alignment
    static void set_max_materialize_bits(std::int64_t);
};

class Dyadic {
public:
    Dyadic() : mant_(0), exp_(0) {}
    Dyadic(long v) : mant_(v), exp_(0) { canonicalize(); }
    Dyadic(const mpz_class& mantissa, std::int64_t exponent) : mant_(mantissa), exp_(exponent) {
        canonicalize();
    }
    explicit Dyadic(const mpz_class& v) : mant_(v), exp_(0) { canonicalize(); }

    static Dyadic pow2(std::int64_t e) { return Dyadic(mpz_class(1), e); }

    const mpz_class& mantissa() const { return mant_; }
    std::int64_t exponent() const { return exp_; }

    int sign() const { return mpz_sgn(mant_.get_mpz_t()); }
    bool is_zero() const { return sign() == 0; }

    // Bits in |mantissa|; 0 for zero.
    std::int64_t bit_length() const {
        return is_zero() ? 0 : static_cast<std::int64_t>(mpz_sizeinbase(mant_.get_mpz_t(), 2));
    }
    // Position of the leading bit: |value| in [2^msb, 2^(msb+1)). Zero -> INT64_MIN.
    std::int64_t msb() const {
        return is_zero() ? INT64_MIN : exp_ + bit_length() - 1;
    }

    Dyadic operator-() const { return Dyadic(mpz_class(-mant_), exp_); }
    Dyadic abs() const { return sign() < 0 ? -*this : *this; }
    Dyadic mul_pow2(std::int64_t e) const {
        return is_zero() ? Dyadic() : Dyadic(mant_, exp_ + e);
    }

    // Directed rounding to at most precision_bits mantissa bits.
    Dyadic round(long precision_bits, Round dir) const;

    bool is_integer() const { return exp_ >= 0 || is_zero(); }
    mpz_class floor() const;
    mpz_class ceil() const { return -((-*this).floor()); }

    double to_double() const;  // diagnostics only; may over/underflow
    std::string debug_string() const;

    static int cmp(const Dyadic& a, const Dyadic& b);

    // Exact ring operations. Alignment spans are bounded by the
    // materialization limit; the rounded variants below have no such
    // restriction and should be preferred on values of unknown scale.
    static Dyadic add_exact(const Dyadic& a, const Dyadic& b);
    static Dyadic sub_exact(const Dyadic& a, const Dyadic& b) { return add_exact(a, -b); }
    static Dyadic mul_exact(const Dyadic& a, const Dyadic& b);

    // Directed rounded operations, safe for operands of wildly different
    // magnitude (a truncation window plus an error pad replaces exact
    // alignment when the spans get large).
    static Dyadic add(const Dyadic& a, const Dyadic& b, long prec, Round dir);
    static Dyadic sub(const Dyadic& a, const Dyadic& b, long prec, Round dir) {
        return add(a, -b, prec, dir);
    }
    static Dyadic mul(const Dyadic& a, const Dyadic& b, long prec, Round dir);
    static Dyadic div(const Dyadic& a, const Dyadic& b, long prec, Round dir);

private:
    mpz_class mant_;
    std::int64_t exp_;

    void canonicalize();
};

inline bool operator==(const Dyadic& a, const Dyadic& b) { return Dyadic::cmp(a, b) == 0; }
inline bool operator!=(const Dyadic& a, const Dyadic& b) { return Dyadic::cmp(a, b) != 0; }
inline bool operator<(const Dyadic& a, const Dyadic& b) { return Dyadic::cmp(a, b) < 0; }
inline bool operator<=(const Dyadic& a, const Dyadic& b) { return Dyadic::cmp(a, b) <= 0; }
inline bool operator>(const Dyadic& a, const Dyadic& b) { return Dyadic::cmp(a, b) > 0; }
inline bool operator>=(const Dyadic& a, const Dyadic& b) { return Dyadic::cmp(a, b) >= 0; }

}  // namespace millsforge
