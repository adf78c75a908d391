#pragma once
// interval.hpp - dyadic interval arithmetic with outward rounding.
//
// Every operation returns an interval containing the exact image of its
// input set. Endpoints are rounded outward (lo toward -inf, hi toward
// +inf) to the working precision carried by the interval. Only certified
// containment is promised, not correct rounding.

#include <cstdint>
#include <optional>
#include <string>

#include <gmpxx.h>

#include "millsforge/dyadic.hpp"
#include "millsforge/errors.hpp"

namespace millsforge {

// A decimal prefix both interval endpoints agree on after truncation.
// certified_count counts fractional digits; it is maximal for the interval
// unless capped by the caller's request.
struct DigitCertificate {
    int sign = +1;
    std::string integer_part;    // empty when the endpoints' integer parts differ
    std::string fraction_digits; // truncated at certified_count
    long certified_count = 0;
    Dyadic width_bound;          // upper bound on hi - lo
    bool integer_certified = false;
    bool exact = false;          // source interval was a point
    bool capped = false;         // certified_count hit the caller's request

    bool empty() const { return !integer_certified; }
    // "I.FFF" (or "I" when no fractional digits are certified).
    std::string to_string() const;
    // Scientific form "d.ddd" with the point after the first significant
    // digit, plus the decimal exponent: 382499.98 -> ("3.8249998", 5).
    std::string scientific() const;
    long decimal_exponent() const;
    // Fractional digits available in the scientific form.
    long scientific_fraction_count() const;
};

class DyadicInterval {
public:
    DyadicInterval() : lo_(), hi_(), prec_(64) {}
    DyadicInterval(Dyadic lo, Dyadic hi, long precision_bits);

    static DyadicInterval point(const Dyadic& v, long precision_bits) {
        return DyadicInterval(v, v, precision_bits);
    }
    static DyadicInterval from_mpz(const mpz_class& lo, const mpz_class& hi, long precision_bits) {
        return DyadicInterval(Dyadic(lo), Dyadic(hi), precision_bits);
    }
    // Outward bracket of a decimal literal like "1.9287800" or "-2.5e3".
    static DyadicInterval from_decimal(const std::string& text, long precision_bits);
    // Bracket of the rational num/den (den > 0).
    static DyadicInterval from_rational(const mpz_class& num, const mpz_class& den,
                                        long precision_bits);

    const Dyadic& lo() const { return lo_; }
    const Dyadic& hi() const { return hi_; }
    long precision_bits() const { return prec_; }
    DyadicInterval with_precision(long p) const;

    bool is_point() const { return lo_ == hi_; }
    Dyadic width() const;  // hi - lo rounded up
    bool contains(const Dyadic& v) const { return lo_ <= v && v <= hi_; }
    bool contains(const DyadicInterval& inner) const {
        return lo_ <= inner.lo_ && inner.hi_ <= hi_;
    }
    bool contains_zero() const { return lo_.sign() <= 0 && hi_.sign() >= 0; }
    bool strictly_positive() const { return lo_.sign() > 0; }

    // Endpoints rounded outward to the working precision; applied on entry
    // to operations so user-supplied exact values of any size are safe.
    DyadicInterval normalized(long precision_bits) const;

    std::string debug_string() const;

private:
    Dyadic lo_, hi_;
    long prec_;
};

std::optional<DyadicInterval> iv_intersect(const DyadicInterval& a, const DyadicInterval& b);
DyadicInterval iv_hull(const DyadicInterval& a, const DyadicInterval& b);

DyadicInterval iv_add(const DyadicInterval& a, const DyadicInterval& b);
DyadicInterval iv_sub(const DyadicInterval& a, const DyadicInterval& b);
DyadicInterval iv_mul(const DyadicInterval& a, const DyadicInterval& b);
DyadicInterval iv_div(const DyadicInterval& a, const DyadicInterval& b);
DyadicInterval iv_neg(const DyadicInterval& a);
DyadicInterval iv_scale2(const DyadicInterval& a, std::int64_t e);  // exact *2^e
DyadicInterval iv_mul_mpz(const DyadicInterval& a, const mpz_class& k);
DyadicInterval iv_div_mpz(const DyadicInterval& a, const mpz_class& k);

// Natural logarithm; requires lo > 0.
DyadicInterval iv_log(const DyadicInterval& x);
// Exponential. Raises ResourceError when the result exponent leaves the
// configured range, never silently wraps.
DyadicInterval iv_exp(const DyadicInterval& x);
// x^k for big-integer k >= 1; requires lo > 0.
DyadicInterval iv_pow_int(const DyadicInterval& x, const mpz_class& k);
// x^(1/k) for big-integer k >= 1; requires lo > 0.
DyadicInterval iv_root(const DyadicInterval& x, const mpz_class& k);

// Cached enclosures of log 2 and log 10 at the given precision.
// Write-once per precision level, safe for concurrent readers.
DyadicInterval log2_interval(long precision_bits);
DyadicInterval log10_interval(long precision_bits);

// Longest common truncated-decimal prefix of the endpoints; requires
// lo > 0. max_fraction_digits caps the work (and the certificate of a
// point interval).
DigitCertificate digits(const DyadicInterval& x, long max_fraction_digits);

}  // namespace millsforge
