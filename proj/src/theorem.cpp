#include "millsforge/theorem.hpp"

#include <algorithm>

#include "millsforge/primality.hpp"

namespace millsforge {

namespace {

// Largest exponent for which 2^p - 1 is materialized to sharpen the lower
// endpoint with a direct logarithm. Above it the Taylor bound alone is
// used (its slack, 2^-2p/m, is far below any realistic precision).
constexpr unsigned long kDirectLogBits = 1u << 20;

}  // namespace

DyadicInterval theorem_log_bracket(unsigned long p, const mpz_class& m, long precision_bits) {
    if (p < 2) throw DomainError("theorem_log_bracket requires p >= 2");
    if (m < 2) throw DomainError("theorem_log_bracket requires m >= 2");
    long w = precision_bits + 32;
    DyadicInterval l2 = log2_interval(w);
    Dyadic x = Dyadic::pow2(-static_cast<std::int64_t>(p));
    Dyadic x2 = Dyadic::pow2(-2 * static_cast<std::int64_t>(p));
    Dyadic md((mpz_class(m)));

    // Lower: (p log2 - x - x^2)/m rounded down.
    Dyadic num_lo = Dyadic::mul(l2.lo(), Dyadic(mpz_class(p)), w, Round::down);
    num_lo = Dyadic::sub(num_lo, Dyadic::add(x, x2, w, Round::up), w, Round::down);
    Dyadic lo = Dyadic::div(num_lo, md, precision_bits, Round::down);

    // Upper: p log2 / m rounded up.
    Dyadic num_hi = Dyadic::mul(l2.hi(), Dyadic(mpz_class(p)), w, Round::up);
    Dyadic hi = Dyadic::div(num_hi, md, precision_bits, Round::up);

    if (p <= kDirectLogBits) {
        // Direct logarithm of the seed is tighter whenever 2^-p is below
        // the working resolution.
        mpz_class seed = mersenne(p);
        DyadicInterval direct =
            iv_div_mpz(iv_log(DyadicInterval::point(Dyadic(seed), w)), m);
        if (direct.lo() > lo) lo = direct.lo().round(precision_bits, Round::down);
    }
    if (lo > hi) lo = hi;  // only at precisions too low to separate endpoints
    return DyadicInterval(lo, hi, precision_bits);
}

DyadicInterval theorem_outer_window(unsigned long p, const mpz_class& m, long precision_bits) {
    long w = precision_bits + 32;
    DyadicInterval l2 = log2_interval(w);
    Dyadic md((mpz_class(m)));
    Dyadic x1 = Dyadic::pow2(1 - static_cast<std::int64_t>(p));  // 2/2^p
    Dyadic num_lo = Dyadic::mul(l2.lo(), Dyadic(mpz_class(p)), w, Round::down);
    num_lo = Dyadic::sub(num_lo, x1, w, Round::down);
    Dyadic lo = Dyadic::div(num_lo, md, precision_bits, Round::down);
    Dyadic num_hi = Dyadic::mul(l2.hi(), Dyadic(mpz_class(p)), w, Round::up);
    Dyadic hi = Dyadic::div(num_hi, md, precision_bits, Round::up);
    return DyadicInterval(lo, hi, precision_bits);
}

long theorem_horizon(unsigned long p, const mpz_class& m) {
    if (p < 2) throw DomainError("theorem_horizon requires p >= 2");
    if (m < 2) throw DomainError("theorem_horizon requires m >= 2");
    long w = 160;
    // Relative width of the seed bracket: -log(1 - 2^-p)/m < (x + x^2)/m.
    Dyadic x = Dyadic::pow2(-static_cast<std::int64_t>(p));
    Dyadic x2 = Dyadic::pow2(-2 * static_cast<std::int64_t>(p));
    Dyadic wrel = Dyadic::div(Dyadic::add(x, x2, w, Round::up), Dyadic(mpz_class(m)), w,
                              Round::up);
    DyadicInterval d = iv_div(iv_neg(iv_log(DyadicInterval::point(wrel, w))),
                              log10_interval(w));
    mpz_class f = d.lo().floor();
    if (!f.fits_slong_p()) throw ResourceError("theorem_horizon overflow");
    return std::max(0L, f.get_si() - 1);
}

MersenneConstantReport theorem_constant_digits(unsigned long p, const mpz_class& m,
                                               long wanted) {
    if (wanted < 0) wanted = 0;
    MersenneConstantReport rep;
    rep.p = p;
    rep.m = m;
    rep.horizon = theorem_horizon(p, m);
    rep.seed_certified = is_certified_mersenne_exponent(p);
    rep.unconditional = rep.seed_certified && m >= kGuaranteeThreshold;
    rep.provenance = rep.seed_certified
                         ? "seed 2^" + std::to_string(p) + "-1 externally certified (GIMPS)"
                         : "seed 2^" + std::to_string(p) + "-1 not on the certified list";
    if (wanted > rep.horizon)
        throw HorizonError("requested " + std::to_string(wanted) +
                           " digits but only " + std::to_string(rep.horizon) +
                           " are determined by the seed; later digits depend on unknown primes");

    long prec = std::max(256L, static_cast<long>(wanted * 3.33) + 192);
    for (int attempt = 0; attempt < 5; ++attempt) {
        rep.log_bracket = theorem_log_bracket(p, m, prec);
        rep.a_bracket = iv_exp(rep.log_bracket);
        // `wanted` counts significand digits; translate to plain fractional
        // digits using the integer part's length.
        long int_len = static_cast<long>(rep.a_bracket.lo().floor().get_str().size());
        long plain = std::max(0L, wanted - (int_len - 1)) + 2;
        rep.certificate = digits(rep.a_bracket, plain);
        if (rep.certificate.scientific_fraction_count() >= wanted) return rep;
        prec *= 2;
    }
    throw PrecisionError("theorem_constant_digits: could not certify " +
                         std::to_string(wanted) + " digits below the horizon");
}

TransferCheck precision_transfer_check(const DyadicInterval& a1, const DyadicInterval& a2) {
    if (a1.lo().sign() <= 0 || a2.lo().sign() <= 0)
        throw DomainError("precision_transfer_check requires positive intervals");
    if (a1.lo() > a2.lo() || a1.hi() > a2.hi())
        throw DomainError("precision_transfer_check requires a1 <= a2 pointwise");
    TransferCheck out{TransferCheck::Status::indeterminate,
                      iv_sub(a2, a1),
                      iv_scale2(iv_mul(a1, iv_sub(iv_log(a2), iv_log(a1))), 1)};
    bool identical = (a1.lo() == a2.lo()) && (a1.hi() == a2.hi());
    if (identical && a1.is_point()) {
        out.status = TransferCheck::Status::holds_equality;
    } else if (out.lhs.hi() < out.rhs.lo()) {
        out.status = TransferCheck::Status::holds_strict;
    } else if (out.lhs.lo() > out.rhs.hi()) {
        out.status = TransferCheck::Status::violated;
    }
    return out;
}

}  // namespace millsforge
