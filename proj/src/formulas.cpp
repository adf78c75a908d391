#include "millsforge/formulas.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "millsforge/primality.hpp"

namespace millsforge {

mpz_class wilson_value(unsigned long n) {
    if (n < 1) throw DomainError("wilson_value requires n >= 1");
    mpz_class mod(n);
    mod += 1;
    mpz_class r(1);
    for (unsigned long k = 2; k <= n; ++k) {
        r *= k;
        r %= mod;
    }
    mpz_class q = r / mpz_class(n);  // r <= n, so q is 0 or 1
    return q * (n - 1) + 2;
}

int mobius(const mpz_class& d) {
    if (d < 1) throw DomainError("mobius requires d >= 1");
    if (d == 1) return 1;
    mpz_class rest = d;
    int factors = 0;
    for (std::uint32_t q : small_primes(1u << 16)) {
        if (mpz_class(q) * q > rest) break;
        if (mpz_divisible_ui_p(rest.get_mpz_t(), q)) {
            mpz_divexact_ui(rest.get_mpz_t(), rest.get_mpz_t(), q);
            if (mpz_divisible_ui_p(rest.get_mpz_t(), q)) return 0;  // square factor
            ++factors;
        }
    }
    if (rest > 1) {
        PrimalityVerdict v = is_prime(rest, SearchPolicy());
        if (!v.prime) throw ResourceError("mobius: argument too large to factor");
        ++factors;
    }
    return (factors % 2 == 0) ? 1 : -1;
}

mpz_class primorial(int k) {
    if (k < 0) throw DomainError("primorial requires k >= 0");
    const auto& primes = small_primes(1u << 16);
    if (static_cast<size_t>(k) > primes.size()) throw ResourceError("primorial index too large");
    mpz_class out(1);
    for (int i = 0; i < k; ++i) out *= primes[static_cast<size_t>(i)];
    return out;
}

// --------------------------------------------------------------------------
// Gandhi's formula.

namespace {

// Exponent range keeps divisors of the primorial representable as dyadic
// exponents: n - 1 <= 11 primes.
constexpr int kGandhiMaxN = 12;

// Enclosure of 1/(2^d - 1) without materializing 2^d:
// 2^-d + 2^-2d < 1/(2^d-1) <= 2^-d + 2^-2d+1 for d >= 2.
DyadicInterval reciprocal_mersenne(const mpz_class& d, long prec) {
    if (!d.fits_slong_p()) throw ResourceError("gandhi divisor exponent out of range");
    std::int64_t dv = d.get_si();
    if (dv == 1) return DyadicInterval::point(Dyadic(1), prec);
    Dyadic lo = Dyadic::add(Dyadic::pow2(-dv), Dyadic::pow2(-2 * dv), prec, Round::down);
    Dyadic hi = Dyadic::add(Dyadic::pow2(-dv), Dyadic::pow2(1 - 2 * dv), prec, Round::up);
    return DyadicInterval(lo, hi, prec);
}

std::vector<unsigned long> gandhi_primes(int n) {
    const auto& primes = small_primes(1u << 16);
    std::vector<unsigned long> out;
    for (int i = 0; i + 1 < n; ++i) out.push_back(primes[static_cast<size_t>(i)]);
    return out;
}

DyadicInterval gandhi_block_sum(const std::vector<unsigned long>& ps, unsigned long mask_begin,
                                unsigned long mask_end, long prec) {
    DyadicInterval sum = DyadicInterval::point(Dyadic(0), prec);
    for (unsigned long mask = mask_begin; mask < mask_end; ++mask) {
        mpz_class d(1);
        int bits = 0;
        for (size_t i = 0; i < ps.size(); ++i)
            if (mask & (1ul << i)) {
                d *= ps[i];
                ++bits;
            }
        DyadicInterval term = reciprocal_mersenne(d, prec);
        sum = (bits % 2 == 0) ? iv_add(sum, term) : iv_sub(sum, term);
    }
    return sum;
}

}  // namespace

DyadicInterval gandhi_sum_serial(int n, long prec) {
    auto ps = gandhi_primes(n);
    unsigned long nmask = 1ul << ps.size();
    DyadicInterval s = gandhi_block_sum(ps, 0, nmask, prec);
    return iv_sub(s, DyadicInterval::point(Dyadic(1, -1), prec));  // - 1/2
}

DyadicInterval gandhi_sum_parallel(int n, long prec) {
#ifndef _OPENMP
    return gandhi_sum_serial(n, prec);
#else
    auto ps = gandhi_primes(n);
    unsigned long nmask = 1ul << ps.size();
    int nblocks = std::min<unsigned long>(nmask, 4ul * omp_get_max_threads());
    std::vector<DyadicInterval> block(nblocks);
    unsigned long per = (nmask + nblocks - 1) / nblocks;
#pragma omp parallel for schedule(static)
    for (int b = 0; b < nblocks; ++b) {
        unsigned long begin = per * static_cast<unsigned long>(b);
        unsigned long end = std::min(nmask, begin + per);
        block[b] = begin < end ? gandhi_block_sum(ps, begin, end, prec)
                               : DyadicInterval::point(Dyadic(0), prec);
    }
    // Deterministic combine in block order.
    DyadicInterval s = block[0];
    for (int b = 1; b < nblocks; ++b) s = iv_add(s, block[b]);
    return iv_sub(s, DyadicInterval::point(Dyadic(1, -1), prec));
#endif
}

GandhiEval gandhi_prime_detail(int n, bool parallel) {
    if (n < 1) throw DomainError("gandhi_prime requires n >= 1");
    if (n > kGandhiMaxN)
        throw ResourceError("gandhi_prime: divisor sum over P_" + std::to_string(n - 1) +
                            " exceeds the representable exponent range (n <= " +
                            std::to_string(kGandhiMaxN) + ")");
    GandhiEval out;
    auto ps = gandhi_primes(n);
    if (ps.size() <= 6) {
        // Exact rational path over at most 64 divisors.
        out.exact_path = true;
        mpq_class S(-1, 2);
        unsigned long nmask = 1ul << ps.size();
        for (unsigned long mask = 0; mask < nmask; ++mask) {
            mpz_class d(1);
            int bits = 0;
            for (size_t i = 0; i < ps.size(); ++i)
                if (mask & (1ul << i)) {
                    d *= ps[i];
                    ++bits;
                }
            mpz_class den;
            mpz_ui_pow_ui(den.get_mpz_t(), 2, d.get_ui());
            den -= 1;
            mpq_class term(bits % 2 == 0 ? 1 : -1, den);
            term.canonicalize();
            S += term;
        }
        S.canonicalize();
        if (sgn(S) <= 0) throw IntegrityError("gandhi sum not positive");
        // Exact power of two: 1 - log2(S) is an integer.
        mpz_class num = S.get_num(), den = S.get_den();
        if (num == 1 && mpz_popcount(den.get_mpz_t()) == 1) {
            out.prime = static_cast<long>(mpz_scan1(den.get_mpz_t(), 0)) + 1;
            return out;
        }
        for (long prec = 128;; prec *= 2) {
            DyadicInterval Siv = DyadicInterval::from_rational(num, den, prec);
            DyadicInterval v = iv_sub(DyadicInterval::point(Dyadic(1), prec), iv_log2(Siv));
            mpz_class flo = v.lo().floor(), fhi = v.hi().floor();
            if (flo == fhi) {
                out.prime = flo.get_si();
                out.precision_bits = prec;
                return out;
            }
            ++out.escalations;
            if (prec > (1L << 20)) throw PrecisionError("gandhi_prime floor did not resolve");
        }
    }
    // Interval path: precision ~ 2 p_n + guard, escalating on ambiguity.
    long prec = 256;
    for (int attempt = 0; attempt < 5; ++attempt) {
        DyadicInterval S = parallel ? gandhi_sum_parallel(n, prec) : gandhi_sum_serial(n, prec);
        if (S.lo().sign() > 0) {
            DyadicInterval v = iv_sub(DyadicInterval::point(Dyadic(1), prec), iv_log2(S));
            mpz_class flo = v.lo().floor(), fhi = v.hi().floor();
            if (flo == fhi) {
                out.prime = flo.get_si();
                out.precision_bits = prec;
                return out;
            }
        }
        ++out.escalations;
        prec *= 2;
    }
    throw PrecisionError("gandhi_prime: ambiguous floor after precision escalation");
}

long gandhi_prime(int n) { return gandhi_prime_detail(n).prime; }

// --------------------------------------------------------------------------
// Wright's tower.

DyadicInterval iv_exp2(const DyadicInterval& x) {
    if (x.is_point() && x.lo().is_integer()) {
        mpz_class v = x.lo().floor();
        if (v.fits_slong_p())
            return DyadicInterval::point(Dyadic::pow2(v.get_si()), x.precision_bits());
    }
    return iv_exp(iv_mul(x, log2_interval(x.precision_bits() + 16)));
}

DyadicInterval iv_log2(const DyadicInterval& x) {
    return iv_div(iv_log(x), log2_interval(x.precision_bits() + 16));
}

namespace {

double log2_width_upper(const DyadicInterval& v) {
    Dyadic w = v.width();
    if (w.is_zero()) return -1e18;
    return static_cast<double>(w.msb()) + 1.0;
}

// Conservative: how many more doublings keep the tower floors certified,
// simulated with upper bounds in log2 space.
long wright_remaining_steps(const DyadicInterval& g) {
    double lw = log2_width_upper(g);
    double v = g.hi().to_double();  // current tower value
    if (!(v > 0) || v > 1e15) return 0;
    long r = 0;
    const double log2ln2 = -0.5287663729448977;
    while (r < 64) {
        // next width: w * ln2 * 2^v
        lw = lw + v + log2ln2;
        if (lw >= -2.5) break;
        ++r;
        if (v > 60) break;  // next value overflows any certified width
        v = std::ldexp(1.0, static_cast<int>(v));  // 2^v, crude upper
    }
    return r;
}

}  // namespace

WrightResult wright_floors(const DyadicInterval& omega, int steps) {
    WrightResult out;
    out.budget.initial_width = omega.width();
    if (steps < 1) return out;
    DyadicInterval g = iv_exp2(omega);
    for (int i = 0; i < steps; ++i) {
        mpz_class flo = g.lo().floor(), fhi = g.hi().floor();
        if (flo != fhi) {
            out.stop_reason = "floor of tower level " + std::to_string(i + 1) +
                              " straddles an integer; the seed width does not determine it";
            out.budget.remaining_valid_steps = 0;
            return out;
        }
        out.floors.push_back(flo);
        out.budget.amplification *= std::max<mpz_class>(flo, 1);
        if (i + 1 < steps) g = iv_exp2(g);
    }
    out.complete = true;
    out.budget.remaining_valid_steps = wright_remaining_steps(g);
    return out;
}

DyadicInterval wright_omega_from_floors(const std::vector<mpz_class>& floors,
                                        long precision_bits) {
    if (floors.empty()) throw DomainError("wright_omega_from_floors: empty floor list");
    long w = precision_bits + 16;
    size_t k = floors.size();
    DyadicInterval g = DyadicInterval::from_mpz(floors[k - 1], floors[k - 1] + 1, w);
    for (size_t i = k - 1; i-- > 0;) {
        DyadicInterval back = iv_log2(g);
        DyadicInterval level = DyadicInterval::from_mpz(floors[i], floors[i] + 1, w);
        auto isect = iv_intersect(back, level);
        if (!isect)
            throw DomainError("wright floors are mutually inconsistent at level " +
                              std::to_string(i + 1));
        g = *isect;
    }
    DyadicInterval omega = iv_log2(g);
    return DyadicInterval(omega.lo().round(precision_bits, Round::down),
                          omega.hi().round(precision_bits, Round::up), precision_bits);
}

// --------------------------------------------------------------------------
// Fridman's recurrence.

FridmanForward fridman_forward(const DyadicInterval& f1, int max_steps) {
    FridmanForward out;
    out.budget.initial_width = f1.width();
    if (f1.lo().sign() <= 0) throw DomainError("fridman seed must be positive");
    if (f1.lo().floor() != f1.hi().floor())
        throw DomainError("fridman seed straddles an integer");
    if (f1.is_point() && f1.lo().is_integer())
        throw DomainError("fridman seed sits exactly on a floor boundary");
    Dyadic lo = f1.lo(), hi = f1.hi();
    for (int step = 0; step < max_steps; ++step) {
        mpz_class flo = lo.floor(), fhi = hi.floor();
        if (flo != fhi) {
            out.stop_reason = "floor ambiguous at step " + std::to_string(step + 1) +
                              " (accumulated width exceeds the integer grid)";
            break;
        }
        if (lo == hi && lo.is_integer()) {
            out.stop_reason = "iterate hit an integer exactly at step " + std::to_string(step + 1);
            break;
        }
        out.primes.push_back(flo);
        out.budget.amplification *= flo;
        if (step + 1 < max_steps) {
            // f' = p (f - p + 1), exact in dyadic arithmetic.
            Dyadic shift(mpz_class(1 - flo));
            Dyadic p((mpz_class(flo)));
            lo = Dyadic::mul_exact(p, Dyadic::add_exact(lo, shift));
            hi = Dyadic::mul_exact(p, Dyadic::add_exact(hi, shift));
        }
    }
    out.complete = static_cast<int>(out.primes.size()) == max_steps;
    // Bertrand gives p_{next} < 2 p_last: simulate width growth with that
    // upper bound so the estimate never overestimates.
    {
        Dyadic w = Dyadic::sub(hi, lo, 64, Round::up);
        double lw = w.is_zero() ? -1e18 : static_cast<double>(w.msb()) + 1.0;
        double lp = out.primes.empty()
                        ? 1.0
                        : std::log2(std::max(2.0, out.primes.back().get_d()));
        long r = 0;
        while (r < 64) {
            lp += 1.0;  // next prime < 2 * current
            lw += lp;
            if (lw >= -2.5) break;
            ++r;
        }
        out.budget.remaining_valid_steps = r;
    }
    return out;
}

DyadicInterval fridman_backward(const std::vector<mpz_class>& primes, long precision_bits) {
    if (primes.empty()) throw DomainError("fridman_backward: empty prime list");
    const auto& ref = small_primes(1u << 16);
    for (size_t i = 0; i < primes.size(); ++i) {
        if (i >= ref.size() || primes[i] != ref[i])
            throw DomainError(
                "fridman_backward requires an initial segment of the primes in order");
    }
    long w = precision_bits + 16;
    size_t n = primes.size();
    DyadicInterval f = DyadicInterval::from_mpz(primes[n - 1], primes[n - 1] + 1, w);
    for (size_t i = n - 1; i-- > 0;) {
        DyadicInterval back = iv_add(iv_div_mpz(f, primes[i]),
                                     DyadicInterval::point(Dyadic(mpz_class(primes[i] - 1)), w));
        DyadicInterval level = DyadicInterval::from_mpz(primes[i], primes[i] + 1, w);
        auto isect = iv_intersect(back, level);
        if (!isect)
            throw IntegrityError("fridman backward constraints inconsistent at index " +
                                 std::to_string(i + 1));
        f = *isect;
    }
    return DyadicInterval(f.lo().round(precision_bits, Round::down),
                          f.hi().round(precision_bits, Round::up), precision_bits);
}

DyadicInterval decimal_prefix_window(const std::string& text, long precision_bits) {
    size_t dot = text.find('.');
    long frac = dot == std::string::npos ? 0 : static_cast<long>(text.size() - dot - 1);
    std::string digits_only = text;
    if (dot != std::string::npos) digits_only.erase(dot, 1);
    mpz_class n(digits_only);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, static_cast<unsigned long>(frac));
    DyadicInterval lo = DyadicInterval::from_rational(n, den, precision_bits);
    DyadicInterval hi = DyadicInterval::from_rational(n + 1, den, precision_bits);
    return iv_hull(lo, hi);
}

}  // namespace millsforge
