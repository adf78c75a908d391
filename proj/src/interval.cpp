#include "millsforge/interval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace millsforge {

DyadicInterval::DyadicInterval(Dyadic lo, Dyadic hi, long precision_bits)
    : lo_(std::move(lo)), hi_(std::move(hi)), prec_(precision_bits) {
    if (prec_ < 4) throw DomainError("interval precision must be >= 4 bits");
    if (Dyadic::cmp(lo_, hi_) > 0)
        throw DomainError("interval endpoints out of order: lo > hi");
}

DyadicInterval DyadicInterval::with_precision(long p) const {
    return DyadicInterval(lo_, hi_, p);
}

Dyadic DyadicInterval::width() const {
    return Dyadic::sub(hi_, lo_, std::max(prec_, 64L), Round::up);
}

DyadicInterval DyadicInterval::normalized(long precision_bits) const {
    Dyadic l = lo_, h = hi_;
    if (l.bit_length() > precision_bits + 64) l = l.round(precision_bits + 32, Round::down);
    if (h.bit_length() > precision_bits + 64) h = h.round(precision_bits + 32, Round::up);
    return DyadicInterval(l, h, precision_bits);
}

std::string DyadicInterval::debug_string() const {
    std::ostringstream os;
    os << "[" << lo_.to_double() << ", " << hi_.to_double() << "]@" << prec_;
    return os.str();
}

std::optional<DyadicInterval> iv_intersect(const DyadicInterval& a, const DyadicInterval& b) {
    const Dyadic& lo = std::max(a.lo(), b.lo());
    const Dyadic& hi = std::min(a.hi(), b.hi());
    if (lo > hi) return std::nullopt;
    return DyadicInterval(lo, hi, std::max(a.precision_bits(), b.precision_bits()));
}

DyadicInterval iv_hull(const DyadicInterval& a, const DyadicInterval& b) {
    return DyadicInterval(std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi()),
                          std::max(a.precision_bits(), b.precision_bits()));
}

DyadicInterval iv_neg(const DyadicInterval& a) {
    return DyadicInterval(-a.hi(), -a.lo(), a.precision_bits());
}

DyadicInterval iv_scale2(const DyadicInterval& a, std::int64_t e) {
    return DyadicInterval(a.lo().mul_pow2(e), a.hi().mul_pow2(e), a.precision_bits());
}

DyadicInterval iv_add(const DyadicInterval& a, const DyadicInterval& b) {
    long p = std::max(a.precision_bits(), b.precision_bits());
    return DyadicInterval(Dyadic::add(a.lo(), b.lo(), p, Round::down),
                          Dyadic::add(a.hi(), b.hi(), p, Round::up), p);
}

DyadicInterval iv_sub(const DyadicInterval& a, const DyadicInterval& b) {
    return iv_add(a, iv_neg(b));
}

DyadicInterval iv_mul(const DyadicInterval& a, const DyadicInterval& b) {
    long p = std::max(a.precision_bits(), b.precision_bits());
    DyadicInterval an = a.normalized(p), bn = b.normalized(p);
    Dyadic c[4] = {Dyadic::mul_exact(an.lo(), bn.lo()), Dyadic::mul_exact(an.lo(), bn.hi()),
                   Dyadic::mul_exact(an.hi(), bn.lo()), Dyadic::mul_exact(an.hi(), bn.hi())};
    Dyadic lo = c[0], hi = c[0];
    for (int i = 1; i < 4; ++i) {
        if (c[i] < lo) lo = c[i];
        if (c[i] > hi) hi = c[i];
    }
    return DyadicInterval(lo.round(p, Round::down), hi.round(p, Round::up), p);
}

DyadicInterval iv_div(const DyadicInterval& a, const DyadicInterval& b) {
    if (b.contains_zero())
        throw DomainError("division by an interval containing zero");
    long p = std::max(a.precision_bits(), b.precision_bits());
    DyadicInterval an = a.normalized(p), bn = b.normalized(p);
    const Dyadic* na[2] = {&an.lo(), &an.hi()};
    const Dyadic* nb[2] = {&bn.lo(), &bn.hi()};
    bool first = true;
    Dyadic lo, hi;
    for (const Dyadic* x : na)
        for (const Dyadic* y : nb) {
            Dyadic d = Dyadic::div(*x, *y, p, Round::down);
            Dyadic u = Dyadic::div(*x, *y, p, Round::up);
            if (first) {
                lo = d; hi = u; first = false;
            } else {
                if (d < lo) lo = d;
                if (u > hi) hi = u;
            }
        }
    return DyadicInterval(lo, hi, p);
}

DyadicInterval iv_mul_mpz(const DyadicInterval& a, const mpz_class& k) {
    long p = a.precision_bits();
    Dyadic kd((mpz_class(k)));
    DyadicInterval an = a.normalized(p);
    if (sgn(k) >= 0)
        return DyadicInterval(Dyadic::mul(an.lo(), kd, p, Round::down),
                              Dyadic::mul(an.hi(), kd, p, Round::up), p);
    return DyadicInterval(Dyadic::mul(an.hi(), kd, p, Round::down),
                          Dyadic::mul(an.lo(), kd, p, Round::up), p);
}

DyadicInterval iv_div_mpz(const DyadicInterval& a, const mpz_class& k) {
    if (sgn(k) == 0) throw DomainError("division by zero");
    long p = a.precision_bits();
    Dyadic kd((mpz_class(k)));
    DyadicInterval an = a.normalized(p);
    if (sgn(k) > 0)
        return DyadicInterval(Dyadic::div(an.lo(), kd, p, Round::down),
                              Dyadic::div(an.hi(), kd, p, Round::up), p);
    return DyadicInterval(Dyadic::div(an.hi(), kd, p, Round::down),
                          Dyadic::div(an.lo(), kd, p, Round::up), p);
}

// --------------------------------------------------------------------------
// Elementary functions. All series run in interval arithmetic at an inner
// precision a little above the target, with one-sided or symmetric tail
// pads, so containment follows from the containment of the ring ops.

namespace {

constexpr long kSeriesGuard = 16;
constexpr long kMaxSeriesIter = 1 << 22;

// atanh(t) for a thin interval with |t| <= 1/3. Used for log and log 2.
DyadicInterval atanh_enclosure(const DyadicInterval& t, long w) {
    Dyadic tmax = std::max(t.lo().abs(), t.hi().abs());
    if (tmax.is_zero()) return DyadicInterval::point(Dyadic(), w);
    if (tmax >= Dyadic(1, -1))
        throw Error("atanh argument out of reduced range");
    DyadicInterval t2 = iv_mul(t, t);
    DyadicInterval sum = t;
    DyadicInterval p = t;
    std::int64_t stop_msb = tmax.msb() - w - 6;
    Dyadic term_mag;
    unsigned long k = 3;
    for (;;) {
        p = iv_mul(p, t2);
        DyadicInterval term = iv_div_mpz(p, mpz_class(k));
        sum = iv_add(sum, term);
        term_mag = std::max(term.lo().abs(), term.hi().abs());
        if (term_mag.is_zero() || term_mag.msb() < stop_msb) break;
        k += 2;
        if (k > kMaxSeriesIter) throw Error("atanh series failed to converge");
    }
    // Remaining terms are bounded by a geometric series with ratio t^2.
    Dyadic t2max = t2.hi();
    Dyadic tail = Dyadic::mul(Dyadic::mul(term_mag, t2max, 48, Round::up), Dyadic(2),
                              48, Round::up);
    return iv_add(sum, DyadicInterval(-tail, tail, w));
}

// exp(r) for |r| <= 0.75, as an interval.
DyadicInterval exp_reduced(const DyadicInterval& r, long w) {
    const std::int64_t S = 16;
    DyadicInterval r2 = iv_scale2(r, -S);
    DyadicInterval sum = DyadicInterval::point(Dyadic(1), w);
    DyadicInterval p = sum;
    Dyadic term_mag;
    unsigned long k = 1;
    for (;;) {
        p = iv_mul(p, r2);
        p = iv_div_mpz(p, mpz_class(k));
        sum = iv_add(sum, p);
        term_mag = std::max(p.lo().abs(), p.hi().abs());
        if (term_mag.is_zero() || term_mag.msb() < -w - 6) break;
        ++k;
        if (k > kMaxSeriesIter) throw Error("exp series failed to converge");
    }
    // |r/2^S| < 2^-15, so the tail is below term * 2^-14.
    Dyadic tail = term_mag.mul_pow2(-14);
    sum = iv_add(sum, DyadicInterval(-tail, tail, w));
    for (std::int64_t i = 0; i < S; ++i) sum = iv_mul(sum, sum);
    return sum;
}

// Enclosure of log(x') where x' is x pre-rounded toward dir; by
// monotonicity the dir side bounds log(x) from that side.
DyadicInterval log_enclosure(const Dyadic& x, long w, Round dir) {
    Dyadic xr = x.round(w + 8, dir);
    if (xr.sign() <= 0) {
        // Rounding down a positive value this hard can only happen at
        // absurdly low precision; nudge to the representable floor.
        xr = Dyadic::pow2(x.msb());
    }
    std::int64_t k = xr.msb();
    Dyadic y = xr.mul_pow2(-k);                       // [1, 2)
    if (y > Dyadic(3, -1)) {                          // > 3/2: halve once
        y = y.mul_pow2(-1);
        k += 1;
    }
    Dyadic num = Dyadic::add_exact(y, Dyadic(-1));
    Dyadic den = Dyadic::add_exact(y, Dyadic(1));
    DyadicInterval t = iv_div(DyadicInterval::point(num, w + kSeriesGuard),
                              DyadicInterval::point(den, w + kSeriesGuard));
    DyadicInterval at = atanh_enclosure(t, w + kSeriesGuard);
    DyadicInterval res = iv_scale2(at, 1);
    if (k != 0) res = iv_add(res, iv_mul_mpz(log2_interval(w + kSeriesGuard), mpz_class((long)k)));
    return res;
}

DyadicInterval exp_enclosure(const Dyadic& x, long w, Round dir) {
    Dyadic xr = x.round(w + 8, dir);
    if (xr.is_zero()) return DyadicInterval::point(Dyadic(1), w);
    long wi = w + kSeriesGuard;
    // Integer part of x/log2 picks the binary exponent of the result; the
    // split need not be exact, only the residual evaluation must be.
    DyadicInterval q = iv_div(DyadicInterval::point(xr, 64), log2_interval(64));
    mpz_class e_mpz = q.lo().floor();
    if (!e_mpz.fits_slong_p())
        throw ResourceError("exp: binary exponent does not fit a machine word");
    long e = e_mpz.get_si();
    std::int64_t lim = Limits::max_exponent();
    if (e > lim - 8 || e < -lim + 8)
        throw ResourceError("exp: result exponent " + std::to_string(e) +
                            " outside configured range");
    DyadicInterval r = iv_sub(DyadicInterval::point(xr, wi),
                              iv_mul_mpz(log2_interval(wi), mpz_class(e)));
    DyadicInterval er = exp_reduced(r, wi);
    return iv_scale2(er, e);
}

}  // namespace

DyadicInterval log2_interval(long precision_bits) {
    static std::mutex mu;
    static std::map<long, DyadicInterval> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(precision_bits);
        if (it != cache.end()) return it->second;
    }
    long w = precision_bits + kSeriesGuard;
    // log 2 = 2 atanh(1/3)
    DyadicInterval third = DyadicInterval::from_rational(1, 3, w);
    DyadicInterval l2 = iv_scale2(atanh_enclosure(third, w), 1);
    DyadicInterval out(l2.lo().round(precision_bits, Round::down),
                       l2.hi().round(precision_bits, Round::up), precision_bits);
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(precision_bits, out);
    return out;
}

DyadicInterval log10_interval(long precision_bits) {
    static std::mutex mu;
    static std::map<long, DyadicInterval> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(precision_bits);
        if (it != cache.end()) return it->second;
    }
    DyadicInterval l10 = iv_log(DyadicInterval::point(Dyadic(10), precision_bits));
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(precision_bits, l10);
    return l10;
}

DyadicInterval iv_log(const DyadicInterval& x) {
    if (x.lo().sign() <= 0)
        throw DomainError("log of an interval with non-positive lower endpoint");
    long p = x.precision_bits();
    long w = p + 32;
    Dyadic lo = log_enclosure(x.lo(), w, Round::down).lo().round(p, Round::down);
    Dyadic hi = log_enclosure(x.hi(), w, Round::up).hi().round(p, Round::up);
    return DyadicInterval(lo, hi, p);
}

DyadicInterval iv_exp(const DyadicInterval& x) {
    long p = x.precision_bits();
    long w = p + 32;
    Dyadic lo = exp_enclosure(x.lo(), w, Round::down).lo().round(p, Round::down);
    Dyadic hi = exp_enclosure(x.hi(), w, Round::up).hi().round(p, Round::up);
    return DyadicInterval(lo, hi, p);
}

DyadicInterval iv_pow_int(const DyadicInterval& x, const mpz_class& k) {
    if (k < 1) throw DomainError("iv_pow_int requires k >= 1");
    if (x.lo().sign() <= 0)
        throw DomainError("iv_pow_int requires a strictly positive base interval");
    long p = x.precision_bits();
    if (k == 1) return x.normalized(p);
    // Result magnitude check before any work: msb(x^k) ~ k*msb(x).
    mpz_class est_hi = k * mpz_class((long)(x.hi().msb() + 1));
    mpz_class est_lo = k * mpz_class((long)(x.lo().msb()));
    mpz_class lim((long)Limits::max_exponent());
    if (est_hi > lim || est_lo < -lim)
        throw ResourceError("iv_pow_int: result exponent exceeds configured bound");
    size_t kbits = mpz_sizeinbase(k.get_mpz_t(), 2);
    long w = p + 32 + 2 * static_cast<long>(kbits);
    DyadicInterval base = x.normalized(w);
    DyadicInterval r = DyadicInterval::point(Dyadic(1), w);
    for (size_t i = kbits; i-- > 0;) {
        r = iv_mul(r, r);
        if (mpz_tstbit(k.get_mpz_t(), i)) r = iv_mul(r, base);
    }
    return DyadicInterval(r.lo().round(p, Round::down), r.hi().round(p, Round::up), p);
}

DyadicInterval iv_root(const DyadicInterval& x, const mpz_class& k) {
    if (k < 1) throw DomainError("iv_root requires k >= 1");
    if (x.lo().sign() <= 0)
        throw DomainError("iv_root requires a strictly positive interval");
    long p = x.precision_bits();
    if (k == 1) return x.normalized(p);
    DyadicInterval l = iv_log(x.with_precision(p + 32));
    DyadicInterval r = iv_exp(iv_div_mpz(l, k));
    return DyadicInterval(r.lo().round(p, Round::down), r.hi().round(p, Round::up), p);
}

// --------------------------------------------------------------------------
// Decimal conversion.

namespace {

// floor(frac * 10^n) for frac = m*2^e in [0, 1).
mpz_class floor_scale10(const Dyadic& frac, long n) {
    if (n == 0 || frac.is_zero()) return mpz_class(0);
    if (n * 10 / 4 > Limits::max_materialize_bits())
        throw ResourceError("decimal conversion: digit count exceeds materialization limit");
    mpz_class five;
    mpz_ui_pow_ui(five.get_mpz_t(), 5, static_cast<unsigned long>(n));
    mpz_class t = frac.mantissa() * five;
    std::int64_t sh = frac.exponent() + n;
    mpz_class out;
    if (sh >= 0)
        mpz_mul_2exp(out.get_mpz_t(), t.get_mpz_t(), static_cast<mp_bitcnt_t>(sh));
    else
        mpz_fdiv_q_2exp(out.get_mpz_t(), t.get_mpz_t(), static_cast<mp_bitcnt_t>(-sh));
    return out;
}

std::string pad_left(const mpz_class& v, long n) {
    std::string s = v.get_str();
    if (static_cast<long>(s.size()) < n) s.insert(0, static_cast<size_t>(n - s.size()), '0');
    return s;
}

}  // namespace

DigitCertificate digits(const DyadicInterval& x, long max_fraction_digits) {
    if (x.lo().sign() <= 0)
        throw DomainError("digits requires a strictly positive interval");
    if (max_fraction_digits < 0) max_fraction_digits = 0;
    DigitCertificate cert;
    cert.width_bound = x.width();
    cert.exact = x.is_point();
    mpz_class flo = x.lo().floor();
    mpz_class fhi = x.hi().floor();
    if (flo != fhi) return cert;  // integer parts disagree: empty certificate
    cert.integer_certified = true;
    cert.integer_part = flo.get_str();
    if (max_fraction_digits == 0) return cert;

    Dyadic frac_lo = Dyadic::sub_exact(x.lo(), Dyadic(flo));
    Dyadic frac_hi = Dyadic::sub_exact(x.hi(), Dyadic(fhi));
    Dyadic w = cert.width_bound;

    long n;
    if (w.is_zero()) {
        n = max_fraction_digits;
    } else {
        // Smallest digit count guaranteed to expose the disagreement:
        // width > 10^-n forces distinct truncations at n digits.
        double est = -static_cast<double>(w.msb()) * 0.30102999566398119;
        n = std::min<long>(max_fraction_digits, std::max<long>(1, (long)std::floor(est) + 2));
    }
    for (;;) {
        std::string slo = pad_left(floor_scale10(frac_lo, n), n);
        std::string shi = pad_left(floor_scale10(frac_hi, n), n);
        long c = 0;
        while (c < n && slo[static_cast<size_t>(c)] == shi[static_cast<size_t>(c)]) ++c;
        if (c == n && n < max_fraction_digits && !w.is_zero()) {
            n = std::min<long>(max_fraction_digits, n * 2 + 8);
            continue;
        }
        cert.certified_count = std::min<long>(c, max_fraction_digits);
        cert.fraction_digits = slo.substr(0, static_cast<size_t>(cert.certified_count));
        cert.capped = (cert.certified_count == max_fraction_digits);
        return cert;
    }
}

std::string DigitCertificate::to_string() const {
    if (!integer_certified) return "(no certified digits)";
    if (certified_count == 0) return integer_part;
    return integer_part + "." + fraction_digits;
}

long DigitCertificate::decimal_exponent() const {
    if (!integer_certified) return 0;
    if (integer_part != "0") return static_cast<long>(integer_part.size()) - 1;
    for (size_t i = 0; i < fraction_digits.size(); ++i)
        if (fraction_digits[i] != '0') return -static_cast<long>(i) - 1;
    return 0;
}

long DigitCertificate::scientific_fraction_count() const {
    if (!integer_certified) return 0;
    if (integer_part != "0")
        return certified_count + static_cast<long>(integer_part.size()) - 1;
    long e = decimal_exponent();
    if (e == 0) return 0;  // all certified digits are zero
    return certified_count + e;  // e < 0 removes the leading zeros and the first digit
}

std::string DigitCertificate::scientific() const {
    if (!integer_certified) return "(no certified digits)";
    std::string all;
    long e = decimal_exponent();
    if (integer_part != "0") {
        all = integer_part + fraction_digits;
    } else {
        size_t first = fraction_digits.find_first_not_of('0');
        if (first == std::string::npos) return "0";
        all = fraction_digits.substr(first);
    }
    std::string out;
    out += all[0];
    if (all.size() > 1) {
        out += '.';
        out += all.substr(1);
    }
    if (e != 0) out += "e" + std::to_string(e);
    return out;
}

DyadicInterval DyadicInterval::from_rational(const mpz_class& num, const mpz_class& den,
                                             long precision_bits) {
    if (sgn(den) <= 0) throw DomainError("from_rational requires a positive denominator");
    Dyadic n((mpz_class(num)));
    Dyadic d((mpz_class(den)));
    return DyadicInterval(Dyadic::div(n, d, precision_bits, Round::down),
                          Dyadic::div(n, d, precision_bits, Round::up), precision_bits);
}

DyadicInterval DyadicInterval::from_decimal(const std::string& text, long precision_bits) {
    size_t i = 0;
    bool neg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
        neg = text[i] == '-';
        ++i;
    }
    std::string digits_all;
    long frac_len = 0;
    bool seen_digit = false, seen_point = false;
    long exp10 = 0;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c >= '0' && c <= '9') {
            digits_all += c;
            if (seen_point) ++frac_len;
            seen_digit = true;
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else if ((c == 'e' || c == 'E') && seen_digit) {
            exp10 = std::stol(text.substr(i + 1));
            break;
        } else {
            throw DomainError("malformed decimal literal: " + text);
        }
    }
    if (!seen_digit) throw DomainError("malformed decimal literal: " + text);
    mpz_class n(digits_all.empty() ? "0" : digits_all);
    if (neg) n = -n;
    long k = exp10 - frac_len;
    if (k >= 0) {
        mpz_class ten;
        mpz_ui_pow_ui(ten.get_mpz_t(), 10, static_cast<unsigned long>(k));
        return DyadicInterval::point(Dyadic(mpz_class(n * ten)), precision_bits);
    }
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, static_cast<unsigned long>(-k));
    return from_rational(n, den, precision_bits);
}

}  // namespace millsforge
