#include "millsforge/dyadic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

namespace millsforge {

namespace {
std::atomic<std::int64_t> g_max_exponent{std::int64_t(1) << 40};
std::atomic<std::int64_t> g_max_materialize{std::int64_t(1) << 28};
}  // namespace

std::int64_t Limits::max_exponent() { return g_max_exponent.load(); }
void Limits::set_max_exponent(std::int64_t v) { g_max_exponent.store(v); }
std::int64_t Limits::max_materialize_bits() { return g_max_materialize.load(); }
void Limits::set_max_materialize_bits(std::int64_t v) { g_max_materialize.store(v); }

void Dyadic::canonicalize() {
    if (sign() == 0) {
        exp_ = 0;
        return;
    }
    mp_bitcnt_t tz = mpz_scan1(mant_.get_mpz_t(), 0);
    if (tz > 0) {
        mpz_fdiv_q_2exp(mant_.get_mpz_t(), mant_.get_mpz_t(), tz);
        exp_ += static_cast<std::int64_t>(tz);
    }
    std::int64_t lim = Limits::max_exponent();
    if (exp_ > lim || exp_ < -lim || msb() > lim || msb() < -lim) {
        throw ResourceError("dyadic exponent " + std::to_string(exp_) +
                            " outside configured range (limit " + std::to_string(lim) + ")");
    }
}

Dyadic Dyadic::round(long precision_bits, Round dir) const {
    if (precision_bits < 1) throw DomainError("precision must be >= 1 bit");
    std::int64_t excess = bit_length() - precision_bits;
    if (excess <= 0) return *this;
    Dyadic r;
    if (dir == Round::down) {
        mpz_fdiv_q_2exp(r.mant_.get_mpz_t(), mant_.get_mpz_t(), static_cast<mp_bitcnt_t>(excess));
    } else {
        mpz_cdiv_q_2exp(r.mant_.get_mpz_t(), mant_.get_mpz_t(), static_cast<mp_bitcnt_t>(excess));
    }
    r.exp_ = exp_ + excess;
    r.canonicalize();
    return r;
}

mpz_class Dyadic::floor() const {
    if (is_zero()) return mpz_class(0);
    mpz_class out;
    if (exp_ >= 0) {
        if (msb() > Limits::max_materialize_bits())
            throw ResourceError("floor(): integer of " + std::to_string(msb()) +
                                " bits exceeds materialization limit");
        mpz_mul_2exp(out.get_mpz_t(), mant_.get_mpz_t(), static_cast<mp_bitcnt_t>(exp_));
    } else {
        mpz_fdiv_q_2exp(out.get_mpz_t(), mant_.get_mpz_t(), static_cast<mp_bitcnt_t>(-exp_));
    }
    return out;
}

double Dyadic::to_double() const {
    if (is_zero()) return 0.0;
    long keep = std::min<std::int64_t>(bit_length(), 64);
    Dyadic t = round(keep, Round::down);
    double m = t.mant_.get_d();
    return std::ldexp(m, static_cast<int>(t.exp_));
}

std::string Dyadic::debug_string() const {
    std::ostringstream os;
    os << mant_.get_str() << "*2^" << exp_;
    return os.str();
}

int Dyadic::cmp(const Dyadic& a, const Dyadic& b) {
    int sa = a.sign(), sb = b.sign();
    if (sa != sb) return sa < sb ? -1 : 1;
    if (sa == 0) return 0;
    std::int64_t ma = a.msb(), mb = b.msb();
    if (ma != mb) {
        int mag = ma < mb ? -1 : 1;  // |a| < |b| when msb smaller
        return sa > 0 ? mag : -mag;
    }
    // Equal leading-bit position: exponent gap is bounded by the mantissa
    // lengths, so exact alignment is cheap.
    std::int64_t d = a.exp_ - b.exp_;
    mpz_class x = a.mant_, y = b.mant_;
    if (d >= 0) {
        mpz_mul_2exp(x.get_mpz_t(), x.get_mpz_t(), static_cast<mp_bitcnt_t>(d));
    } else {
        mpz_mul_2exp(y.get_mpz_t(), y.get_mpz_t(), static_cast<mp_bitcnt_t>(-d));
    }
    int c = ::cmp(x, y);
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

Dyadic Dyadic::add_exact(const Dyadic& a, const Dyadic& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    std::int64_t span = std::max(a.msb(), b.msb()) - std::min(a.exp_, b.exp_);
    if (span > Limits::max_materialize_bits())
        throw ResourceError("add_exact(): alignment span " + std::to_string(span) +
                            " bits exceeds materialization limit");
    std::int64_t e = std::min(a.exp_, b.exp_);
    mpz_class x = a.mant_, y = b.mant_;
    mpz_mul_2exp(x.get_mpz_t(), x.get_mpz_t(), static_cast<mp_bitcnt_t>(a.exp_ - e));
    mpz_mul_2exp(y.get_mpz_t(), y.get_mpz_t(), static_cast<mp_bitcnt_t>(b.exp_ - e));
    return Dyadic(mpz_class(x + y), e);
}

Dyadic Dyadic::mul_exact(const Dyadic& a, const Dyadic& b) {
    if (a.is_zero() || b.is_zero()) return Dyadic();
    if (a.bit_length() + b.bit_length() > Limits::max_materialize_bits())
        throw ResourceError("mul_exact(): product mantissa exceeds materialization limit");
    return Dyadic(mpz_class(a.mant_ * b.mant_), a.exp_ + b.exp_);
}

namespace {
// x = result + delta with delta in [0, 2^window_bot). Floor truncation, so
// the discarded part is non-negative regardless of sign.
Dyadic trunc_at(const Dyadic& x, std::int64_t window_bot) {
    if (x.is_zero() || x.exponent() >= window_bot) return x;
    mpz_class q;
    mpz_fdiv_q_2exp(q.get_mpz_t(), x.mantissa().get_mpz_t(),
                    static_cast<mp_bitcnt_t>(window_bot - x.exponent()));
    return Dyadic(q, window_bot);
}
}  // namespace

Dyadic Dyadic::add(const Dyadic& a, const Dyadic& b, long prec, Round dir) {
    if (a.is_zero()) return b.round(prec, dir);
    if (b.is_zero()) return a.round(prec, dir);
    std::int64_t top = std::max(a.msb(), b.msb()) + 2;
    std::int64_t bot = std::min(a.exp_, b.exp_);
    if (top - bot <= prec + 80) return add_exact(a, b).round(prec, dir);
    // Wide span: truncate both operands to a window of prec+16 bits below
    // the top and pad in the requested direction. The exact sum lies in
    // [s, s + 2^(window_bot+1)).
    std::int64_t window_bot = top - (prec + 16);
    Dyadic s = add_exact(trunc_at(a, window_bot), trunc_at(b, window_bot));
    if (dir == Round::down) return s.round(prec, Round::down);
    return add_exact(s, Dyadic::pow2(window_bot + 1)).round(prec, Round::up);
}

Dyadic Dyadic::mul(const Dyadic& a, const Dyadic& b, long prec, Round dir) {
    if (a.is_zero() || b.is_zero()) return Dyadic();
    // Oversized operands get a directed pre-round that keeps the product
    // bounded from the requested side: moving x toward -inf moves x*y the
    // same way exactly when y > 0.
    const Dyadic* pa = &a;
    const Dyadic* pb = &b;
    Dyadic ra, rb;
    long inner = prec + 64;
    bool want_low = (dir == Round::down);
    if (a.bit_length() > inner + 64) {
        ra = a.round(inner, want_low == (b.sign() > 0) ? Round::down : Round::up);
        pa = &ra;
    }
    if (b.bit_length() > inner + 64) {
        rb = b.round(inner, want_low == (pa->sign() > 0) ? Round::down : Round::up);
        pb = &rb;
    }
    return mul_exact(*pa, *pb).round(prec, dir);
}

Dyadic Dyadic::div(const Dyadic& a, const Dyadic& b, long prec, Round dir) {
    if (b.is_zero()) throw DomainError("division by zero dyadic");
    if (a.is_zero()) return Dyadic();
    std::int64_t la = a.bit_length(), lb = b.bit_length();
    std::int64_t s = prec + 3 + lb - la;
    if (s < 0) s = 0;
    mpz_class num = a.mant_;
    mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), static_cast<mp_bitcnt_t>(s));
    mpz_class q, r;
    // fdiv floors the quotient toward -inf for every sign combination,
    // so q <= true quotient < q+1, strict unless r == 0.
    mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), num.get_mpz_t(), b.mant_.get_mpz_t());
    std::int64_t e = a.exp_ - b.exp_ - s;
    if (dir == Round::down || mpz_sgn(r.get_mpz_t()) == 0) {
        return Dyadic(q, e).round(prec, dir);
    }
    return Dyadic(mpz_class(q + 1), e).round(prec, Round::up);
}

}  // namespace millsforge
