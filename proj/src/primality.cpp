#include "millsforge/primality.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "millsforge/interval.hpp"

namespace millsforge {

std::string evidence_name(Evidence e) {
    switch (e) {
        case Evidence::proven_trial_division: return "proven_trial_division";
        case Evidence::deterministic_bases: return "deterministic_bases";
        case Evidence::strong_probable: return "strong_probable";
        case Evidence::externally_certified: return "externally_certified";
    }
    return "?";
}

std::optional<Evidence> evidence_from_name(const std::string& s) {
    if (s == "proven_trial_division") return Evidence::proven_trial_division;
    if (s == "deterministic_bases") return Evidence::deterministic_bases;
    if (s == "strong_probable") return Evidence::strong_probable;
    if (s == "externally_certified") return Evidence::externally_certified;
    return std::nullopt;
}

bool evidence_is_proof(Evidence e) { return e != Evidence::strong_probable; }

// Sorenson & Webster: the first 13 primes as strong bases decide
// primality for all n below this bound.
static const char* kDeterministicBoundStr = "3317044064679887385961981";
static const unsigned long kDeterministicBases[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41};

SearchPolicy::SearchPolicy() : deterministic_threshold(kDeterministicBoundStr) {}

void SearchPolicy::validate() const {
    if (probable_rounds < 1) throw DomainError("SearchPolicy: probable_rounds must be >= 1");
    if (wheel_size < 3) throw DomainError("SearchPolicy: wheel_size must be >= 3");
    if (trial_division_bound < 4) throw DomainError("SearchPolicy: trial bound too small");
}

// --------------------------------------------------------------------------
// Small primes.

const std::vector<std::uint32_t>& small_primes(std::uint32_t bound) {
    // One immutable vector per power-of-two bucket so references stay valid
    // while other threads request larger bounds.
    static std::mutex mu;
    static std::map<std::uint32_t, std::unique_ptr<const std::vector<std::uint32_t>>> cache;
    std::uint32_t bucket = 1u << 16;
    while (bucket < bound) bucket <<= 1;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[bucket];
    if (!slot) {
        std::vector<char> comp(bucket + 1, 0);
        auto primes = std::make_unique<std::vector<std::uint32_t>>();
        for (std::uint32_t i = 2; i <= bucket; ++i) {
            if (comp[i]) continue;
            primes->push_back(i);
            for (std::uint64_t j = std::uint64_t(i) * i; j <= bucket; j += i) comp[j] = 1;
        }
        slot = std::move(primes);
    }
    return *slot;
}

// --------------------------------------------------------------------------
// Strong tests.

namespace {

// Miller-Rabin to base a (a reduced mod n, 1 < a < n-1 assumed useful).
bool strong_probable_base(const mpz_class& n, const mpz_class& a) {
    mpz_class d = n - 1;
    mp_bitcnt_t s = mpz_scan1(d.get_mpz_t(), 0);
    mpz_fdiv_q_2exp(d.get_mpz_t(), d.get_mpz_t(), s);
    mpz_class x;
    mpz_powm(x.get_mpz_t(), a.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
    mpz_class nm1 = n - 1;
    if (x == 1 || x == nm1) return true;
    for (mp_bitcnt_t r = 1; r < s; ++r) {
        x = (x * x) % n;
        if (x == nm1) return true;
        if (x == 1) return false;
    }
    return false;
}

// Strong Lucas test with Selfridge's parameters (method A). Returns 1 for
// probable prime, 0 for composite; a discovered factor lands in *factor.
int strong_lucas(const mpz_class& n, mpz_class* factor) {
    // Find D in 5, -7, 9, -11, ... with (D|n) = -1.
    long D = 5;
    for (int tries = 0;; ++tries) {
        int j = mpz_si_kronecker(D, n.get_mpz_t());
        if (j == -1) break;
        if (j == 0) {
            mpz_class g = gcd(mpz_class(std::abs(D)), n);
            if (g != 1 && g != n) {
                if (factor) *factor = g;
                return 0;
            }
            if (g == n && n != mpz_class(std::abs(D))) return 0;
        }
        D = D > 0 ? -(D + 2) : -(D - 2);
        if (tries == 20 && mpz_perfect_square_p(n.get_mpz_t())) return 0;
        if (tries > 1000) throw Error("strong_lucas: no usable discriminant found");
    }
    // P = 1, Q = (1 - D) / 4.
    mpz_class Q = (mpz_class(1) - mpz_class(D)) / 4;
    mpz_class d = n + 1;
    mp_bitcnt_t s = mpz_scan1(d.get_mpz_t(), 0);
    mpz_fdiv_q_2exp(d.get_mpz_t(), d.get_mpz_t(), s);

    auto halve = [&n](mpz_class& x) {
        if (mpz_odd_p(x.get_mpz_t())) x += n;
        x >>= 1;
        x %= n;
    };
    mpz_class U = 1, V = 1, Qk = Q % n;  // U_1 = 1, V_1 = P = 1
    if (Qk < 0) Qk += n;
    mpz_class Dm = mpz_class(D) % n;
    if (Dm < 0) Dm += n;
    size_t bits = mpz_sizeinbase(d.get_mpz_t(), 2);
    for (size_t i = bits - 1; i-- > 0;) {
        // double: (U, V, Q^k) -> (UV, V^2 - 2Q^k, Q^2k)
        U = (U * V) % n;
        V = (V * V - 2 * Qk) % n;
        if (V < 0) V += n;
        Qk = (Qk * Qk) % n;
        if (mpz_tstbit(d.get_mpz_t(), i)) {
            // increment: U' = (U + V)/2, V' = (D*U + V)/2 (P = 1)
            mpz_class tU = U + V;
            mpz_class tV = Dm * U + V;
            halve(tU);
            halve(tV);
            U = tU;
            V = tV;
            Qk = (Qk * Q) % n;
            if (Qk < 0) Qk += n;
        }
    }
    if (U == 0) return 1;
    for (mp_bitcnt_t r = 0; r < s; ++r) {
        if (V == 0) return 1;
        V = (V * V - 2 * Qk) % n;
        if (V < 0) V += n;
        Qk = (Qk * Qk) % n;
    }
    return 0;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Extra-round base derived deterministically from n and the round index.
mpz_class derived_base(const mpz_class& n, int round) {
    std::uint64_t seed = mpz_get_ui(n.get_mpz_t());  // low bits of |n|
    seed ^= 0x6D696C6C73ull + static_cast<std::uint64_t>(round) * 0x100000001B3ull;
    std::uint64_t r = splitmix64(seed);
    mpz_class span = n - 4;  // bases in [2, n-3]
    mpz_class b(static_cast<unsigned long>(r));
    b %= span;
    return b + 2;
}

PrimalityVerdict composite_with(const mpz_class& n, std::optional<mpz_class> factor,
                                std::string reason) {
    PrimalityVerdict v;
    v.prime = false;
    v.composite = CompositeWitness{n, std::move(factor), std::move(reason)};
    return v;
}

PrimalityVerdict prime_with(const mpz_class& n, Evidence e, std::string params) {
    PrimalityVerdict v;
    v.prime = true;
    v.witness = PrimeWitness{n, e, std::move(params)};
    return v;
}

// Full trial division for word-sized n.
PrimalityVerdict trial_division_verdict(unsigned long v, unsigned long bound) {
    mpz_class n(v);
    if (v < 2) return composite_with(n, std::nullopt, "below 2: not prime by definition");
    const auto& primes = small_primes(65536);  // sqrt(2^32)
    for (std::uint32_t q : primes) {
        if (std::uint64_t(q) * q > v) break;
        if (v % q == 0)
            return composite_with(n, mpz_class(q), "trial division found factor");
    }
    return prime_with(n, Evidence::proven_trial_division,
                      "full trial division (bound " + std::to_string(bound) + ")");
}

}  // namespace

PrimalityVerdict is_prime(const mpz_class& n, const SearchPolicy& policy) {
    policy.validate();
    if (sgn(n) < 0) throw DomainError("is_prime requires n >= 0");
    if (n < 2) return composite_with(n, std::nullopt, "below 2: not prime by definition");
    if (mpz_fits_ulong_p(n.get_mpz_t())) {
        unsigned long v = mpz_get_ui(n.get_mpz_t());
        if (v < policy.trial_division_bound)
            return trial_division_verdict(v, policy.trial_division_bound);
    }
    // Cheap factor screen.
    for (std::uint32_t q : small_primes(1024)) {
        if (mpz_fdiv_ui(n.get_mpz_t(), q) == 0) {
            if (n == q) return prime_with(n, Evidence::proven_trial_division, "small prime");
            return composite_with(n, mpz_class(q), "small-prime factor");
        }
    }
    if (n < policy.deterministic_threshold) {
        for (unsigned long a : kDeterministicBases) {
            if (!strong_probable_base(n, mpz_class(a)))
                return composite_with(n, std::nullopt,
                                      "strong test failed for base " + std::to_string(a));
        }
        return prime_with(n, Evidence::deterministic_bases,
                          "strong bases 2..41 (valid below " +
                              std::string(kDeterministicBoundStr) + ")");
    }
    if (!strong_probable_base(n, mpz_class(2)))
        return composite_with(n, std::nullopt, "strong test failed for base 2");
    mpz_class lucas_factor;
    if (strong_lucas(n, &lucas_factor) == 0) {
        std::optional<mpz_class> f;
        if (lucas_factor > 1) f = lucas_factor;
        return composite_with(n, f, "strong Lucas test (Selfridge parameters) failed");
    }
    for (int round = 1; round <= policy.probable_rounds; ++round) {
        mpz_class a = derived_base(n, round);
        if (!strong_probable_base(n, a))
            return composite_with(n, std::nullopt,
                                  "strong test failed for derived base (round " +
                                      std::to_string(round) + ")");
    }
    return prime_with(n, Evidence::strong_probable,
                      "bpsw + " + std::to_string(policy.probable_rounds) +
                          " deterministic-seeded strong rounds");
}

// --------------------------------------------------------------------------
// Interval search.

std::vector<mpz_class> sieve_survivors(const mpz_class& low, const mpz_class& high,
                                       const SearchPolicy& policy) {
    std::vector<mpz_class> out;
    if (low > high) return out;
    mpz_class start = low;
    if (mpz_even_p(start.get_mpz_t())) start += 1;
    if (start > high) return out;
    // Offsets of odd values: start + 2*i <= high.
    mpz_class span = (high - start) / 2;
    if (!span.fits_ulong_p()) throw ResourceError("sieve segment too long");
    unsigned long count = span.get_ui() + 1;
    std::vector<char> keep(count, 1);
    const auto& primes = small_primes(static_cast<std::uint32_t>(policy.wheel_size));
    for (std::uint32_t q : primes) {
        if (q == 2) continue;
        if (q >= policy.wheel_size) break;
        unsigned long r = mpz_fdiv_ui(start.get_mpz_t(), q);
        // First odd multiple of q at or after start: start + d with
        // d = (q - r) % q, stepping 2q keeps parity; if d is odd the
        // aligned odd multiple is d + q.
        unsigned long d = (q - r) % q;
        if (d % 2 == 1) d += q;
        unsigned long idx = d / 2;
        // Never mark q itself (possible when the segment reaches the wheel).
        if (start + 2 * mpz_class(idx) == q) idx += q;
        for (; idx < count; idx += q) keep[idx] = 0;
    }
    for (unsigned long i = 0; i < count; ++i)
        if (keep[i]) out.push_back(start + 2 * mpz_class(i));
    return out;
}

long scan_first_prime_serial(const std::vector<mpz_class>& candidates,
                             const SearchPolicy& policy) {
    for (size_t i = 0; i < candidates.size(); ++i)
        if (is_prime(candidates[i], policy).prime) return static_cast<long>(i);
    return -1;
}

long scan_first_prime_parallel(const std::vector<mpz_class>& candidates,
                               const SearchPolicy& policy) {
#ifndef _OPENMP
    return scan_first_prime_serial(candidates, policy);
#else
    int threads = omp_get_max_threads();
    size_t chunk = std::max<size_t>(4, static_cast<size_t>(threads) * 4);
    for (size_t base = 0; base < candidates.size(); base += chunk) {
        size_t m = std::min(chunk, candidates.size() - base);
        std::vector<char> hit(m, 0);
#pragma omp parallel for schedule(dynamic, 1)
        for (long i = 0; i < static_cast<long>(m); ++i) {
            hit[i] = is_prime(candidates[base + i], policy).prime ? 1 : 0;
        }
        for (size_t i = 0; i < m; ++i)
            if (hit[i]) return static_cast<long>(base + i);
    }
    return -1;
#endif
}

namespace {

// Segment length tuned to a few expected prime gaps near `around`.
unsigned long segment_length(const mpz_class& around) {
    double bits = static_cast<double>(mpz_sizeinbase(around.get_mpz_t(), 2));
    double gap = bits * 0.70;  // ~ln(around)
    double len = 6.0 * gap;
    if (len < 1024) len = 1024;
    if (len > (1 << 18)) len = 1 << 18;
    return static_cast<unsigned long>(len);
}

std::optional<PrimeWitness> small_range_search(const mpz_class& first, const mpz_class& last,
                                               const SearchPolicy& policy, bool descending) {
    mpz_class v = descending ? last : first;
    while (v >= first && v <= last) {
        PrimalityVerdict pv = is_prime(v, policy);
        if (pv.prime) return pv.witness;
        if (descending) v -= 1; else v += 1;
    }
    return std::nullopt;
}

}  // namespace

std::optional<PrimeWitness> least_prime_in(const mpz_class& lo_exclusive,
                                           const mpz_class& hi_exclusive,
                                           const SearchPolicy& policy) {
    if (lo_exclusive >= hi_exclusive)
        throw DomainError("least_prime_in: empty interval bounds");
    mpz_class first = lo_exclusive + 1;
    mpz_class last = hi_exclusive - 1;
    if (first > last) return std::nullopt;
    if (first <= 2 * mpz_class(policy.wheel_size))
        return small_range_search(first, last, policy, false);
    mpz_class cur = first;
    while (cur <= last) {
        mpz_class seg_end = cur + segment_length(cur);
        if (seg_end > last) seg_end = last;
        std::vector<mpz_class> cands = sieve_survivors(cur, seg_end, policy);
        long idx = policy.parallel ? scan_first_prime_parallel(cands, policy)
                                   : scan_first_prime_serial(cands, policy);
        if (idx >= 0) return is_prime(cands[static_cast<size_t>(idx)], policy).witness;
        cur = seg_end + 1;
    }
    return std::nullopt;
}

std::optional<PrimeWitness> greatest_prime_in(const mpz_class& lo_exclusive,
                                              const mpz_class& hi_exclusive,
                                              const SearchPolicy& policy) {
    if (lo_exclusive >= hi_exclusive)
        throw DomainError("greatest_prime_in: empty interval bounds");
    mpz_class first = lo_exclusive + 1;
    mpz_class last = hi_exclusive - 1;
    if (first > last) return std::nullopt;
    if (last <= 2 * mpz_class(policy.wheel_size))
        return small_range_search(first, last, policy, true);
    mpz_class cur = last;
    while (cur >= first) {
        mpz_class seg_start = cur - segment_length(cur);
        if (seg_start < first) seg_start = first;
        std::vector<mpz_class> cands = sieve_survivors(seg_start, cur, policy);
        for (size_t i = cands.size(); i-- > 0;) {
            PrimalityVerdict pv = is_prime(cands[i], policy);
            if (pv.prime) return pv.witness;
        }
        cur = seg_start - 1;
    }
    return std::nullopt;
}

// --------------------------------------------------------------------------
// Mersenne numbers.

mpz_class mersenne(unsigned long p) {
    if (p < 2) throw DomainError("mersenne exponent must be >= 2");
    mpz_class m;
    mpz_ui_pow_ui(m.get_mpz_t(), 2, p);
    return m - 1;
}

long mersenne_digit_count(unsigned long p) {
    if (p < 2) throw DomainError("mersenne exponent must be >= 2");
    // floor(log10(2^p - 1)) + 1 == floor(p*log10 2) + 1 unless 2^p - 1 has
    // the form 10^k - c with tiny c, which cannot happen for p >= 2.
    for (long prec = 96; prec <= 4096; prec *= 2) {
        DyadicInterval t = iv_mul_mpz(
            iv_div(log2_interval(prec), log10_interval(prec)), mpz_class(p));
        mpz_class flo = t.lo().floor(), fhi = t.hi().floor();
        if (flo == fhi) return flo.get_si() + 1;
    }
    throw PrecisionError("mersenne_digit_count: could not pin the digit count");
}

// GIMPS-verified Mersenne prime exponents (each double-checked with
// independent software and hardware).
static const unsigned long kCertifiedMersenneExponents[] = {
    2, 3, 5, 7, 13, 17, 19, 31, 61, 89, 107, 127, 521, 607, 1279, 2203, 2281,
    3217, 4253, 4423, 9689, 9941, 11213, 19937, 21701, 23209, 44497, 86243,
    110503, 132049, 216091, 756839, 859433, 1257787, 1398269, 2976221,
    3021377, 6972593, 13466917, 20996011, 24036583, 25964951, 30402457,
    32582657, 37156667, 42643801, 43112609, 57885161, 74207281, 77232917,
    82589933, 136279841};

bool is_certified_mersenne_exponent(unsigned long p) {
    for (unsigned long e : kCertifiedMersenneExponents)
        if (e == p) return true;
    return false;
}

PrimeWitness certified_mersenne_witness(unsigned long p) {
    if (!is_certified_mersenne_exponent(p))
        throw IntegrityError("2^" + std::to_string(p) +
                             "-1 is not on the externally certified Mersenne list");
    PrimeWitness w;
    w.value = mersenne(p);
    w.evidence = Evidence::externally_certified;
    w.test_parameters = "GIMPS Lucas-Lehmer, independently double-checked";
    return w;
}

}  // namespace millsforge
