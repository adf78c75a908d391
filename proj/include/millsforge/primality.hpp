#pragma once
// primality.hpp - primality verdicts with explicit evidence levels, and
// least/greatest-prime searches over big-integer intervals.
//
// Three tiers: full trial division below a small bound (a proof),
// fixed-base strong tests below their published validity bound (a proof),
// and BPSW plus deterministically seeded extra rounds above (probable).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "millsforge/errors.hpp"

namespace millsforge {

enum class Evidence {
    proven_trial_division,
    deterministic_bases,
    strong_probable,
    externally_certified,
};

std::string evidence_name(Evidence e);
std::optional<Evidence> evidence_from_name(const std::string& s);
// Proof-grade evidence (everything except strong_probable).
bool evidence_is_proof(Evidence e);

struct PrimeWitness {
    mpz_class value;
    Evidence evidence = Evidence::strong_probable;
    std::string test_parameters;
};

struct CompositeWitness {
    mpz_class value;
    std::optional<mpz_class> factor;  // nontrivial factor when one was found
    std::string reason;
};

struct PrimalityVerdict {
    bool prime = false;
    PrimeWitness witness;
    CompositeWitness composite;
};

struct SearchPolicy {
    unsigned long wheel_size = 100000;       // sieve with primes below this bound
    int probable_rounds = 2;                 // extra MR rounds on top of BPSW
    mpz_class deterministic_threshold;       // validity bound of the fixed base set
    unsigned long trial_division_bound = 1ul << 20;
    bool parallel = true;                    // candidate tests may fan out

    SearchPolicy();
    void validate() const;
};

PrimalityVerdict is_prime(const mpz_class& n, const SearchPolicy& policy = SearchPolicy());

// Smallest prime strictly inside (lo_exclusive, hi_exclusive), or nullopt.
// The parallel path tests sieve survivors in chunks but returns the least
// prime regardless of completion order.
std::optional<PrimeWitness> least_prime_in(const mpz_class& lo_exclusive,
                                           const mpz_class& hi_exclusive,
                                           const SearchPolicy& policy = SearchPolicy());
// Largest prime strictly inside the open interval (for midpoint-ordered
// candidate streams).
std::optional<PrimeWitness> greatest_prime_in(const mpz_class& lo_exclusive,
                                              const mpz_class& hi_exclusive,
                                              const SearchPolicy& policy = SearchPolicy());

// 2^p - 1.
mpz_class mersenne(unsigned long p);
// Decimal digit count of 2^p - 1, computed in interval arithmetic without
// materializing the number.
long mersenne_digit_count(unsigned long p);

// Mersenne exponents whose primality has been established and
// double-checked externally (GIMPS). Witnesses for these carry
// externally_certified evidence; they are never re-proven at runtime.
bool is_certified_mersenne_exponent(unsigned long p);
PrimeWitness certified_mersenne_witness(unsigned long p);

// Ascending primes below `bound` (cached).
const std::vector<std::uint32_t>& small_primes(std::uint32_t bound);

// Sieve survivors in [low, high] (odd values with no factor below the
// policy's wheel bound), ascending. Exposed for the search paths, tests
// and the benchmark.
std::vector<mpz_class> sieve_survivors(const mpz_class& low, const mpz_class& high,
                                       const SearchPolicy& policy);

// Index of the first prime among candidates, testing serially /
// OpenMP-parallel in ordered chunks. -1 when none. The two paths agree;
// the serial one is the reference.
long scan_first_prime_serial(const std::vector<mpz_class>& candidates,
                             const SearchPolicy& policy);
long scan_first_prime_parallel(const std::vector<mpz_class>& candidates,
                               const SearchPolicy& policy);

}  // namespace millsforge
