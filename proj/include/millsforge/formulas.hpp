#pragma once
// formulas.hpp - the survey's executable prime formulas with honest error
// budgets: Wilson's all-prime function, Gandhi's Mobius sum over primorial
// divisors, Wright's double-exponential tower, Fridman's recurrence.
//
// Published digit strings are treated as +-1-ulp-of-last-digit windows,
// never as exact values; floors are emitted only while certified.

#include <string>
#include <vector>

#include <gmpxx.h>

#include "millsforge/interval.hpp"

namespace millsforge {

struct ErrorBudget {
    Dyadic initial_width;
    mpz_class amplification{1};     // product of floor factors applied so far
    long remaining_valid_steps = 0; // conservative: never overestimates
};

// floor((n! mod (n+1)) / n) * (n-1) + 2: equals n+1 when n+1 is prime,
// otherwise 2.
mpz_class wilson_value(unsigned long n);

// Mobius function via trial factorization (small arguments).
int mobius(const mpz_class& d);
// Product of the first k primes.
mpz_class primorial(int k);

struct GandhiEval {
    long prime = 0;
    bool exact_path = false;  // rational sum (few divisors) vs interval sum
    int escalations = 0;
    long precision_bits = 0;
};
// n-th prime via floor(1 - log2(-1/2 + sum_{d | P_{n-1}} mu(d)/(2^d-1))).
GandhiEval gandhi_prime_detail(int n, bool parallel = true);
long gandhi_prime(int n);

// The divisor sum as an interval, serial and OpenMP variants. Exposed for
// the benchmark; deterministic block order keeps results reproducible.
DyadicInterval gandhi_sum_serial(int n, long precision_bits);
DyadicInterval gandhi_sum_parallel(int n, long precision_bits);

// 2^x on intervals, with an exact fast path for integer points.
DyadicInterval iv_exp2(const DyadicInterval& x);
// log2 on intervals (lo > 0).
DyadicInterval iv_log2(const DyadicInterval& x);

struct WrightResult {
    std::vector<mpz_class> floors;
    ErrorBudget budget;
    bool complete = false;
    std::string stop_reason;  // set when a straddle ended the run early
};
// Floors of g1 = 2^omega, g_{k+1} = 2^{g_k} while they stay certified.
WrightResult wright_floors(const DyadicInterval& omega, int steps);
// Intersection of the backward constraints log2 log2 ... [f_k, f_k+1).
DyadicInterval wright_omega_from_floors(const std::vector<mpz_class>& floors,
                                        long precision_bits);

struct FridmanForward {
    std::vector<mpz_class> primes;
    ErrorBudget budget;
    bool complete = false;
    std::string stop_reason;
};
// f_{n+1} = floor(f_n) (f_n - floor(f_n) + 1), primes are the floors.
// Iterates exactly (no rounding); stops before any ambiguous floor.
FridmanForward fridman_forward(const DyadicInterval& f1, int max_steps);
// Backward reconstruction f_{n-1} = f_n / p_{n-1} + p_{n-1} - 1 from an
// initial segment of the primes; each backward step divides the seed
// uncertainty by the prime.
DyadicInterval fridman_backward(const std::vector<mpz_class>& primes, long precision_bits);

// [v, v + 10^-k] for a printed k-fraction-digit decimal prefix v.
DyadicInterval decimal_prefix_window(const std::string& text, long precision_bits);

}  // namespace millsforge
