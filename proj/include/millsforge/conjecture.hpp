#pragma once
// conjecture.hpp - backtracking interval search for a constant A with
// floor(A^((n+1)^2)) prime for all n >= 1.
//
// A chain q_1, q_2, ... pins A to the intersection of the brackets
// [q_k^(1/e_k), (q_k+1)^(1/e_k)) with e_k = (k+1)^2. The search walks the
// tree depth-first: at each node the image of the bracket under the next
// exponent is a window of integers, and the feasible primes inside it are
// the children, enumerated lazily in policy order.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "millsforge/interval.hpp"
#include "millsforge/primality.hpp"

namespace millsforge {

struct SearchPolicyC {
    enum class Order { ascending, nearest_to_midpoint };
    Order candidate_order = Order::ascending;
    int max_depth = 64;
    long backtrack_limit = 100000;
    long guard_bits = 96;  // precision schedule: e_n * log2(hi) + guard
    SearchPolicy prime_policy;
};

struct SearchNode {
    int depth = 0;
    std::vector<mpz_class> chain;
    DyadicInterval bracket;       // A-domain
    DyadicInterval log_bracket;   // log-domain twin (the working form)
    long children_tried = 0;
};

struct SearchStats {
    long nodes_expanded = 0;
    long backtracks = 0;
    int deepest = 0;
    bool truncated = false;  // backtrack limit exhausted
};

struct SearchResult {
    SearchNode best;
    SearchStats stats;
    // Cursor per level (last candidate tried), for resumable runs.
    std::vector<mpz_class> cursors;
};

// e_n = (n+1)^2.
inline unsigned long chain_exponent(int n) {
    return static_cast<unsigned long>(n + 1) * static_cast<unsigned long>(n + 1);
}

// Intersection bracket of a chain in the log domain; nullopt when empty.
std::optional<DyadicInterval> log_bracket_for_chain(const std::vector<mpz_class>& primes,
                                                    long precision_bits);
// Same, exponentiated to the A domain.
std::optional<DyadicInterval> bracket_for_chain(const std::vector<mpz_class>& primes,
                                                long precision_bits);

// Precision the schedule assigns to a chain of the given depth.
long schedule_precision(int depth, const DyadicInterval& log_bracket, long guard_bits);

// Eagerly enumerated feasible primes at the node's next depth, capped at
// `limit` (the deep windows hold far too many primes to list). Every
// returned prime satisfies the image-intersection predicate.
std::vector<mpz_class> candidates(const SearchNode& node, size_t limit,
                                  const SearchPolicyC& policy = SearchPolicyC());

// Depth-first search with backtracking; deterministic for a fixed policy.
SearchResult search(const SearchPolicyC& policy, int target_depth);
// Continue a previous run from its chain + cursors.
SearchResult search_resume(const SearchPolicyC& policy, int target_depth,
                           const std::vector<mpz_class>& chain,
                           const std::vector<mpz_class>& cursors, bool retest_primality);

// True iff the certificate's decimal window lies inside the chain bracket
// (recomputed from scratch at doubled precision) and every floor recovered
// from the bracket equals the listed prime.
bool verify_chain(const std::vector<mpz_class>& primes, const DigitCertificate& cert);
// Same check against a raw decimal string.
bool verify_chain_value(const std::vector<mpz_class>& primes, const std::string& decimal);

}  // namespace millsforge
