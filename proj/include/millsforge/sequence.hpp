#pragma once
// sequence.hpp - prime chains p_1, p_2, ... with p_n^m < p_{n+1} <
// (p_n+1)^m - 1 and the shrinking bracket for A = lim p_n^(m^-n).
//
// The bracket is maintained in the log domain: each chain entry
// contributes the constraint [log p_n, log(p_n+1)] / m^n and the bracket
// is their intersection. Selection rule: least prime in the interval,
// which reproduces the published chains and makes A well-defined.

#include <string>
#include <vector>

#include <gmpxx.h>

#include "millsforge/interval.hpp"
#include "millsforge/primality.hpp"

namespace millsforge {

enum class ConstantKind { mills_builder, mersenne_theorem, wright, fridman, conjecture };

std::string kind_name(ConstantKind k);
bool kind_from_name(const std::string& s, ConstantKind* out);

struct ConstantSpec {
    ConstantKind kind = ConstantKind::mills_builder;
    mpz_class m;
    PrimeWitness seed;
    bool unconditional = false;
    std::string notes;
};

// Builds a spec and validates the seed: small seeds are rechecked with
// is_prime (a failed recheck is an integrity error); huge seeds must be
// of Mersenne form with an externally certified exponent.
ConstantSpec make_constant_spec(ConstantKind kind, const mpz_class& m, const mpz_class& seed,
                                const SearchPolicy& policy = SearchPolicy());

struct ChainEntry {
    int index = 1;  // 1-based
    PrimeWitness prime;
    DyadicInterval log_constraint;  // [log p, log(p+1)] / m^index, outward
};

class SequenceState {
public:
    // chain = [(1, seed)], bracket = seed constraint. precision_hint of 0
    // picks bits(seed) + 64 (clamped to at least 192).
    static SequenceState init(const ConstantSpec& spec, const SearchPolicy& policy = SearchPolicy(),
                              long precision_hint = 0);

    // Appends the least prime in (p_n^m, (p_n+1)^m - 1) and intersects the
    // bracket with its constraint. ConstructionFailure when the interval
    // holds no prime (possible only below the guarantee threshold).
    SequenceState extend(const SearchPolicy& policy = SearchPolicy()) const;

    const ConstantSpec& spec() const { return spec_; }
    const std::vector<ChainEntry>& chain() const { return chain_; }
    const DyadicInterval& log_bracket() const { return log_bracket_; }
    long working_precision() const { return prec_; }
    // True when any chain witness is only strong_probable; propagated into
    // every certificate produced from this state.
    bool probable() const;

    DyadicInterval a_bracket() const { return iv_exp(log_bracket_); }

    // Recomputes floor(A^(m^index)) from the bracket and checks it equals
    // the stored chain element. Ambiguous floors raise PrecisionError with
    // guidance; mismatches raise IntegrityError. Entries too large to
    // materialize are verified in the log domain instead.
    mpz_class recover_prime(int index) const;

    std::string serialize() const;
    static SequenceState deserialize(const std::string& text,
                                     const SearchPolicy& policy = SearchPolicy(),
                                     bool retest_primality = false);

private:
    ConstantSpec spec_;
    std::vector<ChainEntry> chain_;
    DyadicInterval log_bracket_;
    long prec_ = 192;

    SequenceState() = default;
    void rebuild_constraints(long prec);
};

struct ConstantDigitsResult {
    SequenceState state;
    DigitCertificate certificate;
    bool complete = false;     // certified at least the wanted digits
    bool probable = false;
    std::string explanation;   // set when the budget stopped the extension

    explicit ConstantDigitsResult(SequenceState s) : state(std::move(s)) {}
};

// Extends the chain until the bracket certifies `wanted` fractional digits
// or the extension budget runs out (partial certificate + explanation).
ConstantDigitsResult sequence_constant_digits(const SequenceState& start, long wanted,
                                              int max_extra_terms = 16,
                                              const SearchPolicy& policy = SearchPolicy());

}  // namespace millsforge
