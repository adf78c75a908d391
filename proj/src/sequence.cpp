#include "millsforge/sequence.hpp"

#include <algorithm>
#include <sstream>

#include "millsforge/theorem.hpp"

namespace millsforge {

namespace {

// Seeds small enough to recheck with is_prime on load/init.
constexpr size_t kRecheckBits = 4096;
// Cap on the bit size of the integers handed to the prime search.
constexpr std::int64_t kMaxSearchBits = std::int64_t(1) << 21;

size_t bits_of(const mpz_class& v) { return mpz_sizeinbase(v.get_mpz_t(), 2); }

// 2^p - 1 detection: seed + 1 a power of two.
bool mersenne_form(const mpz_class& seed, unsigned long* p_out) {
    mpz_class t = seed + 1;
    if (mpz_popcount(t.get_mpz_t()) != 1) return false;
    *p_out = mpz_scan1(t.get_mpz_t(), 0);
    return true;
}

}  // namespace

std::string kind_name(ConstantKind k) {
    switch (k) {
        case ConstantKind::mills_builder: return "mills_builder";
        case ConstantKind::mersenne_theorem: return "mersenne_theorem";
        case ConstantKind::wright: return "wright";
        case ConstantKind::fridman: return "fridman";
        case ConstantKind::conjecture: return "conjecture";
    }
    return "?";
}

bool kind_from_name(const std::string& s, ConstantKind* out) {
    for (ConstantKind k : {ConstantKind::mills_builder, ConstantKind::mersenne_theorem,
                           ConstantKind::wright, ConstantKind::fridman, ConstantKind::conjecture}) {
        if (kind_name(k) == s) {
            *out = k;
            return true;
        }
    }
    return false;
}

ConstantSpec make_constant_spec(ConstantKind kind, const mpz_class& m, const mpz_class& seed,
                                const SearchPolicy& policy) {
    if (m < 2) throw DomainError("constant spec requires m >= 2");
    if (seed < 2) throw DomainError("constant spec requires a prime seed >= 2");
    ConstantSpec spec;
    spec.kind = kind;
    spec.m = m;
    if (bits_of(seed) <= kRecheckBits) {
        PrimalityVerdict v = is_prime(seed, policy);
        if (!v.prime)
            throw IntegrityError("seed " + seed.get_str() + " failed its primality recheck: " +
                                 v.composite.reason);
        spec.seed = v.witness;
    } else {
        unsigned long p = 0;
        if (!mersenne_form(seed, &p) || !is_certified_mersenne_exponent(p))
            throw IntegrityError(
                "seed too large to recheck and not an externally certified Mersenne prime");
        spec.seed = certified_mersenne_witness(p);
    }
    spec.unconditional =
        m >= kGuaranteeThreshold && evidence_is_proof(spec.seed.evidence);
    if (spec.unconditional) {
        spec.notes = "unconditional: m above the guarantee threshold, seed evidence " +
                     evidence_name(spec.seed.evidence);
    } else if (m < kGuaranteeThreshold) {
        spec.notes = "no unconditional guarantee: m below threshold " +
                     std::to_string(kGuaranteeThreshold);
        if (kind == ConstantKind::mills_builder && m == 3)
            spec.notes += " (RH-conditional chain)";
    } else {
        spec.notes = "no unconditional guarantee: seed evidence only " +
                     evidence_name(spec.seed.evidence);
    }
    return spec;
}

namespace {

// [log p, log(p+1)] / m^index, outward at prec.
DyadicInterval chain_constraint(const mpz_class& p, const mpz_class& m, int index, long prec) {
    unsigned long mp = 0;
    if (mersenne_form(p, &mp) && bits_of(p) > (1u << 16)) {
        if (index != 1)
            throw ResourceError("huge Mersenne entries only occur at the chain head");
        return theorem_log_bracket(mp, m, prec);
    }
    DyadicInterval lg = iv_log(DyadicInterval::from_mpz(p, p + 1, prec));
    mpz_class mk;
    mpz_pow_ui(mk.get_mpz_t(), m.get_mpz_t(), static_cast<unsigned long>(index));
    return iv_div_mpz(lg, mk);
}

}  // namespace

void SequenceState::rebuild_constraints(long prec) {
    prec_ = prec;
    bool first = true;
    DyadicInterval acc;
    for (ChainEntry& e : chain_) {
        e.log_constraint = chain_constraint(e.prime.value, spec_.m, e.index, prec);
        if (first) {
            acc = e.log_constraint;
            first = false;
        } else {
            auto isect = iv_intersect(acc, e.log_constraint);
            if (!isect)
                throw IntegrityError("chain constraints have empty intersection at index " +
                                     std::to_string(e.index));
            acc = *isect;
        }
    }
    log_bracket_ = acc;
}

SequenceState SequenceState::init(const ConstantSpec& spec, const SearchPolicy& policy,
                                  long precision_hint) {
    policy.validate();
    SequenceState st;
    st.spec_ = spec;
    // Default precision follows the seed size but is capped: a Mersenne
    // seed has tens of millions of bits and callers wanting that many
    // digits pass an explicit hint.
    long prec = precision_hint > 0
                    ? precision_hint
                    : std::clamp(static_cast<long>(bits_of(spec.seed.value)) + 64, 192L, 8192L);
    ChainEntry e;
    e.index = 1;
    e.prime = spec.seed;
    st.chain_.push_back(e);
    st.rebuild_constraints(prec);
    return st;
}

SequenceState SequenceState::extend(const SearchPolicy& policy) const {
    if (chain_.empty()) throw DomainError("extend on an empty chain");
    const mpz_class& p = chain_.back().prime.value;
    unsigned long m_ui;
    if (!spec_.m.fits_ulong_p() ||
        static_cast<std::int64_t>(bits_of(p)) * static_cast<std::int64_t>(spec_.m.get_ui()) >
            kMaxSearchBits)
        throw ResourceError("extension would exceed the materializable search size (p has " +
                            std::to_string(bits_of(p)) + " bits, m = " + spec_.m.get_str() + ")");
    m_ui = spec_.m.get_ui();
    mpz_class lo, hi;
    mpz_pow_ui(lo.get_mpz_t(), p.get_mpz_t(), m_ui);
    mpz_class p1 = p + 1;
    mpz_pow_ui(hi.get_mpz_t(), p1.get_mpz_t(), m_ui);
    hi -= 1;
    auto found = least_prime_in(lo, hi, policy);
    if (!found)
        throw ConstructionFailure("no prime in (" + lo.get_str() + ", " + hi.get_str() +
                                  "); the chain cannot be extended (m below the guarantee "
                                  "threshold admits such gaps in principle)");
    SequenceState next = *this;
    ChainEntry e;
    e.index = static_cast<int>(chain_.size()) + 1;
    e.prime = *found;
    next.chain_.push_back(e);
    long prec = std::max(prec_, static_cast<long>(bits_of(found->value)) + 64);
    next.rebuild_constraints(prec);
    return next;
}

bool SequenceState::probable() const {
    for (const ChainEntry& e : chain_)
        if (!evidence_is_proof(e.prime.evidence)) return true;
    return false;
}

mpz_class SequenceState::recover_prime(int index) const {
    if (index < 1 || index > static_cast<int>(chain_.size()))
        throw DomainError("recover_prime index out of range");
    const mpz_class& stored = chain_[static_cast<size_t>(index - 1)].prime.value;
    mpz_class e;
    mpz_pow_ui(e.get_mpz_t(), spec_.m.get_mpz_t(), static_cast<unsigned long>(index));
    // Estimated result size decides between the direct floor computation
    // and the log-domain containment check.
    double est_bits = e.get_d() * log_bracket_.hi().to_double() * 1.4426950408889634;
    if (est_bits < static_cast<double>(Limits::max_materialize_bits()) && est_bits < 1e7) {
        DyadicInterval target = iv_exp(iv_mul_mpz(log_bracket_.with_precision(prec_), e));
        mpz_class flo = target.lo().floor();
        mpz_class fhi = target.hi().floor();
        // The deepest constraint maps onto its own half-open window
        // [p, p+1), so the outward-rounded image may graze the boundary by
        // an ulp on either side.
        Dyadic slack = Dyadic::pow2(target.hi().msb() - prec_ + 16);
        if (fhi > flo) {
            Dyadic under = Dyadic::sub(Dyadic(mpz_class(flo + 1)), target.lo(), 64, Round::up);
            if (under <= slack) flo += 1;
        }
        if (fhi == flo + 1) {
            Dyadic over = Dyadic::sub(target.hi(), Dyadic(fhi), 64, Round::up);
            if (over <= slack) fhi = flo;
        }
        if (flo != fhi)
            throw PrecisionError(
                "recover_prime: bracket too wide to pin floor(A^(m^" + std::to_string(index) +
                ")); extend the chain or raise the working precision");
        if (flo != stored)
            throw IntegrityError("recover_prime mismatch at index " + std::to_string(index) +
                                 ": bracket gives " + flo.get_str() + ", chain stores " +
                                 stored.get_str());
        return flo;
    }
    // Log-domain check: m^index * bracket must sit inside the stored
    // prime's window [log p, log(p+1)] up to outward-rounding slack. A
    // wrong prime would shift the window by ~1/p ~ 2^-bits(p), far above
    // the 2^(8-prec) slack, so the check still discriminates.
    DyadicInterval target = iv_mul_mpz(log_bracket_.with_precision(prec_), e);
    DyadicInterval window = chain_constraint(stored, spec_.m, index, prec_);
    window = iv_mul_mpz(window, e);  // undo the m^index division
    Dyadic slack = Dyadic::pow2(window.hi().msb() - prec_ + 8);
    Dyadic wlo = Dyadic::sub(window.lo(), slack, prec_, Round::down);
    Dyadic whi = Dyadic::add(window.hi(), slack, prec_, Round::up);
    if (!(wlo <= target.lo() && target.hi() <= whi))
        throw PrecisionError("recover_prime: log-domain window check failed at index " +
                             std::to_string(index));
    return stored;
}

// --------------------------------------------------------------------------
// Serialization: line-oriented, versioned by the cache header.

std::string SequenceState::serialize() const {
    std::ostringstream os;
    os << "kind " << kind_name(spec_.kind) << "\n";
    os << "m " << spec_.m.get_str() << "\n";
    os << "unconditional " << (spec_.unconditional ? 1 : 0) << "\n";
    os << "notes " << spec_.notes << "\n";
    os << "precision " << prec_ << "\n";
    os << "terms " << chain_.size() << "\n";
    for (const ChainEntry& e : chain_) {
        os << "prime " << e.index << " " << evidence_name(e.prime.evidence) << " "
           << e.prime.value.get_str() << " ; " << e.prime.test_parameters << "\n";
    }
    return os.str();
}

SequenceState SequenceState::deserialize(const std::string& text, const SearchPolicy& policy,
                                         bool retest_primality) {
    std::istringstream is(text);
    std::string line;
    ConstantSpec spec;
    long prec = 0;
    size_t terms = 0;
    std::vector<ChainEntry> chain;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "kind") {
            std::string k;
            ls >> k;
            if (!kind_from_name(k, &spec.kind))
                throw IntegrityError("unknown constant kind in record: " + k);
        } else if (tag == "m") {
            std::string v;
            ls >> v;
            spec.m = mpz_class(v);
        } else if (tag == "unconditional") {
            int u = 0;
            ls >> u;
            spec.unconditional = u != 0;
        } else if (tag == "notes") {
            std::string rest;
            std::getline(ls, rest);
            if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
            spec.notes = rest;
        } else if (tag == "precision") {
            ls >> prec;
        } else if (tag == "terms") {
            ls >> terms;
        } else if (tag == "prime") {
            ChainEntry e;
            std::string ev, val;
            ls >> e.index >> ev >> val;
            auto evv = evidence_from_name(ev);
            if (!evv) throw IntegrityError("unknown evidence tag in record: " + ev);
            e.prime.evidence = *evv;
            e.prime.value = mpz_class(val);
            std::string rest;
            std::getline(ls, rest);
            size_t semi = rest.find("; ");
            if (semi != std::string::npos) e.prime.test_parameters = rest.substr(semi + 2);
            chain.push_back(e);
        } else if (tag.empty()) {
            continue;
        } else {
            throw IntegrityError("unknown line tag in sequence record: " + tag);
        }
    }
    if (chain.empty() || chain.size() != terms)
        throw IntegrityError("sequence record term count mismatch");
    // Replay the chain invariants before use.
    for (size_t i = 0; i + 1 < chain.size(); ++i) {
        const mpz_class& a = chain[i].prime.value;
        const mpz_class& b = chain[i + 1].prime.value;
        if (!spec.m.fits_ulong_p()) throw IntegrityError("record m too large to validate");
        mpz_class lo, hi;
        mpz_pow_ui(lo.get_mpz_t(), a.get_mpz_t(), spec.m.get_ui());
        mpz_class a1 = a + 1;
        mpz_pow_ui(hi.get_mpz_t(), a1.get_mpz_t(), spec.m.get_ui());
        hi -= 1;
        if (!(lo < b && b < hi))
            throw IntegrityError("chain inequality violated between indices " +
                                 std::to_string(i + 1) + " and " + std::to_string(i + 2));
    }
    for (const ChainEntry& e : chain) {
        const mpz_class& v = e.prime.value;
        if (retest_primality || bits_of(v) <= 256) {
            if (bits_of(v) <= kRecheckBits) {
                if (!is_prime(v, policy).prime)
                    throw IntegrityError("recorded chain element failed its primality recheck: " +
                                         v.get_str());
            } else {
                unsigned long p = 0;
                if (!(mersenne_form(v, &p) && is_certified_mersenne_exponent(p)))
                    throw IntegrityError("recorded element too large to recheck and uncertified");
            }
        }
    }
    SequenceState st;
    st.spec_ = spec;
    st.spec_.seed = chain.front().prime;
    st.chain_ = std::move(chain);
    st.rebuild_constraints(prec > 0 ? prec : 192);
    return st;
}

ConstantDigitsResult sequence_constant_digits(const SequenceState& start, long wanted,
                                              int max_extra_terms, const SearchPolicy& policy) {
    if (wanted < 0) wanted = 0;
    ConstantDigitsResult res(start);
    for (int step = 0;; ++step) {
        res.certificate = digits(res.state.a_bracket(), std::max(wanted, 1L));
        res.probable = res.state.probable();
        if (res.certificate.integer_certified && res.certificate.certified_count >= wanted) {
            res.complete = true;
            return res;
        }
        if (step >= max_extra_terms) {
            res.explanation = "extension budget (" + std::to_string(max_extra_terms) +
                              " extra terms) exhausted with " +
                              std::to_string(res.certificate.certified_count) +
                              " certified digits";
            return res;
        }
        try {
            res.state = res.state.extend(policy);
        } catch (const ResourceError& e) {
            res.explanation = std::string("cannot extend further: ") + e.what();
            return res;
        }
    }
}

}  // namespace millsforge
