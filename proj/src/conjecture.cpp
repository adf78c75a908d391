#include "millsforge/conjecture.hpp"

#include <algorithm>
#include <cmath>

#include "millsforge/formulas.hpp"

namespace millsforge {

namespace {

// [log q, log(q+1)] / (k+1)^2 at the given precision.
DyadicInterval chain_log_constraint(const mpz_class& q, int k, long prec) {
    DyadicInterval lg = iv_log(DyadicInterval::from_mpz(q, q + 1, prec));
    return iv_div_mpz(lg, mpz_class(chain_exponent(k)));
}

mpz_class next_prime_above(const mpz_class& x, const SearchPolicy& policy) {
    mpz_class lo = x;
    for (;;) {
        mpz_class hi = lo * 2 + 64;  // Bertrand: a prime exists below 2x
        auto w = least_prime_in(lo, hi, policy);
        if (w) return w->value;
        lo = hi - 1;
    }
}

}  // namespace

std::optional<DyadicInterval> log_bracket_for_chain(const std::vector<mpz_class>& primes,
                                                    long precision_bits) {
    if (primes.empty()) throw DomainError("bracket_for_chain: empty chain");
    DyadicInterval acc = chain_log_constraint(primes[0], 1, precision_bits);
    for (size_t k = 1; k < primes.size(); ++k) {
        DyadicInterval c = chain_log_constraint(primes[k], static_cast<int>(k) + 1,
                                                precision_bits);
        auto isect = iv_intersect(acc, c);
        if (!isect) return std::nullopt;
        acc = *isect;
    }
    return acc;
}

std::optional<DyadicInterval> bracket_for_chain(const std::vector<mpz_class>& primes,
                                                long precision_bits) {
    auto lb = log_bracket_for_chain(primes, precision_bits);
    if (!lb) return std::nullopt;
    return iv_exp(*lb);
}

long schedule_precision(int depth, const DyadicInterval& log_bracket, long guard_bits) {
    double l2hi = std::max(0.05, log_bracket.hi().to_double() * 1.4426950408889634);
    double e = static_cast<double>(chain_exponent(depth + 1));
    return std::max(96L, static_cast<long>(std::ceil(e * l2hi)) + guard_bits);
}

namespace {

struct Window {
    mpz_class qmin, qmax;
};

// Integer window met by the image of the bracket under the next exponent.
Window image_window(const DyadicInterval& log_bracket, int depth, long prec) {
    mpz_class e(chain_exponent(depth + 1));
    DyadicInterval img = iv_exp(iv_mul_mpz(log_bracket.with_precision(prec), e));
    Window w;
    w.qmin = img.lo().floor();
    if (w.qmin < 2) w.qmin = 2;
    w.qmax = img.hi().floor();
    return w;
}

struct Frame {
    mpz_class prime;
    DyadicInterval log_bracket;  // after intersecting this prime's constraint
    Window window;               // child window (lazily filled)
    bool window_ready = false;
    mpz_class cursor_up;         // last candidate tried upward (exclusive next)
    mpz_class cursor_down;       // midpoint order: last tried downward
    bool down_exhausted = false, up_exhausted = false;
    long children_tried = 0;
};

class Searcher {
public:
    Searcher(const SearchPolicyC& policy, int target) : policy_(policy), target_(target) {}

    SearchResult run(std::vector<Frame> stack) {
        stack_ = std::move(stack);
        best_depth_ = -1;
        remember_best();
        while (true) {
            int depth = static_cast<int>(stack_.size());
            if (depth >= target_ || depth >= policy_.max_depth) break;
            auto cand = next_candidate();
            if (!cand) {
                if (stack_.empty()) break;  // tree exhausted
                stack_.pop_back();
                ++stats_.backtracks;
                if (stats_.backtracks > policy_.backtrack_limit) {
                    stats_.truncated = true;
                    break;
                }
                continue;
            }
            long prec = depth == 0
                            ? 160
                            : schedule_precision(depth, stack_.back().log_bracket,
                                                 policy_.guard_bits);
            DyadicInterval c = chain_log_constraint(*cand, depth + 1, prec);
            std::optional<DyadicInterval> child;
            if (depth == 0) {
                child = c;
            } else {
                child = iv_intersect(stack_.back().log_bracket, c);
            }
            if (!child) continue;  // infeasible candidate, try the next one
            Frame f;
            f.prime = *cand;
            f.log_bracket = *child;
            stack_.push_back(std::move(f));
            ++stats_.nodes_expanded;
            remember_best();
        }
        SearchResult out;
        out.stats = stats_;
        out.best = best_;
        for (const Frame& f : stack_.empty() ? best_frames_ : stack_) {
            out.cursors.push_back(f.cursor_up);
        }
        return out;
    }

    static Frame make_frame(const mpz_class& prime, const DyadicInterval& lb,
                            const mpz_class& cursor) {
        Frame f;
        f.prime = prime;
        f.log_bracket = lb;
        f.cursor_up = cursor;
        f.cursor_down = cursor;
        return f;
    }

private:
    void remember_best() {
        int depth = static_cast<int>(stack_.size());
        if (depth <= best_depth_) return;
        best_depth_ = depth;
        stats_.deepest = depth;
        best_.depth = depth;
        best_.chain.clear();
        for (const Frame& f : stack_) best_.chain.push_back(f.prime);
        if (!stack_.empty()) {
            best_.log_bracket = stack_.back().log_bracket;
            best_.bracket = iv_exp(best_.log_bracket);
            best_.children_tried = stack_.back().children_tried;
        }
        best_frames_ = stack_;
    }

    // Next candidate prime at the current depth, honoring the policy order.
    std::optional<mpz_class> next_candidate() {
        if (stack_.empty()) {
            // Root level: every prime is feasible at exponent 4 since A > 1
            // is the only constraint; ascending enumeration from 2.
            root_cursor_ = root_cursor_ == 0 ? 1 : root_cursor_;
            mpz_class q = next_prime_above(root_cursor_, policy_.prime_policy);
            root_cursor_ = q;
            ++root_children_;
            return q;
        }
        Frame& f = stack_.back();
        if (!f.window_ready) {
            long prec = schedule_precision(static_cast<int>(stack_.size()), f.log_bracket,
                                           policy_.guard_bits);
            f.window = image_window(f.log_bracket, static_cast<int>(stack_.size()), prec);
            if (f.cursor_up == 0) {
                if (policy_.candidate_order == SearchPolicyC::Order::nearest_to_midpoint) {
                    mpz_class mid = (f.window.qmin + f.window.qmax) / 2;
                    f.cursor_up = mid;
                    f.cursor_down = mid + 1;
                } else {
                    f.cursor_up = f.window.qmin - 1;
                }
            } else {
                // resumed frame: cursors restored by the caller
                if (policy_.candidate_order == SearchPolicyC::Order::nearest_to_midpoint &&
                    f.cursor_down == 0)
                    f.cursor_down = f.cursor_up;
            }
            f.window_ready = true;
        }
        ++f.children_tried;
        if (policy_.candidate_order == SearchPolicyC::Order::ascending) {
            if (f.cursor_up > f.window.qmax) return std::nullopt;
            auto w = least_prime_in(f.cursor_up, f.window.qmax + 1, policy_.prime_policy);
            if (!w) {
                f.cursor_up = f.window.qmax + 1;
                return std::nullopt;
            }
            f.cursor_up = w->value;
            return w->value;
        }
        // nearest_to_midpoint: alternate above/below, nearer first.
        std::optional<mpz_class> up, down;
        if (!f.up_exhausted && f.cursor_up <= f.window.qmax) {
            auto w = least_prime_in(f.cursor_up, f.window.qmax + 1, policy_.prime_policy);
            if (w) up = w->value; else f.up_exhausted = true;
        } else {
            f.up_exhausted = true;
        }
        if (!f.down_exhausted && f.cursor_down > f.window.qmin) {
            auto w = greatest_prime_in(f.window.qmin - 1, f.cursor_down, policy_.prime_policy);
            if (w) down = w->value; else f.down_exhausted = true;
        } else {
            f.down_exhausted = true;
        }
        if (!up && !down) return std::nullopt;
        mpz_class mid = (f.window.qmin + f.window.qmax) / 2;
        bool take_up;
        if (up && down)
            take_up = (*up - mid) <= (mid - *down);
        else
            take_up = up.has_value();
        if (take_up) {
            f.cursor_up = *up;
            return up;
        }
        f.cursor_down = *down;
        return down;
    }

    SearchPolicyC policy_;
    int target_;
    std::vector<Frame> stack_;
    std::vector<Frame> best_frames_;
    SearchNode best_;
    SearchStats stats_;
    int best_depth_ = -1;
    mpz_class root_cursor_{0};
    long root_children_ = 0;
};

}  // namespace

std::vector<mpz_class> candidates(const SearchNode& node, size_t limit,
                                  const SearchPolicyC& policy) {
    std::vector<mpz_class> out;
    if (node.chain.empty()) {
        mpz_class cur(1);
        while (out.size() < limit) {
            cur = next_prime_above(cur, policy.prime_policy);
            out.push_back(cur);
        }
        return out;
    }
    long prec = schedule_precision(node.depth, node.log_bracket, policy.guard_bits);
    Window w = image_window(node.log_bracket, node.depth, prec);
    if (policy.candidate_order == SearchPolicyC::Order::ascending) {
        mpz_class cursor = w.qmin - 1;
        while (out.size() < limit) {
            auto p = least_prime_in(cursor, w.qmax + 1, policy.prime_policy);
            if (!p) break;
            cursor = p->value;
            // Keep only candidates whose constraint meets the bracket.
            DyadicInterval c = chain_log_constraint(cursor, node.depth + 1, prec);
            if (iv_intersect(node.log_bracket, c)) out.push_back(cursor);
        }
        return out;
    }
    // midpoint order: gather ascending then sort by distance to the middle.
    std::vector<mpz_class> all;
    mpz_class cursor = w.qmin - 1;
    while (all.size() < 4 * limit + 16) {
        auto p = least_prime_in(cursor, w.qmax + 1, policy.prime_policy);
        if (!p) break;
        cursor = p->value;
        DyadicInterval c = chain_log_constraint(cursor, node.depth + 1, prec);
        if (iv_intersect(node.log_bracket, c)) all.push_back(cursor);
    }
    mpz_class mid = (w.qmin + w.qmax) / 2;
    std::stable_sort(all.begin(), all.end(), [&mid](const mpz_class& a, const mpz_class& b) {
        return abs(a - mid) < abs(b - mid);
    });
    if (all.size() > limit) all.resize(limit);
    return all;
}

SearchResult search(const SearchPolicyC& policy, int target_depth) {
    Searcher s(policy, target_depth);
    return s.run({});
}

SearchResult search_resume(const SearchPolicyC& policy, int target_depth,
                           const std::vector<mpz_class>& chain,
                           const std::vector<mpz_class>& cursors, bool retest_primality) {
    if (chain.size() != cursors.size())
        throw IntegrityError("resume record: chain/cursor length mismatch");
    std::vector<Frame> stack;
    std::optional<DyadicInterval> acc;
    for (size_t k = 0; k < chain.size(); ++k) {
        if (retest_primality || mpz_sizeinbase(chain[k].get_mpz_t(), 2) <= 64) {
            if (!is_prime(chain[k], policy.prime_policy).prime)
                throw IntegrityError("resume record: chain element " + chain[k].get_str() +
                                     " is not prime");
        }
        long prec = acc ? schedule_precision(static_cast<int>(k), *acc, policy.guard_bits) : 160;
        DyadicInterval c = chain_log_constraint(chain[k], static_cast<int>(k) + 1, prec);
        acc = acc ? iv_intersect(*acc, c) : std::optional<DyadicInterval>(c);
        if (!acc)
            throw IntegrityError("resume record: constraints empty at depth " +
                                 std::to_string(k + 1));
        stack.push_back(Searcher::make_frame(chain[k], *acc, cursors[k]));
    }
    Searcher s(policy, target_depth);
    return s.run(std::move(stack));
}

bool verify_chain_value(const std::vector<mpz_class>& primes, const std::string& decimal) {
    if (primes.empty()) return false;
    // From-scratch rebuild at twice the schedule's precision.
    long prec = 96;
    {
        auto lb0 = log_bracket_for_chain(primes, 256);
        if (!lb0) return false;
        prec = 2 * schedule_precision(static_cast<int>(primes.size()), *lb0, 96);
    }
    auto lb = log_bracket_for_chain(primes, prec);
    if (!lb) return false;
    DyadicInterval bracket = iv_exp(*lb);
    DyadicInterval window = decimal_prefix_window(decimal, prec);
    if (!(bracket.lo() <= window.lo() && window.hi() <= bracket.hi())) return false;
    // Floor recovery for every exponent. The deepest constraint defines the
    // bracket, so its image may graze q+1 by an outward-rounding ulp.
    for (size_t k = 0; k < primes.size(); ++k) {
        mpz_class e(chain_exponent(static_cast<int>(k) + 1));
        DyadicInterval img = iv_exp(iv_mul_mpz(*lb, e));
        mpz_class flo = img.lo().floor(), fhi = img.hi().floor();
        Dyadic slack = Dyadic::pow2(img.hi().msb() - prec + 16);
        if (fhi > flo) {
            Dyadic under = Dyadic::sub(Dyadic(mpz_class(flo + 1)), img.lo(), 64, Round::up);
            if (under <= slack) flo += 1;
        }
        if (fhi == flo + 1) {
            Dyadic over = Dyadic::sub(img.hi(), Dyadic(mpz_class(fhi)), 64, Round::up);
            if (over <= slack) fhi = flo;
        }
        if (flo != primes[k] || fhi != flo) return false;
    }
    return true;
}

bool verify_chain(const std::vector<mpz_class>& primes, const DigitCertificate& cert) {
    if (!cert.integer_certified) return false;
    return verify_chain_value(primes, cert.to_string());
}

}  // namespace millsforge
