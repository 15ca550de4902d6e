#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prlab/checkpoints.hpp"
#include "prlab/sequence.hpp"
#include "prlab/testlang.hpp"

namespace prlab {

/// Betting strategy. At step n the gambler stakes |beta(n)| of the current
/// capital on the sign of beta(n); the capital becomes F * (1 + beta(n) s(n)).
struct MartingaleSpec {
    enum class Rule { oblivious, repeat_last };

    Dyadic initial = 1;
    Rule rule = Rule::oblivious;
    std::optional<TestFn> stake_fn;  // oblivious: beta(n) = stake_fn(n)
    Dyadic stake = Dyadic::make(1, 1);  // repeat_last: beta(n) = stake * s(n-1)

    static MartingaleSpec oblivious(TestFn beta, Dyadic initial = 1) {
        return {initial, Rule::oblivious, std::move(beta), Dyadic::make(1, 1)};
    }
    static MartingaleSpec repeat_last(Dyadic stake, Dyadic initial = 1) {
        return {initial, Rule::repeat_last, std::nullopt, stake};
    }

    std::string describe() const {
        if (rule == Rule::repeat_last) return "repeat-last(" + stake.str() + ")";
        return stake_fn ? stake_fn->str() : "0";
    }
};

/// Capital after the two possible outcomes; their mean is the current capital.
inline std::pair<Dyadic, Dyadic> martingale_successors(const Dyadic& capital, const Dyadic& beta) {
    return {capital * (Dyadic(1) - beta), capital * (Dyadic(1) + beta)};
}

struct MartingalePoint {
    std::uint64_t n;
    double capital;
};

struct MartingaleResult {
    std::string rule;
    std::vector<MartingalePoint> trace;  // capital after step n, at the requested points
    double final_capital = 0;
    double running_max = 0;  // finite-scale stand-in for the limsup
    std::uint64_t running_max_at = 0;
    std::optional<std::uint64_t> bust_at;  // first n with capital 0; the run stops there
};

/// Plays the strategy against s(1..n_max). With no plan every step is recorded.
template <TernarySequence S>
MartingaleResult run_martingale(const MartingaleSpec& m, const S& s, std::uint64_t n_max,
                                const std::optional<CheckpointPlan>& plan = std::nullopt) {
    if (n_max == 0) throw DomainError("run_martingale: n_max must be positive");
    if (!(Dyadic(0) < m.initial)) throw DomainError("run_martingale: initial capital must be positive");
    if (m.rule == MartingaleSpec::Rule::repeat_last && (Dyadic(1) < m.stake || m.stake < Dyadic(0)))
        throw DomainError("run_martingale: repeat-last stake must lie in [0, 1]");
    if (s.lo() > 1 || n_max >= s.hi()) throw DataError("run_martingale: sequence does not cover [1, n_max]");

    MartingaleResult out;
    out.rule = m.describe();
    double capital = m.initial.to_double();
    out.running_max = capital;
    std::size_t next_point = 0;
    int previous = 0;

    for (std::uint64_t n = 1; n <= n_max; ++n) {
        const int sn = s.at(n);
        if (sn == 0) throw DomainError("run_martingale: sequence takes value 0 at n=" + std::to_string(n));

        double beta = 0;
        if (m.rule == MartingaleSpec::Rule::oblivious) {
            if (m.stake_fn) {
                const Dyadic b = (*m.stake_fn)(n);
                if (Dyadic(1) < b.abs()) throw DomainError("betting rule value outside [-1,1] at n=" + std::to_string(n));
                beta = b.to_double();
            }
        } else {
            beta = m.stake.to_double() * previous;
        }
        capital *= 1.0 + beta * sn;
        previous = sn;

        if (capital > out.running_max) {
            out.running_max = capital;
            out.running_max_at = n;
        }
        const bool record = plan ? (next_point < plan->size() && (*plan)[next_point] == n) : true;
        if (record) {
            out.trace.push_back({n, capital});
            if (plan) ++next_point;
        }
        if (capital == 0) {
            out.bust_at = n;
            if (!record) out.trace.push_back({n, capital});
            break;
        }
    }
    out.final_capital = capital;
    return out;
}

}  // namespace prlab
