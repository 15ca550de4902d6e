#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "prlab/gmap.hpp"
#include "prlab/seqkernel.hpp"
#include "prlab/sequence.hpp"
#include "prlab/testlang.hpp"

namespace prlab {

/// s'(x) = s(g(x)) for x in [x_lo, x_hi).
template <TernarySequence S>
SeqBlock compose_g(const S& s, const GSpec& g, std::uint64_t x_lo, std::uint64_t x_hi) {
    if (x_lo >= x_hi) throw DomainError("compose_g: empty range");
    if (x_lo < g.xmin()) throw DomainError("compose_g: range starts below xmin=" + std::to_string(g.xmin()));
    std::vector<int> values(x_hi - x_lo);
    for (std::uint64_t x = x_lo; x < x_hi; ++x) {
        const std::uint64_t n = g(x);
        if (n < s.lo() || n >= s.hi())
            throw DataError("compose_g: g(" + std::to_string(x) + ")=" + std::to_string(n) + " outside available data");
        values[x - x_lo] = s.at(n);
    }
    return SeqBlock::from_values(x_lo, SeqKind::custom, values);
}

/// Witness transfer: f'(n) = f(g^-1(n)) for n >= n0 in Rng(g), else 0.
inline TestFn lift_witness(const TestFn& f, const GSpec& g, std::uint64_t n0) {
    if (!f.is_ternary()) throw DomainError("lift_witness needs a ternary test function");
    return TestFn(dsl::lift(f.root(), g, n0));
}

struct WitnessIdentityReport {
    std::uint64_t max_m = 0;
    std::uint64_t checked = 0;
    std::uint64_t mismatches = 0;
    std::uint64_t first_mismatch = 0;
    std::int64_t final_lhs = 0;
    std::int64_t final_rhs = 0;
};

/// Compares, for every M <= max_m,
///   sum_{1 <= m <= M} f'(m) s(m)   with   sum_{x >= x0, g(x) <= M} f(x) s'(x),
/// where x0 is the first x with g(x) >= n0. The left side goes through the
/// lifted witness (inverting g), the right through s' = s o g (forward g).
template <TernarySequence S>
WitnessIdentityReport witness_identity_check(const S& s, const TestFn& f, const GSpec& g, std::uint64_t n0,
                                             std::uint64_t max_m) {
    if (!f.is_ternary()) throw DomainError("witness identity needs a ternary test function");
    if (s.lo() > 1 || max_m >= s.hi()) throw DataError("witness identity: sequence must cover [1, max_m]");

    const TestFn lifted = lift_witness(f, g, n0);
    std::vector<std::int64_t> lhs(max_m + 1, 0);
    for (std::uint64_t m = 1; m <= max_m; ++m) lhs[m] = lhs[m - 1] + lifted.ternary(m) * s.at(m);

    std::vector<std::int64_t> rhs_terms(max_m + 1, 0);
    const std::uint64_t x0 = g.first_at_least(std::max<std::uint64_t>(n0, 1));
    if (g(x0) <= max_m) {
        const std::uint64_t x_end = g.first_at_least(max_m + 1);
        const SeqBlock composed = compose_g(s, g, x0, x_end);
        for (std::uint64_t x = x0; x < x_end; ++x) rhs_terms[g(x)] += f.ternary(x) * composed.at(x);
    }

    WitnessIdentityReport r;
    r.max_m = max_m;
    std::int64_t rhs = 0;
    for (std::uint64_t m = 1; m <= max_m; ++m) {
        rhs += rhs_terms[m];
        ++r.checked;
        if (rhs != lhs[m]) {
            if (r.mismatches++ == 0) r.first_mismatch = m;
        }
    }
    r.final_lhs = lhs[max_m];
    r.final_rhs = rhs;
    return r;
}

struct TransferCounterexample {
    std::uint64_t n;
    std::uint64_t k;  // n = k^2 i
    std::uint64_t i;
    int lambda_n;
    int mu_i;
};

struct TransferReport {
    std::uint64_t N = 0;
    std::uint64_t checked = 0;
    std::vector<TransferCounterexample> counterexamples;
    // truncation of sum_k k^-2
    std::uint64_t n0 = 0;
    double tail_mass = 0;       // sum_{k > n0} k^-2
    double integral_bound = 0;  // 1 / n0
    double eps = 0;
    std::uint64_t n0_for_eps = 0;  // least n0 with tail < eps
};

/// sum_{k > n0} k^-2 = pi^2/6 - sum_{k <= n0} k^-2.
inline double square_reciprocal_tail(std::uint64_t n0) {
    long double head = 0;
    for (std::uint64_t k = n0; k >= 1; --k) head += 1.0L / (static_cast<long double>(k) * k);
    return static_cast<double>(std::numbers::pi_v<long double> * std::numbers::pi_v<long double> / 6 - head);
}

/// Checks lambda(n) = mu(i) over every n = k^2 i <= N with i squarefree, and
/// reports how much of sum k^-2 lies past n0.
inline TransferReport mu_lambda_transfer_check(std::uint64_t N, std::uint64_t n0 = 10, double eps = 0.1,
                                               const SieveOptions& opt = {}) {
    if (N < 4) throw DomainError("transfer check needs N >= 4");
    if (N > UINT32_MAX) throw DomainError("transfer check limited to N < 2^32");
    if (n0 < 1) throw DomainError("transfer check needs n0 >= 1");
    if (!(eps > 0)) throw DomainError("transfer check needs eps > 0");

    const SeqBlock lam = sieve_range(1, N + 1, SeqKind::liouville, opt);
    const SeqBlock mu = sieve_range(1, N + 1, SeqKind::mobius, opt);
    const SpfTable spf(static_cast<std::uint32_t>(N));

    TransferReport r;
    r.N = N;
    for (std::uint64_t n = 1; n <= N; ++n) {
        const std::uint64_t k = spf.factorize(static_cast<std::uint32_t>(n)).square_root_of_square_part();
        const std::uint64_t i = n / (k * k);
        ++r.checked;
        if (lam[n] != mu[i] || mu[i] == 0) r.counterexamples.push_back({n, k, i, lam[n], mu[i]});
    }

    r.n0 = n0;
    r.tail_mass = square_reciprocal_tail(n0);
    r.integral_bound = 1.0 / static_cast<double>(n0);
    r.eps = eps;
    std::uint64_t m = 1;
    while (square_reciprocal_tail(m) >= eps) m = m < 1024 ? m + 1 : m * 2;
    r.n0_for_eps = m;
    return r;
}

}  // namespace prlab
