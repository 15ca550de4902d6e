#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prlab/checkpoints.hpp"
#include "prlab/dyadic.hpp"
#include "prlab/sequence.hpp"
#include "prlab/testlang.hpp"

namespace prlab {

struct CorrelationRow {
    std::uint64_t n = 0;
    DyadicSum raw;                  // sum_{i=1..n} f(i) s(i), exact
    double norm_n = 0;              // raw / n
    double norm_rh = 0;             // raw / n^(1/2 + eps)
    std::optional<double> norm_lil; // raw / sqrt(2 n ln ln n), n >= 3 only
};

struct CorrelationTrace {
    std::string test;
    double eps = 0.05;
    std::vector<CorrelationRow> rows;
};

struct StreamOptions {
    unsigned workers = 1;
    std::uint64_t chunk = std::uint64_t{1} << 16;
};

inline std::optional<double> lil_normalizer(std::uint64_t n) {
    if (n < 3) return std::nullopt;
    const double x = static_cast<double>(n);
    return std::sqrt(2.0 * x * std::log(std::log(x)));
}

namespace detail {

template <TernarySequence S>
void check_coverage(const S& s, const CheckpointPlan& plan, const char* who) {
    if (plan.empty()) throw DomainError(std::string(who) + ": empty checkpoint plan");
    if (s.lo() > 1) throw DataError(std::string(who) + ": sequence must start at n <= 1");
    if (plan.back() >= s.hi())
        throw DataError(std::string(who) + ": checkpoint " + std::to_string(plan.back()) +
                        " beyond available data (sequence ends at " + std::to_string(s.hi() - 1) + ")");
}

// Exact prefix sums of term(i) over [1, n] for every checkpoint n, where
// term returns a numerator at denominator 2^scale.
template <typename Term>
std::vector<int128> prefix_at_checkpoints(const CheckpointPlan& plan, const StreamOptions& opt, Term&& term) {
    std::vector<std::uint64_t> cuts;
    for (auto c : plan) cuts.push_back(c + 1);
    const auto spans = split_spans(1, plan.back() + 1, cuts, opt.chunk);
    const auto parts = map_spans(spans, opt.workers, [&](const Span& sp) {
        int128 acc = 0;
        for (std::uint64_t i = sp.lo; i < sp.hi; ++i) acc += term(i);
        return acc;
    });
    std::vector<int128> out;
    int128 running = 0;
    std::size_t next = 0;
    for (std::size_t k = 0; k < spans.size(); ++k) {
        running += parts[k];
        while (next < plan.size() && plan[next] + 1 == spans[k].hi) {
            out.push_back(running);
            ++next;
        }
    }
    return out;
}

template <TernarySequence S>
auto product_term(const S& s, const TestFn& f, int scale) {
    return [&s, &f, scale](std::uint64_t i) -> int128 {
        const int si = raw_at(s, i);
        if (si == 0) return 0;
        const int128 fi = f(i).scaled(scale);
        return si > 0 ? fi : -fi;
    };
}

}  // namespace detail

/// Partial sums of f(i)s(i) with the 1/n, n^(1/2+eps) and LIL normalizations.
template <TernarySequence S>
CorrelationTrace correlate(const S& s, const TestFn& f, const CheckpointPlan& plan, double eps = 0.05,
                           const StreamOptions& opt = {}) {
    if (!(eps > 0)) throw DomainError("correlate: eps must be positive");
    detail::check_coverage(s, plan, "correlate");
    const int scale = f.max_exponent();
    const auto sums = detail::prefix_at_checkpoints(plan, opt, detail::product_term(s, f, scale));

    CorrelationTrace trace{f.str(), eps, {}};
    for (std::size_t k = 0; k < plan.size(); ++k) {
        CorrelationRow row;
        row.n = plan[k];
        row.raw = DyadicSum(scale);
        row.raw.add_scaled(sums[k]);
        const double raw = row.raw.to_double();
        const double n = static_cast<double>(row.n);
        row.norm_n = raw / n;
        row.norm_rh = raw / std::pow(n, 0.5 + eps);
        if (auto d = lil_normalizer(row.n)) row.norm_lil = raw / *d;
        trace.rows.push_back(std::move(row));
    }
    return trace;
}

struct BiasedRow {
    std::uint64_t n = 0;
    DyadicSum centered;  // sum f(i) (s(i) - 1) / 2
    DyadicSum f_total;   // sum f(i)
    double value = 0;    // (centered + p * f_total) / n
};

struct BiasedTrace {
    std::string test;
    double p = 0.5;
    std::vector<BiasedRow> rows;
};

/// (1/n) sum_{i<=n} f(i) ((s(i) - 1)/2 + p), from two exact sums.
template <TernarySequence S>
BiasedTrace biased_statistic(const S& s, const TestFn& f, double p, const CheckpointPlan& plan,
                             const StreamOptions& opt = {}) {
    if (!(p > 0 && p < 1)) throw DomainError("biased_statistic: p must lie in (0, 1)");
    detail::check_coverage(s, plan, "biased_statistic");
    const int scale = f.max_exponent() + 1;
    // (s - 1)/2 is 0, -1/2 or -1
    const auto centered = detail::prefix_at_checkpoints(plan, opt, [&](std::uint64_t i) -> int128 {
        const int si = detail::raw_at(s, i);
        if (si == 1) return 0;
        const int128 fi = f(i).scaled(scale);
        return si == 0 ? -fi / 2 : -fi;
    });
    const auto totals = detail::prefix_at_checkpoints(plan, opt, [&](std::uint64_t i) -> int128 {
        return f(i).scaled(scale - 1);
    });

    BiasedTrace trace{f.str(), p, {}};
    for (std::size_t k = 0; k < plan.size(); ++k) {
        BiasedRow row;
        row.n = plan[k];
        row.centered = DyadicSum(scale);
        row.centered.add_scaled(centered[k]);
        row.f_total = DyadicSum(scale - 1);
        row.f_total.add_scaled(totals[k]);
        row.value = (row.centered.to_double() + p * row.f_total.to_double()) / static_cast<double>(row.n);
        trace.rows.push_back(std::move(row));
    }
    return trace;
}

}  // namespace prlab
