#pragma once
// Random AST generator for property tests.

#include <vector>

#include "oracle.hpp"
#include "prlab/testlang.hpp"

namespace gen {

namespace d = prlab::dsl;

inline d::NodePtr boolean(oracle::Rng& r, int depth) {
    const auto pick = depth <= 0 ? r.below(6) : r.below(10);
    switch (pick) {
        case 0: return d::bit(r.below(12));
        case 1: {
            const auto m = 1 + r.below(12);
            return d::mod_eq(m, r.below(m));
        }
        case 2: return d::less(r.below(5000));
        case 3: {
            const auto a = r.below(3000);
            return d::in_range(a, a + 1 + r.below(3000));
        }
        case 4: return d::popcount_ge(r.below(8));
        case 5: return d::square_div(2 + r.below(20));
        case 6: return d::logic_not(boolean(r, depth - 1));
        case 7: return d::logic_and(boolean(r, depth - 1), boolean(r, depth - 1));
        case 8: return d::logic_or(boolean(r, depth - 1), boolean(r, depth - 1));
        default: return d::logic_xor(boolean(r, depth - 1), boolean(r, depth - 1));
    }
}

inline d::NodePtr ternary(oracle::Rng& r, int depth) {
    switch (depth <= 0 ? r.below(2) : r.below(5)) {
        case 0: return d::pm(boolean(r, depth));
        case 1: return d::literal(static_cast<int>(r.range(-1, 1)));
        case 2: {
            std::vector<std::pair<d::NodePtr, int>> arms;
            const auto k = 1 + r.below(3);
            for (std::uint64_t i = 0; i < k; ++i) arms.emplace_back(boolean(r, depth - 1), static_cast<int>(r.range(-1, 1)));
            return d::cases(std::move(arms));
        }
        case 3: return d::product({ternary(r, depth - 1), ternary(r, depth - 1)});
        default: return d::pm(d::tern_eq(ternary(r, depth - 1), static_cast<int>(r.range(-1, 1))));
    }
}

/// Weighted sum with total |weight| <= 1.
inline d::NodePtr dyadic(oracle::Rng& r, int depth) {
    std::vector<std::pair<prlab::Dyadic, d::NodePtr>> terms;
    const auto k = 1 + r.below(4);
    std::int64_t budget = 1 << 10;  // in units of 2^-10
    for (std::uint64_t i = 0; i < k && budget > 0; ++i) {
        const int e = 1 + static_cast<int>(r.below(10));
        const std::int64_t unit = std::int64_t{1} << (10 - e);
        const std::int64_t maxn = std::min<std::int64_t>(budget / unit, (std::int64_t{1} << e) - 1);
        if (maxn <= 0) continue;
        std::int64_t num = 1 + static_cast<std::int64_t>(r.below(static_cast<std::uint64_t>(maxn)));
        budget -= num * unit;
        if (r.below(2)) num = -num;
        terms.emplace_back(prlab::Dyadic::make(num, e), ternary(r, depth));
    }
    if (terms.empty()) terms.emplace_back(prlab::Dyadic::make(1, 1), ternary(r, depth));
    return d::sum(std::move(terms));
}

inline std::vector<prlab::TestFn> ternary_corpus(std::size_t count, std::uint64_t seed) {
    oracle::Rng r(seed);
    std::vector<prlab::TestFn> out;
    for (std::size_t i = 0; i < count; ++i) out.emplace_back(ternary(r, 1 + static_cast<int>(i % 4)));
    return out;
}

inline std::vector<prlab::TestFn> dyadic_corpus(std::size_t count, std::uint64_t seed) {
    oracle::Rng r(seed);
    std::vector<prlab::TestFn> out;
    for (std::size_t i = 0; i < count; ++i) out.emplace_back(dyadic(r, 1 + static_cast<int>(i % 3)));
    return out;
}

}  // namespace gen
