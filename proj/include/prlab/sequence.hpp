#pragma once

#include <concepts>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "prlab/error.hpp"
#include "prlab/seqkernel.hpp"
#include "prlab/testlang.hpp"

namespace prlab {

/// Anything that yields s(n) in {-1,0,+1} on [lo, hi).
template <typename S>
concept TernarySequence = requires(const S& s, std::uint64_t n) {
    { s.lo() } -> std::convertible_to<std::uint64_t>;
    { s.hi() } -> std::convertible_to<std::uint64_t>;
    { s.at(n) } -> std::convertible_to<int>;
};

/// Sequence defined by a callable; handy for constructed test inputs.
class FunctionSequence {
public:
    FunctionSequence(std::function<int(std::uint64_t)> fn, std::uint64_t lo, std::uint64_t hi)
        : fn_(std::move(fn)), lo_(lo), hi_(hi) {
        if (lo_ >= hi_) throw DomainError("sequence range must satisfy lo < hi");
    }

    static FunctionSequence constant(int v, std::uint64_t hi) {
        return FunctionSequence([v](std::uint64_t) { return v; }, 1, hi);
    }

    /// s(n) = pattern[(n - 1) mod pattern.size()]
    static FunctionSequence periodic(std::vector<int> pattern, std::uint64_t hi) {
        if (pattern.empty()) throw DomainError("periodic sequence needs a pattern");
        return FunctionSequence(
            [p = std::move(pattern)](std::uint64_t n) { return p[(n - 1) % p.size()]; }, 1, hi);
    }

    static FunctionSequence from_test(TestFn f, std::uint64_t hi) {
        if (!f.is_ternary()) throw DomainError("only ternary test functions define sequences");
        return FunctionSequence([f = std::move(f)](std::uint64_t n) { return f.ternary(n); }, 1, hi);
    }

    std::uint64_t lo() const noexcept { return lo_; }
    std::uint64_t hi() const noexcept { return hi_; }

    int at(std::uint64_t n) const {
        if (n < lo_ || n >= hi_) throw DataError("n=" + std::to_string(n) + " outside sequence range");
        return fn_(n);
    }

private:
    std::function<int(std::uint64_t)> fn_;
    std::uint64_t lo_;
    std::uint64_t hi_;
};

/// Materializes [lo, hi) of any sequence into a custom block.
template <TernarySequence S>
SeqBlock materialize(const S& s, std::uint64_t lo, std::uint64_t hi) {
    if (lo < s.lo() || hi > s.hi()) throw DataError("materialize: range not covered by source");
    std::vector<int> v(hi - lo);
    for (std::uint64_t n = lo; n < hi; ++n) v[n - lo] = s.at(n);
    return SeqBlock::from_values(lo, SeqKind::custom, v);
}

namespace detail {

// Fast unchecked access where the caller has validated the range.
template <TernarySequence S>
inline int raw_at(const S& s, std::uint64_t n) {
    if constexpr (std::same_as<S, SeqBlock>)
        return s[n];
    else
        return s.at(n);
}

}  // namespace detail

}  // namespace prlab
