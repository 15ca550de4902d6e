#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "prlab/error.hpp"

namespace prlab {

/// Strictly increasing list of prefix lengths at which statistics are recorded.
class CheckpointPlan {
public:
    CheckpointPlan() = default;

    explicit CheckpointPlan(std::vector<std::uint64_t> points) : points_(std::move(points)) {
        if (points_.empty()) throw DomainError("checkpoint plan is empty");
        if (points_.front() == 0) throw DomainError("checkpoint 0 is not a prefix length");
        for (std::size_t i = 1; i < points_.size(); ++i)
            if (points_[i] <= points_[i - 1])
                throw DomainError("checkpoints must be strictly increasing");
    }

    /// 2^min_exp, 2^(min_exp+1), ... <= cap, followed by cap itself when
    /// include_cap is set and cap is not already a power of two.
    static CheckpointPlan powers_of_two(std::uint64_t cap, int min_exp = 0, bool include_cap = true) {
        if (cap == 0) throw DomainError("checkpoint cap must be positive");
        std::vector<std::uint64_t> pts;
        for (int e = min_exp; e < 64; ++e) {
            const std::uint64_t k = std::uint64_t{1} << e;
            if (k > cap) break;
            pts.push_back(k);
        }
        if (include_cap && (pts.empty() || pts.back() != cap)) pts.push_back(cap);
        return CheckpointPlan(std::move(pts));
    }

    /// step, 2*step, ... <= cap (cap appended if not a multiple).
    static CheckpointPlan linear(std::uint64_t step, std::uint64_t cap) {
        if (step == 0 || cap == 0) throw DomainError("linear checkpoint plan needs positive step and cap");
        std::vector<std::uint64_t> pts;
        for (std::uint64_t k = step; k <= cap; k += step) pts.push_back(k);
        if (pts.empty() || pts.back() != cap) pts.push_back(cap);
        return CheckpointPlan(std::move(pts));
    }

    const std::vector<std::uint64_t>& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }
    std::uint64_t back() const { return points_.back(); }
    std::uint64_t operator[](std::size_t i) const { return points_[i]; }

    auto begin() const noexcept { return points_.begin(); }
    auto end() const noexcept { return points_.end(); }

private:
    std::vector<std::uint64_t> points_;
};

/// Half-open interval of naturals.
struct Span {
    std::uint64_t lo;
    std::uint64_t hi;
};

/// Splits [lo, hi) at every cut point and additionally every `chunk` values.
/// Cut points outside (lo, hi) are ignored.
inline std::vector<Span> split_spans(std::uint64_t lo, std::uint64_t hi,
                                     const std::vector<std::uint64_t>& cuts, std::uint64_t chunk) {
    std::vector<std::uint64_t> bounds{lo};
    for (std::uint64_t c : cuts)
        if (c > lo && c < hi) bounds.push_back(c);
    bounds.push_back(hi);
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

    std::vector<Span> spans;
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i)
        for (std::uint64_t a = bounds[i]; a < bounds[i + 1];) {
            const std::uint64_t b = std::min(bounds[i + 1], chunk == 0 ? bounds[i + 1] : a + chunk);
            spans.push_back({a, b});
            a = b;
        }
    return spans;
}

/// Evaluates fn on every span, possibly on several threads. Results come back
/// in span order, so anything folded from them is independent of `workers`.
template <typename Fn>
auto map_spans(const std::vector<Span>& spans, unsigned workers, Fn&& fn) {
    using Result = decltype(fn(spans.front()));
    std::vector<Result> out(spans.size());
    if (workers <= 1 || spans.size() <= 1) {
        for (std::size_t i = 0; i < spans.size(); ++i) out[i] = fn(spans[i]);
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < spans.size();) {
            try {
                out[i] = fn(spans[i]);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned n = std::min<std::size_t>(workers, spans.size());
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace prlab
