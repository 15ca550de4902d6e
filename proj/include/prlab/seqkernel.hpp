#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prlab/checkpoints.hpp"
#include "prlab/error.hpp"

namespace prlab {

enum class SeqKind : std::uint8_t { liouville = 0, mobius = 1, custom = 2 };

inline std::string_view to_string(SeqKind k) {
    switch (k) {
        case SeqKind::liouville: return "liouville";
        case SeqKind::mobius: return "mobius";
        case SeqKind::custom: return "custom";
    }
    return "?";
}

inline SeqKind parse_seq_kind(std::string_view s) {
    if (s == "liouville" || s == "lambda") return SeqKind::liouville;
    if (s == "mobius" || s == "mu") return SeqKind::mobius;
    if (s == "custom") return SeqKind::custom;
    throw DomainError("unknown sequence kind '" + std::string(s) + "'");
}

/// 2 bits per value: 0b00 = -1, 0b01 = 0, 0b10 = +1 (0b11 reserved).
/// Value i lives in byte i/4 at bit offset 2*(i%4).
class PackedTernary {
public:
    PackedTernary() = default;
    explicit PackedTernary(std::size_t n) : size_(n), bytes_((n + 3) / 4, 0) {}

    static PackedTernary from_bytes(std::vector<std::uint8_t> bytes, std::size_t n) {
        if (bytes.size() != (n + 3) / 4) throw FormatError("packed payload has wrong length");
        PackedTernary p;
        p.size_ = n;
        p.bytes_ = std::move(bytes);
        for (std::size_t i = 0; i < n; ++i)
            if (p.code(i) == 0b11) throw FormatError("reserved ternary code at index " + std::to_string(i));
        // padding is always zero so equal blocks serialize identically
        if (n % 4 != 0) p.bytes_.back() &= static_cast<std::uint8_t>((1u << (2 * (n % 4))) - 1);
        return p;
    }

    std::size_t size() const noexcept { return size_; }
    const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }

    int get(std::size_t i) const noexcept { return static_cast<int>(code(i)) - 1; }

    void set(std::size_t i, int v) noexcept {
        const unsigned shift = 2 * (i % 4);
        auto& b = bytes_[i / 4];
        b = static_cast<std::uint8_t>((b & ~(0b11u << shift)) | (static_cast<unsigned>(v + 1) << shift));
    }

    friend bool operator==(const PackedTernary&, const PackedTernary&) = default;

private:
    unsigned code(std::size_t i) const noexcept { return (bytes_[i / 4] >> (2 * (i % 4))) & 0b11u; }

    std::size_t size_ = 0;
    std::vector<std::uint8_t> bytes_;
};

/// Contiguous range [lo, hi) of a {-1,0,+1}-valued sequence. Immutable once built.
class SeqBlock {
public:
    SeqBlock(std::uint64_t lo, std::uint64_t hi, SeqKind kind, PackedTernary values)
        : lo_(lo), hi_(hi), kind_(kind), values_(std::move(values)) {
        if (lo_ >= hi_) throw DomainError("block range must satisfy lo < hi");
        if (values_.size() != hi_ - lo_) throw DomainError("block payload length differs from hi - lo");
        if (kind_ == SeqKind::liouville)
            for (std::size_t i = 0; i < values_.size(); ++i)
                if (values_.get(i) == 0)
                    throw FormatError("liouville block holds 0 at n=" + std::to_string(lo_ + i));
    }

    static SeqBlock from_values(std::uint64_t lo, SeqKind kind, std::span<const int> values) {
        PackedTernary packed(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i] < -1 || values[i] > 1) throw DomainError("sequence value outside {-1,0,+1}");
            packed.set(i, values[i]);
        }
        return SeqBlock(lo, lo + values.size(), kind, std::move(packed));
    }

    std::uint64_t lo() const noexcept { return lo_; }
    std::uint64_t hi() const noexcept { return hi_; }
    std::size_t size() const noexcept { return values_.size(); }
    SeqKind kind() const noexcept { return kind_; }
    const PackedTernary& packed() const noexcept { return values_; }

    bool covers(std::uint64_t n) const noexcept { return n >= lo_ && n < hi_; }

    /// s(n); n must lie in [lo, hi).
    int at(std::uint64_t n) const {
        if (!covers(n))
            throw DataError("n=" + std::to_string(n) + " outside block [" + std::to_string(lo_) + "," +
                            std::to_string(hi_) + ")");
        return values_.get(n - lo_);
    }

    int operator[](std::uint64_t n) const noexcept { return values_.get(n - lo_); }

    std::vector<int> values() const {
        std::vector<int> out(size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_.get(i);
        return out;
    }

    friend bool operator==(const SeqBlock&, const SeqBlock&) = default;

private:
    std::uint64_t lo_;
    std::uint64_t hi_;
    SeqKind kind_;
    PackedTernary values_;
};

struct PrimePower {
    std::uint64_t prime;
    unsigned exponent;
    friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

struct FactorView {
    std::uint64_t n = 1;
    std::vector<PrimePower> factors;

    /// Prime factors counted with multiplicity.
    unsigned big_omega() const noexcept {
        unsigned k = 0;
        for (const auto& f : factors) k += f.exponent;
        return k;
    }

    bool squarefree() const noexcept {
        for (const auto& f : factors)
            if (f.exponent >= 2) return false;
        return true;
    }

    int liouville() const noexcept { return big_omega() % 2 ? -1 : 1; }
    int mobius() const noexcept {
        if (!squarefree()) return 0;
        return factors.size() % 2 ? -1 : 1;
    }

    /// Largest k with k^2 | n.
    std::uint64_t square_root_of_square_part() const noexcept {
        std::uint64_t k = 1;
        for (const auto& f : factors)
            for (unsigned e = 0; e < f.exponent / 2; ++e) k *= f.prime;
        return k;
    }
};

inline std::uint64_t isqrt(std::uint64_t n) {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
    while (r > 0 && (r > UINT32_MAX || r * r > n)) --r;
    while (r + 1 <= UINT32_MAX && (r + 1) * (r + 1) <= n) ++r;
    return r;
}

/// Factorization by trial division over 2, 3 and 6k +- 1.
inline FactorView factorize(std::uint64_t n) {
    if (n == 0) throw DomainError("factorize: n must be >= 1");
    FactorView view{n, {}};
    auto take = [&](std::uint64_t p) {
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        if (e) view.factors.push_back({p, e});
    };
    take(2);
    take(3);
    for (std::uint64_t p = 5; p <= n / p; p += 6) {
        take(p);
        take(p + 2);
    }
    if (n > 1) view.factors.push_back({n, 1});
    return view;
}

inline int sequence_value(const FactorView& f, SeqKind kind) {
    switch (kind) {
        case SeqKind::liouville: return f.liouville();
        case SeqKind::mobius: return f.mobius();
        case SeqKind::custom: break;
    }
    throw DomainError("custom sequences have no closed form");
}

/// Spot-check path: single value through factorize.
inline int value_at(std::uint64_t n, SeqKind kind) {
    if (n == 0) throw DomainError("value_at: sequences start at n=1");
    return sequence_value(factorize(n), kind);
}

/// Smallest-prime-factor table for fast repeated factorization up to a limit.
class SpfTable {
public:
    explicit SpfTable(std::uint32_t limit) : spf_(static_cast<std::size_t>(limit) + 1, 0) {
        std::vector<std::uint32_t> primes;
        for (std::uint32_t i = 2; i <= limit; ++i) {
            if (spf_[i] == 0) {
                spf_[i] = i;
                primes.push_back(i);
            }
            for (std::uint32_t p : primes) {
                const std::uint64_t m = std::uint64_t{p} * i;
                if (p > spf_[i] || m > limit) break;
                spf_[m] = p;
            }
        }
    }

    std::uint32_t limit() const noexcept { return static_cast<std::uint32_t>(spf_.size() - 1); }

    FactorView factorize(std::uint32_t n) const {
        if (n == 0) throw DomainError("factorize: n must be >= 1");
        if (n > limit()) throw DomainError("factorize: n beyond SPF table");
        FactorView view{n, {}};
        while (n > 1) {
            const std::uint32_t p = spf_[n];
            unsigned e = 0;
            while (n % p == 0) {
                n /= p;
                ++e;
            }
            view.factors.push_back({p, e});
        }
        return view;
    }

private:
    std::vector<std::uint32_t> spf_;
};

inline std::vector<std::uint64_t> primes_up_to(std::uint64_t limit) {
    std::vector<std::uint64_t> primes;
    if (limit < 2) return primes;
    std::vector<bool> composite(limit + 1, false);
    for (std::uint64_t i = 2; i <= limit; ++i) {
        if (composite[i]) continue;
        primes.push_back(i);
        for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = true;
    }
    return primes;
}

struct SieveOptions {
    std::uint64_t window = std::uint64_t{1} << 20;
    std::uint64_t max_hi = std::uint64_t{1} << 40;
    std::uint64_t max_block = std::uint64_t{1} << 32;
    unsigned workers = 1;
};

namespace detail {

// Omega parity and squarefreeness for every n in [a, b) by dividing out
// the base primes; whatever is left above 1 is a single large prime.
inline std::vector<int> sieve_window(std::uint64_t a, std::uint64_t b, SeqKind kind,
                                     const std::vector<std::uint64_t>& base_primes) {
    const std::size_t len = b - a;
    std::vector<std::uint64_t> rem(len);
    std::vector<std::uint8_t> odd(len, 0), square_free(len, 1);
    for (std::size_t i = 0; i < len; ++i) rem[i] = a + i;

    const std::uint64_t root = isqrt(b - 1);
    for (std::uint64_t p : base_primes) {
        if (p > root) break;
        for (std::uint64_t m = (a + p - 1) / p * p; m < b; m += p) {
            const std::size_t i = m - a;
            unsigned e = 0;
            do {
                rem[i] /= p;
                ++e;
            } while (rem[i] % p == 0);
            odd[i] ^= static_cast<std::uint8_t>(e & 1u);
            if (e >= 2) square_free[i] = 0;
        }
    }

    std::vector<int> out(len);
    for (std::size_t i = 0; i < len; ++i) {
        if (rem[i] > 1) odd[i] ^= 1;
        const int sign = odd[i] ? -1 : 1;
        out[i] = (kind == SeqKind::mobius && !square_free[i]) ? 0 : sign;
    }
    return out;
}

}  // namespace detail

/// lambda(n) or mu(n) for n in [lo, hi) by a segmented sieve.
inline SeqBlock sieve_range(std::uint64_t lo, std::uint64_t hi, SeqKind kind, const SieveOptions& opt = {}) {
    if (kind == SeqKind::custom) throw DomainError("sieve_range: custom sequences cannot be sieved");
    if (lo == 0) throw DomainError("sieve_range: sequences are defined for n >= 1");
    if (lo >= hi) throw DomainError("sieve_range: empty range");
    if (hi > opt.max_hi) throw DomainError("sieve_range: hi exceeds configured maximum " + std::to_string(opt.max_hi));
    if (hi - lo > opt.max_block) throw DomainError("sieve_range: range exceeds block size budget");

    const auto base = primes_up_to(isqrt(hi - 1));
    const auto spans = split_spans(lo, hi, {}, opt.window == 0 ? hi - lo : opt.window);
    const auto windows = map_spans(spans, opt.workers, [&](const Span& s) {
        return detail::sieve_window(s.lo, s.hi, kind, base);
    });

    PackedTernary packed(hi - lo);
    std::size_t i = 0;
    for (const auto& w : windows)
        for (int v : w) packed.set(i++, v);
    return SeqBlock(lo, hi, kind, std::move(packed));
}

}  // namespace prlab
