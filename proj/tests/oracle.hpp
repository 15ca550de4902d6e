#pragma once
// Reference values for tests. Deliberately naive: plain trial division by
// every d, no wheel, no shared code with the library.

#include <cstdint>
#include <vector>

namespace oracle {

struct Factor {
    std::uint64_t p;
    int e;
};

inline std::vector<Factor> factor(std::uint64_t n) {
    std::vector<Factor> out;
    for (std::uint64_t d = 2; d * d <= n; ++d) {
        int e = 0;
        while (n % d == 0) {
            n /= d;
            ++e;
        }
        if (e) out.push_back({d, e});
    }
    if (n > 1) out.push_back({n, 1});
    return out;
}

inline int big_omega(std::uint64_t n) {
    int k = 0;
    for (auto f : factor(n)) k += f.e;
    return k;
}

inline int liouville(std::uint64_t n) { return big_omega(n) % 2 ? -1 : 1; }

inline int mobius(std::uint64_t n) {
    const auto fs = factor(n);
    for (auto f : fs)
        if (f.e > 1) return 0;
    return fs.size() % 2 ? -1 : 1;
}

inline bool is_squarefree(std::uint64_t n) { return mobius(n) != 0; }

inline std::uint64_t popcount(std::uint64_t n) {
    std::uint64_t c = 0;
    for (; n; n >>= 1) c += n & 1;
    return c;
}

inline std::uint64_t gcd(std::uint64_t a, std::uint64_t b) {
    while (b) {
        const auto t = a % b;
        a = b;
        b = t;
    }
    return a;
}

// deterministic generator for property tests
struct Rng {
    std::uint64_t s;
    explicit Rng(std::uint64_t seed) : s(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (s += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    std::uint64_t below(std::uint64_t m) { return next() % m; }
    std::int64_t range(std::int64_t lo, std::int64_t hi) {  // [lo, hi]
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }
};

}  // namespace oracle
