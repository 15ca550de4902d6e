#pragma once

// Sequence from a hard-core predicate of a trapdoor permutation.
//
// F is squaring on the quadratic residues modulo a Blum integer N = p q
// (p = q = 3 mod 4), where it is a permutation; F^-1 takes the principal
// square root via the factorization. B is the least significant bit of the
// preimage. Blocks of width 2^k_j are laid end to end:
//
//   s(n) = (-1)^B(F^-1(y_j(n - o_j))),   o_j <= n < o_j + 2^k_j,
//
// where y_j(i) is the (i mod W_j)-th residue met by walking upward (mod N)
// from a per-block start point, and W_j = min(2^k_j, |QR(N)|).

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "prlab/error.hpp"
#include "prlab/seqkernel.hpp"
#include "prlab/testlang.hpp"

namespace prlab {

namespace nt {

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t powmod(std::uint64_t base, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1 % m;
    base %= m;
    while (e) {
        if (e & 1) r = mulmod(r, base, m);
        base = mulmod(base, base, m);
        e >>= 1;
    }
    return r;
}

/// Deterministic Miller-Rabin for 64-bit inputs.
inline bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % p == 0) return n == p;
    }
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        std::uint64_t x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s && composite; ++r) {
            x = mulmod(x, x, n);
            composite = x != n - 1;
        }
        if (composite) return false;
    }
    return true;
}

/// Jacobi symbol (a/n) for odd n.
inline int jacobi(std::uint64_t a, std::uint64_t n) {
    a %= n;
    int t = 1;
    while (a != 0) {
        while ((a & 1) == 0) {
            a >>= 1;
            const std::uint64_t r = n & 7;
            if (r == 3 || r == 5) t = -t;
        }
        std::swap(a, n);
        if ((a & 3) == 3 && (n & 3) == 3) t = -t;
        a %= n;
    }
    return n == 1 ? t : 0;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace nt

/// Blum modulus with its factorization.
class TrapdoorKey {
public:
    TrapdoorKey(std::uint64_t p, std::uint64_t q) : p_(std::min(p, q)), q_(std::max(p, q)) {
        if (p_ == q_) throw DomainError("Blum modulus needs two distinct primes");
        for (std::uint64_t r : {p_, q_}) {
            if (!nt::is_prime(r)) throw DomainError(std::to_string(r) + " is not prime");
            if (r % 4 != 3) throw DomainError(std::to_string(r) + " is not 3 mod 4");
        }
        const unsigned __int128 n = static_cast<unsigned __int128>(p_) * q_;
        if (n > UINT64_MAX) throw DomainError("modulus exceeds 64 bits");
        n_ = static_cast<std::uint64_t>(n);
    }

    std::uint64_t p() const noexcept { return p_; }
    std::uint64_t q() const noexcept { return q_; }
    std::uint64_t modulus() const noexcept { return n_; }
    int bits() const noexcept { return 64 - std::countl_zero(n_); }

    /// |QR(N)| = (p-1)(q-1)/4
    std::uint64_t qr_count() const noexcept { return (p_ - 1) / 2 * ((q_ - 1) / 2); }

    bool is_qr(std::uint64_t y) const {
        y %= n_;
        if (y == 0 || std::gcd(y, n_) != 1) return false;
        return nt::jacobi(y % p_, p_) == 1 && nt::jacobi(y % q_, q_) == 1;
    }

    /// F(x) = x^2 mod N.
    std::uint64_t square(std::uint64_t x) const { return nt::mulmod(x % n_, x % n_, n_); }

    /// F^-1(y): the square root of y that is itself a residue.
    std::uint64_t principal_root(std::uint64_t y) const {
        if (!is_qr(y)) throw DomainError(std::to_string(y) + " is not a quadratic residue mod " + std::to_string(n_));
        // for r = 3 mod 4, y^((r+1)/4) is the root that is a residue mod r
        const std::uint64_t rp = nt::powmod(y % p_, (p_ + 1) / 4, p_);
        const std::uint64_t rq = nt::powmod(y % q_, (q_ + 1) / 4, q_);
        // CRT: x = rp + p * ((rq - rp) * p^-1 mod q)
        const std::uint64_t p_inv = nt::powmod(p_ % q_, q_ - 2, q_);
        const std::uint64_t diff = (rq + q_ - rp % q_) % q_;
        const std::uint64_t h = nt::mulmod(diff, p_inv, q_);
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(p_) * h + rp) % n_);
    }

    friend bool operator==(const TrapdoorKey&, const TrapdoorKey&) = default;

private:
    std::uint64_t p_;
    std::uint64_t q_;
    std::uint64_t n_ = 0;
};

/// Least significant bit of the preimage.
inline int hard_core_bit(std::uint64_t x) noexcept { return static_cast<int>(x & 1u); }

/// (-1)^B(F^-1(y)).
inline int hard_core_sign(const TrapdoorKey& key, std::uint64_t y) {
    return hard_core_bit(key.principal_root(y)) ? -1 : 1;
}

/// Blum modulus with exactly `bits` bits, deterministic in the seed.
inline TrapdoorKey keygen(int bits, std::uint64_t seed) {
    if (bits < 6) throw DomainError("keygen: no two distinct Blum primes give a modulus below 6 bits");
    if (bits > 64) throw DomainError("keygen: toy keys are limited to 64 bits");
    const std::uint64_t lo = std::uint64_t{1} << (bits - 1);
    const std::uint64_t hi_incl = bits == 64 ? UINT64_MAX : (std::uint64_t{1} << bits) - 1;
    std::mt19937_64 rng(seed);

    if (bits <= 12) {
        std::vector<std::uint64_t> blum;
        for (std::uint64_t r = 3; r <= hi_incl / 3; r += 4)
            if (nt::is_prime(r)) blum.push_back(r);
        std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
        for (std::size_t i = 0; i < blum.size(); ++i)
            for (std::size_t j = i + 1; j < blum.size(); ++j) {
                const std::uint64_t n = blum[i] * blum[j];
                if (n >= lo && n <= hi_incl) pairs.emplace_back(blum[i], blum[j]);
            }
        if (pairs.empty())
            throw DomainError("keygen: no two distinct Blum primes give a " + std::to_string(bits) + "-bit modulus");
        const auto& [p, q] = pairs[rng() % pairs.size()];
        return TrapdoorKey(p, q);
    }

    const int hp = (bits + 1) / 2;
    const int hq = bits - hp + 1;  // product of an hp-bit and an hq-bit number has hp+hq-1 or hp+hq bits
    auto blum_prime = [&](int width) {
        const std::uint64_t base = std::uint64_t{1} << (width - 1);
        for (;;) {
            std::uint64_t r = base | (rng() & (base - 1));
            r = (r & ~std::uint64_t{3}) | 3u;
            if (nt::is_prime(r)) return r;
        }
    };
    for (int attempt = 0; attempt < 100000; ++attempt) {
        const std::uint64_t p = blum_prime(hp);
        const std::uint64_t q = blum_prime(hq);
        if (p == q) continue;
        const unsigned __int128 n = static_cast<unsigned __int128>(p) * q;
        if (n >= lo && n <= hi_incl) return TrapdoorKey(p, q);
    }
    throw DomainError("keygen: failed to find a " + std::to_string(bits) + "-bit Blum modulus");
}

inline void save_key(const TrapdoorKey& key, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["p"] = std::to_string(key.p());
    j["q"] = std::to_string(key.q());
    j["N"] = std::to_string(key.modulus());
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    out << j.dump(2) << '\n';
}

inline TrapdoorKey load_key(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open key file '" + path.string() + "'");
    try {
        const auto j = nlohmann::json::parse(in);
        auto field = [&](const char* name) -> std::uint64_t {
            const auto& v = j.at(name);
            return v.is_string() ? std::stoull(v.get<std::string>()) : v.get<std::uint64_t>();
        };
        TrapdoorKey key(field("p"), field("q"));
        if (j.contains("N") && field("N") != key.modulus()) throw FormatError("key file: N differs from p*q");
        return key;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("key file: ") + e.what());
    } catch (const std::logic_error&) {
        throw FormatError("key file: malformed number");
    }
}

/// Consecutive blocks of widths 2^k_1 < 2^k_2 < ... starting at 0.
class BlockSchedule {
public:
    explicit BlockSchedule(std::vector<int> exponents) : k_(std::move(exponents)) {
        if (k_.empty()) throw DomainError("schedule needs at least one exponent");
        if (k_.front() < 1) throw DomainError("schedule exponents start at 1");
        std::uint64_t o = 0;
        for (std::size_t j = 0; j < k_.size(); ++j) {
            if (j > 0 && k_[j] <= k_[j - 1]) throw DomainError("schedule exponents must be strictly increasing");
            if (k_[j] > 40) throw DomainError("schedule exponent above 40");
            offsets_.push_back(o);
            o += std::uint64_t{1} << k_[j];
        }
        coverage_ = o;
    }

    /// k_first, k_first+1, ... until the blocks cover [0, n).
    static BlockSchedule covering(std::uint64_t n, int k_first = 1) {
        std::vector<int> k;
        std::uint64_t total = 0;
        for (int e = k_first; total < n; ++e) {
            k.push_back(e);
            total += std::uint64_t{1} << e;
        }
        if (k.empty()) k.push_back(k_first);
        return BlockSchedule(std::move(k));
    }

    static BlockSchedule parse(const std::string& text) {
        std::vector<int> k;
        std::stringstream ss(text);
        try {
            for (std::string item; std::getline(ss, item, ',');) k.push_back(std::stoi(item));
        } catch (const std::logic_error&) {
            throw DomainError("malformed schedule '" + text + "'");
        }
        return BlockSchedule(std::move(k));
    }

    const std::vector<int>& exponents() const noexcept { return k_; }
    /// o_j for j = 1..m (index j-1).
    const std::vector<std::uint64_t>& offsets() const noexcept { return offsets_; }
    std::uint64_t coverage() const noexcept { return coverage_; }
    std::size_t blocks() const noexcept { return k_.size(); }
    std::uint64_t width(std::size_t j) const { return std::uint64_t{1} << k_.at(j - 1); }

    std::string str() const {
        std::string s;
        for (std::size_t i = 0; i < k_.size(); ++i) s += (i ? "," : "") + std::to_string(k_[i]);
        return s;
    }

    friend bool operator==(const BlockSchedule&, const BlockSchedule&) = default;

private:
    std::vector<int> k_;
    std::vector<std::uint64_t> offsets_;
    std::uint64_t coverage_ = 0;
};

struct BlockPosition {
    std::size_t j;        // 1-based block number
    std::uint64_t local;  // n - o_j
    friend bool operator==(const BlockPosition&, const BlockPosition&) = default;
};

inline BlockPosition block_index(std::uint64_t n, const BlockSchedule& schedule) {
    if (n >= schedule.coverage())
        throw DataError("n=" + std::to_string(n) + " beyond the last scheduled block (coverage " +
                        std::to_string(schedule.coverage()) + ")");
    const auto& o = schedule.offsets();
    const auto it = std::upper_bound(o.begin(), o.end(), n);
    const std::size_t j = static_cast<std::size_t>(it - o.begin());
    return {j, n - o[j - 1]};
}

/// Walks the residues of one block's window.
class QrWindow {
public:
    QrWindow(const TrapdoorKey& key, std::uint64_t seed, std::size_t block, std::uint64_t width)
        : key_(&key),
          start_(nt::splitmix64(seed ^ nt::splitmix64(block)) % key.modulus()),
          size_(std::min(width, key.qr_count())) {}

    std::uint64_t start() const noexcept { return start_; }
    std::uint64_t size() const noexcept { return size_; }

    /// The first `count` residues (count <= size()).
    std::vector<std::uint64_t> residues(std::uint64_t count) const {
        std::vector<std::uint64_t> out;
        out.reserve(count);
        std::uint64_t y = start_;
        while (out.size() < count) {
            if (key_->is_qr(y)) out.push_back(y);
            y = y + 1 == key_->modulus() ? 0 : y + 1;
        }
        return out;
    }

private:
    const TrapdoorKey* key_;
    std::uint64_t start_;
    std::uint64_t size_;
};

/// Embedded residue for local index i of block j.
inline std::uint64_t embed_local(const TrapdoorKey& key, std::uint64_t seed, const BlockSchedule& schedule,
                                 std::size_t j, std::uint64_t local) {
    const QrWindow w(key, seed, j, schedule.width(j));
    return w.residues(local % w.size() + 1).back();
}

/// s(n) for n in [lo, hi); custom block (lo may be 0).
inline SeqBlock prg_sequence(const TrapdoorKey& key, const BlockSchedule& schedule, std::uint64_t lo,
                             std::uint64_t hi, std::uint64_t seed = 0) {
    if (lo >= hi) throw DomainError("prg_sequence: empty range");
    if (hi > schedule.coverage())
        throw DataError("prg_sequence: range end " + std::to_string(hi) + " beyond schedule coverage " +
                        std::to_string(schedule.coverage()));

    std::vector<int> values;
    values.reserve(hi - lo);
    std::uint64_t n = lo;
    while (n < hi) {
        const BlockPosition pos = block_index(n, schedule);
        const std::uint64_t width = schedule.width(pos.j);
        const std::uint64_t a = pos.local;
        const std::uint64_t b = std::min(width, a + (hi - n));  // local end within the block
        const QrWindow window(key, seed, pos.j, width);
        const auto ys = window.residues(std::min(window.size(), b));
        for (std::uint64_t i = a; i < b; ++i) values.push_back(hard_core_sign(key, ys[i % window.size()]));
        n += b - a;
    }
    return SeqBlock::from_values(lo, SeqKind::custom, values);
}

/// Switching-point transformation: f on [0, cut], -f above.
inline TestFn flip_tail(const TestFn& f, std::uint64_t cut) {
    if (!f.is_ternary()) throw DomainError("flip_tail needs a ternary test function");
    if (cut == UINT64_MAX) return f;
    return TestFn(dsl::simplify(dsl::product({f.root(), dsl::pm(dsl::less(cut + 1))})));
}

}  // namespace prlab
