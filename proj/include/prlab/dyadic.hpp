#pragma once

#include <cstdint>
#include <cstdlib>
#include <string>

#include "prlab/error.hpp"

namespace prlab {

/// Largest power-of-two denominator a dyadic value may carry.
inline constexpr int kMaxDyadicExponent = 62;

using int128 = __int128;

inline std::string to_string(int128 v) {
    if (v == 0) return "0";
    const bool neg = v < 0;
    unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1u
                              : static_cast<unsigned __int128>(v);
    std::string digits;
    while (u != 0) {
        digits.insert(digits.begin(), static_cast<char>('0' + static_cast<int>(u % 10)));
        u /= 10;
    }
    return neg ? "-" + digits : digits;
}

/// Exact binary rational num / 2^exp, kept in lowest terms.
class Dyadic {
public:
    constexpr Dyadic() = default;
    constexpr Dyadic(std::int64_t integer) : num_(integer) {}  // NOLINT(implicit)

    static Dyadic make(std::int64_t num, int exp) {
        if (exp < 0 || exp > kMaxDyadicExponent)
            throw DomainError("dyadic exponent " + std::to_string(exp) + " out of range");
        Dyadic d;
        d.num_ = num;
        d.exp_ = exp;
        d.normalize();
        return d;
    }

    /// 2^-j
    static Dyadic unit_fraction(int j) { return make(1, j); }

    std::int64_t numerator() const noexcept { return num_; }
    int exponent() const noexcept { return exp_; }
    bool is_zero() const noexcept { return num_ == 0; }
    bool is_integer() const noexcept { return exp_ == 0; }

    double to_double() const noexcept {
        return static_cast<double>(num_) / static_cast<double>(std::uint64_t{1} << exp_);
    }

    /// Numerator rescaled to denominator 2^scale (scale >= exponent()).
    int128 scaled(int scale) const noexcept { return static_cast<int128>(num_) << (scale - exp_); }

    Dyadic operator-() const { return make(-num_, exp_); }

    friend Dyadic operator+(const Dyadic& a, const Dyadic& b) {
        const int e = a.exp_ > b.exp_ ? a.exp_ : b.exp_;
        return from_scaled(a.scaled(e) + b.scaled(e), e);
    }
    friend Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + (-b); }
    friend Dyadic operator*(const Dyadic& a, const Dyadic& b) {
        return from_scaled(static_cast<int128>(a.num_) * b.num_, a.exp_ + b.exp_);
    }

    friend bool operator==(const Dyadic& a, const Dyadic& b) noexcept {
        return a.num_ == b.num_ && a.exp_ == b.exp_;
    }
    friend bool operator<(const Dyadic& a, const Dyadic& b) noexcept {
        const int e = a.exp_ > b.exp_ ? a.exp_ : b.exp_;
        return a.scaled(e) < b.scaled(e);
    }
    friend bool operator<=(const Dyadic& a, const Dyadic& b) noexcept { return !(b < a); }

    Dyadic abs() const { return num_ < 0 ? -*this : *this; }

    /// "p" for integers, "p/q" otherwise.
    std::string str() const {
        if (exp_ == 0) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(std::uint64_t{1} << exp_);
    }

    /// Reduces num / 2^exp; throws when the result does not fit.
    static Dyadic from_scaled(int128 num, int exp) {
        while (exp > 0 && (num & 1) == 0) {
            num >>= 1;
            --exp;
        }
        if (exp > kMaxDyadicExponent)
            throw DomainError("dyadic result needs denominator beyond 2^62");
        if (num > INT64_MAX || num < INT64_MIN) throw DomainError("dyadic numerator overflow");
        Dyadic d;
        d.num_ = static_cast<std::int64_t>(num);
        d.exp_ = exp;
        if (d.num_ == 0) d.exp_ = 0;
        return d;
    }

private:
    void normalize() {
        if (num_ == 0) {
            exp_ = 0;
            return;
        }
        while (exp_ > 0 && (num_ & 1) == 0) {
            num_ /= 2;
            --exp_;
        }
    }

    std::int64_t num_ = 0;
    int exp_ = 0;
};

/// Exact running sum of dyadic terms at a fixed denominator 2^scale.
class DyadicSum {
public:
    explicit DyadicSum(int scale = 0) : scale_(scale) {}

    void add(const Dyadic& d) { num_ += d.scaled(scale_); }
    void add_integer(std::int64_t v) { num_ += static_cast<int128>(v) << scale_; }
    void add_scaled(int128 v) { num_ += v; }

    int scale() const noexcept { return scale_; }
    int128 scaled_numerator() const noexcept { return num_; }

    double to_double() const noexcept {
        return static_cast<double>(num_) / static_cast<double>(std::uint64_t{1} << scale_);
    }

    /// Exact text, reduced: "p" or "p/2^k" written as "p/q".
    std::string str() const {
        int128 n = num_;
        int e = scale_;
        while (e > 0 && (n & 1) == 0) {
            n >>= 1;
            --e;
        }
        if (n == 0 || e == 0) return to_string(n);
        return to_string(n) + "/" + std::to_string(std::uint64_t{1} << e);
    }

    friend bool operator==(const DyadicSum& a, const DyadicSum& b) noexcept {
        if (a.scale_ == b.scale_) return a.num_ == b.num_;
        const int e = a.scale_ > b.scale_ ? a.scale_ : b.scale_;
        return (a.num_ << (e - a.scale_)) == (b.num_ << (e - b.scale_));
    }

private:
    int scale_;
    int128 num_ = 0;
};

}  // namespace prlab
