#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "prlab/dyadic.hpp"
#include "prlab/error.hpp"

namespace prlab {

/// g(x) = a*x + b on x >= xmin.
struct AffineMap {
    std::uint64_t a = 1;
    std::int64_t b = 0;
    std::uint64_t xmin = 1;
    friend bool operator==(const AffineMap&, const AffineMap&) = default;
};

/// g(x) = sum_i coeffs[i] * x^i on x >= xmin, non-negative coefficients.
struct PolynomialMap {
    std::vector<std::uint64_t> coeffs;
    std::uint64_t xmin = 0;
    friend bool operator==(const PolynomialMap&, const PolynomialMap&) = default;
};

/// Strictly increasing map used for re-indexing a sequence, s'(x) = s(g(x)).
class GSpec {
public:
    GSpec() : GSpec(AffineMap{}) {}

    GSpec(AffineMap m) : map_(m) {  // NOLINT(implicit)
        if (m.a < 1) throw DomainError("affine g needs a >= 1");
        check_floor();
    }

    GSpec(PolynomialMap m) : map_(std::move(m)) {  // NOLINT(implicit)
        const auto& c = std::get<PolynomialMap>(map_).coeffs;
        bool increasing = false;
        for (std::size_t i = 1; i < c.size(); ++i) increasing |= c[i] != 0;
        if (!increasing) throw DomainError("polynomial g must have a non-constant term");
        check_floor();
    }

    static GSpec identity() { return GSpec(AffineMap{1, 0, 1}); }

    /// "a,b,xmin" or "poly:xmin:c0,c1,...".
    static GSpec parse(const std::string& text) {
        auto numbers = [](const std::string& s) {
            std::vector<std::string> parts;
            std::stringstream ss(s);
            for (std::string item; std::getline(ss, item, ',');) parts.push_back(item);
            return parts;
        };
        try {
            if (text.rfind("poly:", 0) == 0) {
                const auto colon = text.find(':', 5);
                if (colon == std::string::npos) throw DomainError("expected poly:xmin:c0,c1,...");
                PolynomialMap m;
                m.xmin = std::stoull(text.substr(5, colon - 5));
                for (const auto& c : numbers(text.substr(colon + 1))) m.coeffs.push_back(std::stoull(c));
                return GSpec(std::move(m));
            }
            const auto parts = numbers(text);
            if (parts.size() != 3) throw DomainError("expected a,b,xmin");
            return GSpec(AffineMap{std::stoull(parts[0]), std::stoll(parts[1]), std::stoull(parts[2])});
        } catch (const std::logic_error&) {
            throw DomainError("malformed g specification '" + text + "'");
        }
    }

    std::string str() const {
        if (const auto* a = std::get_if<AffineMap>(&map_))
            return std::to_string(a->a) + "," + std::to_string(a->b) + "," + std::to_string(a->xmin);
        const auto& p = std::get<PolynomialMap>(map_);
        std::string s = "poly:" + std::to_string(p.xmin) + ":";
        for (std::size_t i = 0; i < p.coeffs.size(); ++i) s += (i ? "," : "") + std::to_string(p.coeffs[i]);
        return s;
    }

    bool is_affine() const noexcept { return std::holds_alternative<AffineMap>(map_); }
    const AffineMap* affine() const noexcept { return std::get_if<AffineMap>(&map_); }

    std::uint64_t xmin() const noexcept {
        return std::visit([](const auto& m) { return m.xmin; }, map_);
    }

    /// g(x); x >= xmin. Throws on overflow.
    std::uint64_t operator()(std::uint64_t x) const {
        const auto v = eval_wide(x);
        if (!v) throw DataError("g(" + std::to_string(x) + ") overflows 64 bits");
        return *v;
    }

    /// The x >= xmin with g(x) = n, if any.
    std::optional<std::uint64_t> preimage(std::uint64_t n) const {
        if (const auto* a = std::get_if<AffineMap>(&map_)) {
            const int128 d = static_cast<int128>(n) - a->b;
            if (d < 0 || d % a->a != 0) return std::nullopt;
            const auto x = static_cast<std::uint64_t>(d / a->a);
            return x >= a->xmin ? std::optional(x) : std::nullopt;
        }
        const std::uint64_t x = first_at_least(n);
        const auto v = eval_wide(x);
        return (v && *v == n) ? std::optional(x) : std::nullopt;
    }

    /// Smallest x >= xmin with g(x) >= n.
    std::uint64_t first_at_least(std::uint64_t n) const {
        std::uint64_t lo = xmin(), hi = lo;
        auto below = [&](std::uint64_t x) {
            const auto v = eval_wide(x);
            return v && *v < n;
        };
        if (!below(lo)) return lo;
        std::uint64_t step = 1;
        while (below(hi)) {
            lo = hi;
            hi += step;
            step *= 2;
        }
        // g(lo) < n <= g(hi)
        while (hi - lo > 1) {
            const std::uint64_t mid = lo + (hi - lo) / 2;
            (below(mid) ? lo : hi) = mid;
        }
        return hi;
    }

    /// Asymptotic density of Rng(g): 1/a for affine maps, 0 for higher degree.
    double range_density() const {
        if (const auto* a = std::get_if<AffineMap>(&map_)) return 1.0 / static_cast<double>(a->a);
        const auto& c = std::get<PolynomialMap>(map_).coeffs;
        for (std::size_t i = 2; i < c.size(); ++i)
            if (c[i] != 0) return 0.0;
        return 1.0 / static_cast<double>(c[1]);
    }

    friend bool operator==(const GSpec&, const GSpec&) = default;

private:
    std::optional<std::uint64_t> eval_wide(std::uint64_t x) const {
        int128 v = 0;
        if (const auto* a = std::get_if<AffineMap>(&map_)) {
            v = static_cast<int128>(a->a) * x + a->b;
        } else {
            const auto& c = std::get<PolynomialMap>(map_).coeffs;
            unsigned __int128 u = 0;
            for (std::size_t i = c.size(); i-- > 0;) {
                u = u * x + c[i];
                if (u > UINT64_MAX) return std::nullopt;
            }
            v = static_cast<int128>(u);
        }
        if (v < 0 || v > static_cast<int128>(UINT64_MAX)) return std::nullopt;
        return static_cast<std::uint64_t>(v);
    }

    void check_floor() const {
        const auto v = eval_wide(xmin());
        if (!v || *v < 1) throw DomainError("g(xmin) must be >= 1");
    }

    std::variant<AffineMap, PolynomialMap> map_;
};

}  // namespace prlab
