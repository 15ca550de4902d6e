#pragma once

// K-density and chain density of sets of naturals, estimated by exact
// counting at finitely many checkpoints.
//
//   dens_K X      = lim_{k in K} |X ∩ [0, k)| / k
//   dens_chain X  = lim_t dens_K(X ∩ U_t) / dens_K(U_t)
//
// Limits are never extrapolated: every estimate carries its per-checkpoint
// series, the value at the cap and an oscillation figure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "prlab/checkpoints.hpp"
#include "prlab/seqkernel.hpp"
#include "prlab/testlang.hpp"

namespace prlab {

class SetSpec {
public:
    static SetSpec all() { return SetSpec(Impl{All{}}); }
    static SetSpec none() { return SetSpec(Impl{None{}}); }
    static SetSpec squares() { return SetSpec(Impl{Squares{}}); }

    static SetSpec residue(std::uint64_t m, std::uint64_t r) {
        if (m == 0) throw DomainError("residue class needs a positive modulus");
        return SetSpec(Impl{Residue{m, r % m}});
    }

    static SetSpec predicate(Predicate p) { return SetSpec(Impl{Pred{std::move(p)}}); }

    /// {n : s(n) = value}; n = 0 is never a member.
    static SetSpec sequence_value(std::shared_ptr<const SeqBlock> block, int value) {
        if (!block) throw DomainError("sequence condition needs a block");
        if (value < -1 || value > 1) throw DomainError("sequence condition value must be -1, 0 or 1");
        return SetSpec(Impl{SeqValue{std::move(block), value}});
    }

    static SetSpec complement(SetSpec x) { return SetSpec(Impl{Not{std::move(x.impl_)}}); }
    static SetSpec intersect(SetSpec x, SetSpec y) { return SetSpec(Impl{And{std::move(x.impl_), std::move(y.impl_)}}); }
    static SetSpec unite(SetSpec x, SetSpec y) { return SetSpec(Impl{Or{std::move(x.impl_), std::move(y.impl_)}}); }

    /// "all", "none", "squares", "mod:M:R", "seq:V" (needs a block),
    /// "pred:<condition>", "not:<spec>".
    static SetSpec parse(const std::string& text, std::shared_ptr<const SeqBlock> block = nullptr) {
        if (text == "all") return all();
        if (text == "none") return none();
        if (text == "squares") return squares();
        if (text == "evens") return residue(2, 0);
        if (text == "odds") return residue(2, 1);
        if (text.rfind("not:", 0) == 0) return complement(parse(text.substr(4), block));
        if (text.rfind("pred:", 0) == 0) return predicate(Predicate::parse(text.substr(5)));
        if (text.rfind("mod:", 0) == 0) {
            const auto colon = text.find(':', 4);
            try {
                if (colon == std::string::npos) throw std::invalid_argument("");
                return residue(std::stoull(text.substr(4, colon - 4)), std::stoull(text.substr(colon + 1)));
            } catch (const std::logic_error&) {
                throw DomainError("malformed residue set '" + text + "' (want mod:M:R)");
            }
        }
        if (text.rfind("seq:", 0) == 0) {
            if (!block) throw DomainError("set '" + text + "' refers to a sequence but none was loaded");
            const std::string v = text.substr(4);
            const int value = v == "+1" || v == "1" ? 1 : v == "-1" ? -1 : v == "0" ? 0 : 2;
            if (value == 2) throw DomainError("sequence condition value must be +1, -1 or 0");
            return sequence_value(std::move(block), value);
        }
        throw DomainError("unknown set specification '" + text + "'");
    }

    bool contains(std::uint64_t n) const { return contains(*impl_, n); }

    std::string describe() const { return describe(*impl_); }

    /// Members can be decided for every n < limit() (sequence data bound).
    std::uint64_t limit() const { return limit(*impl_); }

private:
    struct Impl;
    using Ptr = std::shared_ptr<const Impl>;
    struct All {};
    struct None {};
    struct Squares {};
    struct Residue {
        std::uint64_t m, r;
    };
    struct Pred {
        Predicate p;
    };
    struct SeqValue {
        std::shared_ptr<const SeqBlock> block;
        int value;
    };
    struct Not {
        Ptr x;
    };
    struct And {
        Ptr x, y;
    };
    struct Or {
        Ptr x, y;
    };
    struct Impl {
        std::variant<All, None, Squares, Residue, Pred, SeqValue, Not, And, Or> v;
    };

    explicit SetSpec(Impl impl) : impl_(std::make_shared<const Impl>(std::move(impl))) {}

    static bool contains(const Impl& s, std::uint64_t n) {
        return std::visit(
            [n](const auto& x) -> bool {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, All>) return true;
                else if constexpr (std::is_same_v<T, None>) return false;
                else if constexpr (std::is_same_v<T, Squares>) {
                    const std::uint64_t r = isqrt(n);
                    return r * r == n;
                } else if constexpr (std::is_same_v<T, Residue>) return n % x.m == x.r;
                else if constexpr (std::is_same_v<T, Pred>) return x.p(n);
                else if constexpr (std::is_same_v<T, SeqValue>) return n >= 1 && x.block->at(n) == x.value;
                else if constexpr (std::is_same_v<T, Not>) return !contains(*x.x, n);
                else if constexpr (std::is_same_v<T, And>) return contains(*x.x, n) && contains(*x.y, n);
                else return contains(*x.x, n) || contains(*x.y, n);
            },
            s.v);
    }

    static std::string describe(const Impl& s) {
        return std::visit(
            [](const auto& x) -> std::string {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, All>) return "all";
                else if constexpr (std::is_same_v<T, None>) return "none";
                else if constexpr (std::is_same_v<T, Squares>) return "squares";
                else if constexpr (std::is_same_v<T, Residue>)
                    return "mod:" + std::to_string(x.m) + ":" + std::to_string(x.r);
                else if constexpr (std::is_same_v<T, Pred>) return "pred:" + x.p.str();
                else if constexpr (std::is_same_v<T, SeqValue>)
                    return "seq:" + std::string(x.value > 0 ? "+1" : x.value < 0 ? "-1" : "0");
                else if constexpr (std::is_same_v<T, Not>) return "not:" + describe(*x.x);
                else if constexpr (std::is_same_v<T, And>) return "(" + describe(*x.x) + " & " + describe(*x.y) + ")";
                else return "(" + describe(*x.x) + " | " + describe(*x.y) + ")";
            },
            s.v);
    }

    static std::uint64_t limit(const Impl& s) {
        return std::visit(
            [](const auto& x) -> std::uint64_t {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, SeqValue>) return x.block->lo() <= 1 ? x.block->hi() : 0;
                else if constexpr (std::is_same_v<T, Not>) return limit(*x.x);
                else if constexpr (std::is_same_v<T, And> || std::is_same_v<T, Or>)
                    return std::min(limit(*x.x), limit(*x.y));
                else return UINT64_MAX;
            },
            s.v);
    }

    Ptr impl_;
};

/// |X ∩ [0, k)| for every set and every checkpoint k, in one pass.
/// result[i][j] belongs to sets[i] at K[j].
inline std::vector<std::vector<std::uint64_t>> count_members(const std::vector<SetSpec>& sets,
                                                             const CheckpointPlan& K, unsigned workers = 1,
                                                             std::uint64_t chunk = std::uint64_t{1} << 16) {
    if (K.empty()) throw DomainError("density: empty checkpoint plan");
    for (const auto& s : sets)
        if (K.back() > s.limit())
            throw DataError("density: set '" + s.describe() + "' only decidable below " + std::to_string(s.limit()));

    const auto spans = split_spans(0, K.back(), K.points(), chunk);
    const auto parts = map_spans(spans, workers, [&](const Span& sp) {
        std::vector<std::uint64_t> c(sets.size(), 0);
        for (std::uint64_t n = sp.lo; n < sp.hi; ++n)
            for (std::size_t i = 0; i < sets.size(); ++i) c[i] += sets[i].contains(n) ? 1 : 0;
        return c;
    });

    std::vector<std::vector<std::uint64_t>> out(sets.size());
    std::vector<std::uint64_t> running(sets.size(), 0);
    std::size_t next = 0;
    for (std::size_t k = 0; k < spans.size(); ++k) {
        for (std::size_t i = 0; i < sets.size(); ++i) running[i] += parts[k][i];
        while (next < K.size() && K[next] == spans[k].hi) {
            for (std::size_t i = 0; i < sets.size(); ++i) out[i].push_back(running[i]);
            ++next;
        }
    }
    return out;
}

struct DensityEstimate {
    std::string set;
    std::vector<std::uint64_t> checkpoints;
    std::vector<std::uint64_t> counts;        // numerator counts
    std::vector<std::uint64_t> denominators;  // k, or |U ∩ [0, k)| for chain levels
    std::vector<std::optional<double>> ratios;
    double value = 0;        // ratio at the cap
    double oscillation = 0;  // max - min of defined ratios over the last quartile

    static DensityEstimate build(std::string set, const CheckpointPlan& K, std::vector<std::uint64_t> counts,
                                 std::vector<std::uint64_t> denominators) {
        DensityEstimate d;
        d.set = std::move(set);
        d.checkpoints = K.points();
        d.counts = std::move(counts);
        d.denominators = std::move(denominators);
        for (std::size_t j = 0; j < d.counts.size(); ++j)
            d.ratios.push_back(d.denominators[j] == 0
                                   ? std::nullopt
                                   : std::optional(static_cast<double>(d.counts[j]) / static_cast<double>(d.denominators[j])));
        d.value = d.ratios.back().value_or(0.0);
        const std::size_t tail = std::max<std::size_t>(1, (d.ratios.size() + 3) / 4);
        double lo = 1, hi = 0;
        for (std::size_t j = d.ratios.size() - tail; j < d.ratios.size(); ++j)
            if (d.ratios[j]) {
                lo = std::min(lo, *d.ratios[j]);
                hi = std::max(hi, *d.ratios[j]);
            }
        d.oscillation = hi >= lo ? hi - lo : 0;
        return d;
    }
};

/// Default checkpoints: k = 2, 4, 8, ... up to the cap, plus the cap.
inline CheckpointPlan default_k_plan(std::uint64_t cap) { return CheckpointPlan::powers_of_two(cap, 1, true); }

inline DensityEstimate k_density(const SetSpec& X, const CheckpointPlan& K, unsigned workers = 1) {
    auto counts = count_members({X}, K, workers);
    return DensityEstimate::build(X.describe(), K, std::move(counts[0]), K.points());
}

/// Nested sets U_1 ⊇ U_2 ⊇ ... ⊇ U_m.
class Chain {
public:
    /// U_t = multiples of 2^t, t = 1..depth; nested by construction.
    static Chain powers_of_two(int depth) {
        if (depth < 1 || depth > 62) throw DomainError("chain depth must be in [1, 62]");
        Chain c;
        for (int t = 1; t <= depth; ++t) c.levels_.push_back(SetSpec::residue(std::uint64_t{1} << t, 0));
        c.verified_ = true;
        return c;
    }

    /// User-supplied levels; call verify_nesting before use.
    static Chain custom(std::vector<SetSpec> levels) {
        if (levels.empty()) throw DomainError("chain needs at least one level");
        Chain c;
        c.levels_ = std::move(levels);
        return c;
    }

    /// Exhaustive check on [0, min(cap, 10^5)), then a fixed pseudo-random
    /// sample of 10^4 points up to the cap.
    void verify_nesting(std::uint64_t cap) {
        if (verified_) return;
        auto check = [&](std::uint64_t n) {
            for (std::size_t t = 1; t < levels_.size(); ++t)
                if (levels_[t].contains(n) && !levels_[t - 1].contains(n))
                    throw DomainError("chain is not nested at n=" + std::to_string(n) + " (level " +
                                      std::to_string(t + 1) + " not inside level " + std::to_string(t) + ")");
        };
        const std::uint64_t exhaustive = std::min<std::uint64_t>(cap, 100000);
        for (std::uint64_t n = 0; n < exhaustive; ++n) check(n);
        if (cap > exhaustive) {
            std::uint64_t state = 0x9E3779B97F4A7C15ull;
            for (int i = 0; i < 10000; ++i) {
                // splitmix64
                std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
                z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
                z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
                z ^= z >> 31;
                check(exhaustive + z % (cap - exhaustive));
            }
        }
        verified_ = true;
    }

    const std::vector<SetSpec>& levels() const noexcept { return levels_; }
    std::size_t depth() const noexcept { return levels_.size(); }
    bool verified() const noexcept { return verified_; }

private:
    std::vector<SetSpec> levels_;
    bool verified_ = false;
};

struct ChainEstimate {
    std::string set;
    std::vector<DensityEstimate> depths;  // depth t = index + 1
    double value = 0;                     // deepest level at the cap
    double oscillation = 0;               // deepest level's diagnostic
};

namespace detail {

inline ChainEstimate chain_from_counts(const std::string& name, const CheckpointPlan& K, const Chain& chain,
                                       const std::vector<std::vector<std::uint64_t>>& level_counts,
                                       const std::vector<std::vector<std::uint64_t>>& hit_counts) {
    ChainEstimate est;
    est.set = name;
    for (std::size_t t = 0; t < chain.depth(); ++t) {
        if (level_counts[t].back() == 0)
            throw DataError("chain level " + std::to_string(t + 1) + " (" + chain.levels()[t].describe() +
                            ") has zero density at the cap");
        est.depths.push_back(DensityEstimate::build(name, K, hit_counts[t], level_counts[t]));
    }
    est.value = est.depths.back().value;
    est.oscillation = est.depths.back().oscillation;
    return est;
}

}  // namespace detail

inline ChainEstimate chain_density(const SetSpec& X, Chain chain, const CheckpointPlan& K, unsigned workers = 1) {
    chain.verify_nesting(K.back());
    std::vector<SetSpec> sets;
    for (const auto& U : chain.levels()) sets.push_back(U);
    for (const auto& U : chain.levels()) sets.push_back(SetSpec::intersect(X, U));
    const auto counts = count_members(sets, K, workers);
    const std::size_t m = chain.depth();
    return detail::chain_from_counts(X.describe(), K, chain, {counts.begin(), counts.begin() + m},
                                     {counts.begin() + m, counts.end()});
}

/// Estimated probability that the event holds at the distinguished element:
/// the chain density of its extension.
struct MeasureReport {
    std::string event;
    ChainEstimate estimate;
    double probability = 0;
};

inline MeasureReport measure_event(const SetSpec& event, const Chain& chain, const CheckpointPlan& K,
                                   unsigned workers = 1) {
    MeasureReport r;
    r.event = event.describe();
    r.estimate = chain_density(event, chain, K, workers);
    r.probability = r.estimate.value;
    return r;
}

// ---- facts ---------------------------------------------------------------

struct FactVerdict {
    int id = 0;
    std::string statement;
    bool exact = false;       // counting identity rather than tolerance check
    bool pass = false;
    bool vacuous = false;     // hypotheses not met at this scale
    double observed = 0;      // worst deviation (exact facts) or worst |ratio - target|
    double tolerance = 0;
    std::string detail;
};

struct FactReport {
    std::string X, Y, Z;
    std::uint64_t cap = 0;
    std::vector<FactVerdict> facts;
    bool pass = true;
};

struct FactInputs {
    SetSpec X;  // X and Y must be disjoint
    SetSpec Y;
    SetSpec Z;  // pseudorandom candidate
    // density-one pair for fact 2
    SetSpec A = SetSpec::complement(SetSpec::squares());
    SetSpec B = SetSpec::predicate(Predicate::parse("popcount(n) >= 2"));
};

inline FactReport check_facts(const FactInputs& in, Chain chain, const CheckpointPlan& K, double tolerance = 0.02,
                              unsigned workers = 1) {
    chain.verify_nesting(K.back());
    const std::size_t m = chain.depth();
    const SetSpec XuY = SetSpec::unite(in.X, in.Y);

    // fixed layout: 0 X, 1 Y, 2 X∪Y, 3 X∩Y, 4 X∩Z, 5 A, 6 B, 7 A∩B, then per level U, X∩U, Y∩U, (X∪Y)∩U, Z∩U
    std::vector<SetSpec> sets{in.X, in.Y, XuY, SetSpec::intersect(in.X, in.Y), SetSpec::intersect(in.X, in.Z),
                              in.A, in.B, SetSpec::intersect(in.A, in.B)};
    for (const auto& U : chain.levels()) {
        sets.push_back(U);
        sets.push_back(SetSpec::intersect(in.X, U));
        sets.push_back(SetSpec::intersect(in.Y, U));
        sets.push_back(SetSpec::intersect(XuY, U));
        sets.push_back(SetSpec::intersect(in.Z, U));
    }
    const auto c = count_members(sets, K, workers);
    const std::size_t last = K.size() - 1;
    if (c[3][last] != 0)
        throw DomainError("facts: X and Y are not disjoint (" + std::to_string(c[3][last]) + " common members below " +
                          std::to_string(K.back()) + ")");

    FactReport report{in.X.describe(), in.Y.describe(), in.Z.describe(), K.back(), {}, true};
    auto ratio = [](std::uint64_t num, std::uint64_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };

    {
        FactVerdict f{1, "dens_K is finitely additive: |(X ∪ Y) ∩ [0,k)| = |X ∩ [0,k)| + |Y ∩ [0,k)|", true};
        std::int64_t worst = 0;
        for (std::size_t j = 0; j < K.size(); ++j)
            worst = std::max<std::int64_t>(
                worst, std::llabs(static_cast<std::int64_t>(c[2][j]) - static_cast<std::int64_t>(c[0][j] + c[1][j])));
        f.observed = static_cast<double>(worst);
        f.pass = worst == 0;
        f.detail = "checked at " + std::to_string(K.size()) + " checkpoints";
        report.facts.push_back(f);
    }
    {
        FactVerdict f{2, "dens_K A = dens_K B = 1 implies dens_K (A ∩ B) = 1", false};
        f.tolerance = tolerance;
        const double a = ratio(c[5][last], K.back()), b = ratio(c[6][last], K.back());
        const double ab = ratio(c[7][last], K.back());
        f.detail = "A=" + in.A.describe() + " B=" + in.B.describe();
        if (1 - a > tolerance || 1 - b > tolerance) {
            f.vacuous = true;
            f.pass = true;
            f.observed = std::max(1 - a, 1 - b);
            f.detail += " (hypothesis not met)";
        } else {
            f.observed = 1 - ab;
            f.pass = f.observed <= tolerance;
        }
        report.facts.push_back(f);
    }
    {
        FactVerdict f{4, "dens_K (X ∩ Z) = dens_K X / 2", false};
        f.tolerance = tolerance;
        if (c[0][last] == 0) {
            f.vacuous = true;
            f.pass = true;
            f.detail = "X is empty below the cap";
        } else {
            const double r = ratio(c[4][last], c[0][last]);
            f.observed = std::abs(r - 0.5);
            f.pass = f.observed <= tolerance;
            f.detail = "dens(X∩Z)/dens(X) = " + std::to_string(r);
        }
        report.facts.push_back(f);
    }
    {
        FactVerdict f{5, "chain density is finitely additive at every depth", true};
        std::int64_t worst = 0;
        for (std::size_t t = 0; t < m; ++t) {
            const auto& xu = c[8 + 5 * t + 1];
            const auto& yu = c[8 + 5 * t + 2];
            const auto& xyu = c[8 + 5 * t + 3];
            for (std::size_t j = 0; j < K.size(); ++j)
                worst = std::max<std::int64_t>(
                    worst, std::llabs(static_cast<std::int64_t>(xyu[j]) - static_cast<std::int64_t>(xu[j] + yu[j])));
        }
        f.observed = static_cast<double>(worst);
        f.pass = worst == 0;
        f.detail = "checked at " + std::to_string(K.size()) + " checkpoints x " + std::to_string(m) + " depths";
        report.facts.push_back(f);
    }
    {
        FactVerdict f{6, "chain density of Z is 1/2 at every depth", false};
        f.tolerance = tolerance;
        double worst = 0;
        std::string values;
        for (std::size_t t = 0; t < m; ++t) {
            const auto& u = c[8 + 5 * t];
            if (u[last] == 0) throw DataError("facts: chain level " + std::to_string(t + 1) + " is empty below the cap");
            const double r = ratio(c[8 + 5 * t + 4][last], u[last]);
            worst = std::max(worst, std::abs(r - 0.5));
            values += (t ? ", " : "") + std::to_string(r);
        }
        f.observed = worst;
        f.pass = worst <= tolerance;
        f.detail = "per-depth ratios: " + values;
        report.facts.push_back(f);
    }
    for (const auto& f : report.facts) report.pass = report.pass && f.pass;
    return report;
}

}  // namespace prlab
