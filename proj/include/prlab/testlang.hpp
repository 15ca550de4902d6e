#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "prlab/testlang/ast.hpp"
#include "prlab/testlang/parser.hpp"

namespace prlab {

/// A ternary- or dyadic-valued test function f : N -> [-1, 1].
class TestFn {
public:
    explicit TestFn(dsl::NodePtr root) : root_(std::move(root)) {
        if (!root_ || dsl::type_of(root_) == dsl::NodeType::boolean)
            throw DomainError("test function must be ternary or dyadic (wrap conditions in pm(...))");
    }

    static TestFn parse(std::string_view text) { return TestFn(dsl::parse_expression(text)); }
    static TestFn constant(int v) { return TestFn(dsl::literal(v)); }

    const dsl::NodePtr& root() const noexcept { return root_; }
    bool is_ternary() const noexcept { return dsl::type_of(root_) == dsl::NodeType::ternary; }
    bool is_dyadic() const noexcept { return !is_ternary(); }

    Dyadic operator()(std::uint64_t n) const { return dsl::eval_value(*root_, n); }

    /// Ternary value; only valid for ternary functions.
    int ternary(std::uint64_t n) const { return dsl::eval_ternary(*root_, n); }

    /// Every value is a multiple of 2^-max_exponent().
    int max_exponent() const { return dsl::max_exponent(*root_); }
    bool depends_on_n() const { return dsl::depends_on_n(*root_); }
    std::size_t size() const { return dsl::tree_size(*root_); }

    std::string str() const { return dsl::print(*root_); }

    friend bool operator==(const TestFn& a, const TestFn& b) { return dsl::same_tree(a.root_, b.root_); }

private:
    dsl::NodePtr root_;
};

/// Boolean condition on n, used as set membership.
class Predicate {
public:
    explicit Predicate(dsl::NodePtr root) : root_(std::move(root)) {
        if (!root_ || dsl::type_of(root_) != dsl::NodeType::boolean)
            throw DomainError("predicate must be a boolean expression");
    }

    static Predicate parse(std::string_view text) { return Predicate(dsl::parse_condition(text)); }

    bool operator()(std::uint64_t n) const { return dsl::eval_bool(*root_, n); }
    const dsl::NodePtr& root() const noexcept { return root_; }
    std::string str() const { return dsl::print(*root_); }

private:
    dsl::NodePtr root_;
};

/// Evaluation entry point: f(n) as an exact dyadic.
inline Dyadic eval(const TestFn& f, std::uint64_t n) {
    if (n == 0) throw DomainError("eval: test functions are evaluated on n >= 1");
    return f(n);
}

/// f = (f_plus + f_minus) / 2 with both halves +-1-valued:
/// f_plus(n) = +1 iff f(n) = 1, f_minus(n) = -1 iff f(n) = -1.
inline std::pair<TestFn, TestFn> split_pm(const TestFn& f) {
    if (!f.is_ternary()) throw DomainError("split_pm needs a ternary test function");
    if (dsl::pm_valued(*f.root())) return {f, f};
    auto plus = dsl::simplify(dsl::pm(dsl::tern_eq(f.root(), 1)));
    auto minus = dsl::simplify(dsl::pm(dsl::logic_not(dsl::tern_eq(f.root(), -1))));
    return {TestFn(plus), TestFn(minus)};
}

struct DyadicTerm {
    int exponent;    // weight 2^-exponent
    TestFn component;
};

/// F(n) ~ sum_j 2^-j f_j(n) with ternary f_j.
struct DyadicDecomposition {
    std::vector<DyadicTerm> terms;
    int depth = 1;  // J

    Dyadic error_bound() const { return Dyadic::unit_fraction(depth); }

    Dyadic reconstruct(std::uint64_t n) const {
        Dyadic acc = 0;
        for (const auto& t : terms) acc = acc + Dyadic::unit_fraction(t.exponent) * Dyadic(t.component.ternary(n));
        return acc;
    }
};

/// Signed binary expansion truncated at 2^-J. Constant inputs produce
/// literal digits with zero digits omitted; otherwise component j is
/// digit(F, j), and digits that can never be nonzero are skipped.
inline DyadicDecomposition dyadic_decompose(const TestFn& F, int J) {
    if (J < 1 || J > kMaxDyadicExponent) throw DomainError("dyadic_decompose: J must be in [1, 62]");
    DyadicDecomposition d;
    d.depth = J;

    if (!F.depends_on_n()) {
        const Dyadic v = F(0);
        for (int j = 1; j <= J; ++j)
            if (const int digit = dsl::signed_digit(v, j); digit != 0) d.terms.push_back({j, TestFn::constant(digit)});
        return d;
    }

    int last = J;
    if (F.is_dyadic()) {
        Dyadic mass = 0;
        for (const auto& w : F.root()->weights) mass = mass + w.abs();
        // |F| < 1 everywhere, so digits past the finest weight are zero
        if (mass < Dyadic(1)) last = std::min(J, F.max_exponent());
    }
    for (int j = 1; j <= last; ++j) d.terms.push_back({j, TestFn(dsl::digit(F.root(), j))});
    return d;
}

/// g(n) = -f(n) if k^2 | n for some 2 <= k <= n0, else f(n).
inline TestFn square_flip(const TestFn& f, std::uint64_t n0) {
    if (!f.is_ternary()) throw DomainError("square_flip needs a ternary test function");
    if (n0 < 2) throw DomainError("square_flip: n0 must be >= 2");
    return TestFn(dsl::simplify(dsl::product({f.root(), dsl::pm(dsl::logic_not(dsl::square_div(n0)))})));
}

}  // namespace prlab
