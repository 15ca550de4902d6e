#pragma once

// Expression trees for low-complexity test functions over the naturals.
//
// Three node types: boolean (membership-style atoms and connectives),
// ternary ({-1,0,+1}) and dyadic (finite sums of dyadic-weighted ternary
// terms). There is no recursion or looping construct, so evaluation cost is
// bounded by tree size times the bit length of n.

#include <bit>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "prlab/dyadic.hpp"
#include "prlab/error.hpp"
#include "prlab/gmap.hpp"

namespace prlab::dsl {

enum class NodeType { boolean, ternary, dyadic };

enum class Op {
    // boolean
    truth,       // a: 0/1
    bit,         // a: bit index
    mod_eq,      // n % a == b
    less,        // n < a
    in_range,    // a <= n < b
    popcount_ge, // popcount(n) >= a
    tern_eq,     // kids[0] == value
    square_div,  // k^2 | n for some 2 <= k <= a
    logic_not,
    logic_and,
    logic_or,
    logic_xor,
    // ternary
    literal,     // value
    pm,          // +1 if kids[0] else -1
    cases,       // first kids[i] that holds yields case_values[i], else 0
    product,
    digit,       // value-th binary digit of kids[0] (signed)
    lift,        // kids[0](g^-1(n)) when n >= a and n in Rng(g), else 0
    // dyadic
    sum,         // sum_i weights[i] * kids[i]
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    Op op;
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    int value = 0;
    std::vector<NodePtr> kids;
    std::vector<int> case_values;
    std::vector<Dyadic> weights;
    std::optional<GSpec> g;
};

inline NodeType type_of(Op op) {
    switch (op) {
        case Op::truth:
        case Op::bit:
        case Op::mod_eq:
        case Op::less:
        case Op::in_range:
        case Op::popcount_ge:
        case Op::tern_eq:
        case Op::square_div:
        case Op::logic_not:
        case Op::logic_and:
        case Op::logic_or:
        case Op::logic_xor: return NodeType::boolean;
        case Op::sum: return NodeType::dyadic;
        default: return NodeType::ternary;
    }
}

inline NodeType type_of(const NodePtr& n) { return type_of(n->op); }

inline bool operator==(const Node& x, const Node& y);

inline bool same_tree(const NodePtr& x, const NodePtr& y) {
    if (x == y) return true;
    if (!x || !y) return false;
    return *x == *y;
}

inline bool operator==(const Node& x, const Node& y) {
    if (x.op != y.op || x.a != y.a || x.b != y.b || x.value != y.value || x.case_values != y.case_values ||
        x.weights != y.weights || x.g != y.g || x.kids.size() != y.kids.size())
        return false;
    for (std::size_t i = 0; i < x.kids.size(); ++i)
        if (!same_tree(x.kids[i], y.kids[i])) return false;
    return true;
}

// ---- builders -------------------------------------------------------------

namespace detail {
inline NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

inline void expect(const NodePtr& n, NodeType t, const char* where) {
    if (!n) throw DomainError(std::string(where) + ": null subexpression");
    if (type_of(n) != t) {
        static constexpr const char* names[] = {"boolean", "ternary", "dyadic"};
        throw DomainError(std::string(where) + ": expected " + names[static_cast<int>(t)] + " operand, got " +
                          names[static_cast<int>(type_of(n))]);
    }
}

inline void expect_ternary_value(int v, const char* where) {
    if (v < -1 || v > 1) throw DomainError(std::string(where) + ": value must be -1, 0 or 1");
}
}  // namespace detail

inline NodePtr truth(bool v) { return detail::make({.op = Op::truth, .a = v ? 1u : 0u}); }

inline NodePtr bit(std::uint64_t i) {
    if (i >= 64) throw DomainError("bit index must be < 64");
    return detail::make({.op = Op::bit, .a = i});
}

inline NodePtr mod_eq(std::uint64_t m, std::uint64_t r) {
    if (m == 0) throw DomainError("modulus must be positive");
    return detail::make({.op = Op::mod_eq, .a = m, .b = r});
}

inline NodePtr less(std::uint64_t c) { return detail::make({.op = Op::less, .a = c}); }

inline NodePtr in_range(std::uint64_t lo, std::uint64_t hi) {
    return detail::make({.op = Op::in_range, .a = lo, .b = hi});
}

inline NodePtr popcount_ge(std::uint64_t t) { return detail::make({.op = Op::popcount_ge, .a = t}); }

inline NodePtr tern_eq(NodePtr t, int v) {
    detail::expect(t, NodeType::ternary, "eq");
    detail::expect_ternary_value(v, "eq");
    return detail::make({.op = Op::tern_eq, .value = v, .kids = {std::move(t)}});
}

inline NodePtr square_div(std::uint64_t kmax) {
    if (kmax < 2) throw DomainError("sqdiv bound must be >= 2");
    return detail::make({.op = Op::square_div, .a = kmax});
}

inline NodePtr logic_not(NodePtr x) {
    detail::expect(x, NodeType::boolean, "not");
    return detail::make({.op = Op::logic_not, .kids = {std::move(x)}});
}

inline NodePtr binary(Op op, NodePtr x, NodePtr y) {
    detail::expect(x, NodeType::boolean, "connective");
    detail::expect(y, NodeType::boolean, "connective");
    return detail::make({.op = op, .kids = {std::move(x), std::move(y)}});
}

inline NodePtr logic_and(NodePtr x, NodePtr y) { return binary(Op::logic_and, std::move(x), std::move(y)); }
inline NodePtr logic_or(NodePtr x, NodePtr y) { return binary(Op::logic_or, std::move(x), std::move(y)); }
inline NodePtr logic_xor(NodePtr x, NodePtr y) { return binary(Op::logic_xor, std::move(x), std::move(y)); }

inline NodePtr literal(int v) {
    detail::expect_ternary_value(v, "literal");
    return detail::make({.op = Op::literal, .value = v});
}

inline NodePtr pm(NodePtr b) {
    detail::expect(b, NodeType::boolean, "pm");
    return detail::make({.op = Op::pm, .kids = {std::move(b)}});
}

inline NodePtr cases(std::vector<std::pair<NodePtr, int>> arms) {
    if (arms.empty()) throw DomainError("tern needs at least one case");
    Node n{.op = Op::cases};
    for (auto& [cond, v] : arms) {
        detail::expect(cond, NodeType::boolean, "tern");
        detail::expect_ternary_value(v, "tern");
        n.kids.push_back(std::move(cond));
        n.case_values.push_back(v);
    }
    return detail::make(std::move(n));
}

inline NodePtr product(std::vector<NodePtr> factors) {
    if (factors.size() < 2) throw DomainError("product needs at least two factors");
    for (const auto& f : factors) detail::expect(f, NodeType::ternary, "product");
    return detail::make({.op = Op::product, .kids = std::move(factors)});
}

inline NodePtr digit(NodePtr x, int j) {
    if (!x || type_of(x) == NodeType::boolean) throw DomainError("digit: expected ternary or dyadic operand");
    if (j < 1 || j > kMaxDyadicExponent) throw DomainError("digit index must be in [1, 62]");
    return detail::make({.op = Op::digit, .value = j, .kids = {std::move(x)}});
}

inline NodePtr lift(NodePtr f, GSpec g, std::uint64_t n0) {
    detail::expect(f, NodeType::ternary, "lift");
    return detail::make({.op = Op::lift, .a = n0, .kids = {std::move(f)}, .g = std::move(g)});
}

/// Sum of weight * ternary term. Total |weight| must not exceed 1, which
/// keeps every value inside [-1, 1].
inline NodePtr sum(std::vector<std::pair<Dyadic, NodePtr>> terms) {
    if (terms.empty()) throw DomainError("dyadic sum needs at least one term");
    Node n{.op = Op::sum};
    Dyadic mass = 0;
    for (auto& [w, t] : terms) {
        detail::expect(t, NodeType::ternary, "dyadic term");
        mass = mass + w.abs();
        n.weights.push_back(w);
        n.kids.push_back(std::move(t));
    }
    if (Dyadic(1) < mass) throw DomainError("dyadic combination can leave [-1,1] (total weight " + mass.str() + ")");
    return detail::make(std::move(n));
}

// ---- evaluation -----------------------------------------------------------

bool eval_bool(const Node& node, std::uint64_t n);
int eval_ternary(const Node& node, std::uint64_t n);
Dyadic eval_value(const Node& node, std::uint64_t n);

/// Signed j-th binary digit of v in [-1,1]; |v| = 1 reads as 0.111...
inline int signed_digit(const Dyadic& v, int j) {
    const std::int64_t num = v.numerator();
    if (num == 0) return 0;
    const int sign = num < 0 ? -1 : 1;
    const std::uint64_t mag = num < 0 ? static_cast<std::uint64_t>(-(num + 1)) + 1 : static_cast<std::uint64_t>(num);
    if (v.exponent() == 0) return sign;  // |v| == 1
    if (j > v.exponent()) return 0;
    return ((mag >> (v.exponent() - j)) & 1u) ? sign : 0;
}

inline bool eval_bool(const Node& node, std::uint64_t n) {
    switch (node.op) {
        case Op::truth: return node.a != 0;
        case Op::bit: return (n >> node.a) & 1u;
        case Op::mod_eq: return n % node.a == node.b;
        case Op::less: return n < node.a;
        case Op::in_range: return node.a <= n && n < node.b;
        case Op::popcount_ge: return static_cast<std::uint64_t>(std::popcount(n)) >= node.a;
        case Op::tern_eq: return eval_ternary(*node.kids[0], n) == node.value;
        case Op::square_div:
            if (n == 0) return true;
            for (std::uint64_t k = 2; k <= node.a && k <= n / k; ++k)
                if (n % (k * k) == 0) return true;
            return false;
        case Op::logic_not: return !eval_bool(*node.kids[0], n);
        case Op::logic_and: return eval_bool(*node.kids[0], n) && eval_bool(*node.kids[1], n);
        case Op::logic_or: return eval_bool(*node.kids[0], n) || eval_bool(*node.kids[1], n);
        case Op::logic_xor: return eval_bool(*node.kids[0], n) != eval_bool(*node.kids[1], n);
        default: break;
    }
    throw DomainError("eval_bool on a non-boolean node");
}

inline int eval_ternary(const Node& node, std::uint64_t n) {
    switch (node.op) {
        case Op::literal: return node.value;
        case Op::pm: return eval_bool(*node.kids[0], n) ? 1 : -1;
        case Op::cases:
            for (std::size_t i = 0; i < node.kids.size(); ++i)
                if (eval_bool(*node.kids[i], n)) return node.case_values[i];
            return 0;
        case Op::product: {
            int v = 1;
            for (const auto& k : node.kids) {
                v *= eval_ternary(*k, n);
                if (v == 0) break;
            }
            return v;
        }
        case Op::digit: return signed_digit(eval_value(*node.kids[0], n), node.value);
        case Op::lift: {
            if (n < node.a) return 0;
            const auto x = node.g->preimage(n);
            return x ? eval_ternary(*node.kids[0], *x) : 0;
        }
        default: break;
    }
    throw DomainError("eval_ternary on a non-ternary node");
}

inline Dyadic eval_value(const Node& node, std::uint64_t n) {
    if (node.op != Op::sum) return Dyadic(eval_ternary(node, n));
    int128 acc = 0;
    for (std::size_t i = 0; i < node.kids.size(); ++i) {
        const int t = eval_ternary(*node.kids[i], n);
        if (t != 0) acc += t * node.weights[i].scaled(kMaxDyadicExponent);
    }
    return Dyadic::from_scaled(acc, kMaxDyadicExponent);
}

/// True when the value depends on n.
inline bool depends_on_n(const Node& node) {
    switch (node.op) {
        case Op::truth:
        case Op::literal: return false;
        case Op::bit:
        case Op::mod_eq:
        case Op::less:
        case Op::in_range:
        case Op::popcount_ge:
        case Op::square_div:
        case Op::lift: return true;
        default: break;
    }
    for (const auto& k : node.kids)
        if (depends_on_n(*k)) return true;
    return false;
}

/// Largest denominator exponent any value can carry.
inline int max_exponent(const Node& node) {
    if (node.op != Op::sum) return 0;
    int e = 0;
    for (const auto& w : node.weights) e = std::max(e, w.exponent());
    return e;
}

inline std::size_t tree_size(const Node& node) {
    std::size_t s = 1;
    for (const auto& k : node.kids) s += tree_size(*k);
    return s;
}

/// Values of a ternary node are always +-1 (never 0).
inline bool pm_valued(const Node& node) {
    switch (node.op) {
        case Op::literal: return node.value != 0;
        case Op::pm: return true;
        case Op::product:
            for (const auto& k : node.kids)
                if (!pm_valued(*k)) return false;
            return true;
        default: return false;
    }
}

/// Folds n-independent subtrees to literals and drops unit factors.
inline NodePtr simplify(const NodePtr& node) {
    const NodeType t = type_of(node);
    if (t != NodeType::dyadic && !depends_on_n(*node)) {
        return t == NodeType::boolean ? truth(eval_bool(*node, 0)) : literal(eval_ternary(*node, 0));
    }
    Node copy = *node;
    for (auto& k : copy.kids) k = simplify(k);
    if (copy.op == Op::product) {
        std::vector<NodePtr> kept;
        int sign = 1;
        for (auto& k : copy.kids) {
            if (k->op == Op::literal) {
                if (k->value == 0) return literal(0);
                sign *= k->value;
            } else {
                kept.push_back(k);
            }
        }
        if (sign < 0) kept.insert(kept.begin(), literal(-1));
        if (kept.empty()) return literal(sign);
        if (kept.size() == 1) return kept.front();
        copy.kids = std::move(kept);
    }
    return detail::make(std::move(copy));
}

// ---- canonical text -------------------------------------------------------

std::string print(const Node& node);

namespace detail {

inline int precedence(Op op) {
    switch (op) {
        case Op::logic_or: return 1;
        case Op::logic_xor: return 2;
        case Op::logic_and: return 3;
        default: return 4;
    }
}

inline std::string print_bool_child(const Node& child, int parent_prec, bool right) {
    const int p = precedence(child.op);
    const bool wrap = p < parent_prec || (right && p == parent_prec);
    return wrap ? "(" + print(child) + ")" : print(child);
}

inline std::string weight_text(const Dyadic& w) {
    return std::to_string(w.numerator()) + "/" + std::to_string(std::uint64_t{1} << w.exponent());
}

inline std::string print_factor(const Node& n) {
    return n.op == Op::product ? "(" + print(n) + ")" : print(n);
}

inline std::string print_gspec(const GSpec& g) {
    if (const auto* a = g.affine())
        return "affine(" + std::to_string(a->a) + ", " + std::to_string(a->b) + ", " + std::to_string(a->xmin) + ")";
    const std::string s = g.str();  // poly:xmin:c0,c1,...
    const auto colon = s.find(':', 5);
    std::string coeffs;
    for (char c : s.substr(colon + 1)) coeffs += c == ',' ? std::string(", ") : std::string(1, c);
    return "poly(" + s.substr(5, colon - 5) + ", [" + coeffs + "])";
}

}  // namespace detail

inline std::string print(const Node& node) {
    using std::to_string;
    switch (node.op) {
        case Op::truth: return node.a ? "true" : "false";
        case Op::bit: return "bit(n, " + to_string(node.a) + ")";
        case Op::mod_eq: return "n % " + to_string(node.a) + " == " + to_string(node.b);
        case Op::less: return "n < " + to_string(node.a);
        case Op::in_range: return "n in [" + to_string(node.a) + ", " + to_string(node.b) + ")";
        case Op::popcount_ge: return "popcount(n) >= " + to_string(node.a);
        case Op::tern_eq: return "eq(" + print(*node.kids[0]) + ", " + to_string(node.value) + ")";
        case Op::square_div: return "sqdiv(n, " + to_string(node.a) + ")";
        case Op::logic_not: {
            const Node& k = *node.kids[0];
            const bool wrap = detail::precedence(k.op) < 4;
            return "not " + (wrap ? "(" + print(k) + ")" : print(k));
        }
        case Op::logic_and:
        case Op::logic_or:
        case Op::logic_xor: {
            const int p = detail::precedence(node.op);
            const char* word = node.op == Op::logic_and ? " and " : node.op == Op::logic_or ? " or " : " xor ";
            return detail::print_bool_child(*node.kids[0], p, false) + word +
                   detail::print_bool_child(*node.kids[1], p, true);
        }
        case Op::literal: return to_string(node.value);
        case Op::pm: return "pm(" + print(*node.kids[0]) + ")";
        case Op::cases: {
            std::string s = "tern(";
            for (std::size_t i = 0; i < node.kids.size(); ++i)
                s += (i ? ", " : "") + print(*node.kids[i]) + " -> " + to_string(node.case_values[i]);
            return s + ")";
        }
        case Op::product: {
            std::string s;
            for (std::size_t i = 0; i < node.kids.size(); ++i)
                s += (i ? " * " : "") + detail::print_factor(*node.kids[i]);
            return s;
        }
        case Op::digit: return "digit(" + print(*node.kids[0]) + ", " + to_string(node.value) + ")";
        case Op::lift:
            return "lift(" + print(*node.kids[0]) + ", " + detail::print_gspec(*node.g) + ", " + to_string(node.a) +
                   ")";
        case Op::sum: {
            std::string s;
            for (std::size_t i = 0; i < node.kids.size(); ++i) {
                const Dyadic& w = node.weights[i];
                if (i == 0)
                    s += detail::weight_text(w);
                else
                    s += (w.numerator() < 0 ? " - " : " + ") + detail::weight_text(w.abs());
                s += " * " + print(*node.kids[i]);
            }
            return s;
        }
    }
    return "?";
}

}  // namespace prlab::dsl
