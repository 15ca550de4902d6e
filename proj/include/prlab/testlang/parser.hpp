#pragma once

// Recursive-descent parser for the test-function language.
//
//   expr     := term (('+' | '-') term)*
//   term     := factor ('*' factor)*
//   factor   := number | 'pm' '(' bool ')' | 'tern' '(' case (',' case)* ')'
//             | 'digit' '(' expr ',' int ')' | 'lift' '(' expr ',' gmap ',' int ')'
//             | '(' expr ')'
//   case     := bool '->' int
//   gmap     := 'affine' '(' int ',' int ',' int ')' | 'poly' '(' int ',' '[' int (',' int)* ']' ')'
//   bool     := xor ('or' xor)* ; xor := and ('xor' and)* ; and := unary ('and' unary)*
//   unary    := 'not' unary | '(' bool ')' | 'true' | 'false' | atom
//   atom     := 'bit' '(' 'n' ',' int ')' | 'n' '%' int '==' int | 'n' '<' int
//             | 'n' 'in' '[' int ',' int ')' | 'popcount' '(' 'n' ')' '>=' int
//             | 'eq' '(' expr ',' int ')' | 'sqdiv' '(' 'n' ',' int ')'
//
// A single term without any '/' in its numbers is ternary; anything else is
// a dyadic combination whose first numeric factor per term is the weight.

#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "prlab/testlang/ast.hpp"

namespace prlab::dsl {

namespace detail {

enum class Tok { end, ident, number, punct };

struct Token {
    Tok kind = Tok::end;
    std::string text;
    std::size_t offset = 0;
};

inline std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
            out.push_back({Tok::ident, std::string(src.substr(start, i - start)), start});
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
            out.push_back({Tok::number, std::string(src.substr(start, i - start)), start});
        } else {
            static constexpr std::string_view two[] = {"==", ">=", "->"};
            bool matched = false;
            for (auto op : two)
                if (src.substr(i, 2) == op) {
                    out.push_back({Tok::punct, std::string(op), start});
                    i += 2;
                    matched = true;
                    break;
                }
            if (matched) continue;
            if (std::string_view("()[],+-*/%<").find(c) == std::string_view::npos)
                throw ParseError(std::string("unexpected character '") + c + "'", start);
            out.push_back({Tok::punct, std::string(1, c), start});
            ++i;
        }
    }
    out.push_back({Tok::end, "", src.size()});
    return out;
}

// A parsed numeric factor: value plus whether it was written as a fraction.
struct Number {
    Dyadic value;
    bool fraction = false;
    std::size_t offset = 0;
};

struct Factor {
    std::optional<Number> number;
    NodePtr node;
};

class Parser {
public:
    explicit Parser(std::string_view src) : toks_(lex(src)) {}

    NodePtr parse_top() {
        NodePtr e = expr();
        if (peek().kind != Tok::end) fail("unexpected '" + peek().text + "'");
        return e;
    }

    NodePtr parse_bool_top() {
        NodePtr b = boolean();
        if (peek().kind != Tok::end) fail("unexpected '" + peek().text + "'");
        return b;
    }

private:
    const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
    const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError("syntax error: " + msg, peek().offset); }
    [[noreturn]] static void type_fail(const std::string& msg, std::size_t at) {
        throw ParseError("type error: " + msg, at);
    }

    bool is(std::string_view text) const { return peek().kind != Tok::end && peek().text == text; }

    void expect(std::string_view text) {
        if (!is(text)) fail("expected '" + std::string(text) + "'");
        next();
    }

    bool accept(std::string_view text) {
        if (!is(text)) return false;
        next();
        return true;
    }

    std::uint64_t integer() {
        if (peek().kind != Tok::number) fail("expected integer");
        const Token& t = next();
        try {
            return std::stoull(t.text);
        } catch (const std::out_of_range&) {
            throw ParseError("syntax error: integer out of range", t.offset);
        }
    }

    std::int64_t signed_integer() {
        const bool neg = accept("-");
        const std::uint64_t v = integer();
        if (v > static_cast<std::uint64_t>(INT64_MAX)) fail("integer out of range");
        return neg ? -static_cast<std::int64_t>(v) : static_cast<std::int64_t>(v);
    }

    int ternary_value() {
        const std::size_t at = peek().offset;
        const bool neg = accept("-");
        if (!neg) accept("+");
        const std::uint64_t v = integer();
        if (v > 1) type_fail("ternary value must be -1, 0 or 1", at);
        return neg ? -static_cast<int>(v) : static_cast<int>(v);
    }

    Number number() {
        Number num;
        num.offset = peek().offset;
        const std::int64_t p = signed_integer();
        std::uint64_t q = 1;
        if (accept("/")) {
            num.fraction = true;
            const std::size_t at = peek().offset;
            q = integer();
            if (q == 0 || (q & (q - 1)) != 0) type_fail("rational weights must have a power-of-two denominator", at);
        }
        const int e = std::countr_zero(q);
        if (e > kMaxDyadicExponent) type_fail("denominator exceeds 2^62", num.offset);
        num.value = Dyadic::make(p, e);
        return num;
    }

    static bool starts_boolean(const Token& t) {
        static constexpr std::string_view words[] = {"n", "bit", "popcount", "eq", "sqdiv", "not", "true", "false"};
        if (t.kind != Tok::ident) return false;
        for (auto w : words)
            if (t.text == w) return true;
        return false;
    }

    // ---- ternary / dyadic layer

    NodePtr expr() {
        const std::size_t start = peek().offset;
        struct Term {
            int sign;
            std::vector<Factor> factors;
            std::size_t offset;
        };
        std::vector<Term> terms;
        terms.push_back({1, term(), start});
        while (is("+") || is("-")) {
            const int sign = next().text == "-" ? -1 : 1;
            const std::size_t at = peek().offset;
            terms.push_back({sign, term(), at});
        }

        bool any_fraction = false;
        for (const auto& t : terms)
            for (const auto& f : t.factors) any_fraction |= f.number && f.number->fraction;

        if (terms.size() == 1 && !any_fraction) return ternary_product(terms[0].factors);

        std::vector<std::pair<Dyadic, NodePtr>> weighted;
        for (auto& t : terms) {
            Dyadic w = 1;
            std::size_t first = 0;
            if (!t.factors.empty() && t.factors[0].number) {
                w = t.factors[0].number->value;
                first = 1;
            }
            std::vector<Factor> rest(t.factors.begin() + static_cast<std::ptrdiff_t>(first), t.factors.end());
            NodePtr tern = rest.empty() ? literal(1) : ternary_product(rest);
            weighted.emplace_back(t.sign < 0 ? -w : w, std::move(tern));
        }
        try {
            return sum(std::move(weighted));
        } catch (const DomainError& e) {
            type_fail(e.what(), start);
        }
    }

    NodePtr ternary_product(const std::vector<Factor>& factors) {
        std::vector<NodePtr> nodes;
        for (const auto& f : factors) {
            if (f.number) {
                const Number& num = *f.number;
                if (num.fraction || !num.value.is_integer() || num.value.numerator() < -1 || num.value.numerator() > 1)
                    type_fail("numeric factor '" + num.value.str() + "' is not a ternary literal", num.offset);
                nodes.push_back(literal(static_cast<int>(num.value.numerator())));
            } else {
                nodes.push_back(f.node);
            }
        }
        return nodes.size() == 1 ? nodes.front() : product(std::move(nodes));
    }

    std::vector<Factor> term() {
        std::vector<Factor> fs;
        fs.push_back(factor());
        while (accept("*")) fs.push_back(factor());
        return fs;
    }

    NodePtr ternary_expr() {
        const std::size_t at = peek().offset;
        NodePtr e = expr();
        if (type_of(e) != NodeType::ternary) type_fail("dyadic combination where ternary expected", at);
        return e;
    }

    Factor factor() {
        const Token& t = peek();
        if (t.kind == Tok::number || (t.text == "-" && peek(1).kind == Tok::number) ||
            (t.text == "+" && peek(1).kind == Tok::number)) {
            accept("+");
            return {number(), nullptr};
        }
        if (starts_boolean(t)) type_fail("boolean used where ternary expected (wrap it in pm(...))", t.offset);
        if (accept("(")) {
            NodePtr inner = ternary_expr();
            expect(")");
            return {std::nullopt, inner};
        }
        if (t.kind != Tok::ident) fail(t.kind == Tok::end ? "unexpected end of input" : "unexpected '" + t.text + "'");

        const std::string word = next().text;
        if (word == "pm") {
            expect("(");
            NodePtr b = boolean();
            expect(")");
            return {std::nullopt, pm(b)};
        }
        if (word == "tern") {
            expect("(");
            std::vector<std::pair<NodePtr, int>> arms;
            do {
                NodePtr cond = boolean();
                expect("->");
                arms.emplace_back(cond, ternary_value());
            } while (accept(","));
            expect(")");
            return {std::nullopt, cases(std::move(arms))};
        }
        if (word == "digit") {
            expect("(");
            NodePtr x = expr();
            expect(",");
            const std::size_t at = peek().offset;
            const std::uint64_t j = integer();
            if (j < 1 || j > static_cast<std::uint64_t>(kMaxDyadicExponent)) type_fail("digit index must be in [1, 62]", at);
            expect(")");
            return {std::nullopt, digit(x, static_cast<int>(j))};
        }
        if (word == "lift") {
            expect("(");
            NodePtr f = ternary_expr();
            expect(",");
            GSpec g = gmap();
            expect(",");
            const std::uint64_t n0 = integer();
            expect(")");
            return {std::nullopt, lift(f, std::move(g), n0)};
        }
        throw ParseError("syntax error: unknown function '" + word + "'", t.offset);
    }

    GSpec gmap() {
        const std::size_t at = peek().offset;
        if (accept("affine")) {
            expect("(");
            const std::uint64_t a = integer();
            expect(",");
            const std::int64_t b = signed_integer();
            expect(",");
            const std::uint64_t xmin = integer();
            expect(")");
            try {
                return GSpec(AffineMap{a, b, xmin});
            } catch (const DomainError& e) {
                type_fail(e.what(), at);
            }
        }
        if (accept("poly")) {
            expect("(");
            PolynomialMap m;
            m.xmin = integer();
            expect(",");
            expect("[");
            do m.coeffs.push_back(integer());
            while (accept(","));
            expect("]");
            expect(")");
            try {
                return GSpec(std::move(m));
            } catch (const DomainError& e) {
                type_fail(e.what(), at);
            }
        }
        fail("expected affine(...) or poly(...)");
    }

    // ---- boolean layer

    NodePtr boolean() {
        NodePtr x = boolean_xor();
        while (accept("or")) x = logic_or(x, boolean_xor());
        return x;
    }

    NodePtr boolean_xor() {
        NodePtr x = boolean_and();
        while (accept("xor")) x = logic_xor(x, boolean_and());
        return x;
    }

    NodePtr boolean_and() {
        NodePtr x = boolean_unary();
        while (accept("and")) x = logic_and(x, boolean_unary());
        return x;
    }

    NodePtr boolean_unary() {
        if (accept("not")) return logic_not(boolean_unary());
        if (accept("(")) {
            NodePtr b = boolean();
            expect(")");
            return b;
        }
        if (accept("true")) return truth(true);
        if (accept("false")) return truth(false);
        return atom();
    }

    NodePtr atom() {
        const Token& t = peek();
        if (t.kind == Tok::end) fail("unexpected end of input");
        if (t.kind != Tok::ident) fail("expected a condition, got '" + t.text + "'");
        if (t.text == "pm" || t.text == "tern" || t.text == "digit" || t.text == "lift")
            type_fail("ternary used where boolean expected", t.offset);
        const std::string word = next().text;
        if (word == "bit") {
            expect("(");
            expect("n");
            expect(",");
            const std::size_t at = peek().offset;
            const std::uint64_t i = integer();
            if (i >= 64) type_fail("bit index must be < 64", at);
            expect(")");
            return bit(i);
        }
        if (word == "popcount") {
            expect("(");
            expect("n");
            expect(")");
            expect(">=");
            return popcount_ge(integer());
        }
        if (word == "sqdiv") {
            expect("(");
            expect("n");
            expect(",");
            const std::size_t at = peek().offset;
            const std::uint64_t k = integer();
            if (k < 2) type_fail("sqdiv bound must be >= 2", at);
            expect(")");
            return square_div(k);
        }
        if (word == "eq") {
            expect("(");
            NodePtr x = ternary_expr();
            expect(",");
            const int v = ternary_value();
            expect(")");
            return tern_eq(x, v);
        }
        if (word == "n") {
            if (accept("%")) {
                const std::size_t at = peek().offset;
                const std::uint64_t m = integer();
                if (m == 0) type_fail("modulus must be positive", at);
                expect("==");
                return mod_eq(m, integer());
            }
            if (accept("<")) return less(integer());
            if (accept("in")) {
                expect("[");
                const std::uint64_t lo = integer();
                expect(",");
                const std::uint64_t hi = integer();
                expect(")");
                return in_range(lo, hi);
            }
            fail("expected '%', '<' or 'in' after n");
        }
        throw ParseError("syntax error: unknown condition '" + word + "'", t.offset);
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses a ternary or dyadic test function.
inline NodePtr parse_expression(std::string_view text) { return detail::Parser(text).parse_top(); }

/// Parses a boolean condition on n.
inline NodePtr parse_condition(std::string_view text) { return detail::Parser(text).parse_bool_top(); }

}  // namespace prlab::dsl
