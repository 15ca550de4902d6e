#include <gtest/gtest.h>

#include "ast_gen.hpp"
#include "prlab/testlang.hpp"

using namespace prlab;

namespace {

constexpr std::size_t kCorpus = 120;
constexpr std::uint64_t kPoints = 10000;

}  // namespace

TEST(Properties, TernaryRangeAndDeterminism) {
    for (const auto& f : gen::ternary_corpus(kCorpus, 1)) {
        for (std::uint64_t n = 1; n <= kPoints; ++n) {
            const int v = f.ternary(n);
            ASSERT_TRUE(v >= -1 && v <= 1);
            ASSERT_EQ(f(n), Dyadic(v));
        }
    }
}

TEST(Properties, DyadicRange) {
    for (const auto& F : gen::dyadic_corpus(kCorpus, 2)) {
        ASSERT_TRUE(F.is_dyadic());
        for (std::uint64_t n = 1; n <= kPoints; ++n) {
            const Dyadic v = F(n);
            ASSERT_TRUE(v.abs() <= Dyadic(1)) << F.str();
            ASSERT_LE(v.exponent(), F.max_exponent());
        }
    }
}

TEST(Properties, PrintParseRoundTrip) {
    auto corpus = gen::ternary_corpus(kCorpus, 3);
    const auto dy = gen::dyadic_corpus(kCorpus, 4);
    corpus.insert(corpus.end(), dy.begin(), dy.end());
    for (const auto& f : corpus) {
        const std::string text = f.str();
        const auto g = TestFn::parse(text);
        ASSERT_EQ(g, f) << text;
        ASSERT_EQ(g.str(), text);
    }
}

TEST(Properties, SplitPmReconstruction) {
    std::uint64_t violations = 0;
    for (const auto& f : gen::ternary_corpus(kCorpus, 5)) {
        const auto [plus, minus] = split_pm(f);
        for (std::uint64_t n = 1; n <= kPoints; ++n) {
            const int p = plus.ternary(n), m = minus.ternary(n);
            violations += (p != 1 && p != -1) || (m != 1 && m != -1) || p + m != 2 * f.ternary(n);
        }
    }
    EXPECT_EQ(violations, 0u);
}

TEST(Properties, DyadicDecomposeBound) {
    std::uint64_t violations = 0;
    const auto corpus = gen::dyadic_corpus(kCorpus, 6);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& F = corpus[i];
        const int J = 1 + static_cast<int>(i % 12);
        const auto d = dyadic_decompose(F, J);
        for (std::size_t t = 1; t < d.terms.size(); ++t) ASSERT_LT(d.terms[t - 1].exponent, d.terms[t].exponent);
        for (std::uint64_t n = 1; n <= kPoints; ++n)
            violations += !((F(n) - d.reconstruct(n)).abs() <= d.error_bound());
    }
    EXPECT_EQ(violations, 0u);
}

TEST(Properties, DecomposeExactAtFullDepth) {
    for (const auto& F : gen::dyadic_corpus(40, 7)) {
        const auto d = dyadic_decompose(F, std::max(1, F.max_exponent()));
        for (std::uint64_t n = 1; n <= 2000; ++n) {
            const Dyadic v = F(n);
            if (v.abs() == Dyadic(1)) continue;  // reads as 0.111...
            ASSERT_EQ(d.reconstruct(n), v) << F.str() << " n=" << n;
        }
    }
}

TEST(Properties, SimplifyPreservesValues) {
    for (const auto& f : gen::ternary_corpus(kCorpus, 8)) {
        const TestFn g(dsl::simplify(f.root()));
        for (std::uint64_t n = 1; n <= 2000; ++n) ASSERT_EQ(g.ternary(n), f.ternary(n)) << f.str();
    }
}
