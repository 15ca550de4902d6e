#include <gtest/gtest.h>

#include "oracle.hpp"
#include "prlab/transforms.hpp"

using namespace prlab;

namespace {

const SeqBlock& lambda_2e5() {
    static const SeqBlock b = sieve_range(1, 200001, SeqKind::liouville);
    return b;
}

}  // namespace

TEST(GSpec, ParseAndPrint) {
    const auto g = GSpec::parse("2,1,0");
    ASSERT_TRUE(g.is_affine());
    EXPECT_EQ(g(0), 1u);
    EXPECT_EQ(g(3), 7u);
    EXPECT_EQ(g.str(), "2,1,0");
    EXPECT_EQ(GSpec::parse(g.str()), g);
    const auto p = GSpec::parse("poly:1:0,0,1");
    EXPECT_EQ(p(12), 144u);
    EXPECT_EQ(GSpec::parse(p.str()), p);
    EXPECT_EQ(p.preimage(144), std::optional<std::uint64_t>(12));
    EXPECT_EQ(p.preimage(145), std::nullopt);
    EXPECT_EQ(p.range_density(), 0.0);
    EXPECT_THROW(GSpec::parse("0,1,1"), DomainError);
    EXPECT_THROW(GSpec::parse("1,-5,1"), DomainError);
    EXPECT_THROW(GSpec::parse("1,2"), DomainError);
    EXPECT_THROW(GSpec::parse("poly:1:5"), DomainError);
}

TEST(GSpec, PreimageInvertsForward) {
    for (const auto& g : {GSpec::parse("3,-2,1"), GSpec::parse("7,4,0"), GSpec::parse("poly:2:1,3,2")}) {
        for (std::uint64_t x = g.xmin(); x < g.xmin() + 500; ++x) {
            ASSERT_EQ(g.preimage(g(x)), std::optional(x));
            ASSERT_EQ(g.first_at_least(g(x)), x);
            ASSERT_EQ(g.first_at_least(g(x) + 1), x + 1);
        }
        for (std::uint64_t n = 1; n < 3000; ++n) {
            const auto x = g.preimage(n);
            if (x) ASSERT_EQ(g(*x), n);
        }
    }
}

TEST(ComposeG, SpecExamples) {
    const auto& lam = lambda_2e5();
    EXPECT_EQ(compose_g(lam, GSpec::identity(), 1, 1001), materialize(lam, 1, 1001));
    const auto odd = compose_g(lam, GSpec::parse("2,1,0"), 0, 100);
    EXPECT_EQ(odd.at(0), 1);
    EXPECT_EQ(odd.at(1), -1);
    const auto shift = compose_g(lam, GSpec::parse("1,5,0"), 0, 100);
    EXPECT_EQ(shift.at(1), 1);
    EXPECT_THROW(compose_g(lam, GSpec::parse("2,1,0"), 0, 100001), DataError);
    EXPECT_THROW(compose_g(lam, GSpec::parse("2,1,3"), 0, 10), DomainError);
}

TEST(ComposeG, Exact) {
    const auto& lam = lambda_2e5();
    const auto g = GSpec::parse("3,2,0");
    const auto s = compose_g(lam, g, 0, 60000);
    for (std::uint64_t x = 0; x < 60000; ++x) ASSERT_EQ(s.at(x), oracle::liouville(3 * x + 2));
}

TEST(LiftWitness, SpecExamples) {
    {
        const auto f = lift_witness(TestFn::constant(1), GSpec::parse("2,1,0"), 1);
        EXPECT_EQ(f.ternary(7), 1);
        EXPECT_EQ(f.ternary(8), 0);
        EXPECT_EQ(f.ternary(1), 1);
    }
    {
        const auto base = TestFn::parse("tern(bit(n,1) -> 1, n % 3 == 0 -> -1)");
        const auto f = lift_witness(base, GSpec::identity(), 4);
        for (std::uint64_t n = 1; n < 1000; ++n) EXPECT_EQ(f.ternary(n), n >= 4 ? base.ternary(n) : 0);
    }
    {
        const auto f = lift_witness(TestFn::parse("pm(n%2==0)"), GSpec::parse("3,0,1"), 3);
        EXPECT_EQ(f.ternary(12), 1);
        EXPECT_EQ(f.ternary(15), -1);
        EXPECT_EQ(f.ternary(13), 0);
    }
    EXPECT_THROW(lift_witness(TestFn::parse("1/2 * 1"), GSpec::identity(), 1), DomainError);
}

TEST(LiftWitness, PrintsAndParses) {
    const auto f = lift_witness(TestFn::parse("pm(bit(n,0))"), GSpec::parse("5,3,1"), 10);
    const auto g = TestFn::parse(f.str());
    EXPECT_EQ(f, g);
    for (std::uint64_t n = 1; n < 500; ++n) EXPECT_EQ(f.ternary(n), g.ternary(n));
}

TEST(WitnessIdentity, AffineMaps) {
    const auto& lam = lambda_2e5();
    const auto f = TestFn::parse("tern(bit(n,0) -> 1, n % 3 == 0 -> -1)");
    for (const char* g : {"1,0,1", "2,1,0", "3,-1,1", "5,7,2", "1,13,0"})
        for (std::uint64_t n0 : {1u, 10u, 1000u}) {
            const auto r = witness_identity_check(lam, f, GSpec::parse(g), n0, 100000);
            EXPECT_EQ(r.mismatches, 0u) << g << " n0=" << n0 << " first=" << r.first_mismatch;
            EXPECT_EQ(r.checked, 100000u);
            EXPECT_EQ(r.final_lhs, r.final_rhs);
        }
}

TEST(WitnessIdentity, PolynomialMap) {
    const auto& lam = lambda_2e5();
    const auto r = witness_identity_check(lam, TestFn::parse("pm(n % 4 == 1)"), GSpec::parse("poly:1:1,1,1"), 5, 100000);
    EXPECT_EQ(r.mismatches, 0u);
}

TEST(Transfer, Examples) {
    const auto r = mu_lambda_transfer_check(100000, 10, 0.1);
    EXPECT_TRUE(r.counterexamples.empty());
    EXPECT_EQ(r.checked, 100000u);
    EXPECT_LT(r.tail_mass, 0.1);
    EXPECT_LE(r.tail_mass, r.integral_bound);
    EXPECT_NEAR(r.tail_mass, 0.09516633568168564, 1e-12);
    EXPECT_EQ(r.n0_for_eps, 10u);
    EXPECT_THROW(mu_lambda_transfer_check(3), DomainError);

    EXPECT_EQ(value_at(12, SeqKind::liouville), -1);
    EXPECT_EQ(value_at(3, SeqKind::mobius), -1);
    EXPECT_EQ(value_at(9, SeqKind::liouville), 1);
    EXPECT_EQ(value_at(1, SeqKind::mobius), 1);
}

TEST(Transfer, Decomposition) {
    for (std::uint64_t n = 1; n <= 20000; ++n) {
        const std::uint64_t k = factorize(n).square_root_of_square_part();
        const std::uint64_t i = n / (k * k);
        ASSERT_EQ(n % (k * k), 0u);
        ASSERT_TRUE(oracle::is_squarefree(i));
        ASSERT_EQ(oracle::liouville(n), oracle::mobius(i));
    }
}
