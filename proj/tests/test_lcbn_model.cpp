#include <doctest.h>

#include <cmath>
#include <map>

#include "lcbn/errors.hpp"
#include "lcbn/lcbn_model.hpp"
#include "lcbn/rng.hpp"

using namespace lcbn;

namespace {

Hierarchy toy4() { return build_hierarchy(4, {{1, 3}, {1, 4}, {2, 3}, {2, 4}}); }

Hierarchy diamond8() {
    return build_hierarchy(8, {{1, 2}, {1, 3}, {2, 4}, {2, 5}, {2, 6}, {3, 4}, {3, 5}, {3, 6},
                               {4, 7}, {4, 8}, {5, 7}, {5, 8}, {6, 7}, {6, 8}});
}

const LcbnParams kDiamondT{{0.9, 0.8, 0.8, 0.7, 0.7, 0.7, 0.6, 0.6}};

Hierarchy random_dag(int K, Rng& rng, double edge_prob) {
    std::vector<int> perm(static_cast<size_t>(K));
    for (int i = 0; i < K; ++i) perm[static_cast<size_t>(i)] = i + 1;
    for (int i = K - 1; i > 0; --i)
        std::swap(perm[static_cast<size_t>(i)], perm[rng.below(static_cast<std::uint64_t>(i + 1))]);
    std::vector<std::pair<int, int>> edges;
    for (int a = 0; a < K; ++a)
        for (int b = a + 1; b < K; ++b)
            if (rng.bernoulli(edge_prob))
                edges.emplace_back(perm[static_cast<size_t>(a)], perm[static_cast<size_t>(b)]);
    return build_hierarchy(K, edges);
}

double prob_of(const ProportionVector& p, const char* s) {
    return p.prob_of(AttributePattern::parse(s).bits());
}

}  // namespace

TEST_CASE("pattern_prob matches the published diamond values") {
    const Hierarchy h = diamond8();
    CHECK(pattern_prob(kDiamondT, h, AttributePattern::parse("00000000")) == doctest::Approx(0.100));
    CHECK(pattern_prob(kDiamondT, h, AttributePattern::parse("11101100")) ==
          doctest::Approx(0.085).epsilon(5e-3));
    // a pattern violating a closure edge has probability zero, exactly
    CHECK(pattern_prob(kDiamondT, h, AttributePattern::parse("01000000")) == 0.0);
}

TEST_CASE("pattern_prob reproduces the toy-example factorization") {
    const Hierarchy h = toy4();
    Rng rng(12);
    for (int trial = 0; trial < 25; ++trial) {
        const double t1 = rng.uniform(0.05, 0.95), t2 = rng.uniform(0.05, 0.95);
        const double t3 = rng.uniform(0.05, 0.95), t4 = rng.uniform(0.05, 0.95);
        const LcbnParams t{{t1, t2, t3, t4}};
        CHECK(pattern_prob(t, h, AttributePattern::parse("0000")) ==
              doctest::Approx((1 - t1) * (1 - t2)).epsilon(1e-12));
        CHECK(pattern_prob(t, h, AttributePattern::parse("1000")) ==
              doctest::Approx(t1 * (1 - t2)).epsilon(1e-12));
        CHECK(pattern_prob(t, h, AttributePattern::parse("0100")) ==
              doctest::Approx((1 - t1) * t2).epsilon(1e-12));
        CHECK(pattern_prob(t, h, AttributePattern::parse("1100")) ==
              doctest::Approx(t1 * t2 * (1 - t3) * (1 - t4)).epsilon(1e-12));
        CHECK(pattern_prob(t, h, AttributePattern::parse("1110")) ==
              doctest::Approx(t1 * t2 * t3 * (1 - t4)).epsilon(1e-12));
        CHECK(pattern_prob(t, h, AttributePattern::parse("1101")) ==
              doctest::Approx(t1 * t2 * (1 - t3) * t4).epsilon(1e-12));
        CHECK(pattern_prob(t, h, AttributePattern::parse("1111")) ==
              doctest::Approx(t1 * t2 * t3 * t4).epsilon(1e-12));
    }
}

TEST_CASE("proportions normalize and cover the permissible set") {
    SUBCASE("diamond table to three decimals") {
        const ProportionVector p = proportions(kDiamondT, diamond8());
        REQUIRE(p.support.size() == 15);
        const double expected[15] = {0.100, 0.036, 0.144, 0.144, 0.016, 0.036, 0.036, 0.085,
                                     0.036, 0.085, 0.085, 0.032, 0.047, 0.047, 0.071};
        for (size_t i = 0; i < 15; ++i)
            CHECK(std::abs(p.p[i] - expected[i]) < 5e-4);
        CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("independent attributes give the product distribution") {
        const ProportionVector p = proportions(LcbnParams{{0.5, 0.5}}, build_hierarchy(2, {}));
        REQUIRE(p.support.size() == 4);
        for (double v : p.p) CHECK(v == doctest::Approx(0.25));
    }

    SUBCASE("normalization holds over random models") {
        Rng rng(2024);
        for (int trial = 0; trial < 1000; ++trial) {
            const int K = 2 + static_cast<int>(rng.below(9));  // up to 10
            const Hierarchy h = random_dag(K, rng, 0.3);
            LcbnParams t;
            for (int k = 0; k < K; ++k) t.t.push_back(rng.uniform(0.02, 0.98));
            const ProportionVector p = proportions(t, h);
            CHECK(std::abs(p.sum() - 1.0) < 1e-12);
            // support matches permissibility, with positive mass inside
            long double total_outside = 0.0;
            for (PatternBits b = 0; b < (PatternBits{1} << K); ++b) {
                const double v = pattern_prob(t, h, b);
                if (is_permissible(h, b))
                    CHECK(v > 0.0);
                else
                    total_outside += v;
            }
            CHECK(total_outside == 0.0L);
        }
    }
}

TEST_CASE("sample_patterns is deterministic and honors the support") {
    const Hierarchy chain = build_hierarchy(2, {{1, 2}});

    SUBCASE("boundary t forces the support") {
        const auto all_ones = sample_patterns(LcbnParams{{1.0, 1.0}}, chain, 50, 7);
        for (PatternBits b : all_ones) CHECK(b == 0b11u);

        const auto half = sample_patterns(LcbnParams{{0.5, 1.0}}, chain, 200, 7);
        for (PatternBits b : half) CHECK((b == 0b00u || b == 0b11u));
    }

    SUBCASE("same seed, same draw; different seed, different draw") {
        const auto a = sample_patterns(kDiamondT, diamond8(), 500, 123);
        const auto b = sample_patterns(kDiamondT, diamond8(), 500, 123);
        const auto c = sample_patterns(kDiamondT, diamond8(), 500, 124);
        CHECK(a == b);
        CHECK(a != c);
    }

    SUBCASE("empirical frequencies track the model") {
        const int n = 100000;
        const auto sample = sample_patterns(kDiamondT, diamond8(), n, 20260809);
        std::map<PatternBits, int> counts;
        for (PatternBits b : sample) ++counts[b];
        const ProportionVector p = proportions(kDiamondT, diamond8());
        double chi2 = 0.0;
        for (size_t i = 0; i < p.support.size(); ++i) {
            const double expect = p.p[i] * n;
            const double obs = counts.count(p.support[i]) ? counts[p.support[i]] : 0;
            CHECK(std::abs(obs - expect) <= 3.0 * std::sqrt(p.p[i] * (1 - p.p[i]) * n) + 1.0);
            chi2 += (obs - expect) * (obs - expect) / expect;
            counts.erase(p.support[i]);
        }
        CHECK(counts.empty());  // nothing sampled outside the support
        // goodness of fit at level 0.001, df = 14
        CHECK(chi2 < 36.1233);
    }
}

TEST_CASE("parameter validation") {
    const LcbnParams boundary{{0.5, 1.0}};
    CHECK_THROWS_AS(boundary.validate_interior(), RangeError);
    CHECK_NOTHROW(boundary.validate_sampling());
    const LcbnParams negative{{-0.1}};
    CHECK_THROWS_AS(negative.validate_sampling(), RangeError);
    const LcbnParams short_t{{0.5}};
    CHECK_THROWS_AS(pattern_prob(short_t, build_hierarchy(2, {}), PatternBits{0}), IndexError);
}

TEST_CASE("dense expansion places mass at the canonical indices") {
    const ProportionVector p = proportions(LcbnParams{{0.9, 0.8}}, build_hierarchy(2, {{1, 2}}));
    const auto d = p.dense();
    REQUIRE(d.size() == 4);
    CHECK(d[0b00] == doctest::Approx(0.1));
    CHECK(d[0b01] == 0.0);  // impermissible
    CHECK(d[0b10] == doctest::Approx(0.9 * 0.2));
    CHECK(d[0b11] == doctest::Approx(0.72));
}
