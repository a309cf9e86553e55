#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <vector>

#include "lcbn/errors.hpp"
#include "lcbn/experiments.hpp"
#include "lcbn/inference.hpp"
#include "lcbn/rng.hpp"

using namespace lcbn;

namespace {

// Direct product-sum likelihood without any log-space tricks; the oracle
// stays independent of the kernel it checks.
double brute_force_loglik(const SaturatedTheta& theta, const ProportionVector& p, const Dataset& data) {
    double total = 0.0;
    for (int i = 0; i < data.N(); ++i) {
        double li = 0.0;
        for (size_t c = 0; c < p.support.size(); ++c) {
            double term = p.p[c];
            for (int j = 0; j < data.J(); ++j) {
                const std::int8_t r = data.at(i, j);
                if (r == Dataset::kMissing) continue;
                const double th = theta.at(j + 1, c);
                term *= r ? th : 1.0 - th;
            }
            li += term;
        }
        total += std::log(li);
    }
    return total;
}

struct RandomInstance {
    SaturatedTheta theta;
    ProportionVector p;
    Dataset data;
};

RandomInstance random_instance(Rng& rng, int max_k, int max_j, int max_n, bool with_missing) {
    const int K = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_k)));
    const int J = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_j)));
    const int N = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_n)));

    std::vector<std::pair<int, int>> edges;
    for (int a = 1; a <= K; ++a)
        for (int b = a + 1; b <= K; ++b)
            if (rng.bernoulli(0.3)) edges.emplace_back(a, b);
    const Hierarchy h = build_hierarchy(K, edges);
    const PatternSet support = enumerate_permissible(h);

    ProportionVector p;
    p.support = support;
    double tot = 0.0;
    for (size_t c = 0; c < support.size(); ++c) {
        p.p.push_back(rng.uniform(0.05, 1.0));
        tot += p.p.back();
    }
    for (double& v : p.p) v /= tot;

    SaturatedTheta theta;
    theta.J = J;
    theta.patterns = support;
    for (int j = 0; j < J; ++j)
        for (size_t c = 0; c < support.size(); ++c) theta.values.push_back(rng.uniform(0.05, 0.95));

    std::vector<std::int8_t> cells;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < J; ++j) {
            if (with_missing && rng.bernoulli(0.25))
                cells.push_back(Dataset::kMissing);
            else
                cells.push_back(rng.bernoulli(0.5) ? 1 : 0);
        }
    return {std::move(theta), std::move(p), Dataset(N, J, std::move(cells))};
}

}  // namespace

TEST_CASE("marginal_loglik matches brute-force enumeration") {
    Rng rng(424242);
    for (int trial = 0; trial < 200; ++trial) {
        const RandomInstance inst = random_instance(rng, 3, 4, 20, trial % 2 == 1);
        const double fast = marginal_loglik(inst.theta, inst.p, inst.data);
        const double slow = brute_force_loglik(inst.theta, inst.p, inst.data);
        CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
    }
}

TEST_CASE("single-pattern mixtures collapse to Bernoulli sums") {
    SaturatedTheta theta;
    theta.J = 3;
    theta.patterns = PatternSet(2, {0b11u}, false);
    theta.values = {0.7, 0.4, 0.9};
    const ProportionVector p{theta.patterns, {1.0}};
    const Dataset data(2, 3, {1, 0, 1, 0, 0, 1});
    const double expect = std::log(0.7) + std::log(0.6) + std::log(0.9)     // subject 1
                          + std::log(0.3) + std::log(0.6) + std::log(0.9);  // subject 2
    CHECK(marginal_loglik(theta, p, data) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("a fully missing column contributes nothing") {
    Rng rng(7);
    RandomInstance inst = random_instance(rng, 3, 4, 15, false);
    if (inst.data.J() < 2) return;

    // mask the last column everywhere
    std::vector<std::int8_t> cells;
    for (int i = 0; i < inst.data.N(); ++i)
        for (int j = 0; j < inst.data.J(); ++j)
            cells.push_back(j == inst.data.J() - 1 ? Dataset::kMissing : inst.data.at(i, j));
    const Dataset masked(inst.data.N(), inst.data.J(), std::move(cells));

    // drop the column and the matching theta row
    std::vector<std::int8_t> cells2;
    for (int i = 0; i < inst.data.N(); ++i)
        for (int j = 0; j + 1 < inst.data.J(); ++j) cells2.push_back(inst.data.at(i, j));
    const Dataset dropped(inst.data.N(), inst.data.J() - 1, std::move(cells2));
    SaturatedTheta theta2 = inst.theta;
    theta2.J -= 1;
    theta2.values.resize(static_cast<size_t>(theta2.J) * theta2.patterns.size());

    CHECK(marginal_loglik(theta2, inst.p, dropped) ==
          doctest::Approx(marginal_loglik(inst.theta, inst.p, masked)).epsilon(1e-12));
}

TEST_CASE("masked copies add up like their separate likelihoods") {
    Rng rng(99);
    const RandomInstance inst = random_instance(rng, 3, 4, 12, false);
    const int half = inst.data.J() / 2;

    auto masked_dataset = [&](bool first_half) {
        std::vector<std::int8_t> cells;
        for (int i = 0; i < inst.data.N(); ++i)
            for (int j = 0; j < inst.data.J(); ++j) {
                const bool keep = first_half ? (j < half || inst.data.J() == 1) : j >= half;
                cells.push_back(keep ? inst.data.at(i, j) : Dataset::kMissing);
            }
        return Dataset(inst.data.N(), inst.data.J(), std::move(cells));
    };
    const Dataset a = masked_dataset(true);
    const Dataset b = masked_dataset(false);

    std::vector<std::int8_t> stacked;
    for (const Dataset* d : {&a, &b})
        for (int i = 0; i < d->N(); ++i)
            for (int j = 0; j < d->J(); ++j) stacked.push_back(d->at(i, j));
    const Dataset both(2 * inst.data.N(), inst.data.J(), std::move(stacked));

    const double split = marginal_loglik(inst.theta, inst.p, a) + marginal_loglik(inst.theta, inst.p, b);
    CHECK(marginal_loglik(inst.theta, inst.p, both) == doctest::Approx(split).epsilon(1e-12));
}

TEST_CASE("marginal_loglik validates its inputs") {
    SaturatedTheta theta;
    theta.J = 1;
    theta.patterns = PatternSet(1, {0u, 1u}, false);
    theta.values = {0.5, 1.0};  // out of range
    const ProportionVector p{theta.patterns, {0.5, 0.5}};
    const Dataset data(1, 1, {1});
    CHECK_THROWS_AS(marginal_loglik(theta, p, data), NumericalError);

    theta.values = {0.5, 0.6};
    const ProportionVector wrong{PatternSet(1, {0u}, false), {1.0}};
    CHECK_THROWS_AS(marginal_loglik(theta, wrong, data), IndexError);
}

TEST_CASE("responsibilities match the hand-computed posterior") {
    Rng rng(31337);
    for (int trial = 0; trial < 50; ++trial) {
        const RandomInstance inst = random_instance(rng, 2, 3, 6, trial % 3 == 0);
        const auto phi = responsibilities(inst.theta, inst.p, inst.data);
        const size_t M = inst.p.support.size();
        for (int i = 0; i < inst.data.N(); ++i) {
            std::vector<double> post(M);
            double tot = 0.0;
            for (size_t c = 0; c < M; ++c) {
                double term = inst.p.p[c];
                for (int j = 0; j < inst.data.J(); ++j) {
                    const std::int8_t r = inst.data.at(i, j);
                    if (r == Dataset::kMissing) continue;
                    term *= r ? inst.theta.at(j + 1, c) : 1.0 - inst.theta.at(j + 1, c);
                }
                post[c] = term;
                tot += term;
            }
            double row_sum = 0.0;
            for (size_t c = 0; c < M; ++c) {
                CHECK(phi[static_cast<size_t>(i) * M + c] == doctest::Approx(post[c] / tot).epsilon(1e-12));
                row_sum += phi[static_cast<size_t>(i) * M + c];
            }
            CHECK(std::abs(row_sum - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("responsibilities edge cases") {
    SaturatedTheta theta;
    theta.J = 2;
    theta.patterns = PatternSet::full(2);
    theta.values = {0.2, 0.4, 0.6, 0.8, 0.3, 0.5, 0.7, 0.9};

    SUBCASE("an all-missing row gets the prior back") {
        const ProportionVector p{theta.patterns, {0.25, 0.25, 0.25, 0.25}};
        const Dataset data(1, 2, {Dataset::kMissing, Dataset::kMissing});
        const auto phi = responsibilities(theta, p, data);
        for (double v : phi) CHECK(v == doctest::Approx(0.25));
    }

    SUBCASE("a one-hot prior forces a one-hot posterior") {
        const ProportionVector p{theta.patterns, {0.0, 0.0, 1.0, 0.0}};
        const Dataset data(2, 2, {1, 0, 0, 1});
        const auto phi = responsibilities(theta, p, data);
        for (int i = 0; i < 2; ++i)
            for (size_t c = 0; c < 4; ++c)
                CHECK(phi[static_cast<size_t>(i) * 4 + c] == (c == 2 ? 1.0 : 0.0));
    }
}

TEST_CASE("penalized M-step weight") {
    CHECK(pem_delta(0.01, -2.0, 10.0) == doctest::Approx(8.0));
    CHECK(pem_delta(0.01, -2.0, 1.5) == doctest::Approx(0.01));  // floor branch
    CHECK(pem_delta(0.01, -0.4, 0.0) == doctest::Approx(0.01));
}

TEST_CASE("ebic formula") {
    SUBCASE("degenerate inputs") {
        CHECK(ebic(0.0, 0, 0, 1, 3) == doctest::Approx(0.0));
        // N = 1: the log N term vanishes, the binomial term stays
        const double v = ebic(-5.0, 0, 4, 1, 3);
        const double binom = std::lgamma(7.0 + 4.0 + 1.0) - std::lgamma(4.0 + 1.0) - std::lgamma(7.0 + 1.0);
        CHECK(v == doctest::Approx(10.0 + 2.0 * binom).epsilon(1e-12));
    }

    SUBCASE("matches an exact big-integer evaluation") {
        namespace mp = boost::multiprecision;
        const double loglik = -1000.0;
        const long m_p = 14, m_theta = 48, n = 2000;
        const int K = 8;
        mp::cpp_int binom = 1;
        const long nn = (1L << K) - 1 + m_theta, kk = m_p + m_theta;
        for (long i = 0; i < kk; ++i) {
            binom *= nn - i;
            binom /= i + 1;
        }
        const double log_binom = mp::log(mp::cpp_bin_float_100(binom)).convert_to<double>();
        const double expect =
            -2.0 * loglik + static_cast<double>(m_p + m_theta) * std::log(2000.0) + 2.0 * log_binom;
        CHECK(ebic(loglik, m_p, m_theta, n, K) == doctest::Approx(expect).epsilon(1e-12));
    }

    SUBCASE("domain checks") {
        CHECK_THROWS_AS(ebic(0.0, 8, 0, 10, 3), DomainError);  // m_p > 2^K - 1
        CHECK_NOTHROW(ebic(0.0, 7, 0, 10, 3));
        CHECK_THROWS_AS(ebic(0.0, -1, 0, 10, 3), DomainError);
    }

    SUBCASE("bic is the ebic without the binomial term") {
        CHECK(bic(-100.0, 3, 10, 50) == doctest::Approx(200.0 + 13.0 * std::log(50.0)));
    }
}

TEST_CASE("default lambda grid") {
    const auto grid = default_lambda_grid();
    REQUIRE(grid.size() == 10);
    CHECK(grid.front() == doctest::Approx(-0.4));
    CHECK(grid.back() == doctest::Approx(-4.0));
    for (size_t i = 0; i + 1 < grid.size(); ++i)
        CHECK(grid[i + 1] - grid[i] == doctest::Approx(-0.4));
}
