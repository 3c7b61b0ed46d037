#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "curb/crowd.hpp"
#include "curb/rng.hpp"
#include "curb/tpp.hpp"
#include "support/oracles.hpp"
#include "support/stats.hpp"

namespace curb {
namespace {

// Default setting: P(f=1|m=1)=0.3, P(f=1|m=0)=0.01, p_d=0.15.
CrowdParams default_crowd() { return {0.045 / 0.0535, 0.105 / 0.9465, 1.0, 1.0}; }

TEST(PosteriorFlagMean, UniformPrior) { EXPECT_DOUBLE_EQ(posterior_flag_mean({0, 0, 1, 1}, {0, 0, 0}), 0.5); }

TEST(PosteriorFlagMean, Substitution) {
    EXPECT_DOUBLE_EQ(posterior_flag_mean({0, 0, 1, 1}, {10, 3, 0}), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(posterior_flag_mean({0, 0, 1, 1}, {100, 0, 0}), 1.0 / 102.0);
}

TEST(PosteriorFlagMean, MatchesIntegratedBetaBernoulliPosterior) {
    for (auto [alpha, beta] : {std::pair{1.0, 1.0}, std::pair{2.0, 3.5}, std::pair{1.5, 8.0}}) {
        const CrowdParams crowd{0.0, 0.0, alpha, beta};
        for (int n = 0; n <= 20; ++n) {
            for (int k = 0; k <= n; ++k) {
                EXPECT_NEAR(posterior_flag_mean(crowd, {n, k, 0}), testing::integrated_posterior_mean(alpha, beta, n, k), 1e-10)
                    << "alpha=" << alpha << " n=" << n << " k=" << k;
            }
        }
    }
}

TEST(PosteriorFlagMean, MonotoneInEvidence) {
    const CrowdParams crowd{0.8, 0.1, 0.3, 4.0};
    Rng rng(5);
    StoryCounts counts;
    for (int i = 0; i < 500; ++i) {
        const double before = posterior_flag_mean(crowd, counts);
        const bool flag = rng.bernoulli(0.2);
        ++counts.n_exposures;
        if (flag) ++counts.n_flags;
        const double after = posterior_flag_mean(crowd, counts);
        if (flag) {
            EXPECT_GE(after, before);
        } else {
            EXPECT_LE(after, before);
        }
        EXPECT_GT(after, 0.0);
        EXPECT_LT(after, 1.0);
    }
}

TEST(MisinfoPosteriorRate, ZeroIntensity) { EXPECT_EQ(misinfo_posterior_rate(default_crowd(), {10, 3, 0}, 0.0), 0.0); }

TEST(MisinfoPosteriorRate, UninformativeFlags) {
    const CrowdParams crowd{0.4, 0.4, 1.0, 1.0};
    EXPECT_DOUBLE_EQ(misinfo_posterior_rate(crowd, {50, 49, 0}, 3.0), 1.2);
    EXPECT_DOUBLE_EQ(misinfo_posterior_rate(crowd, {50, 0, 0}, 3.0), 1.2);
}

TEST(MisinfoPosteriorRate, DefaultParameters) {
    // 2 * (0.1109 + 0.7302 / 3) with the exact Bayes-inverted probabilities.
    const auto crowd = default_crowd();
    const double expected = 2.0 * (crowd.p_m_f0 + (crowd.p_m_f1 - crowd.p_m_f0) / 3.0);
    EXPECT_DOUBLE_EQ(misinfo_posterior_rate(crowd, {10, 3, 0}, 2.0), expected);
    // Four-digit inputs reproduce the rounded example.
    EXPECT_NEAR(misinfo_posterior_rate({0.8411, 0.1109, 1.0, 1.0}, {10, 3, 0}, 2.0), 0.7086, 5e-5);
}

TEST(MisinfoPosteriorRate, LinearAndBounded) {
    const auto crowd = default_crowd();
    Rng rng(8);
    for (int i = 0; i < 1000; ++i) {
        const auto n = static_cast<std::int64_t>(rng.below(200));
        const auto k = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n) + 1));
        const double lambda = rng.uniform() * 5.0;
        const double rate = misinfo_posterior_rate(crowd, {n, k, 0}, lambda);
        EXPECT_GE(rate, crowd.p_m_f0 * lambda - 1e-15);
        EXPECT_LE(rate, crowd.p_m_f1 * lambda + 1e-15);
        EXPECT_NEAR(misinfo_posterior_rate(crowd, {n, k, 0}, 2.0 * lambda), 2.0 * rate, 1e-14);
    }
}

TEST(MisinfoTrueRate, Endpoints) {
    const auto crowd = default_crowd();
    EXPECT_DOUBLE_EQ(misinfo_true_rate(0.0, crowd, 2.0), crowd.p_m_f0 * 2.0);
    EXPECT_DOUBLE_EQ(misinfo_true_rate(1.0, crowd, 2.0), crowd.p_m_f1 * 2.0);
    EXPECT_THROW(misinfo_true_rate(1.5, crowd, 2.0), PreconditionError);
}

TEST(MisinfoTrueRate, PosteriorConsistency) {
    const auto crowd = default_crowd();
    const double f = 0.3;
    const StoryCounts counts{1'000'000, 300'000, 0};
    const double truth = misinfo_true_rate(f, crowd, 1.7);
    EXPECT_LE(std::abs(misinfo_posterior_rate(crowd, counts, 1.7) - truth) / truth, 1e-3);
}

TEST(FlagToMisinfoProbs, UninformativeFlagsReturnPrior) {
    const auto p = flag_to_misinfo_probs(0.2, 0.2, 0.37);
    EXPECT_NEAR(p.p_m_f1, 0.37, 1e-15);
    EXPECT_NEAR(p.p_m_f0, 0.37, 1e-15);
}

TEST(FlagToMisinfoProbs, DefaultLikelihoods) {
    const auto p = flag_to_misinfo_probs(0.3, 0.01, 0.15);
    EXPECT_DOUBLE_EQ(p.p_m_f1, 0.045 / 0.0535);
    EXPECT_DOUBLE_EQ(p.p_m_f0, 0.105 / 0.9465);
    EXPECT_NEAR(p.p_m_f1, 0.8411, 5e-5);
    EXPECT_NEAR(p.p_m_f0, 0.1109, 5e-5);
}

TEST(FlagToMisinfoProbs, RejectsZeroDenominator) {
    EXPECT_THROW(flag_to_misinfo_probs(0.0, 0.0, 0.5), PreconditionError);
    EXPECT_THROW(flag_to_misinfo_probs(0.1, 0.2, 0.5), PreconditionError);
    EXPECT_THROW(flag_to_misinfo_probs(0.1, 0.0, 1.2), PreconditionError);
}

TEST(FlagToMisinfoProbs, TotalProbabilityAndOrdering) {
    Rng rng(21);
    for (int i = 0; i < 2000; ++i) {
        const double a = 0.001 + 0.998 * rng.uniform();
        const double b = 0.001 + 0.998 * rng.uniform();
        const double p_d = 0.001 + 0.998 * rng.uniform();
        const double hi = std::max(a, b), lo = std::min(a, b);
        const auto p = flag_to_misinfo_probs(hi, lo, p_d);
        const double pbar = marginal_flag_rate(hi, lo, p_d);
        EXPECT_NEAR(p.p_m_f1 * pbar + p.p_m_f0 * (1.0 - pbar), p_d, 1e-12);
        EXPECT_LE(p.p_m_f0, p_d + 1e-15);
        EXPECT_GE(p.p_m_f1, p_d - 1e-15);
    }
}

TEST(PriorFromMarginal, DefaultLikelihoods) {
    const auto prior = prior_from_marginal(0.3, 0.01, 0.15, 1.0);
    EXPECT_NEAR(prior.alpha, 0.0535, 1e-15);
    EXPECT_NEAR(prior.beta, 0.9465, 1e-15);
}

TEST(PriorFromMarginal, DegeneratePriors) {
    const auto none_fake = prior_from_marginal(0.3, 0.01, 0.0, 10.0);
    EXPECT_NEAR(none_fake.alpha / 10.0, 0.01, 1e-15);
    const auto all_fake = prior_from_marginal(0.3, 0.01, 1.0, 10.0);
    EXPECT_NEAR(all_fake.alpha / 10.0, 0.3, 1e-15);
    EXPECT_THROW(prior_from_marginal(0.3, 0.01, 0.5, 0.0), PreconditionError);
}

TEST(CrowdParams, Validation) {
    EXPECT_THROW((CrowdParams{0.1, 0.2, 1, 1}.validate()), PreconditionError);
    EXPECT_THROW((CrowdParams{0.5, 0.2, 0, 1}.validate()), PreconditionError);
    EXPECT_NO_THROW(make_crowd_params(0.3, 0.01, 0.15, 5.0));
}

}  // namespace
}  // namespace curb
