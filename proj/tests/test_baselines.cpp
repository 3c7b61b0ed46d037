#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "curb/baselines.hpp"
#include "support/oracles.hpp"
#include "support/stats.hpp"

namespace curb {
namespace {

const KernelParams kKernel{1e-4, 1e-5};

CrowdParams default_crowd() { return {0.045 / 0.0535, 0.105 / 0.9465, 1.0, 1.0}; }

StoryState make_state(std::int64_t ne, std::int64_t nf, double lambda, bool checked = false) {
    StoryState s;
    s.counts = {ne, nf, 0};
    s.intensity = {lambda, 0.0};
    s.fact_checked = checked;
    return s;
}

TEST(OracleIntensity, EqualsCurbAtPosteriorMean) {
    const auto crowd = default_crowd();
    const auto s = make_state(10, 3, 2.0);
    EXPECT_DOUBLE_EQ(oracle_intensity(s, posterior_flag_mean(crowd, s.counts), crowd, 4.0),
                     optimal_intensity(s, crowd, {4.0, 0, 1}));
}

TEST(OracleIntensity, ZeroExposureIntensity) { EXPECT_EQ(oracle_intensity(make_state(3, 1, 0.0), 0.3, default_crowd(), 1.0), 0.0); }

TEST(OracleIntensity, FakeStoryParameters) {
    const auto crowd = default_crowd();
    EXPECT_NEAR(oracle_intensity(make_state(0, 0, 1.0), 0.3, crowd, 1.0), 0.3300, 5e-5);
    EXPECT_EQ(oracle_intensity(make_state(0, 0, 1.0, true), 0.3, crowd, 1.0), 0.0);
}

TEST(OracleIntensity, ConvergesToCurbWithEvidence) {
    const auto crowd = default_crowd();
    const auto s = make_state(1'000'000, 300'000, 1.0);
    const double oracle = oracle_intensity(s, 0.3, crowd, 2.0);
    EXPECT_LE(std::abs(optimal_intensity(s, crowd, {2.0, 0, 1}) - oracle) / oracle, 1e-3);
}

TEST(FlagRatioIntensity, Substitution) {
    const CrowdParams crowd{0.8, 0.1, 1.0, 1.0};
    EXPECT_DOUBLE_EQ(flag_ratio_intensity(make_state(0, 0, 0.0), crowd, 1.0), 0.5);
    EXPECT_DOUBLE_EQ(flag_ratio_intensity(make_state(10, 3, 0.0), crowd, 2.0), 2.0 / 3.0);
    EXPECT_EQ(flag_ratio_intensity(make_state(10, 3, 0.0, true), crowd, 2.0), 0.0);
}

TEST(FlagRatioIntensity, IgnoresExposureIntensity) {
    const CrowdParams crowd{0.8, 0.1, 1.0, 1.0};
    EXPECT_EQ(flag_ratio_intensity(make_state(7, 2, 0.1), crowd, 3.0), flag_ratio_intensity(make_state(7, 2, 9.0), crowd, 3.0));
}

TEST(ExposureIntensity, Substitution) {
    EXPECT_EQ(exposure_intensity(make_state(0, 0, 0.0), 1.0), 0.0);
    EXPECT_EQ(exposure_intensity(make_state(0, 0, 2.0), 1.0), 2.0);
    EXPECT_EQ(exposure_intensity(make_state(5, 0, 2.0), 3.0), exposure_intensity(make_state(5, 5, 2.0), 3.0));
}

TEST(FlagSum, DispatchesOnThresholdFlag) {
    const Horizon h{0.0, 100.0};
    const std::vector<EventRecord> events{EventRecord::post(1.0), EventRecord::exposure(2.0, false, false),
                                          EventRecord::exposure(3.0, false, true), EventRecord::exposure(4.0, true, false),
                                          EventRecord::exposure(5.0, false, true), EventRecord::exposure(6.0, false, true)};
    EXPECT_EQ(flag_sum_schedule("s", events, 1, h).time, std::optional<double>(3.0));
    EXPECT_EQ(flag_sum_schedule("s", events, 3, h).time, std::optional<double>(6.0));
    EXPECT_FALSE(flag_sum_schedule("s", events, 4, h).time.has_value());
    EXPECT_THROW(flag_sum_schedule("s", events, 0, h), PreconditionError);
}

TEST(FlagSum, NoFlagsNeverDispatches) {
    std::vector<EventRecord> events;
    for (int i = 1; i <= 100; ++i) events.push_back(EventRecord::exposure(i, false, false));
    EXPECT_FALSE(flag_sum_schedule("s", events, 1, {0.0, 1000.0}).time.has_value());
}

TEST(FlagSumDecision, RespectsFactChecked) {
    EXPECT_TRUE(flag_sum_decision(make_state(5, 2, 0.0), 2));
    EXPECT_FALSE(flag_sum_decision(make_state(5, 1, 0.0), 2));
    EXPECT_FALSE(flag_sum_decision(make_state(5, 2, 0.0, true), 2));
}

TEST(PolicyKind, NamesRoundTrip) {
    for (auto kind : {PolicyKind::curb, PolicyKind::oracle, PolicyKind::flag_ratio, PolicyKind::flag_sum,
                      PolicyKind::exposure}) {
        EXPECT_EQ(parse_policy_kind(to_string(kind)), kind);
    }
    EXPECT_THROW(parse_policy_kind("threshold"), PreconditionError);
}

// The flag-ratio baseline is piecewise constant between events; the shared scheduler loop must
// still be exact. Check against its integrated hazard.
TEST(FlagRatioScheduling, MatchesTimeRescalingOracle) {
    const CrowdParams crowd{0.8, 0.1, 1.0, 1.0};
    std::vector<EventRecord> events{EventRecord::post(10.0)};
    Rng gen(12);
    double t = 10.0;
    for (int i = 0; i < 40; ++i) {
        t += gen.exponential() * 2000.0;
        events.push_back(EventRecord::exposure(t, false, gen.bernoulli(0.25)));
    }
    const Horizon h{0.0, t + 5000.0};
    const double raw_total =
        testing::CumulativeHazard(events, [&](double x) {
            const auto c = testing::counts_before(events, x);
            return (crowd.alpha + c.n_flags) / (crowd.alpha + crowd.beta + c.n_exposures);
        }, h.t0, h.tf).total();
    const double q = 1.0 / raw_total;  // total hazard 1
    const testing::CumulativeHazard hazard(events, [&](double x) {
        const auto c = testing::counts_before(events, x);
        return q * (crowd.alpha + c.n_flags) / (crowd.alpha + crowd.beta + c.n_exposures);
    }, h.t0, h.tf);

    const FlagRatioIntensity policy(crowd, q);
    std::vector<double> rescaled;
    const int runs = 10000;
    for (int r = 0; r < runs; ++r) {
        Rng rng(500 + r);
        const auto d = schedule_story("s", events, policy, h, kKernel, rng);
        if (d.time) rescaled.push_back(hazard(*d.time));
    }
    const double p = 1.0 - std::exp(-hazard.total());
    EXPECT_LE(std::abs(rescaled.size() / static_cast<double>(runs) - p), 3.0 * std::sqrt(p * (1 - p) / runs));
    EXPECT_GT(testing::ks_one_sample(rescaled, [&](double x) { return (1.0 - std::exp(-x)) / p; }).p_value, 0.01);
}

}  // namespace
}  // namespace curb
