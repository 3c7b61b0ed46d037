#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "curb/cascade_sim.hpp"
#include "curb/evaluation.hpp"
#include "support/oracles.hpp"
#include "support/stats.hpp"

namespace curb {
namespace {

const KernelParams kKernel{1e-4, 1e-5};
const Horizon kHorizon{0.0, 14.0 * 86400.0};

Story exposures_story(const std::string& id, Label label, int n, std::vector<int> flagged = {}) {
    Story s;
    s.story_id = id;
    s.label = label;
    s.events.push_back(EventRecord::post(100.0));
    for (int i = 1; i <= n; ++i) {
        const bool flag = std::find(flagged.begin(), flagged.end(), i) != flagged.end();
        s.events.push_back(EventRecord::exposure(100.0 + 1000.0 * i, false, flag));
    }
    s.user_ids.assign(s.events.size(), "u");
    return s;
}

CascadeDataset dataset_of(std::initializer_list<Story> stories) {
    CascadeDataset d;
    for (const auto& s : stories) d.stories.emplace(s.story_id, s);
    return d;
}

EvalContext context_for(const CascadeDataset& d) {
    EvalContext ctx;
    ctx.crowd = crowd_for_dataset(d, ctx.p_f1_m1, ctx.p_f1_m0, 2.0);
    ctx.kernel = kKernel;
    ctx.horizon = kHorizon;
    return ctx;
}

CascadeDataset small_synthetic(std::uint64_t seed, std::size_t n = 20) {
    SimConfig sim;
    sim.seed = seed;
    SyntheticOptions options;
    options.n_stories = n;
    return synthetic_dataset(options, sim).dataset;
}

TEST(Replay, NeverDispatchingPreventsNothing) {
    const auto d = dataset_of({exposures_story("a", Label::fake, 10)});
    const auto out = outcome_from_decisions(d, {});
    EXPECT_EQ(out.n_fact_checks(), 0);
    EXPECT_EQ(misinfo_reduction(out), 0.0);
    EXPECT_FALSE(precision(out).has_value());
}

TEST(Replay, DispatchAtStartPreventsEverything) {
    const auto d = dataset_of({exposures_story("a", Label::fake, 10), exposures_story("b", Label::fake, 3)});
    const std::vector<FactCheckDecision> decisions{{"a", kHorizon.t0}, {"b", kHorizon.t0}};
    EXPECT_EQ(misinfo_reduction(outcome_from_decisions(d, decisions)), 1.0);
}

TEST(Replay, DispatchAfterFourOfTen) {
    const auto d = dataset_of({exposures_story("a", Label::fake, 10)});
    const std::vector<FactCheckDecision> decisions{{"a", 100.0 + 4500.0}};
    EXPECT_DOUBLE_EQ(*misinfo_reduction(outcome_from_decisions(d, decisions)), 0.6);
    // A dispatch exactly at an exposure leaves that exposure unprevented.
    const std::vector<FactCheckDecision> on_event{{"a", 100.0 + 4000.0}};
    EXPECT_DOUBLE_EQ(*misinfo_reduction(outcome_from_decisions(d, on_event)), 0.6);
}

TEST(Replay, NoFakeExposuresMeansUndefinedReduction) {
    const auto d = dataset_of({exposures_story("g", Label::genuine, 4)});
    EXPECT_FALSE(misinfo_reduction(outcome_from_decisions(d, {})).has_value());
}

TEST(Replay, PrecisionExamples) {
    const auto d = dataset_of({exposures_story("f1", Label::fake, 2), exposures_story("f2", Label::fake, 2),
                               exposures_story("g1", Label::genuine, 2)});
    const std::vector<FactCheckDecision> fake_only{{"f1", 500.0}};
    const std::vector<FactCheckDecision> genuine_only{{"g1", 500.0}};
    const std::vector<FactCheckDecision> all{{"f1", 500.0}, {"f2", 500.0}, {"g1", 500.0}};
    EXPECT_EQ(precision(outcome_from_decisions(d, fake_only)), 1.0);
    EXPECT_EQ(precision(outcome_from_decisions(d, genuine_only)), 0.0);
    EXPECT_DOUBLE_EQ(*precision(outcome_from_decisions(d, all)), 2.0 / 3.0);
}

TEST(Replay, MacroAveragesOverFakeStories) {
    const auto d = dataset_of({exposures_story("a", Label::fake, 10), exposures_story("b", Label::fake, 2)});
    const std::vector<FactCheckDecision> decisions{{"b", 0.0}};
    const auto out = outcome_from_decisions(d, decisions);
    EXPECT_DOUBLE_EQ(*misinfo_reduction(out), 2.0 / 12.0);
    EXPECT_DOUBLE_EQ(*misinfo_reduction_macro(out), 0.5);
}

// Property: pulling one fake story's dispatch earlier never lowers reduction; metrics stay in [0,1].
TEST(Replay, EarlierDispatchNeverHurts) {
    const auto d = small_synthetic(21, 15);
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<FactCheckDecision> decisions;
        for (const auto& [id, story] : d.stories) {
            if (rng.bernoulli(0.5)) decisions.push_back({id, rng.uniform() * kHorizon.tf});
        }
        if (decisions.empty()) continue;
        const auto before = outcome_from_decisions(d, decisions);
        auto& pick = decisions[rng.below(decisions.size())];
        pick.time = *pick.time * rng.uniform();
        const auto after = outcome_from_decisions(d, decisions);
        ASSERT_GE(*misinfo_reduction(after), *misinfo_reduction(before));
        for (const auto& out : {before, after}) {
            for (auto m : {precision(out), misinfo_reduction(out), misinfo_reduction_macro(out)}) {
                ASSERT_TRUE(m.has_value());
                ASSERT_GE(*m, 0.0);
                ASSERT_LE(*m, 1.0);
            }
        }
    }
}

TEST(Replay, FlagSumOnCraftedDataset) {
    const auto d = dataset_of({exposures_story("fake", Label::fake, 10, {2, 3}),
                               exposures_story("real", Label::genuine, 10, {7})});
    auto ctx = context_for(d);
    PolicySpec policy{PolicyKind::flag_sum};
    policy.threshold = 2;
    const auto out = replay_evaluate(d, policy, ctx, 1);
    EXPECT_EQ(out.n_fact_checks(), 1);
    EXPECT_DOUBLE_EQ(*misinfo_reduction(out), 0.7);
    EXPECT_EQ(precision(out), 1.0);
}

TEST(Replay, ScheduleDatasetIsDeterministicAndThreadInvariant) {
    const auto d = small_synthetic(3);
    auto ctx = context_for(d);
    PolicySpec policy{PolicyKind::curb, 50.0};
    const auto a = schedule_dataset(d, policy, ctx, 9);
    ctx.threads = 4;
    EXPECT_EQ(schedule_dataset(d, policy, ctx, 9), a);
    EXPECT_NE(schedule_dataset(d, policy, ctx, 10), a);
}

double quadrature_cost(std::span<const EventRecord> events, const CrowdParams& crowd, double q_cost,
                       const std::function<double(double)>& u, double end) {
    auto integrand = [&](double t) {
        const auto counts = testing::counts_before(events, t);
        const double m = misinfo_posterior_rate(crowd, counts, direct_intensity(events, kKernel, t));
        const double ut = u(t);
        return 0.5 * m * m + 0.5 * q_cost * ut * ut;
    };
    return testing::CumulativeHazard(events, integrand, kHorizon.t0, end).total();
}

TEST(TrajectoryCost, MatchesQuadrature) {
    const auto d = small_synthetic(11, 6);
    const auto ctx = context_for(d);
    const double q = 40.0;
    const double q_cost = 7.0;
    int checked = 0;
    for (const auto& [id, story] : d.stories) {
        if (story.events.empty()) continue;
        const CurbIntensity curb_policy(ctx.crowd, q, kKernel);
        const FlagRatioIntensity ratio_policy(ctx.crowd, q);
        const double mid = story.events[story.events.size() / 2].time + 17.0;
        for (std::optional<double> dispatch : {std::optional<double>{}, std::optional<double>{mid}}) {
            const double end = dispatch ? *dispatch : kHorizon.tf;
            const auto events = std::span<const EventRecord>(story.events);

            const auto c = trajectory_cost(events, curb_policy, ctx.crowd, q_cost, kHorizon, kKernel, dispatch);
            const double ref = quadrature_cost(
                events, ctx.crowd, q_cost,
                [&](double t) { return testing::curb_intensity_at(events, ctx.crowd, q, kKernel, t); }, end);
            EXPECT_NEAR(c.misinfo + c.control, ref, 1e-6 * ref) << id << " dispatch=" << dispatch.value_or(-1) << " n=" << story.events.size() << " m=" << c.misinfo << " u=" << c.control;
            EXPECT_EQ(c.terminal > 0.0, !dispatch.has_value());

            const auto r = trajectory_cost(events, ratio_policy, ctx.crowd, q_cost, kHorizon, kKernel, dispatch);
            const double ref_ratio = quadrature_cost(
                events, ctx.crowd, q_cost,
                [&](double t) {
                    StoryState s;
                    s.counts = testing::counts_before(events, t);
                    return flag_ratio_intensity(s, ctx.crowd, q);
                },
                end);
            EXPECT_NEAR(r.misinfo + r.control, ref_ratio, 1e-6 * ref_ratio) << id;
            ++checked;
        }
    }
    EXPECT_GT(checked, 0);
}

TEST(TrajectoryCost, EmptyCascadeCostsNothing) {
    const auto ctx = context_for(dataset_of({}));
    const CurbIntensity policy(ctx.crowd, 1.0, kKernel);
    const auto c = trajectory_cost({}, policy, ctx.crowd, 1.0, kHorizon, kKernel, std::nullopt);
    EXPECT_EQ(c.total(), 0.0);
}

TEST(TrajectoryCost, ControlTermIsLinearInQ) {
    const auto d = small_synthetic(12, 4);
    const auto ctx = context_for(d);
    const auto& story = d.stories.begin()->second;
    const CurbIntensity policy(ctx.crowd, 30.0, kKernel);
    const auto c1 = trajectory_cost(story.events, policy, ctx.crowd, 3.0, kHorizon, kKernel, std::nullopt);
    const auto c2 = trajectory_cost(story.events, policy, ctx.crowd, 6.0, kHorizon, kKernel, std::nullopt);
    EXPECT_DOUBLE_EQ(c2.control, 2.0 * c1.control);
    EXPECT_EQ(c2.misinfo, c1.misinfo);
    EXPECT_EQ(c2.terminal, c1.terminal);
}

TEST(PolicyCost, RejectsFlagSumAndSingleRun) {
    const auto d = small_synthetic(1, 3);
    const auto ctx = context_for(d);
    const ControlParams ctrl{1.0, kHorizon.t0, kHorizon.tf};
    EXPECT_THROW(policy_cost(d, {PolicyKind::flag_sum}, ctx, ctrl, 10, 1), PreconditionError);
    EXPECT_THROW(policy_cost(d, {PolicyKind::curb}, ctx, ctrl, 1, 1), PreconditionError);
}

TEST(PolicyCost, DeterministicGivenSeed) {
    const auto d = small_synthetic(2, 5);
    auto ctx = context_for(d);
    const ControlParams ctrl{20.0, kHorizon.t0, kHorizon.tf};
    const PolicySpec policy{PolicyKind::curb, 20.0};
    const auto a = policy_cost(d, policy, ctx, ctrl, 8, 5);
    ctx.threads = 3;
    const auto b = policy_cost(d, policy, ctx, ctrl, 8, 5);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_GT(a.std_error, 0.0);
}

TEST(Sweep, SinglePointSingleSeed) {
    const auto d = small_synthetic(4);
    const auto ctx = context_for(d);
    SweepSpec spec{PolicyKind::curb, {100.0}, {7}, "base"};
    const auto table = sweep(d, spec, ctx, false);
    ASSERT_EQ(table.rows.size(), 1u);
    EXPECT_EQ(table.rows[0].policy, "curb");
    EXPECT_EQ(table.rows[0].tunable, 100.0);
    EXPECT_EQ(table.rows[0].variant, "base");
    EXPECT_TRUE(table.rows[0].error.empty());
    EXPECT_EQ(sweep(d, spec, ctx, false), table);
}

TEST(Sweep, RecordsFailedPoints) {
    const auto d = small_synthetic(4, 5);
    const auto ctx = context_for(d);
    SweepSpec spec{PolicyKind::curb, {-1.0, 10.0}, {1, 2}, ""};
    const auto table = sweep(d, spec, ctx, false);
    ASSERT_EQ(table.rows.size(), 4u);
    EXPECT_FALSE(table.rows[0].error.empty());
    EXPECT_TRUE(table.rows[3].error.empty());
}

TEST(Calibration, MatchesTargetForEachKind) {
    const auto d = small_synthetic(6, 30);
    const auto ctx = context_for(d);
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    for (auto kind : {PolicyKind::curb, PolicyKind::oracle, PolicyKind::flag_ratio, PolicyKind::exposure,
                      PolicyKind::flag_sum}) {
        const auto result = calibrate_budget(d, kind, 8.0, ctx, seeds);
        EXPECT_TRUE(result.matched) << to_string(kind) << " got " << result.mean_fact_checks;
        EXPECT_NEAR(mean_fact_checks(d, result.policy, ctx, seeds), result.mean_fact_checks, 1e-12);
    }
}

}  // namespace
}  // namespace curb
