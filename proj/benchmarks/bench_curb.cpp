#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "curb/cascade_sim.hpp"
#include "curb/evaluation.hpp"
#include "curb/scheduler.hpp"

namespace {

using namespace curb;

const KernelParams kKernel{1e-4, 1e-5};

std::vector<EventRecord> story_with_posts(int posts, std::uint64_t seed) {
    SimConfig sim;
    StoryConfig story{"bench", Label::fake, 0.05, 0.3, {}};
    for (int i = 0; i < posts; ++i) story.posts.push_back(3600.0 + 600.0 * i);
    Rng rng(seed);
    return sample_flags(generate_exposures(story, sim, rng), Label::fake, 0.3, 0.01, rng);
}

// Per-event cost of the event-driven sampler; q large so nearly every event is consumed.
void BM_schedule_story(benchmark::State& state) {
    const auto events = story_with_posts(static_cast<int>(state.range(0)), 1);
    const CrowdParams crowd = make_crowd_params(0.3, 0.01, 0.15, 2.0);
    const ControlParams ctrl{1e8, 0.0, 14.0 * 86400.0};
    std::uint64_t seed = 0;
    for (auto _ : state) {
        Rng rng(++seed);
        benchmark::DoNotOptimize(schedule_story("bench", events, crowd, ctrl, kKernel, rng));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(events.size()));
}
BENCHMARK(BM_schedule_story)->Arg(10)->Arg(100)->Arg(1000);

void BM_generate_exposures(benchmark::State& state) {
    SimConfig sim;
    StoryConfig story{"bench", Label::genuine, 0.05, 0.0, {}};
    for (int i = 0; i < state.range(0); ++i) story.posts.push_back(3600.0 + 600.0 * i);
    std::uint64_t seed = 0;
    std::int64_t produced = 0;
    for (auto _ : state) {
        Rng rng(++seed);
        const auto events = generate_exposures(story, sim, rng);
        produced += static_cast<std::int64_t>(events.size());
    }
    state.SetItemsProcessed(produced);
}
BENCHMARK(BM_generate_exposures)->Arg(10)->Arg(100)->Arg(1000);

void BM_replay_intensity(benchmark::State& state) {
    const auto events = story_with_posts(static_cast<int>(state.range(0)), 2);
    for (auto _ : state) benchmark::DoNotOptimize(replay_intensity(events, kKernel));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(events.size()));
}
BENCHMARK(BM_replay_intensity)->Arg(100)->Arg(1000);

void BM_replay_evaluate_default_dataset(benchmark::State& state) {
    SimConfig sim;
    const auto dataset = synthetic_dataset({}, sim).dataset;
    EvalContext ctx;
    ctx.crowd = crowd_for_dataset(dataset, sim.p_f1_m1, sim.p_f1_m0, 2.0);
    const PolicySpec policy{PolicyKind::curb, 5000.0};
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(replay_evaluate(dataset, policy, ctx, ++seed));
}
BENCHMARK(BM_replay_evaluate_default_dataset);

}  // namespace

BENCHMARK_MAIN();
