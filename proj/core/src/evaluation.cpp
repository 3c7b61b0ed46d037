#include "curb/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <map>

namespace curb {

CrowdParams crowd_for_dataset(const CascadeDataset& dataset, double p_f1_m1, double p_f1_m0, double prior_strength) {
    return make_crowd_params(p_f1_m1, p_f1_m0, dataset.fake_fraction(), prior_strength);
}

std::int64_t ReplayOutcome::n_fact_checks() const {
    return std::count_if(stories.begin(), stories.end(), [](const StoryOutcome& s) { return s.decision.time.has_value(); });
}

namespace {

/// Runs fn(i) for i in [0, n) on up to `threads` workers, preserving index ownership.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::future<void>> workers;
    for (unsigned w = 0; w < threads; ++w) {
        workers.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t i = w; i < n; i += threads) fn(i);
        }));
    }
    for (auto& worker : workers) worker.get();
}

std::vector<const Story*> story_list(const CascadeDataset& dataset) {
    std::vector<const Story*> out;
    out.reserve(dataset.stories.size());
    for (const auto& [id, story] : dataset.stories) out.push_back(&story);
    return out;
}

double decay_integral(double rate, double length) {
    return rate > 0.0 ? -std::expm1(-rate * length) / rate : length;
}

}  // namespace

std::vector<FactCheckDecision> schedule_dataset(const CascadeDataset& dataset, const PolicySpec& policy,
                                                const EvalContext& ctx, std::uint64_t seed, SchedulerStats* stats) {
    policy.validate();
    const auto stories = story_list(dataset);
    std::vector<FactCheckDecision> decisions(stories.size());
    std::vector<SchedulerStats> per_story(stories.size());
    parallel_for(stories.size(), ctx.threads, [&](std::size_t i) {
        const Story& story = *stories[i];
        Rng rng(derive_seed(seed, story.story_id));
        const StoryTruth truth{ctx.true_flag_probability(story.label)};
        try {
            decisions[i] = schedule_with_policy(story.story_id, story.events, policy, truth, ctx.crowd, ctx.horizon,
                                                ctx.kernel, rng, &per_story[i]);
        } catch (const PreconditionError& err) {
            throw PreconditionError("story " + story.story_id + ": " + err.what());
        }
    });
    if (stats) {
        for (const auto& s : per_story) *stats += s;
    }
    return decisions;
}

ReplayOutcome outcome_from_decisions(const CascadeDataset& dataset, std::span<const FactCheckDecision> decisions) {
    std::map<std::string, std::optional<double>> by_id;
    for (const auto& d : decisions) by_id[d.story_id] = d.time;

    ReplayOutcome out;
    for (const auto& [id, story] : dataset.stories) {
        StoryOutcome so;
        so.story_id = id;
        so.label = story.label;
        so.decision.story_id = id;
        if (auto it = by_id.find(id); it != by_id.end()) so.decision.time = it->second;
        for (const auto& e : story.events) {
            if (e.kind != EventKind::exposure) continue;
            ++so.exposures_total;
            if (so.decision.time && e.time > *so.decision.time) ++so.exposures_after_decision;
        }
        out.stories.push_back(std::move(so));
    }
    return out;
}

ReplayOutcome replay_evaluate(const CascadeDataset& dataset, const PolicySpec& policy, const EvalContext& ctx,
                              std::uint64_t seed, SchedulerStats* stats) {
    const auto decisions = schedule_dataset(dataset, policy, ctx, seed, stats);
    return outcome_from_decisions(dataset, decisions);
}

std::optional<double> precision(const ReplayOutcome& outcome) {
    std::int64_t dispatched = 0;
    std::int64_t fake = 0;
    for (const auto& s : outcome.stories) {
        if (!s.decision.time) continue;
        ++dispatched;
        if (s.label == Label::fake) ++fake;
    }
    if (dispatched == 0) return std::nullopt;
    return static_cast<double>(fake) / static_cast<double>(dispatched);
}

std::optional<double> misinfo_reduction(const ReplayOutcome& outcome) {
    std::int64_t prevented = 0;
    std::int64_t total = 0;
    for (const auto& s : outcome.stories) {
        if (s.label != Label::fake) continue;
        prevented += s.exposures_after_decision;
        total += s.exposures_total;
    }
    if (total == 0) return std::nullopt;
    return static_cast<double>(prevented) / static_cast<double>(total);
}

std::optional<double> misinfo_reduction_macro(const ReplayOutcome& outcome) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& s : outcome.stories) {
        if (s.label != Label::fake || s.exposures_total == 0) continue;
        sum += static_cast<double>(s.exposures_after_decision) / static_cast<double>(s.exposures_total);
        ++count;
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

CostBreakdown& CostBreakdown::operator+=(const CostBreakdown& other) {
    misinfo += other.misinfo;
    control += other.control;
    terminal += other.terminal;
    return *this;
}

CostBreakdown trajectory_cost(std::span<const EventRecord> events, const DispatchIntensity& policy,
                              const CrowdParams& crowd, double q, Horizon horizon, const KernelParams& kernel,
                              std::optional<double> dispatch) {
    validate_stream(events, horizon);
    const bool dispatched = dispatch && *dispatch < horizon.tf;
    const double end = dispatched ? std::max(*dispatch, horizon.t0) : horizon.tf;

    CostBreakdown cost;
    StoryState state;
    state.intensity = {0.0, horizon.t0};
    const double u_decay = policy.decay_rate();

    auto advance = [&](double to) {
        const double length = to - state.intensity.t_cursor;
        if (length > 0.0) {
            const double m = misinfo_posterior_rate(crowd, state.counts, state.intensity.lambda_e);
            const double u = policy.at(state);
            cost.misinfo += 0.5 * m * m * decay_integral(2.0 * kernel.omega, length);
            cost.control += 0.5 * q * u * u * decay_integral(2.0 * u_decay, length);
        }
        state.intensity = decay(state.intensity, kernel, to);
    };

    for (const EventRecord& e : events) {
        if (dispatched ? e.time >= end : e.time > end) break;
        advance(e.time);
        if (e.kind == EventKind::exposure) {
            ++state.counts.n_exposures;
            if (e.flag) ++state.counts.n_flags;
        } else {
            ++state.counts.n_posts;
        }
        if (e.triggers()) state.intensity = apply_jump(state.intensity, kernel);
    }
    advance(end);
    if (!dispatched) {
        const double m = misinfo_posterior_rate(crowd, state.counts, state.intensity.lambda_e);
        cost.terminal = 0.5 * m * m;
    }
    return cost;
}

CostEstimate policy_cost(const CascadeDataset& dataset, const PolicySpec& policy, const EvalContext& ctx,
                         const ControlParams& ctrl, std::size_t n_runs, std::uint64_t seed) {
    if (n_runs < 2) throw PreconditionError("policy_cost needs at least 2 runs");
    if (!policy.stochastic()) throw PreconditionError("policy_cost is defined for intensity policies only");
    ctrl.validate();
    policy.validate();
    const Horizon horizon{ctrl.t0, ctrl.tf};
    const auto stories = story_list(dataset);

    std::vector<std::unique_ptr<DispatchIntensity>> intensities;
    for (const Story* story : stories) {
        intensities.push_back(make_dispatch_intensity(policy, {ctx.true_flag_probability(story->label)}, ctx.crowd,
                                                      ctx.kernel));
    }

    std::vector<CostBreakdown> per_run(n_runs);
    const Rng root(seed);
    parallel_for(n_runs, ctx.threads, [&](std::size_t r) {
        const std::uint64_t run_seed = root.substream(static_cast<std::uint64_t>(r)).seed();
        CostBreakdown total;
        for (std::size_t i = 0; i < stories.size(); ++i) {
            const Story& story = *stories[i];
            Rng rng(derive_seed(run_seed, story.story_id));
            const auto decision =
                schedule_story(story.story_id, story.events, *intensities[i], horizon, ctx.kernel, rng);
            total += trajectory_cost(story.events, *intensities[i], ctx.crowd, ctrl.q, horizon, ctx.kernel,
                                     decision.time);
        }
        per_run[r] = total;
    });

    CostEstimate est;
    est.runs = n_runs;
    double sum = 0.0;
    for (const auto& c : per_run) {
        sum += c.total();
        est.mean_parts += c;
    }
    est.mean = sum / static_cast<double>(n_runs);
    est.mean_parts.misinfo /= static_cast<double>(n_runs);
    est.mean_parts.control /= static_cast<double>(n_runs);
    est.mean_parts.terminal /= static_cast<double>(n_runs);
    double ss = 0.0;
    for (const auto& c : per_run) ss += (c.total() - est.mean) * (c.total() - est.mean);
    est.std_error = std::sqrt(ss / static_cast<double>(n_runs - 1) / static_cast<double>(n_runs));
    return est;
}

double mean_fact_checks(const CascadeDataset& dataset, const PolicySpec& policy, const EvalContext& ctx,
                        std::span<const std::uint64_t> seeds) {
    if (seeds.empty()) throw PreconditionError("need at least one seed");
    double total = 0.0;
    for (auto seed : seeds) {
        const auto decisions = schedule_dataset(dataset, policy, ctx, seed);
        total += static_cast<double>(
            std::count_if(decisions.begin(), decisions.end(), [](const auto& d) { return d.time.has_value(); }));
    }
    return total / static_cast<double>(seeds.size());
}

CalibrationResult calibrate_budget(const CascadeDataset& dataset, PolicyKind kind, double target,
                                   const EvalContext& ctx, std::span<const std::uint64_t> seeds, double tolerance,
                                   int max_iterations) {
    if (!(target > 0.0)) throw PreconditionError("budget target must be positive");
    auto within = [&](double mean) { return std::abs(mean - target) <= tolerance * target; };

    CalibrationResult best;
    double best_gap = INFINITY;
    auto consider = [&](const PolicySpec& p, double mean) {
        const double gap = std::abs(mean - target);
        if (gap < best_gap) {
            best_gap = gap;
            best = {p, mean, within(mean)};
        }
    };

    if (kind == PolicyKind::flag_sum) {
        // Count is nonincreasing in the threshold; search the integer range by bisection.
        std::int64_t max_flags = 1;
        for (const auto& [id, story] : dataset.stories) {
            max_flags = std::max<std::int64_t>(
                max_flags, std::count_if(story.events.begin(), story.events.end(), [](const auto& e) { return e.flag; }));
        }
        std::int64_t lo = 1;
        std::int64_t hi = max_flags + 1;
        while (lo <= hi) {
            const std::int64_t mid = lo + (hi - lo) / 2;
            PolicySpec p{kind, 1.0, mid, 1.0};
            const double mean = mean_fact_checks(dataset, p, ctx, seeds);
            consider(p, mean);
            if (mean > target) {
                lo = mid + 1;
            } else {
                hi = mid - 1;
            }
        }
        return best;
    }

    // Dispatch counts fall with q for CURB/Oracle (u ~ q^{-1/2}) and rise with q for the
    // baselines (u ~ q). Bisect on log q.
    const bool increasing = kind == PolicyKind::flag_ratio || kind == PolicyKind::exposure;
    auto evaluate = [&](double log_q) {
        PolicySpec p{kind, std::exp(log_q), 1, 1.0};
        const double mean = mean_fact_checks(dataset, p, ctx, seeds);
        consider(p, mean);
        return mean;
    };
    auto too_many = [&](double mean) { return mean > target; };

    double lo = 0.0;
    double hi = 0.0;
    double mean0 = evaluate(0.0);
    if (within(mean0)) return best;
    // Step log q until the target is bracketed: moving "up" in dispatch count means larger q for
    // increasing kinds and smaller q otherwise.
    const double step = std::log(10.0);
    const double direction_up = increasing ? 1.0 : -1.0;
    const bool need_more = !too_many(mean0);
    double x = 0.0;
    bool bracketed = false;
    for (int i = 0; i < 40; ++i) {
        const double next = x + (need_more ? direction_up : -direction_up) * step;
        const double mean = evaluate(next);
        if (within(mean)) return best;
        if (too_many(mean) == need_more) {
            lo = std::min(x, next);
            hi = std::max(x, next);
            bracketed = true;
            break;
        }
        x = next;
    }
    if (!bracketed) return best;

    for (int i = 0; i < max_iterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double mean = evaluate(mid);
        if (within(mean)) return best;
        // For increasing kinds a too-large count means q is too large.
        if (too_many(mean) == increasing) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return best;
}

void SweepSpec::validate() const {
    if (grid.empty()) throw PreconditionError("sweep grid is empty");
    if (seeds.empty()) throw PreconditionError("sweep needs at least one seed");
}

ResultsRow summarize(const ReplayOutcome& outcome, const PolicySpec& policy, std::uint64_t seed) {
    ResultsRow row;
    row.policy = std::string(to_string(policy.kind));
    row.tunable = policy.tunable();
    row.seed = seed;
    row.n_fact_checks = outcome.n_fact_checks();
    row.precision = precision(outcome);
    row.misinfo_reduction = misinfo_reduction(outcome);
    row.misinfo_reduction_macro = misinfo_reduction_macro(outcome);
    return row;
}

ResultsTable sweep(const CascadeDataset& dataset, const SweepSpec& spec, const EvalContext& ctx, bool record_runtime) {
    spec.validate();
    const std::size_t n = spec.grid.size() * spec.seeds.size();
    std::vector<ResultsRow> rows(n);
    EvalContext inner = ctx;
    inner.threads = 1;
    parallel_for(n, ctx.threads, [&](std::size_t k) {
        const double value = spec.grid[k / spec.seeds.size()];
        const std::uint64_t seed = spec.seeds[k % spec.seeds.size()];
        PolicySpec policy{spec.kind, value, static_cast<std::int64_t>(std::llround(value)), 1.0};
        ResultsRow row;
        const auto start = std::chrono::steady_clock::now();
        try {
            row = summarize(replay_evaluate(dataset, policy, inner, seed), policy, seed);
        } catch (const std::exception& err) {
            row.policy = std::string(to_string(spec.kind));
            row.tunable = value;
            row.seed = seed;
            row.error = err.what();
        }
        if (record_runtime) {
            row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
        row.variant = spec.variant;
        rows[k] = std::move(row);
    });
    ResultsTable table{std::move(rows)};
    table.sort();
    return table;
}

}  // namespace curb
