#include "curb/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <future>
#include <string>

namespace curb {

void ControlParams::validate() const {
    if (!(q > 0.0) || !std::isfinite(q)) throw PreconditionError("control weight q must be positive");
    if (!(t0 < tf)) throw PreconditionError("control horizon needs t0 < tf");
}

double optimal_intensity(const StoryState& state, const CrowdParams& crowd, const ControlParams& ctrl) {
    if (state.fact_checked) return 0.0;
    return misinfo_posterior_rate(crowd, state.counts, state.intensity.lambda_e) / std::sqrt(ctrl.q);
}

double cost_to_go(const StoryState& state, const CrowdParams& crowd, const ControlParams& ctrl,
                  double reshare_prob, const KernelParams& kernel) {
    const double coefficient = misinfo_coefficient(crowd, posterior_flag_mean(crowd, state.counts));
    const double prior_mass = crowd.alpha + crowd.beta + static_cast<double>(state.counts.n_exposures);
    const double bracket = state.intensity.lambda_e - kernel.gamma * static_cast<double>(state.counts.n_posts) -
                           (kernel.gamma * reshare_prob - kernel.omega) * prior_mass;
    return std::sqrt(ctrl.q) * coefficient * bracket;
}

double intensity_from_cost_to_go(const StoryState& state, const CrowdParams& crowd, const ControlParams& ctrl,
                                 double reshare_prob, const KernelParams& kernel) {
    if (state.fact_checked) return 0.0;
    StoryState checked = state;
    checked.fact_checked = true;
    checked.intensity.lambda_e = 0.0;
    const double open_cost = cost_to_go(state, crowd, ctrl, reshare_prob, kernel);
    const double closed_cost = cost_to_go(checked, crowd, ctrl, reshare_prob, kernel);
    return (open_cost - closed_cost) / ctrl.q;
}

CurbIntensity::CurbIntensity(CrowdParams crowd, double q, const KernelParams& kernel, double scale)
    : crowd_(crowd), q_(q), omega_(kernel.omega), scale_(scale) {
    crowd_.validate();
    if (!(q_ > 0.0)) throw PreconditionError("CURB needs q > 0");
    if (!(scale_ >= 0.0)) throw PreconditionError("intensity scale must be >= 0");
}

double CurbIntensity::at(const StoryState& state) const {
    if (state.fact_checked) return 0.0;
    return scale_ * misinfo_posterior_rate(crowd_, state.counts, state.intensity.lambda_e) / std::sqrt(q_);
}

SchedulerStats& SchedulerStats::operator+=(const SchedulerStats& other) {
    events_consumed += other.events_consumed;
    candidate_draws += other.candidate_draws;
    thinning_tests += other.thinning_tests;
    return *this;
}

void validate_stream(std::span<const EventRecord> events, Horizon horizon) {
    for (std::size_t i = 0; i < events.size(); ++i) {
        const double t = events[i].time;
        if (!(t > horizon.t0) || !(t <= horizon.tf)) {
            throw PreconditionError("event " + std::to_string(i) + " at t=" + std::to_string(t) +
                                    " lies outside (t0, tf]");
        }
        if (i > 0 && t < events[i - 1].time) {
            throw PreconditionError("event stream not sorted at index " + std::to_string(i));
        }
        if (events[i].kind == EventKind::post && (events[i].reshare || events[i].flag)) {
            throw PreconditionError("post event " + std::to_string(i) + " carries exposure marks");
        }
    }
}

namespace {

class DispatchSampler {
public:
    DispatchSampler(const DispatchIntensity& policy, Horizon horizon, Rng& rng, SchedulerStats& stats)
        : policy_(policy), horizon_(horizon), rng_(rng), stats_(stats), tau_(horizon.tf) {}

    double tau() const { return tau_; }
    bool live() const { return tau_ < horizon_.tf; }

    /// Intensity at time `from` given its value u_at_t at time t.
    double propagate(double u_at_t, double t, double from) const {
        const double rate = policy_.decay_rate();
        return rate > 0.0 ? u_at_t * std::exp(-rate * (from - t)) : u_at_t;
    }

    /// First event of the intensity equal to u_start at t_start; horizon.tf if none by then.
    double draw(double u_start, double t_start) {
        ++stats_.candidate_draws;
        const double rate = policy_.decay_rate();
        const auto t = rate > 0.0 ? sample_exp_decay_time(u_start, rate, t_start, rng_)
                                  : sample_constant_time(u_start, t_start, rng_);
        return (t && *t < horizon_.tf) ? *t : horizon_.tf;
    }

    /// Intensity drops from u_before to u_after at event time t.
    void thin(double u_before, double u_after, double t) {
        if (!live() || !(u_before > 0.0)) return;
        ++stats_.thinning_tests;
        const double x = rng_.uniform();
        if (u_after / u_before < x) tau_ = draw(propagate(u_after, t, tau_), tau_);
    }

    /// Intensity rises by `increment` at event time t.
    void superpose(double increment, double t) {
        if (!(increment > 0.0)) return;
        tau_ = std::min(tau_, draw(increment, t));
    }

private:
    const DispatchIntensity& policy_;
    Horizon horizon_;
    Rng& rng_;
    SchedulerStats& stats_;
    double tau_;
};

}  // namespace

FactCheckDecision schedule_story(std::string story_id, std::span<const EventRecord> events,
                                 const DispatchIntensity& policy, Horizon horizon, const KernelParams& kernel,
                                 Rng& rng, SchedulerStats* stats) {
    kernel.validate();
    if (!(horizon.t0 < horizon.tf)) throw PreconditionError("horizon needs t0 < tf");
    validate_stream(events, horizon);

    SchedulerStats local;
    DispatchSampler sampler(policy, horizon, rng, local);
    StoryState state;
    state.story_id = story_id;
    state.intensity = {0.0, horizon.t0};
    // Zero for lambda-driven policies; flag ratio starts at its prior value.
    sampler.superpose(policy.at(state), horizon.t0);

    for (const EventRecord& e : events) {
        if (!(e.time < sampler.tau())) break;
        ++local.events_consumed;
        state.intensity = decay(state.intensity, kernel, e.time);
        const double u0 = policy.at(state);

        double u_base = u0;
        if (e.kind == EventKind::exposure) {
            ++state.counts.n_exposures;
            if (e.flag) ++state.counts.n_flags;
            const double u_mid = policy.at(state);
            if (u_mid < u0) {
                sampler.thin(u0, u_mid, e.time);
                u_base = u_mid;
            }
        } else {
            ++state.counts.n_posts;
        }

        double u_new = policy.at(state);
        if (e.triggers()) {
            state.intensity = apply_jump(state.intensity, kernel);
            u_new = policy.at(state);
        }
        if (u_new > u_base) {
            sampler.superpose(u_new - u_base, e.time);
        } else if (u_new < u_base) {
            sampler.thin(u_base, u_new, e.time);
        }
    }

    if (stats) *stats += local;
    FactCheckDecision decision{std::move(story_id), std::nullopt};
    if (sampler.live()) decision.time = sampler.tau();
    return decision;
}

FactCheckDecision schedule_story(std::string story_id, std::span<const EventRecord> events,
                                 const CrowdParams& crowd, const ControlParams& ctrl, const KernelParams& kernel,
                                 Rng& rng, SchedulerStats* stats) {
    ctrl.validate();
    const CurbIntensity policy(crowd, ctrl.q, kernel);
    return schedule_story(std::move(story_id), events, policy, {ctrl.t0, ctrl.tf}, kernel, rng, stats);
}

std::vector<FactCheckDecision> schedule_all(std::span<const StoryInput> stories, const CrowdParams& crowd,
                                            Horizon horizon, const KernelParams& kernel, std::uint64_t seed,
                                            SchedulerStats* stats, unsigned threads) {
    std::vector<FactCheckDecision> out(stories.size());
    std::vector<SchedulerStats> per_story(stories.size());

    auto run_one = [&](std::size_t i) {
        const StoryInput& story = stories[i];
        try {
            Rng rng(derive_seed(seed, story.story_id));
            ControlParams ctrl{story.q, horizon.t0, horizon.tf};
            out[i] = schedule_story(story.story_id, story.events, crowd, ctrl, kernel, rng, &per_story[i]);
        } catch (const PreconditionError& err) {
            throw PreconditionError("story " + story.story_id + ": " + err.what());
        }
    };

    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(stories.size())));
    if (threads <= 1) {
        for (std::size_t i = 0; i < stories.size(); ++i) run_one(i);
    } else {
        std::vector<std::future<void>> workers;
        for (unsigned w = 0; w < threads; ++w) {
            workers.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t i = w; i < stories.size(); i += threads) run_one(i);
            }));
        }
        for (auto& worker : workers) worker.get();
    }

    if (stats) {
        for (const auto& s : per_story) *stats += s;
    }
    return out;
}

}  // namespace curb
