#include "curb/baselines.hpp"

#include <cmath>

namespace curb {

std::string_view to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::curb: return "curb";
        case PolicyKind::oracle: return "oracle";
        case PolicyKind::flag_ratio: return "flag_ratio";
        case PolicyKind::flag_sum: return "flag_sum";
        case PolicyKind::exposure: return "exposure";
    }
    return "unknown";
}

PolicyKind parse_policy_kind(std::string_view name) {
    for (auto kind : {PolicyKind::curb, PolicyKind::oracle, PolicyKind::flag_ratio, PolicyKind::flag_sum,
                      PolicyKind::exposure}) {
        if (to_string(kind) == name) return kind;
    }
    throw PreconditionError("unknown policy '" + std::string(name) + "'");
}

void PolicySpec::validate() const {
    if (stochastic()) {
        if (!(q > 0.0) || !std::isfinite(q)) throw PreconditionError("policy q must be positive");
        if (!(scale >= 0.0) || !std::isfinite(scale)) throw PreconditionError("policy scale must be >= 0");
    } else if (threshold < 1) {
        throw PreconditionError("flag_sum threshold must be >= 1");
    }
}

double oracle_intensity(const StoryState& state, double f_true, const CrowdParams& crowd, double q) {
    if (state.fact_checked) return 0.0;
    return misinfo_true_rate(f_true, crowd, state.intensity.lambda_e) / std::sqrt(q);
}

double flag_ratio_intensity(const StoryState& state, const CrowdParams& crowd, double q) {
    if (state.fact_checked) return 0.0;
    return q * posterior_flag_mean(crowd, state.counts);
}

bool flag_sum_decision(const StoryState& state, std::int64_t threshold) {
    return !state.fact_checked && state.counts.n_flags >= threshold;
}

double exposure_intensity(const StoryState& state, double q) {
    if (state.fact_checked) return 0.0;
    return q * state.intensity.lambda_e;
}

OracleIntensity::OracleIntensity(CrowdParams crowd, double f_true, double q, const KernelParams& kernel, double scale)
    : crowd_(crowd), f_true_(f_true), q_(q), omega_(kernel.omega), scale_(scale) {
    if (!(f_true_ >= 0.0 && f_true_ <= 1.0)) throw PreconditionError("oracle flag probability outside [0,1]");
}

double OracleIntensity::at(const StoryState& state) const {
    return scale_ * oracle_intensity(state, f_true_, crowd_, q_);
}

FlagRatioIntensity::FlagRatioIntensity(CrowdParams crowd, double q, double scale)
    : crowd_(crowd), q_(q), scale_(scale) {}

double FlagRatioIntensity::at(const StoryState& state) const {
    return scale_ * flag_ratio_intensity(state, crowd_, q_);
}

ExposureIntensity::ExposureIntensity(double q, const KernelParams& kernel, double scale)
    : q_(q), omega_(kernel.omega), scale_(scale) {}

double ExposureIntensity::at(const StoryState& state) const { return scale_ * exposure_intensity(state, q_); }

FactCheckDecision flag_sum_schedule(std::string story_id, std::span<const EventRecord> events,
                                    std::int64_t threshold, Horizon horizon) {
    if (threshold < 1) throw PreconditionError("flag_sum threshold must be >= 1");
    validate_stream(events, horizon);
    StoryState state;
    for (const EventRecord& e : events) {
        if (e.kind != EventKind::exposure) continue;
        ++state.counts.n_exposures;
        if (e.flag) ++state.counts.n_flags;
        if (flag_sum_decision(state, threshold)) return {std::move(story_id), e.time};
    }
    return {std::move(story_id), std::nullopt};
}

std::unique_ptr<DispatchIntensity> make_dispatch_intensity(const PolicySpec& policy, const StoryTruth& truth,
                                                           const CrowdParams& crowd, const KernelParams& kernel) {
    policy.validate();
    switch (policy.kind) {
        case PolicyKind::curb:
            return std::make_unique<CurbIntensity>(crowd, policy.q, kernel, policy.scale);
        case PolicyKind::oracle:
            return std::make_unique<OracleIntensity>(crowd, truth.f_true, policy.q, kernel, policy.scale);
        case PolicyKind::flag_ratio:
            return std::make_unique<FlagRatioIntensity>(crowd, policy.q, policy.scale);
        case PolicyKind::exposure:
            return std::make_unique<ExposureIntensity>(policy.q, kernel, policy.scale);
        case PolicyKind::flag_sum:
            break;
    }
    throw PreconditionError("flag_sum is deterministic and has no dispatch intensity");
}

FactCheckDecision schedule_with_policy(std::string story_id, std::span<const EventRecord> events,
                                       const PolicySpec& policy, const StoryTruth& truth, const CrowdParams& crowd,
                                       Horizon horizon, const KernelParams& kernel, Rng& rng,
                                       SchedulerStats* stats) {
    if (policy.kind == PolicyKind::flag_sum) {
        policy.validate();
        return flag_sum_schedule(std::move(story_id), events, policy.threshold, horizon);
    }
    const auto intensity = make_dispatch_intensity(policy, truth, crowd, kernel);
    return schedule_story(std::move(story_id), events, *intensity, horizon, kernel, rng, stats);
}

}  // namespace curb
