#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "curb/crowd.hpp"
#include "curb/scheduler.hpp"

namespace curb {

enum class PolicyKind : std::uint8_t { curb, oracle, flag_ratio, flag_sum, exposure };

std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy_kind(std::string_view name);

/// A named dispatch policy with its tunable. `q` drives the stochastic kinds, `threshold`
/// the flag-sum rule; `scale` multiplies the stochastic intensity (1 for the published policies).
struct PolicySpec {
    PolicyKind kind = PolicyKind::curb;
    double q = 1.0;
    std::int64_t threshold = 1;
    double scale = 1.0;

    void validate() const;
    bool stochastic() const { return kind != PolicyKind::flag_sum; }
    /// The swept tunable: threshold for flag_sum, q otherwise.
    double tunable() const { return kind == PolicyKind::flag_sum ? static_cast<double>(threshold) : q; }
};

/// CURB's intensity with the posterior flag mean replaced by the true flag probability.
double oracle_intensity(const StoryState& state, double f_true, const CrowdParams& crowd, double q);

/// q (1 - M) (alpha + N^f) / (alpha + beta + N^e); ignores lambda_e.
double flag_ratio_intensity(const StoryState& state, const CrowdParams& crowd, double q);

/// True once N^f reaches the threshold on an unchecked story.
bool flag_sum_decision(const StoryState& state, std::int64_t threshold);

/// q (1 - M) lambda_e; ignores flags.
double exposure_intensity(const StoryState& state, double q);

class OracleIntensity final : public DispatchIntensity {
public:
    OracleIntensity(CrowdParams crowd, double f_true, double q, const KernelParams& kernel, double scale = 1.0);
    double at(const StoryState& state) const override;
    double decay_rate() const override { return omega_; }

private:
    CrowdParams crowd_;
    double f_true_;
    double q_;
    double omega_;
    double scale_;
};

class FlagRatioIntensity final : public DispatchIntensity {
public:
    FlagRatioIntensity(CrowdParams crowd, double q, double scale = 1.0);
    double at(const StoryState& state) const override;
    double decay_rate() const override { return 0.0; }

private:
    CrowdParams crowd_;
    double q_;
    double scale_;
};

class ExposureIntensity final : public DispatchIntensity {
public:
    ExposureIntensity(double q, const KernelParams& kernel, double scale = 1.0);
    double at(const StoryState& state) const override;
    double decay_rate() const override { return omega_; }

private:
    double q_;
    double omega_;
    double scale_;
};

/// Deterministic flag-sum rule: dispatch at the exposure whose flag brings N^f to `threshold`.
FactCheckDecision flag_sum_schedule(std::string story_id, std::span<const EventRecord> events,
                                    std::int64_t threshold, Horizon horizon);

/// Per-story facts a policy may need beyond the event stream.
struct StoryTruth {
    double f_true = 0.0;  ///< flag probability the crowd actually uses for this story
};

/// Intensity object for a stochastic policy kind; throws for flag_sum.
std::unique_ptr<DispatchIntensity> make_dispatch_intensity(const PolicySpec& policy, const StoryTruth& truth,
                                                           const CrowdParams& crowd, const KernelParams& kernel);

/// Dispatch decision for one story under any policy kind.
FactCheckDecision schedule_with_policy(std::string story_id, std::span<const EventRecord> events,
                                       const PolicySpec& policy, const StoryTruth& truth, const CrowdParams& crowd,
                                       Horizon horizon, const KernelParams& kernel, Rng& rng,
                                       SchedulerStats* stats = nullptr);

}  // namespace curb
