#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "curb/crowd.hpp"
#include "curb/rng.hpp"
#include "curb/tpp.hpp"

namespace curb {

/// Everything the dispatch intensity of one story depends on at a time cursor.
struct StoryState {
    std::string story_id;
    StoryCounts counts;
    IntensityState intensity;
    bool fact_checked = false;  ///< M(t); never reverts once set
};

struct ControlParams {
    double q = 1.0;  ///< fact-check cost weight
    double t0 = 0.0;
    double tf = 1.0;

    void validate() const;
};

struct FactCheckDecision {
    std::string story_id;
    std::optional<double> time;  ///< nullopt: not dispatched within (t0, tf]

    friend bool operator==(const FactCheckDecision&, const FactCheckDecision&) = default;
};

/// u*(t) = q^{-1/2} (1 - M) [p_m_f0 + (p_m_f1 - p_m_f0)(alpha + N^f)/(alpha + beta + N^e)] lambda_e,
/// evaluated at state.intensity.t_cursor.
double optimal_intensity(const StoryState& state, const CrowdParams& crowd, const ControlParams& ctrl);

/// Closed-form optimal cost-to-go J for the quadratic loss. The formula does not involve M;
/// callers encode a fact-checked story by zeroing lambda_e.
double cost_to_go(const StoryState& state, const CrowdParams& crowd, const ControlParams& ctrl,
                  double reshare_prob, const KernelParams& kernel);

/// q^{-1} (1 - M) [J(M, lambda_e) - J(M + 1, 0)]: the control recovered from the cost-to-go.
double intensity_from_cost_to_go(const StoryState& state, const CrowdParams& crowd, const ControlParams& ctrl,
                                 double reshare_prob, const KernelParams& kernel);

/// A stochastic dispatch policy: an intensity that is a function of the story state and
/// that, between events, decays as exp(-decay_rate * elapsed).
class DispatchIntensity {
public:
    virtual ~DispatchIntensity() = default;
    /// Intensity at state.intensity.t_cursor; must be 0 once the story is fact-checked.
    virtual double at(const StoryState& state) const = 0;
    virtual double decay_rate() const = 0;
};

/// The optimal intensity u*, optionally multiplied by `scale` (used to probe optimality).
class CurbIntensity final : public DispatchIntensity {
public:
    CurbIntensity(CrowdParams crowd, double q, const KernelParams& kernel, double scale = 1.0);
    double at(const StoryState& state) const override;
    double decay_rate() const override { return omega_; }

private:
    CrowdParams crowd_;
    double q_;
    double omega_;
    double scale_;
};

struct Horizon {
    double t0 = 0.0;
    double tf = 1.0;
};

struct SchedulerStats {
    std::uint64_t events_consumed = 0;
    std::uint64_t candidate_draws = 0;  ///< calls into an event-time sampler
    std::uint64_t thinning_tests = 0;   ///< keep/resample decisions on a live candidate

    SchedulerStats& operator+=(const SchedulerStats& other);
};

/// Event-driven sampler for a single story's dispatch time under `policy`.
///
/// Events are consumed in order while they precede the current candidate tau. At each event the
/// intensity before (u0), after the counter update (u_mid) and after any kernel jump (u_new) is
/// evaluated. A drop u_mid < u0 keeps tau with probability u_mid/u0 and otherwise resamples from
/// tau; a rise above the post-thinning level is covered by a superposed draw starting at the
/// event. Between events the intensity decays exactly, so each draw is an exact inversion.
FactCheckDecision schedule_story(std::string story_id, std::span<const EventRecord> events,
                                 const DispatchIntensity& policy, Horizon horizon, const KernelParams& kernel,
                                 Rng& rng, SchedulerStats* stats = nullptr);

/// CURB for one story.
FactCheckDecision schedule_story(std::string story_id, std::span<const EventRecord> events,
                                 const CrowdParams& crowd, const ControlParams& ctrl, const KernelParams& kernel,
                                 Rng& rng, SchedulerStats* stats = nullptr);

struct StoryInput {
    std::string story_id;
    std::span<const EventRecord> events;
    double q = 1.0;
};

/// Independent CURB instances, one per story, each seeded with derive_seed(seed, story_id).
/// Results follow input order; `threads` > 1 runs stories concurrently.
std::vector<FactCheckDecision> schedule_all(std::span<const StoryInput> stories, const CrowdParams& crowd,
                                            Horizon horizon, const KernelParams& kernel, std::uint64_t seed,
                                            SchedulerStats* stats = nullptr, unsigned threads = 1);

/// Checks sortedness and that every event lies in (t0, tf].
void validate_stream(std::span<const EventRecord> events, Horizon horizon);

}  // namespace curb
