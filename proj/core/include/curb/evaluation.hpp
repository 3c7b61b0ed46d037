#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "curb/baselines.hpp"
#include "curb/crowd.hpp"
#include "curb/dataset.hpp"
#include "curb/results.hpp"
#include "curb/scheduler.hpp"

namespace curb {

/// Model parameters shared by every policy evaluated on a dataset.
struct EvalContext {
    CrowdParams crowd;
    KernelParams kernel;
    Horizon horizon{0.0, 14.0 * 86400.0};
    double p_f1_m1 = 0.3;   ///< true flag probability of fake stories (Oracle)
    double p_f1_m0 = 0.01;  ///< true flag probability of genuine stories (Oracle)
    unsigned threads = 1;

    double true_flag_probability(Label label) const { return label == Label::fake ? p_f1_m1 : p_f1_m0; }
};

/// Crowd parameters estimated the usual way: p_d is the dataset's fake share.
CrowdParams crowd_for_dataset(const CascadeDataset& dataset, double p_f1_m1, double p_f1_m0, double prior_strength);

struct StoryOutcome {
    std::string story_id;
    Label label = Label::genuine;
    FactCheckDecision decision;
    std::int64_t exposures_total = 0;
    std::int64_t exposures_after_decision = 0;  ///< exposures strictly after the dispatch time
};

struct ReplayOutcome {
    std::vector<StoryOutcome> stories;

    std::int64_t n_fact_checks() const;
};

/// Counterfactual outcome of fixed dispatch decisions on a recorded dataset. Decisions are
/// matched to stories by id; stories without a decision count as never dispatched.
ReplayOutcome outcome_from_decisions(const CascadeDataset& dataset, std::span<const FactCheckDecision> decisions);

/// Runs `policy` on every story (seeded by derive_seed(seed, story_id)) and replays the outcome.
ReplayOutcome replay_evaluate(const CascadeDataset& dataset, const PolicySpec& policy, const EvalContext& ctx,
                              std::uint64_t seed, SchedulerStats* stats = nullptr);

/// Dispatch decisions only.
std::vector<FactCheckDecision> schedule_dataset(const CascadeDataset& dataset, const PolicySpec& policy,
                                                const EvalContext& ctx, std::uint64_t seed,
                                                SchedulerStats* stats = nullptr);

/// Fraction of dispatched stories that are fake; nullopt without dispatches.
std::optional<double> precision(const ReplayOutcome& outcome);

/// Prevented fake exposures over all fake exposures; nullopt when there are none.
std::optional<double> misinfo_reduction(const ReplayOutcome& outcome);

/// Per-fake-story prevented share, averaged over fake stories with at least one exposure.
std::optional<double> misinfo_reduction_macro(const ReplayOutcome& outcome);

struct CostBreakdown {
    double misinfo = 0.0;   ///< integral of (1/2) lambda_hat_m^2
    double control = 0.0;   ///< integral of (1/2) q u^2
    double terminal = 0.0;  ///< (1/2) lambda_hat_m(tf)^2 when never dispatched

    double total() const { return misinfo + control + terminal; }
    CostBreakdown& operator+=(const CostBreakdown& other);
};

/// Realized quadratic cost of one story's trajectory given its dispatch time. The posterior
/// misinformation rate and the policy intensity are exponentials between events, so each
/// segment is integrated in closed form. A dispatch zeroes lambda_e and ends the cost.
CostBreakdown trajectory_cost(std::span<const EventRecord> events, const DispatchIntensity& policy,
                              const CrowdParams& crowd, double q, Horizon horizon, const KernelParams& kernel,
                              std::optional<double> dispatch);

struct CostEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t runs = 0;
    CostBreakdown mean_parts;
};

/// Monte Carlo estimate of the expected objective summed over stories, with control weight
/// `ctrl.q` in the running loss. Only stochastic policies have a defined control cost.
CostEstimate policy_cost(const CascadeDataset& dataset, const PolicySpec& policy, const EvalContext& ctx,
                         const ControlParams& ctrl, std::size_t n_runs, std::uint64_t seed);

/// Mean realized fact-check count of `policy` over `seeds`.
double mean_fact_checks(const CascadeDataset& dataset, const PolicySpec& policy, const EvalContext& ctx,
                        std::span<const std::uint64_t> seeds);

struct CalibrationResult {
    PolicySpec policy;
    double mean_fact_checks = 0.0;
    bool matched = false;  ///< within the requested relative tolerance
};

/// Bisects the policy tunable (log-q, or the integer threshold) until the mean fact-check count
/// over `seeds` is within `tolerance` (relative) of `target`.
CalibrationResult calibrate_budget(const CascadeDataset& dataset, PolicyKind kind, double target,
                                   const EvalContext& ctx, std::span<const std::uint64_t> seeds,
                                   double tolerance = 0.10, int max_iterations = 60);

struct SweepSpec {
    PolicyKind kind = PolicyKind::curb;
    std::vector<double> grid;  ///< q values, or thresholds for flag_sum
    std::vector<std::uint64_t> seeds;
    std::string variant;

    void validate() const;
};

/// One row per (grid point, seed), sorted. Failed points are recorded with an error message.
ResultsTable sweep(const CascadeDataset& dataset, const SweepSpec& spec, const EvalContext& ctx,
                   bool record_runtime = true);

ResultsRow summarize(const ReplayOutcome& outcome, const PolicySpec& policy, std::uint64_t seed);

}  // namespace curb
