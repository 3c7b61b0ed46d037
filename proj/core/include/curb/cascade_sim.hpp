#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "curb/dataset.hpp"
#include "curb/rng.hpp"
#include "curb/scheduler.hpp"
#include "curb/tpp.hpp"

namespace curb {

/// Ground truth for one synthetic story.
struct StoryConfig {
    std::string story_id;
    Label label = Label::genuine;
    double r_s = 0.0;  ///< reshare probability per exposure
    double f_s = 0.0;  ///< flag probability per exposure
    std::vector<double> posts;  ///< exogenous post times, sorted
};

struct SimConfig {
    KernelParams kernel;
    Horizon horizon{0.0, 14.0 * 86400.0};
    double p_f1_m1 = 0.3;   ///< flag probability on fake stories
    double p_f1_m0 = 0.01;  ///< flag probability on genuine stories
    std::uint64_t seed = 1;
    std::size_t event_cap = 1'000'000;  ///< abort threshold for supercritical cascades

    void validate() const;
    double flag_probability(Label label) const { return label == Label::fake ? p_f1_m1 : p_f1_m0; }
};

/// Exact simulation of the self-exciting exposure process driven by a skeleton of posts and
/// (optionally) observed reshares. Synthesized exposures reshare with probability `r_s`;
/// every post and reshare adds gamma to lambda_e. Output is sorted, contains the skeleton and
/// carries no flags. When `lambda_trace` is given it receives lambda_e right after each
/// output event; `origin` receives the skeleton index of each output event (-1 if synthesized).
std::vector<EventRecord> expand_skeleton(std::span<const EventRecord> skeleton, double r_s, const SimConfig& sim,
                                         Rng& rng, std::vector<double>* lambda_trace = nullptr,
                                         std::vector<std::ptrdiff_t>* origin = nullptr);

/// Exposures for a story's exogenous posts.
std::vector<EventRecord> generate_exposures(const StoryConfig& story, const SimConfig& sim, Rng& rng,
                                            std::vector<double>* lambda_trace = nullptr);

/// Replaces each exposure's flag with a Bernoulli draw at the label's flag probability.
std::vector<EventRecord> sample_flags(std::vector<EventRecord> events, Label label, double p_f1_m1, double p_f1_m0,
                                      Rng& rng);

struct SyntheticOptions {
    std::size_t n_stories = 50;
    double fake_fraction = 0.15;
    std::size_t posts_min = 5;
    std::size_t posts_max = 20;
    double r_min = 0.0;
    double r_max = 0.05;
    double start_window = 0.5;              ///< first post within this fraction of the horizon
    double spread_min_s = 1.0 * 86400.0;    ///< posts spread over [start, start + spread]
    double spread_max_s = 3.0 * 86400.0;

    void validate() const;
};

struct SyntheticDataset {
    CascadeDataset dataset;
    std::vector<StoryConfig> truth;  ///< in story id order
};

/// Labeled synthetic dataset; exactly round(fake_fraction * n_stories) stories are fake.
SyntheticDataset synthetic_dataset(const SyntheticOptions& options, const SimConfig& sim);

/// Synthesizes exposures and flags around an observed posts/reshares skeleton. Observed reshare
/// marks are kept; synthesized exposures never reshare.
CascadeDataset synthesize_from_skeleton(const CascadeDataset& skeleton, const SimConfig& sim);

}  // namespace curb
