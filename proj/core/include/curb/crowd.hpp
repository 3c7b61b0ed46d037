#pragma once

#include <cstdint>
#include <utility>

namespace curb {

/// Flag-conditional misinformation probabilities and the Beta prior on a story's
/// flag probability. The probabilities are shared by all stories.
struct CrowdParams {
    double p_m_f1 = 0.0;  ///< P(misinformation | flag)
    double p_m_f0 = 0.0;  ///< P(misinformation | no flag)
    double alpha = 1.0;   ///< prior pseudo-flags
    double beta = 1.0;    ///< prior pseudo-non-flags

    void validate() const;
};

/// Running per-story counters N^e, N^f, N^p.
struct StoryCounts {
    std::int64_t n_exposures = 0;
    std::int64_t n_flags = 0;
    std::int64_t n_posts = 0;

    void validate() const;
    friend bool operator==(const StoryCounts&, const StoryCounts&) = default;
};

/// Posterior mean of the flag probability, (alpha + N^f) / (alpha + beta + N^e).
double posterior_flag_mean(const CrowdParams& crowd, const StoryCounts& counts);

/// [p_m_f0 + (p_m_f1 - p_m_f0) * f] for a flag probability f.
double misinfo_coefficient(const CrowdParams& crowd, double flag_probability);

/// Posterior estimate of the misinformation rate given the crowd's flags so far.
double misinfo_posterior_rate(const CrowdParams& crowd, const StoryCounts& counts, double lambda_e);

/// Misinformation rate under a known flag probability f_s.
double misinfo_true_rate(double f_s, const CrowdParams& crowd, double lambda_e);

struct MisinfoGivenFlag {
    double p_m_f1 = 0.0;
    double p_m_f0 = 0.0;
};

/// Bayes inversion of the flag likelihoods P(f=1|m=1), P(f=1|m=0) under a prior p_d that
/// a story is fake.
MisinfoGivenFlag flag_to_misinfo_probs(double p_f1_m1, double p_f1_m0, double p_d);

/// Marginal flag rate p_f1_m1 * p_d + p_f1_m0 * (1 - p_d).
double marginal_flag_rate(double p_f1_m1, double p_f1_m0, double p_d);

struct BetaPrior {
    double alpha = 1.0;
    double beta = 1.0;
};

/// Beta prior with mean equal to the marginal flag rate and alpha + beta = strength.
BetaPrior prior_from_marginal(double p_f1_m1, double p_f1_m0, double p_d, double strength);

/// Convenience: full CrowdParams from flag likelihoods, fake prior and prior strength.
CrowdParams make_crowd_params(double p_f1_m1, double p_f1_m0, double p_d, double prior_strength);

}  // namespace curb
