#include "curb/crowd.hpp"

#include <cmath>
#include <string>

#include "curb/tpp.hpp"

namespace curb {
namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void CrowdParams::validate() const {
    if (!is_probability(p_m_f0) || !is_probability(p_m_f1) || p_m_f0 > p_m_f1) {
        throw PreconditionError("crowd params need 0 <= p_m_f0 <= p_m_f1 <= 1");
    }
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
        throw PreconditionError("crowd prior needs alpha > 0 and beta > 0");
    }
}

void StoryCounts::validate() const {
    if (n_exposures < 0 || n_posts < 0 || n_flags < 0 || n_flags > n_exposures) {
        throw PreconditionError("story counts need 0 <= N^f <= N^e and N^p >= 0");
    }
}

double posterior_flag_mean(const CrowdParams& crowd, const StoryCounts& counts) {
    return (crowd.alpha + static_cast<double>(counts.n_flags)) /
           (crowd.alpha + crowd.beta + static_cast<double>(counts.n_exposures));
}

double misinfo_coefficient(const CrowdParams& crowd, double flag_probability) {
    return crowd.p_m_f0 + (crowd.p_m_f1 - crowd.p_m_f0) * flag_probability;
}

double misinfo_posterior_rate(const CrowdParams& crowd, const StoryCounts& counts, double lambda_e) {
    return misinfo_coefficient(crowd, posterior_flag_mean(crowd, counts)) * lambda_e;
}

double misinfo_true_rate(double f_s, const CrowdParams& crowd, double lambda_e) {
    if (!is_probability(f_s)) throw PreconditionError("flag probability outside [0,1]");
    return misinfo_coefficient(crowd, f_s) * lambda_e;
}

MisinfoGivenFlag flag_to_misinfo_probs(double p_f1_m1, double p_f1_m0, double p_d) {
    if (!is_probability(p_f1_m1) || !is_probability(p_f1_m0) || !is_probability(p_d)) {
        throw PreconditionError("flag_to_misinfo_probs: inputs must lie in [0,1]");
    }
    if (p_f1_m1 < p_f1_m0) {
        throw PreconditionError("flag_to_misinfo_probs: flags must not be evidence against misinformation");
    }
    const double flag_fake = p_f1_m1 * p_d;
    const double flag_genuine = p_f1_m0 * (1.0 - p_d);
    const double noflag_fake = (1.0 - p_f1_m1) * p_d;
    const double noflag_genuine = (1.0 - p_f1_m0) * (1.0 - p_d);
    if (flag_fake + flag_genuine == 0.0 || noflag_fake + noflag_genuine == 0.0) {
        throw PreconditionError("flag_to_misinfo_probs: zero evidence denominator");
    }
    return {flag_fake / (flag_fake + flag_genuine), noflag_fake / (noflag_fake + noflag_genuine)};
}

double marginal_flag_rate(double p_f1_m1, double p_f1_m0, double p_d) {
    return p_f1_m1 * p_d + p_f1_m0 * (1.0 - p_d);
}

BetaPrior prior_from_marginal(double p_f1_m1, double p_f1_m0, double p_d, double strength) {
    if (!(strength > 0.0)) throw PreconditionError("prior strength must be positive");
    const double mean = marginal_flag_rate(p_f1_m1, p_f1_m0, p_d);
    return {strength * mean, strength * (1.0 - mean)};
}

CrowdParams make_crowd_params(double p_f1_m1, double p_f1_m0, double p_d, double prior_strength) {
    const auto probs = flag_to_misinfo_probs(p_f1_m1, p_f1_m0, p_d);
    const auto prior = prior_from_marginal(p_f1_m1, p_f1_m0, p_d, prior_strength);
    CrowdParams crowd{probs.p_m_f1, probs.p_m_f0, prior.alpha, prior.beta};
    crowd.validate();
    return crowd;
}

}  // namespace curb
