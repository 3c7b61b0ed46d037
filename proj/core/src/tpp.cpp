#include "curb/tpp.hpp"

#include <cmath>
#include <string>

namespace curb {

void KernelParams::validate() const {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw PreconditionError("kernel gamma must be finite and >= 0");
    if (!(omega > 0.0) || !std::isfinite(omega)) throw PreconditionError("kernel omega must be finite and > 0");
}

double kernel_eval(const KernelParams& params, double dt) {
    if (dt < 0.0) return 0.0;
    return params.gamma * std::exp(-params.omega * dt);
}

IntensityState decay(const IntensityState& state, const KernelParams& params, double t) {
    if (t < state.t_cursor) {
        throw PreconditionError("decay: target time " + std::to_string(t) + " precedes cursor " +
                                std::to_string(state.t_cursor));
    }
    if (t == state.t_cursor) return state;
    return {state.lambda_e * std::exp(-params.omega * (t - state.t_cursor)), t};
}

IntensityState apply_jump(const IntensityState& state, const KernelParams& params) {
    return {state.lambda_e + params.gamma, state.t_cursor};
}

double direct_intensity(std::span<const EventRecord> events, const KernelParams& params, double t) {
    double total = 0.0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (i > 0 && events[i].time < events[i - 1].time) {
            throw PreconditionError("direct_intensity: events not sorted at index " + std::to_string(i));
        }
        if (events[i].time >= t) continue;
        if (events[i].triggers()) total += kernel_eval(params, t - events[i].time);
    }
    return total;
}

std::vector<double> replay_intensity(std::span<const EventRecord> events, const KernelParams& params) {
    std::vector<double> out;
    out.reserve(events.size());
    IntensityState state{0.0, events.empty() ? 0.0 : events.front().time};
    for (const auto& e : events) {
        state = decay(state, params, e.time);
        if (e.triggers()) state = apply_jump(state, params);
        out.push_back(state.lambda_e);
    }
    return out;
}

std::optional<double> thinning_sample(const IntensityFn& intensity, const IntensityFn& upper_bound,
                                      double t_start, double t_max, Rng& rng, ThinningStats* stats) {
    double t = t_start;
    while (t <= t_max) {
        const double bound = upper_bound(t);
        if (!(bound > 0.0)) return std::nullopt;
        t += rng.exponential() / bound;
        if (t > t_max) return std::nullopt;
        if (stats) ++stats->candidates;
        const double value = intensity(t);
        if (value > bound * (1.0 + 1e-12)) {
            throw PreconditionError("thinning_sample: intensity " + std::to_string(value) +
                                    " exceeds bound " + std::to_string(bound) + " at t=" + std::to_string(t));
        }
        if (rng.uniform() * bound < value) {
            if (stats) ++stats->accepted;
            return t;
        }
    }
    return std::nullopt;
}

std::optional<double> sample_exp_decay_time(double u0, double omega, double t_start, Rng& rng) {
    if (!(u0 > 0.0)) return std::nullopt;
    const double e = rng.exponential();
    const double mass = u0 / omega;
    if (e >= mass) return std::nullopt;
    return t_start - std::log1p(-e / mass) / omega;
}

std::optional<double> sample_constant_time(double u0, double t_start, Rng& rng) {
    if (!(u0 > 0.0)) return std::nullopt;
    return t_start + rng.exponential() / u0;
}

}  // namespace curb
