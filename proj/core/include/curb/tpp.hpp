#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "curb/rng.hpp"

namespace curb {

/// Raised when a caller violates an operation's precondition.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Exponential triggering kernel g(dt) = gamma * exp(-omega * dt) for dt >= 0.
struct KernelParams {
    double gamma = 1e-4;  ///< jump per triggering event (1/time)
    double omega = 1e-5;  ///< decay rate (1/time)

    void validate() const;
    /// Mean number of children per reshare-capable event when every exposure reshares.
    double mass() const { return gamma / omega; }
};

/// Endogenous intensity lambda_e as of t_cursor.
struct IntensityState {
    double lambda_e = 0.0;
    double t_cursor = 0.0;
};

enum class EventKind : std::uint8_t { post, exposure };

/// One per-story event. Marks are only meaningful for exposures.
struct EventRecord {
    double time = 0.0;
    EventKind kind = EventKind::exposure;
    bool reshare = false;
    bool flag = false;

    static EventRecord post(double t) { return {t, EventKind::post, false, false}; }
    static EventRecord exposure(double t, bool reshare, bool flag) {
        return {t, EventKind::exposure, reshare, flag};
    }

    /// True when the event adds a kernel jump to lambda_e (posts and reshared exposures).
    bool triggers() const { return kind == EventKind::post || reshare; }

    friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

double kernel_eval(const KernelParams& params, double dt);

/// Closed-form decay of lambda_e from state.t_cursor to t. Throws on t < t_cursor.
IntensityState decay(const IntensityState& state, const KernelParams& params, double t);

/// Adds the lag-zero kernel value gamma. The state must already sit at the jump time.
IntensityState apply_jump(const IntensityState& state, const KernelParams& params);

/// lambda_e(t) by explicit convolution over posts and reshared exposures strictly before t.
/// Throws if events are not sorted by time.
double direct_intensity(std::span<const EventRecord> events, const KernelParams& params, double t);

/// Replays events through decay/apply_jump and returns lambda_e right after each event.
std::vector<double> replay_intensity(std::span<const EventRecord> events, const KernelParams& params);

using IntensityFn = std::function<double(double)>;

struct ThinningStats {
    std::uint64_t candidates = 0;
    std::uint64_t accepted = 0;
};

/// First event time in [t_start, t_max] of the process with intensity `intensity`,
/// sampled by Lewis-Shedler thinning. `upper_bound(t)` must dominate the intensity on
/// [t, t_max]; a detected violation throws PreconditionError.
std::optional<double> thinning_sample(const IntensityFn& intensity, const IntensityFn& upper_bound,
                                      double t_start, double t_max, Rng& rng,
                                      ThinningStats* stats = nullptr);

/// First event of u0 * exp(-omega (t - t_start)) by inversion. Returns nullopt when the
/// total remaining mass u0/omega is not reached.
std::optional<double> sample_exp_decay_time(double u0, double omega, double t_start, Rng& rng);

/// First event of a homogeneous process with rate u0 starting at t_start.
std::optional<double> sample_constant_time(double u0, double t_start, Rng& rng);

}  // namespace curb
