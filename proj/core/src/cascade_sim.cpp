#include "curb/cascade_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace curb {

void SimConfig::validate() const {
    kernel.validate();
    if (!(horizon.t0 < horizon.tf)) throw PreconditionError("simulation horizon needs t0 < tf");
    for (double p : {p_f1_m1, p_f1_m0}) {
        if (!(p >= 0.0 && p <= 1.0)) throw PreconditionError("flag likelihoods must lie in [0,1]");
    }
}

void SyntheticOptions::validate() const {
    if (!(fake_fraction >= 0.0 && fake_fraction <= 1.0)) throw PreconditionError("fake_fraction must lie in [0,1]");
    if (posts_min < 1 || posts_max < posts_min) throw PreconditionError("need 1 <= posts_min <= posts_max");
    if (!(r_min >= 0.0 && r_max <= 1.0 && r_min <= r_max)) throw PreconditionError("need 0 <= r_min <= r_max <= 1");
    if (!(start_window > 0.0 && start_window <= 1.0)) throw PreconditionError("start_window must lie in (0,1]");
    if (!(spread_min_s >= 0.0 && spread_max_s >= spread_min_s)) throw PreconditionError("bad post spread range");
}

std::vector<EventRecord> expand_skeleton(std::span<const EventRecord> skeleton, double r_s, const SimConfig& sim,
                                         Rng& rng, std::vector<double>* lambda_trace,
                                         std::vector<std::ptrdiff_t>* origin) {
    sim.validate();
    validate_stream(skeleton, sim.horizon);
    const KernelParams& kernel = sim.kernel;
    const bool supercritical = kernel.gamma * r_s / kernel.omega >= 1.0;

    std::vector<EventRecord> out;
    IntensityState state{0.0, sim.horizon.t0};
    std::size_t next = 0;

    auto emit = [&](const EventRecord& e, std::ptrdiff_t source) {
        state = decay(state, kernel, e.time);
        if (e.triggers()) state = apply_jump(state, kernel);
        out.push_back(e);
        if (lambda_trace) lambda_trace->push_back(state.lambda_e);
        if (origin) origin->push_back(source);
    };

    while (true) {
        const double skeleton_time =
            next < skeleton.size() ? skeleton[next].time : std::numeric_limits<double>::infinity();
        // lambda_e decays exponentially until the next skeleton event, so the next synthesized
        // exposure is an exact inversion draw from the current cursor.
        const auto candidate = sample_exp_decay_time(state.lambda_e, kernel.omega, state.t_cursor, rng);
        if (candidate && *candidate < skeleton_time && *candidate <= sim.horizon.tf) {
            emit(EventRecord::exposure(*candidate, rng.bernoulli(r_s), false), -1);
            if (supercritical && out.size() > sim.event_cap) {
                throw PreconditionError("supercritical cascade exceeded the event cap of " +
                                        std::to_string(sim.event_cap));
            }
        } else if (next < skeleton.size()) {
            EventRecord e = skeleton[next];
            e.flag = false;
            emit(e, static_cast<std::ptrdiff_t>(next));
            ++next;
        } else {
            break;
        }
    }
    return out;
}

std::vector<EventRecord> generate_exposures(const StoryConfig& story, const SimConfig& sim, Rng& rng,
                                            std::vector<double>* lambda_trace) {
    if (!(story.r_s >= 0.0 && story.r_s <= 1.0)) throw PreconditionError("reshare probability outside [0,1]");
    if (!std::is_sorted(story.posts.begin(), story.posts.end())) throw PreconditionError("post times not sorted");
    std::vector<EventRecord> skeleton;
    skeleton.reserve(story.posts.size());
    for (double t : story.posts) skeleton.push_back(EventRecord::post(t));
    return expand_skeleton(skeleton, story.r_s, sim, rng, lambda_trace);
}

std::vector<EventRecord> sample_flags(std::vector<EventRecord> events, Label label, double p_f1_m1, double p_f1_m0,
                                      Rng& rng) {
    const double p = label == Label::fake ? p_f1_m1 : p_f1_m0;
    for (auto& e : events) {
        e.flag = e.kind == EventKind::exposure && rng.bernoulli(p);
    }
    return events;
}

namespace {

std::string story_name(std::size_t index, std::size_t total) {
    const std::size_t width = std::max<std::size_t>(4, std::to_string(total).size());
    std::string digits = std::to_string(index);
    if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
    return "s" + digits;
}

double uniform_between(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

}  // namespace

SyntheticDataset synthetic_dataset(const SyntheticOptions& options, const SimConfig& sim) {
    options.validate();
    sim.validate();
    Rng root(sim.seed);

    const auto n = options.n_stories;
    const auto n_fake = static_cast<std::size_t>(std::llround(options.fake_fraction * static_cast<double>(n)));
    // Fake labels go to a random subset of exactly n_fake stories (partial Fisher-Yates).
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng label_rng = root.substream("labels");
    for (std::size_t i = 0; i < n_fake; ++i) {
        const auto j = i + static_cast<std::size_t>(label_rng.below(n - i));
        std::swap(order[i], order[j]);
    }
    std::vector<Label> labels(n, Label::genuine);
    for (std::size_t i = 0; i < n_fake; ++i) labels[order[i]] = Label::fake;

    SyntheticDataset out;
    out.dataset.source = "synthetic:seed=" + std::to_string(sim.seed);
    const double span = sim.horizon.tf - sim.horizon.t0;
    for (std::size_t i = 0; i < n; ++i) {
        StoryConfig cfg;
        cfg.story_id = story_name(i, n);
        cfg.label = labels[i];
        cfg.f_s = sim.flag_probability(cfg.label);

        Rng rng = root.substream(cfg.story_id);
        cfg.r_s = uniform_between(rng, options.r_min, options.r_max);
        const auto n_posts =
            options.posts_min + static_cast<std::size_t>(rng.below(options.posts_max - options.posts_min + 1));
        const double start = sim.horizon.t0 + options.start_window * span * rng.uniform_open0();
        const double spread = uniform_between(rng, options.spread_min_s, options.spread_max_s);
        for (std::size_t k = 0; k < n_posts; ++k) {
            cfg.posts.push_back(std::min(sim.horizon.tf, start + spread * rng.uniform()));
        }
        std::sort(cfg.posts.begin(), cfg.posts.end());

        auto events = generate_exposures(cfg, sim, rng);
        events = sample_flags(std::move(events), cfg.label, sim.p_f1_m1, sim.p_f1_m0, rng);

        Story story;
        story.story_id = cfg.story_id;
        story.label = cfg.label;
        std::size_t exposure_index = 0;
        std::size_t post_index = 0;
        for (const auto& e : events) {
            story.user_ids.push_back(e.kind == EventKind::post ? cfg.story_id + "-p" + std::to_string(post_index++)
                                                               : cfg.story_id + "-u" + std::to_string(exposure_index++));
        }
        story.events = std::move(events);
        out.dataset.stories.emplace(story.story_id, std::move(story));
        out.truth.push_back(std::move(cfg));
    }
    return out;
}

CascadeDataset synthesize_from_skeleton(const CascadeDataset& skeleton, const SimConfig& sim) {
    sim.validate();
    CascadeDataset out;
    out.source = skeleton.source;
    out.log = skeleton.log;
    Rng root(sim.seed);
    for (const auto& [id, story] : skeleton.stories) {
        std::vector<EventRecord> observed;
        std::vector<std::string> observed_users;
        for (std::size_t i = 0; i < story.events.size(); ++i) {
            if (!story.events[i].triggers()) continue;
            observed.push_back(story.events[i]);
            observed_users.push_back(story.user_ids[i]);
        }
        Rng rng = root.substream(id);
        std::vector<std::ptrdiff_t> origin;
        std::vector<EventRecord> events;
        try {
            events = expand_skeleton(observed, 0.0, sim, rng, nullptr, &origin);
        } catch (const PreconditionError& err) {
            throw DataError("story " + id + ": " + err.what());
        }
        events = sample_flags(std::move(events), story.label, sim.p_f1_m1, sim.p_f1_m0, rng);

        Story expanded;
        expanded.story_id = id;
        expanded.label = story.label;
        expanded.fact_checks = story.fact_checks;
        std::size_t synthesized = 0;
        for (std::ptrdiff_t source : origin) {
            expanded.user_ids.push_back(source >= 0 ? observed_users[static_cast<std::size_t>(source)]
                                                    : id + "-x" + std::to_string(synthesized++));
        }
        expanded.events = std::move(events);
        out.stories.emplace(id, std::move(expanded));
    }
    out.log.push_back("synthesize: exposures and flags generated with seed " + std::to_string(sim.seed));
    return out;
}

}  // namespace curb
