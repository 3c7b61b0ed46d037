// curb: command-line front end. See docs/cli.md for the config schema and exit codes.

#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "curb/baselines.hpp"
#include "curb/cascade_sim.hpp"
#include "curb/dataset.hpp"
#include "curb/evaluation.hpp"
#include "curb/results.hpp"

namespace {

using namespace curb;

enum ExitCode : int { ok = 0, usage = 1, data = 2, internal = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Options shared by every subcommand; they may sit at the top of the config file.
struct Model {
    double gamma = 1e-4;
    double omega = 1e-5;
    double horizon_days = 14.0;
    double p_f1_m1 = 0.3;
    double p_f1_m0 = 0.01;
    double prior_strength = 2.0;
    unsigned threads = 1;
    std::uint64_t seed = 0;
    CLI::Option* seed_opt = nullptr;

    KernelParams kernel() const { return {gamma, omega}; }
    Horizon horizon() const { return {0.0, horizon_days * 86400.0}; }

    std::uint64_t require_seed(const std::string& why) const {
        if (seed_opt->count() == 0) throw UsageError("--seed is required " + why);
        return seed;
    }

    EvalContext context(const CascadeDataset& dataset) const {
        EvalContext ctx;
        ctx.kernel = kernel();
        ctx.horizon = horizon();
        ctx.p_f1_m1 = p_f1_m1;
        ctx.p_f1_m0 = p_f1_m0;
        ctx.threads = threads;
        ctx.crowd = crowd_for_dataset(dataset, p_f1_m1, p_f1_m0, prior_strength);
        return ctx;
    }
};

struct PolicyOpts {
    std::string kind = "curb";
    double q = 1.0;
    std::int64_t threshold = 1;
    double scale = 1.0;

    PolicySpec spec() const {
        PolicySpec p;
        p.kind = parse_policy_kind(kind);
        p.q = q;
        p.threshold = threshold;
        p.scale = scale;
        p.validate();
        return p;
    }
};

void add_policy_options(CLI::App* cmd, PolicyOpts& p) {
    cmd->add_option("--policy", p.kind, "curb | oracle | flag_ratio | flag_sum | exposure")->capture_default_str();
    cmd->add_option("--q", p.q, "intensity weight (stochastic policies)")->capture_default_str();
    cmd->add_option("--threshold", p.threshold, "flag count (flag_sum)")->capture_default_str();
    cmd->add_option("--scale", p.scale, "multiplier on the policy intensity")->capture_default_str();
}

CascadeDataset load(const std::string& path) { return ingest(path, DatasetFormat::canonical_jsonl); }

void write_results(const ResultsTable& table, const std::string& out, const std::string& format) {
    const auto f = parse_results_format(format);
    if (out.empty() || out == "-") {
        export_results(table, std::cout, f);
    } else {
        export_results(table, std::filesystem::path(out), f);
    }
}

std::vector<double> parse_grid(const std::vector<std::string>& items) {
    std::vector<double> grid;
    for (const auto& s : items) {
        try {
            std::size_t used = 0;
            grid.push_back(std::stod(s, &used));
            if (used != s.size()) throw std::invalid_argument(s);
        } catch (const std::exception&) {
            throw UsageError("bad grid value '" + s + "'");
        }
    }
    return grid;
}

int run(int argc, char** argv) {
    CLI::App app{"Crowd-assisted fact-check scheduling: generate, ingest, schedule and evaluate cascades"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key-value config file (see docs/cli.md)");

    Model model;
    app.add_option("--gamma", model.gamma, "kernel jump size")->capture_default_str();
    app.add_option("--omega", model.omega, "kernel decay rate (1/s)")->capture_default_str();
    app.add_option("--horizon-days", model.horizon_days, "horizon length in days")->capture_default_str();
    app.add_option("--p-f1-m1", model.p_f1_m1, "flag probability of fake stories")->capture_default_str();
    app.add_option("--p-f1-m0", model.p_f1_m0, "flag probability of genuine stories")->capture_default_str();
    app.add_option("--prior-strength", model.prior_strength, "alpha + beta of the flag prior")->capture_default_str();
    app.add_option("--threads", model.threads, "worker threads")->capture_default_str();
    model.seed_opt = app.add_option("--seed", model.seed, "RNG seed (required by stochastic commands)");

    // gen
    auto* gen = app.add_subcommand("gen", "synthesize a labeled dataset");
    SyntheticOptions synth;
    std::string gen_out;
    gen->add_option("--out", gen_out, "output event log (jsonl)")->required();
    gen->add_option("--n-stories", synth.n_stories)->capture_default_str();
    gen->add_option("--fake-fraction", synth.fake_fraction)->capture_default_str();
    gen->add_option("--posts-min", synth.posts_min)->capture_default_str();
    gen->add_option("--posts-max", synth.posts_max)->capture_default_str();
    gen->add_option("--r-min", synth.r_min, "reshare probability range")->capture_default_str();
    gen->add_option("--r-max", synth.r_max)->capture_default_str();

    // ingest
    auto* ing = app.add_subcommand("ingest", "read an external dataset into the canonical event log");
    std::string ing_in, ing_out, ing_format = "cascade_csv", ing_labels;
    bool ing_synthesize = false;
    ing->add_option("--in", ing_in)->required();
    ing->add_option("--out", ing_out)->required();
    ing->add_option("--format", ing_format, "cascade_csv | canonical_jsonl")->capture_default_str();
    ing->add_option("--labels", ing_labels, "story_id,label CSV for files without a label column");
    ing->add_flag("--synthesize", ing_synthesize, "generate exposures and flags around the posts/reshares");
    bool ing_rebase = false;
    ing->add_flag("--rebase", ing_rebase, "shift times so the first record sits just after t0");

    // preprocess
    auto* pre = app.add_subcommand("preprocess", "filter stories and subsample fakes");
    std::string pre_in, pre_out;
    PreprocessOptions pre_opts;
    pre->add_option("--in", pre_in)->required();
    pre->add_option("--out", pre_out)->required();
    pre->add_option("--max-events", pre_opts.max_events)->capture_default_str();
    pre->add_option("--tail-decile-cap", pre_opts.tail_decile_cap)->capture_default_str();
    pre->add_option("--fake-cap", pre_opts.fake_cap)->capture_default_str();

    // schedule
    auto* sch = app.add_subcommand("schedule", "run a policy and record fact_check events");
    std::string sch_in, sch_out;
    PolicyOpts sch_policy;
    sch->add_option("--in", sch_in)->required();
    sch->add_option("--out", sch_out)->required();
    add_policy_options(sch, sch_policy);

    // eval
    auto* ev = app.add_subcommand("eval", "metrics for recorded fact checks, or for a policy run");
    std::string ev_in, ev_out, ev_format = "csv";
    PolicyOpts ev_policy;
    ev->add_option("--in", ev_in)->required();
    ev->add_option("--out", ev_out, "results file; stdout when omitted");
    ev->add_option("--format", ev_format, "csv | jsonl")->capture_default_str();
    add_policy_options(ev, ev_policy);

    // sweep
    auto* sw = app.add_subcommand("sweep", "policy tunable grid over seeds");
    std::string sw_in, sw_out, sw_format = "csv", sw_variant;
    std::vector<std::string> sw_grid;
    std::uint64_t sw_seeds = 20;
    std::string sw_kind = "curb";
    sw->add_option("--in", sw_in)->required();
    sw->add_option("--policy", sw_kind)->capture_default_str();
    sw->add_option("--grid", sw_grid, "q values (or thresholds for flag_sum)")->required()->delimiter(',');
    sw->add_option("--n-seeds", sw_seeds, "seeds --seed .. --seed + n - 1")->capture_default_str();
    sw->add_option("--variant", sw_variant, "tag written to every row");
    sw->add_option("--out", sw_out, "results file; stdout when omitted");
    sw->add_option("--format", sw_format, "csv | jsonl")->capture_default_str();
    bool sw_no_runtime = false;
    sw->add_flag("--no-runtime", sw_no_runtime, "write 0 runtimes so output is byte-reproducible");

    // cost
    auto* co = app.add_subcommand("cost", "Monte Carlo estimate of the quadratic objective");
    std::string co_in;
    PolicyOpts co_policy;
    std::size_t co_runs = 200;
    std::optional<double> co_q_cost;
    co->add_option("--in", co_in)->required();
    add_policy_options(co, co_policy);
    co->add_option("--runs", co_runs)->capture_default_str();
    co->add_option("--q-cost", co_q_cost, "control weight in the loss (defaults to --q)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? ok : usage;
    }

    if (!(model.gamma >= 0.0) || !(model.omega > 0.0) || !(model.horizon_days > 0.0)) {
        throw UsageError("need gamma >= 0, omega > 0, horizon-days > 0");
    }
    if (model.threads == 0) throw UsageError("--threads must be positive");

    if (gen->parsed()) {
        SimConfig sim;
        sim.kernel = model.kernel();
        sim.horizon = model.horizon();
        sim.p_f1_m1 = model.p_f1_m1;
        sim.p_f1_m0 = model.p_f1_m0;
        sim.seed = model.require_seed("for gen");
        auto dataset = synthetic_dataset(synth, sim).dataset;
        export_dataset(dataset, gen_out);
        std::cerr << "wrote " << dataset.stories.size() << " stories (" << dataset.fake_count() << " fake) to "
                  << gen_out << '\n';
    } else if (ing->parsed()) {
        IngestOptions opts;
        if (!ing_labels.empty()) opts.labels = read_labels_csv(ing_labels);
        auto dataset = ingest(ing_in, parse_dataset_format(ing_format), opts);
        if (ing_rebase) dataset = rebase_times(std::move(dataset), model.horizon().t0 + 1.0);
        if (ing_synthesize) {
            SimConfig sim;
            sim.kernel = model.kernel();
            sim.horizon = model.horizon();
            sim.p_f1_m1 = model.p_f1_m1;
            sim.p_f1_m0 = model.p_f1_m0;
            sim.seed = model.require_seed("with --synthesize");
            dataset = synthesize_from_skeleton(dataset, sim);
        }
        export_dataset(dataset, ing_out);
        std::cerr << "wrote " << dataset.stories.size() << " stories to " << ing_out << '\n';
    } else if (pre->parsed()) {
        Rng rng(model.require_seed("for preprocess (fake subsampling)"));
        auto dataset = preprocess(load(pre_in), pre_opts, rng);
        export_dataset(dataset, pre_out);
        for (const auto& note : dataset.log) std::cerr << note << '\n';
    } else if (sch->parsed()) {
        auto dataset = load(sch_in);
        const auto policy = sch_policy.spec();
        const std::uint64_t seed = policy.stochastic() ? model.require_seed("for stochastic policies") : model.seed;
        const auto ctx = model.context(dataset);
        const auto decisions = schedule_dataset(dataset, policy, ctx, seed);
        std::size_t n = 0;
        for (const auto& d : decisions) {
            auto& checks = dataset.stories.at(d.story_id).fact_checks;
            checks.clear();
            if (d.time) {
                checks.push_back(*d.time);
                ++n;
            }
        }
        dataset.log.push_back("schedule: policy=" + std::string(to_string(policy.kind)) +
                              " tunable=" + std::to_string(policy.tunable()) + " seed=" + std::to_string(seed));
        export_dataset(dataset, sch_out);
        std::cerr << n << " fact checks scheduled\n";
    } else if (ev->parsed()) {
        const auto dataset = load(ev_in);
        ResultsTable table;
        const bool policy_given = ev->get_option("--policy")->count() > 0;
        if (policy_given) {
            const auto policy = ev_policy.spec();
            const std::uint64_t seed = policy.stochastic() ? model.require_seed("for stochastic policies") : model.seed;
            const auto outcome = replay_evaluate(dataset, policy, model.context(dataset), seed);
            table.rows.push_back(summarize(outcome, policy, seed));
        } else {
            std::vector<FactCheckDecision> decisions;
            for (const auto& [id, story] : dataset.stories) {
                if (!story.fact_checks.empty()) decisions.push_back({id, story.fact_checks.front()});
            }
            auto row = summarize(outcome_from_decisions(dataset, decisions), {}, 0);
            row.policy = "recorded";
            row.tunable = 0.0;
            table.rows.push_back(row);
        }
        write_results(table, ev_out, ev_format);
    } else if (sw->parsed()) {
        const auto dataset = load(sw_in);
        SweepSpec spec;
        spec.kind = parse_policy_kind(sw_kind);
        spec.grid = parse_grid(sw_grid);
        const std::uint64_t base = spec.kind == PolicyKind::flag_sum ? model.seed : model.require_seed("for sweep");
        for (std::uint64_t i = 0; i < sw_seeds; ++i) spec.seeds.push_back(base + i);
        spec.variant = sw_variant;
        spec.validate();
        write_results(sweep(dataset, spec, model.context(dataset), !sw_no_runtime), sw_out, sw_format);
    } else if (co->parsed()) {
        const auto dataset = load(co_in);
        const auto policy = co_policy.spec();
        if (!policy.stochastic()) throw UsageError("cost is defined for intensity policies only");
        const auto ctx = model.context(dataset);
        const ControlParams ctrl{co_q_cost.value_or(policy.q), ctx.horizon.t0, ctx.horizon.tf};
        const auto est = policy_cost(dataset, policy, ctx, ctrl, co_runs, model.require_seed("for cost"));
        std::cout.precision(10);
        std::cout << "mean " << est.mean << "\nstd_error " << est.std_error << "\nruns " << est.runs
                  << "\nmisinfo " << est.mean_parts.misinfo << "\ncontrol " << est.mean_parts.control
                  << "\nterminal " << est.mean_parts.terminal << '\n';
    }
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const UsageError& err) {
        std::cerr << "usage error: " << err.what() << '\n';
        return usage;
    } catch (const curb::PreconditionError& err) {
        // Raised by parameter validation in the library.
        std::cerr << "usage error: " << err.what() << '\n';
        return usage;
    } catch (const curb::DataError& err) {
        std::cerr << "data error: " << err.what() << '\n';
        return data;
    } catch (const std::filesystem::filesystem_error& err) {
        std::cerr << "data error: " << err.what() << '\n';
        return data;
    } catch (const std::exception& err) {
        std::cerr << "internal error: " << err.what() << '\n';
        return internal;
    }
}
