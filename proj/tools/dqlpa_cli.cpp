#include "dqlpa/agent.hpp"
#include "dqlpa/baselines.hpp"
#include "dqlpa/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace dqlpa;

namespace {

struct CommonFlags {
    std::string scenario = "scenario1";
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<long> steps;
    std::optional<int> samples;
    std::string out = "out";
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("-s,--scenario", f.scenario, "scenario1 | scenario2 | scenario3 | custom")
        ->capture_default_str();
    cmd->add_option("-c,--config", f.config_path, "key = value config file applied over the preset");
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--steps", f.steps, "training step budget");
    cmd->add_option("--samples", f.samples, "number of test samples");
    cmd->add_option("-o,--out", f.out, "output directory")->capture_default_str();
    cmd->add_option("-j,--threads", f.threads, "workers for test-sample evaluation")
        ->capture_default_str();
}

RunConfig resolve(const CommonFlags& f) {
    RunConfig cfg = preset(f.scenario);
    if (!f.config_path.empty()) apply_overrides(cfg, read_key_value_file(f.config_path));
    if (f.seed) cfg.seed = *f.seed;
    if (f.steps) cfg.agent.train_steps = *f.steps;
    if (f.samples) cfg.test_samples = *f.samples;
    cfg.validate();
    return cfg;
}

ExperimentSpec make_spec(const CommonFlags& f) {
    ExperimentSpec spec;
    spec.scenario = f.scenario;
    spec.config = resolve(f);
    spec.output_dir = f.out;
    spec.threads = f.threads;
    return spec;
}

void print_summary(const ExperimentOutcome& o) {
    if (o.records.empty()) return;
    std::cout << "mean normalized throughput over " << o.report.rows.size() << " samples:\n";
    for (int i = 0; i < kNumMethods; ++i)
        std::cout << "  " << kMethods[i] << ": " << o.report.mean[static_cast<std::size_t>(i)] << "\n";
}

nlohmann::json allocation_json(const PowerAllocation& p) {
    nlohmann::json rows = nlohmann::json::array();
    for (int k = 0; k < p.num_cells; ++k) {
        nlohmann::json row = nlohmann::json::array();
        for (int f = 0; f < p.num_subbands; ++f) row.push_back(p(k, f));
        rows.push_back(row);
    }
    return rows;
}

int run_baseline(const std::string& name, const CommonFlags& f) {
    const RunConfig cfg = resolve(f);
    const Environment env(cfg.scenario, cfg.env);
    const ScenarioConfig& sc = cfg.scenario;
    for (int i = 0; i < cfg.test_samples; ++i) {
        const auto idx = static_cast<std::uint64_t>(i);
        const std::uint64_t channel_seed =
            derive_seed(cfg.seed, static_cast<std::uint64_t>(Stream::test_channel), idx);
        Rng channel_rng(channel_seed);
        const Topology topo = build_topology(sc, channel_rng);
        const ChannelRealization ch = draw_channel(topo, sc, channel_rng);

        nlohmann::ordered_json rec;
        rec["sample"] = i;
        rec["channel_seed"] = channel_seed;
        rec["method"] = name;
        PowerAllocation p;
        if (name == "ga") {
            Rng rng = make_rng(cfg.seed, Stream::ga, idx);
            p = ga_optimize(ch, topo, sc, cfg.ga, rng).allocation;
        } else if (name == "wmmse") {
            const WmmseResult w = wmmse(ch, topo, sc, cfg.wmmse);
            p = w.allocation;
            rec["converged"] = w.converged;
            rec["iterations"] = w.iterations;
        } else if (name == "max") {
            p = max_power_baseline(sc);
        } else if (name == "random") {
            Rng rng = make_rng(cfg.seed, Stream::random_baseline, idx);
            p = random_power_baseline(env.actions(), sc.num_cells, rng).allocation;
        } else if (name == "exhaustive") {
            const ExhaustiveResult e = exhaustive(ch, topo, sc, env.actions());
            p = e.allocation;
            rec["evaluated"] = e.evaluated;
        } else {
            throw CLI::ValidationError("baseline", "unknown baseline '" + name +
                                                       "' (ga, wmmse, max, random, exhaustive)");
        }
        rec["throughput_bps"] = env.throughput(topo, ch, p);
        rec["power_w"] = allocation_json(p);
        std::cout << rec.dump() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deep Q-learning downlink power allocation for multi-cell networks"};
    app.require_subcommand(1);

    CommonFlags train_f, test_f, compare_f, baseline_f, sweep_f, dump_f;
    std::string checkpoint;
    std::string baseline_name;

    auto* train_cmd = app.add_subcommand("train", "train a Q-network and write checkpoint + log");
    add_common(train_cmd, train_f);

    auto* test_cmd = app.add_subcommand("test", "evaluate a checkpoint against every baseline");
    add_common(test_cmd, test_f);
    test_cmd->add_option("--checkpoint", checkpoint, "checkpoint to evaluate")->required();

    auto* compare_cmd = app.add_subcommand("compare", "train, then evaluate against every baseline");
    add_common(compare_cmd, compare_f);

    auto* baseline_cmd = app.add_subcommand("baseline", "run one baseline solver, JSON lines out");
    baseline_cmd->add_option("name", baseline_name, "ga | wmmse | max | random | exhaustive")->required();
    add_common(baseline_cmd, baseline_f);

    std::vector<int> sweep_hidden;
    std::vector<double> sweep_lr;
    auto* sweep_cmd =
        app.add_subcommand("sweep", "compare over a grid of hidden sizes and learning rates");
    add_common(sweep_cmd, sweep_f);
    sweep_cmd->add_option("--hidden-units", sweep_hidden, "hidden layer widths")
        ->delimiter(',')
        ->required();
    sweep_cmd->add_option("--learning-rates", sweep_lr, "RMSprop learning rates")
        ->delimiter(',')
        ->required();

    auto* dump_cmd = app.add_subcommand("dump-actions", "print the per-cell action space as CSV");
    add_common(dump_cmd, dump_f);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_cmd) {
            ExperimentSpec spec = make_spec(train_f);
            spec.evaluate = false;
            run_experiment(spec);
            std::cout << "wrote " << (spec.output_dir / "checkpoint.bin").string() << "\n";
        } else if (*test_cmd) {
            ExperimentSpec spec = make_spec(test_f);
            spec.checkpoint = checkpoint;
            print_summary(run_experiment(spec));
        } else if (*compare_cmd) {
            print_summary(run_experiment(make_spec(compare_f)));
        } else if (*baseline_cmd) {
            return run_baseline(baseline_name, baseline_f);
        } else if (*sweep_cmd) {
            const ExperimentSpec spec = make_spec(sweep_f);
            std::cout << "hidden_units,learning_rate,dql_mean\n";
            for (const auto& p : run_sweep(spec, sweep_hidden, sweep_lr))
                std::cout << p.hidden_units << ',' << format_double(p.learning_rate) << ',' << p.mean[0] << "\n";
        } else if (*dump_cmd) {
            const RunConfig cfg = resolve(dump_f);
            enumerate_actions(cfg.scenario.power_levels_w, cfg.scenario.num_subbands,
                              cfg.scenario.max_power_w)
                .write_csv(std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
