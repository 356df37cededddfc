#include "dqlpa/harness.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <ostream>
#include <stdexcept>

namespace dqlpa {

namespace {

std::string num(double v) { return format_double(v); }

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string action_str(const JointAction& a) {
    std::string s;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) s += ' ';
        s += std::to_string(a[i]);
    }
    return s;
}

class OutputFiles {
public:
    explicit OutputFiles(std::filesystem::path dir) : dir_(std::move(dir)) {}
    ~OutputFiles() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& p : written_) std::filesystem::remove(p, ec);
    }

    std::ofstream open(const std::string& name, std::ios::openmode mode = std::ios::out) {
        const auto path = dir_ / name;
        std::ofstream out(path, mode | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
        written_.push_back(path);
        return out;
    }
    std::filesystem::path track(const std::string& name) {
        written_.push_back(dir_ / name);
        return dir_ / name;
    }
    static void close(std::ofstream& out, const std::string& what) {
        out.close();
        if (!out) throw std::runtime_error("failed writing " + what);
    }
    void commit() { committed_ = true; }

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> written_;
    bool committed_ = false;
};

}  // namespace

double ComparisonReport::mean_of(const std::string& method) const {
    for (int i = 0; i < kNumMethods; ++i)
        if (method == kMethods[i]) return mean[static_cast<std::size_t>(i)];
    throw std::invalid_argument("unknown method '" + method + "'");
}

std::array<double, kNumMethods> throughputs(const TestRecord& r) {
    return {r.dql_throughput, r.ga_throughput, r.wmmse_throughput, r.maxpower_throughput,
            r.random_throughput};
}

ComparisonReport normalized_throughput(const std::vector<TestRecord>& records) {
    if (records.empty()) throw std::invalid_argument("no test records to normalize");
    ComparisonReport rep;
    for (const auto& r : records) {
        if (!(r.ga_throughput > 0)) {
            std::cerr << "warning: sample " << r.sample
                      << " has non-positive GA throughput; excluded from the report\n";
            rep.excluded_samples.push_back(r.sample);
            continue;
        }
        NormalizedRow row{r.sample, r.channel_seed, {}};
        const auto t = throughputs(r);
        for (std::size_t i = 0; i < t.size(); ++i) row.normalized[i] = t[i] / r.ga_throughput;
        rep.rows.push_back(row);
    }
    if (rep.rows.empty()) throw std::invalid_argument("every sample had zero GA throughput");
    for (const auto& row : rep.rows)
        for (std::size_t i = 0; i < row.normalized.size(); ++i) rep.mean[i] += row.normalized[i];
    for (double& m : rep.mean) m /= static_cast<double>(rep.rows.size());
    return rep;
}

void write_results_csv(std::ostream& out, const std::vector<TestRecord>& records,
                       const ComparisonReport& report) {
    out << "sample,channel_seed,dql_bps,ga_bps,wmmse_bps,max_power_bps,random_bps,"
           "dql_norm,wmmse_norm,max_power_norm,random_norm,dql_episode_length,dql_action\n";
    std::size_t next = 0;
    for (const auto& r : records) {
        out << r.sample << ',' << r.channel_seed;
        for (double t : throughputs(r)) out << ',' << num(t);
        const NormalizedRow* row = nullptr;
        if (next < report.rows.size() && report.rows[next].sample == r.sample)
            row = &report.rows[next++];
        for (int i : {0, 2, 3, 4}) out << ',' << (row ? num(row->normalized[static_cast<std::size_t>(i)]) : "");
        out << ',' << r.dql_episode_length << ',' << action_str(r.dql_action) << '\n';
    }
}

void write_training_log_csv(std::ostream& out, const std::vector<TrainLogRow>& log) {
    out << "step,episode,epsilon,loss,episode_throughput,episode_length\n";
    for (const auto& row : log) {
        out << row.step << ',' << row.episode << ',' << num(row.epsilon) << ','
            << (std::isfinite(row.loss) ? num(row.loss) : "") << ','
            << num(row.episode_throughput) << ',' << row.episode_length << '\n';
    }
}

std::string report_json(const ComparisonReport& report, const ExperimentSpec& spec,
                        const Environment& env) {
    nlohmann::ordered_json j;
    j["scenario"] = spec.scenario;
    j["seed"] = report.seed;
    j["config_hash"] = hex64(report.config_hash);
    j["wall_seconds"] = report.wall_seconds;
    j["state_size"] = env.state_size();
    j["output_size"] = env.output_size();
    j["actions_per_cell"] = env.actions().size();
    j["samples"] = report.rows.size();
    j["excluded_samples"] = report.excluded_samples;
    j["wmmse_output"] = "continuous";
    auto& means = j["mean_normalized_throughput"];
    for (int i = 0; i < kNumMethods; ++i) means[kMethods[i]] = report.mean[static_cast<std::size_t>(i)];
    return j.dump(2) + "\n";
}

Checkpoint checkpoint_roundtrip(const std::filesystem::path& path, const Mlp& net,
                                const RmsProp& opt) {
    save_checkpoint(path, net, opt);
    return load_checkpoint(path, net.layer_sizes());
}

ExperimentOutcome run_experiment(const ExperimentSpec& spec) {
    const auto start = std::chrono::steady_clock::now();
    const RunConfig& cfg = spec.config;
    cfg.validate();
    std::filesystem::create_directories(spec.output_dir);
    OutputFiles files(spec.output_dir);

    {
        auto out = files.open("config.txt");
        out << "# scenario = " << spec.scenario << "\n" << to_key_values(cfg);
        OutputFiles::close(out, "config.txt");
    }

    const Environment env(cfg.scenario, cfg.env);
    const auto sizes = network_sizes(env, cfg.agent);
    ExperimentOutcome outcome;

    std::optional<Mlp> net;
    if (spec.checkpoint) {
        net = load_checkpoint(*spec.checkpoint, sizes).net;
    } else if (spec.train) {
        Trainer trainer(env, cfg.agent, cfg.seed);
        trainer.run();
        outcome.training_log = trainer.log();
        auto log = files.open("training_log.csv");
        write_training_log_csv(log, outcome.training_log);
        OutputFiles::close(log, "training_log.csv");
        save_checkpoint(files.track("checkpoint.bin"), trainer.online(), trainer.optimizer());
        net = trainer.online();
    } else {
        Rng rng = make_rng(cfg.seed, Stream::network_init);
        net = Mlp::he_normal(sizes, rng);
    }

    if (spec.evaluate && cfg.test_samples > 0) {
        TestOptions topts;
        topts.samples = cfg.test_samples;
        topts.seed = cfg.seed;
        topts.ga = cfg.ga;
        topts.wmmse = cfg.wmmse;
        topts.threads = spec.threads;
        outcome.records = test(env, *net, topts);
        outcome.report = normalized_throughput(outcome.records);
        outcome.report.config_hash = config_hash(cfg);
        outcome.report.seed = cfg.seed;
        outcome.report.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        auto results = files.open("results.csv");
        write_results_csv(results, outcome.records, outcome.report);
        OutputFiles::close(results, "results.csv");
        auto report = files.open("report.json");
        report << report_json(outcome.report, spec, env);
        OutputFiles::close(report, "report.json");
    }
    files.commit();
    return outcome;
}

std::vector<SweepPoint> run_sweep(const ExperimentSpec& spec, const std::vector<int>& hidden_units,
                                  const std::vector<double>& learning_rates) {
    if (hidden_units.empty() || learning_rates.empty())
        throw ConfigError("sweep needs at least one hidden size and one learning rate");
    std::vector<SweepPoint> points;
    for (int h : hidden_units) {
        for (double lr : learning_rates) {
            ExperimentSpec run = spec;
            run.config.agent.hidden_units = h;
            run.config.agent.learning_rate = lr;
            run.output_dir = spec.output_dir / ("h" + std::to_string(h) + "_lr" + format_double(lr));
            const ExperimentOutcome o = run_experiment(run);
            points.push_back({h, lr, o.report.mean});
        }
    }
    std::ofstream out(spec.output_dir / "sweep.csv");
    out << "hidden_units,learning_rate";
    for (const char* m : kMethods) out << ',' << m;
    out << '\n';
    for (const auto& p : points) {
        out << p.hidden_units << ',' << format_double(p.learning_rate);
        for (double v : p.mean) out << ',' << format_double(v);
        out << '\n';
    }
    if (!out) throw std::runtime_error("failed to write " + (spec.output_dir / "sweep.csv").string());
    return points;
}

}  // namespace dqlpa
