// One PASS/FAIL line per acceptance criterion. Exit status is non-zero if any fails.
#include "dqlpa/agent.hpp"
#include "dqlpa/baselines.hpp"
#include "dqlpa/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

using namespace dqlpa;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Verdict()>& fn) {
    const auto t0 = Clock::now();
    Verdict v;
    try {
        v = fn();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, " [%.2fs]", seconds_since(t0));
    std::printf("%s %2d %s: %s%s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str(), buf);
    std::fflush(stdout);
    if (!v.pass) ++failures;
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// Counts level tuples by decoding every integer below n^F; shares no code with the library.
long brute_force_count(const std::vector<double>& levels, int F, double budget) {
    const long n = static_cast<long>(levels.size());
    long total = 1;
    for (int f = 0; f < F; ++f) total *= n;
    long count = 0;
    for (long code = 0; code < total; ++code) {
        long c = code;
        double sum = 0;
        for (int f = 0; f < F; ++f, c /= n) sum += levels[static_cast<std::size_t>(c % n)];
        if (sum <= budget * (1 + 1e-12)) ++count;
    }
    return count;
}

ScenarioConfig tiny_scenario() {
    ScenarioConfig sc;
    sc.num_cells = 2;
    sc.users_per_cell = 2;
    sc.num_subbands = 2;
    sc.power_levels_w = {6.4, 12.8, 19.2};
    sc.max_power_w = 32;
    return sc;
}

Verdict action_count() {
    const auto t0 = Clock::now();
    const ScenarioConfig sc;
    const int m = enumerate_actions(sc.power_levels_w, sc.num_subbands, sc.max_power_w).size();
    const long brute = brute_force_count(sc.power_levels_w, sc.num_subbands, sc.max_power_w);
    const double t = seconds_since(t0);
    return {m == 72 && brute == 72 && t < 1.0,
            "m=" + std::to_string(m) + " brute=" + std::to_string(brute) + fmt(" in %.4fs", t)};
}

Verdict dimensions() {
    const std::array<std::array<int, 2>, 3> expect{{{100, 360}, {200, 720}, {300, 1080}}};
    std::string detail;
    bool ok = true;
    for (int s = 0; s < 3; ++s) {
        const Environment env(preset("scenario" + std::to_string(s + 1)).scenario);
        const auto sizes = network_sizes(env, AgentConfig{});
        ok = ok && env.state_size() == expect[s][0] && env.output_size() == expect[s][1] &&
             sizes[0] == expect[s][0] && sizes[2] == expect[s][1];
        detail += "{" + std::to_string(env.state_size()) + "," + std::to_string(env.output_size()) + "} ";
    }
    return {ok, detail};
}

Verdict gradient_oracle() {
    const auto t0 = Clock::now();
    Rng rng(derive_seed(2024, 3, 0));
    std::uniform_int_distribution<int> dim(2, 10);
    std::uniform_int_distribution<int> cells(1, 3);
    std::uniform_real_distribution<double> unit(0, 1);
    std::normal_distribution<double> gauss(0, 1);
    double worst = 0;
    for (int net_i = 0; net_i < 20; ++net_i) {
        const int K = cells(rng);
        const int m = dim(rng);
        Mlp net = Mlp::he_normal({dim(rng), dim(rng) * 2, K * m}, rng);
        // non-zero biases so that every parameter is exercised
        for (Eigen::Index i = 0; i < net.params().hidden_bias.size(); ++i) net.params().hidden_bias(i) = 0.1 * gauss(rng);
        for (Eigen::Index i = 0; i < net.params().output_bias.size(); ++i) net.params().output_bias(i) = 0.1 * gauss(rng);
        TrainBatch b;
        const int n = 6;
        b.cells = K;
        b.actions_per_cell = m;
        b.states = Eigen::MatrixXd(net.input_size(), n);
        for (Eigen::Index i = 0; i < b.states.size(); ++i) b.states.data()[i] = unit(rng);
        std::uniform_int_distribution<int> act(0, m - 1);
        for (int i = 0; i < n * K; ++i) {
            b.actions.push_back(act(rng));
            b.targets.push_back(gauss(rng));
        }
        Parameters g = Parameters::zeros(net.input_size(), net.hidden_size(), net.output_size());
        net.gradients(b, g);
        std::vector<double> analytic;
        g.for_each([&](const double* d, Eigen::Index k) { analytic.insert(analytic.end(), d, d + k); });
        std::vector<double*> slots;
        net.params().for_each([&](double* d, Eigen::Index k) {
            for (Eigen::Index i = 0; i < k; ++i) slots.push_back(d + i);
        });
        const double h = 1e-5;
        for (std::size_t i = 0; i < slots.size(); ++i) {
            const double orig = *slots[i];
            *slots[i] = orig + h;
            const double up = net.loss(b);
            *slots[i] = orig - h;
            const double down = net.loss(b);
            *slots[i] = orig;
            const double numeric = (up - down) / (2 * h);
            const double denom = std::max(1e-7, std::abs(numeric) + std::abs(analytic[i]));
            worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
        }
    }
    const double t = seconds_since(t0);
    return {worst < 1e-4 && t < 10.0, fmt("max relative error %.3e", worst) + fmt(" in %.2fs", t)};
}

Verdict ga_vs_exhaustive() {
    const auto t0 = Clock::now();
    const ScenarioConfig sc = tiny_scenario();
    const ActionSpace actions = enumerate_actions(sc.power_levels_w, sc.num_subbands, sc.max_power_w);
    int exact = 0;
    double worst = 1;
    for (int i = 0; i < 50; ++i) {
        Rng rng = make_rng(77, Stream::test_channel, static_cast<std::uint64_t>(i));
        const Topology topo = build_topology(sc, rng);
        const ChannelRealization ch = draw_channel(topo, sc, rng);
        const ExhaustiveResult best = exhaustive(ch, topo, sc, actions);
        Rng ga_rng = make_rng(77, Stream::ga, static_cast<std::uint64_t>(i));
        const GAResult ga = ga_optimize(ch, topo, sc, GAConfig{}, ga_rng);
        const double ratio = ga.throughput / best.throughput;
        if (ga.throughput >= best.throughput) ++exact;
        worst = std::min(worst, ratio);
    }
    const double t = seconds_since(t0);
    const bool ok = exact >= 48 && worst >= 0.99 && t < 60;
    return {ok, "optimum on " + std::to_string(exact) + "/50 (joint space " +
                    std::to_string(actions.size() * actions.size()) + ")" + fmt(", worst ratio %.6f", worst) +
                    fmt(" in %.2fs", t)};
}

Verdict wmmse_monotone() {
    const auto t0 = Clock::now();
    const ScenarioConfig sc = preset("scenario1").scenario;
    double worst_drop = 0;
    double worst_budget = 0;
    int converged = 0;
    for (int i = 0; i < 50; ++i) {
        Rng rng = make_rng(55, Stream::test_channel, static_cast<std::uint64_t>(i));
        const Topology topo = build_topology(sc, rng);
        const ChannelRealization ch = draw_channel(topo, sc, rng);
        const WmmseResult w = wmmse(ch, topo, sc);
        if (w.converged) ++converged;
        const auto& h = w.objective_history;
        for (std::size_t j = 1; j < h.size(); ++j)
            worst_drop = std::max(worst_drop, (h[j - 1] - h[j]) / h[j - 1]);
        for (int k = 0; k < sc.num_cells; ++k) {
            worst_budget = std::max(worst_budget, (w.allocation.cell_total(k) - sc.max_power_w) / sc.max_power_w);
            for (int f = 0; f < sc.num_subbands; ++f)
                if (w.allocation(k, f) < 0) worst_budget = 1;
        }
    }
    const double t = seconds_since(t0);
    const bool ok = worst_drop <= 1e-9 && worst_budget <= 1e-9 && t < 60;
    return {ok, fmt("max relative drop %.3e", worst_drop) + fmt(", max budget excess %.3e", worst_budget) +
                    ", converged " + std::to_string(converged) + "/50" + fmt(" in %.2fs", t)};
}

Verdict learning() {
    RunConfig cfg = preset("custom");
    apply_overrides(cfg, read_key_value_file(DQLPA_SOURCE_DIR "/configs/reduced.cfg"));
    cfg.validate();
    const auto& sc = cfg.scenario;
    if (sc.num_cells != 3 || sc.users_per_cell != 3 || sc.num_subbands != 2 || sc.power_levels_w.size() != 3 ||
        cfg.agent.train_steps > 200000 || cfg.test_samples != 100)
        return {false, "reduced config does not match the required shape"};
    const Environment env(sc, cfg.env);
    const TrainResult tr = train(env, cfg.agent, cfg.seed);
    TestOptions opts;
    opts.samples = cfg.test_samples;
    opts.seed = cfg.seed;
    opts.ga = cfg.ga;
    opts.wmmse = cfg.wmmse;
    const ComparisonReport rep = normalized_throughput(test(env, tr.network, opts));
    const double dql = rep.mean_of("dql");
    const double rnd = rep.mean_of("random");
    const double maxp = rep.mean_of("max_power");
    const bool ok = dql >= 0.95 && dql > rnd && dql >= maxp;
    return {ok, "steps=" + std::to_string(cfg.agent.train_steps) + fmt(" dql=%.4f", dql) + fmt(" random=%.4f", rnd) +
                    fmt(" max_power=%.4f", maxp) + fmt(" wmmse=%.4f", rep.mean_of("wmmse")) + " (GA = 1)"};
}

Verdict base_invariance() {
    const ScenarioConfig sc;
    const double alpha = snr_gap(sc.target_ber);
    const ActionSpace actions = enumerate_actions(sc.power_levels_w, sc.num_subbands, sc.max_power_w);
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
        Rng rng = make_rng(99, Stream::test_channel, static_cast<std::uint64_t>(i));
        const Topology topo = build_topology(sc, rng);
        const ChannelRealization ch = draw_channel(topo, sc, rng);
        const PowerAllocation ref = random_power_baseline(actions, sc.num_cells, rng).allocation;
        for (const PowerAllocation& p :
             {max_power_baseline(sc), random_power_baseline(actions, sc.num_cells, rng).allocation}) {
            const double r2 = network_utility(p, ch, topo, alpha, sc.subband_bandwidth_hz, LogBase::two) /
                              network_utility(ref, ch, topo, alpha, sc.subband_bandwidth_hz, LogBase::two);
            const double re = network_utility(p, ch, topo, alpha, sc.subband_bandwidth_hz, LogBase::natural) /
                              network_utility(ref, ch, topo, alpha, sc.subband_bandwidth_hz, LogBase::natural);
            worst = std::max(worst, std::abs(r2 - re));
        }
    }
    return {worst < 1e-12, fmt("max ratio difference %.3e", worst)};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Verdict determinism() {
    const auto root = std::filesystem::temp_directory_path() / "dqlpa_acceptance_determinism";
    std::filesystem::remove_all(root);
    std::string csv[2];
    for (int run = 0; run < 2; ++run) {
        const auto out = root / ("run" + std::to_string(run));
        const std::string cmd = std::string("\"") + DQLPA_CLI + "\" compare -s custom -c \"" DQLPA_SOURCE_DIR
                                "/configs/reduced.cfg\" --steps 5000 --samples 20 --seed 7 -o \"" +
                                out.string() + "\" > /dev/null";
        if (std::system(cmd.c_str()) != 0) return {false, "compare run " + std::to_string(run) + " failed"};
        csv[run] = slurp(out / "results.csv");
    }
    std::filesystem::remove_all(root);
    const bool ok = !csv[0].empty() && csv[0] == csv[1];
    return {ok, "results.csv " + std::to_string(csv[0].size()) + " bytes, " +
                    (csv[0] == csv[1] ? "identical" : "different")};
}

Verdict episode_semantics() {
    const ScenarioConfig sc = tiny_scenario();
    Environment env(sc);
    Rng rng(derive_seed(9, 9, 0));
    const Topology topo = build_topology(sc, rng);
    env.freeze_channel(topo, draw_channel(topo, sc, rng));
    std::uniform_int_distribution<int> pick(0, env.actions().size() - 1);
    int violations = 0;
    int longest = 0;
    for (int ep = 0; ep < 1000; ++ep) {
        auto [ctx, s] = env.reset(rng);
        std::vector<double> seq{ctx.previous_throughput};
        while (true) {
            const StepResult r = env.step(ctx, JointAction{pick(rng), pick(rng)});
            if (r.terminal) {
                if (r.throughput > seq.back() && ctx.step_count < EnvOptions{}.max_episode_steps) ++violations;
                break;
            }
            if (!(r.throughput > seq.back())) ++violations;
            seq.push_back(r.throughput);
        }
        longest = std::max(longest, ctx.step_count);
        if (ctx.step_count > EnvOptions{}.max_episode_steps) ++violations;
    }
    return {violations == 0,
            std::to_string(violations) + " violations over 1000 episodes, longest " + std::to_string(longest)};
}

Verdict replay_and_target() {
    // buffer against a deque model
    Rng rng(derive_seed(10, 10, 0));
    const std::size_t capacity = 97;
    ReplayBuffer buf(capacity);
    std::deque<double> model;
    std::bernoulli_distribution do_push(0.6);
    long mismatches = 0;
    long samples = 0;
    double next_id = 0;
    for (int op = 0; op < 100000; ++op) {
        if (do_push(rng)) {
            Transition t;
            t.state.values = {next_id};
            t.reward = next_id;
            buf.push(t);
            model.push_back(next_id);
            if (model.size() > capacity) model.pop_front();
            next_id += 1;
        } else {
            const auto batch = buf.sample(8, rng);
            if (batch.has_value() != (model.size() >= 8)) ++mismatches;
            if (batch) {
                ++samples;
                for (const Transition& t : *batch) {
                    const double id = t.state.values[0];
                    if (id < model.front() || id > model.back()) ++mismatches;
                }
            }
        }
        if (buf.size() != model.size()) ++mismatches;
        if (op % 1000 == 0)
            for (std::size_t i = 0; i < model.size(); ++i)
                if (buf.at(i).state.values[0] != model[i]) ++mismatches;
    }

    // target hash only changes at clone instants
    const ScenarioConfig sc = tiny_scenario();
    const Environment env(sc);
    AgentConfig cfg;
    cfg.train_steps = 10000;
    cfg.target_update_steps = 500;
    Trainer tr(env, cfg, 5);
    std::uint64_t h = tr.target().hash();
    long clones = 0;
    long target_violations = 0;
    while (tr.env_steps() < cfg.train_steps) {
        const long before = tr.gradient_steps();
        tr.step();
        const bool clone_now = tr.gradient_steps() != before && tr.gradient_steps() % cfg.target_update_steps == 0;
        const std::uint64_t now = tr.target().hash();
        if (clone_now) {
            ++clones;
            if (now != tr.online().hash()) ++target_violations;
            h = now;
        } else if (now != h) {
            ++target_violations;
        }
    }
    return {mismatches == 0 && target_violations == 0 && clones > 0,
            std::to_string(mismatches) + " buffer mismatches over 1e5 ops (" + std::to_string(samples) +
                " samples), " + std::to_string(target_violations) + " target violations across " +
                std::to_string(clones) + " clones in 1e4 steps"};
}

}  // namespace

int main() {
    report(1, "action-space count", action_count);
    report(2, "state/output dimensions", dimensions);
    report(3, "gradient oracle", gradient_oracle);
    report(4, "GA vs exhaustive", ga_vs_exhaustive);
    report(5, "WMMSE monotonicity", wmmse_monotone);
    report(6, "learning on the reduced scenario", learning);
    report(7, "log-base invariance", base_invariance);
    report(8, "determinism of compare", determinism);
    report(9, "episode semantics", episode_semantics);
    report(10, "replay and target network", replay_and_target);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
