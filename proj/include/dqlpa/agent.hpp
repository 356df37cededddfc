#pragma once

#include "dqlpa/baselines.hpp"
#include "dqlpa/config.hpp"
#include "dqlpa/env.hpp"
#include "dqlpa/qnet.hpp"
#include "dqlpa/replay.hpp"
#include "dqlpa/rng.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace dqlpa {

/// Per cell: uniform random index with probability epsilon, otherwise the argmax of
/// that cell's block of q-values (lowest index on ties).
JointAction select_joint_action(std::span<const double> q_values, int num_cells, double epsilon,
                                Rng& rng);

/// y[j*K + k] = r_j if terminal, else r_j + discount * max over block k of target(s'_j).
std::vector<double> bellman_targets(const Mlp& target,
                                    std::span<const std::reference_wrapper<const Transition>> batch,
                                    double discount, int num_cells, int actions_per_cell);

TrainBatch make_train_batch(std::span<const std::reference_wrapper<const Transition>> batch,
                            std::vector<double> targets, int num_cells, int actions_per_cell);

std::array<int, 3> network_sizes(const Environment& env, const AgentConfig& cfg);

struct TrainLogRow {
    long step = 0;  // environment steps completed when the episode ended
    long episode = 0;
    double epsilon = 0;
    double loss = 0;  // mean over the episode's gradient steps; NaN if none
    double episode_throughput = 0;
    int episode_length = 0;
};

/// Experience-replay DQN training, one environment step per call to step().
class Trainer {
public:
    /// He-normal network drawn from `seed`.
    Trainer(const Environment& env, AgentConfig cfg, std::uint64_t seed);
    Trainer(const Environment& env, AgentConfig cfg, Mlp initial, RmsProp optimizer,
            std::uint64_t seed);

    void step();
    /// Steps until `env_steps() == cfg.train_steps`.
    void run();

    const Mlp& online() const { return online_; }
    const Mlp& target() const { return target_; }
    const RmsProp& optimizer() const { return opt_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    const AgentConfig& config() const { return cfg_; }
    const std::vector<TrainLogRow>& log() const { return log_; }
    long env_steps() const { return env_steps_; }
    long gradient_steps() const { return grad_steps_; }
    long episodes() const { return episodes_; }
    bool episode_active() const { return episode_.has_value(); }
    double last_loss() const { return last_loss_; }

    /// Full training state (networks, optimizer, replay memory, RNG, counters, log).
    /// Only allowed between episodes.
    void save(std::ostream& out) const;
    static Trainer load(const Environment& env, AgentConfig cfg, std::istream& in);

private:
    struct Episode {
        EpisodeContext ctx;
        StateVector state;
    };

    void gradient_step();

    const Environment* env_;
    AgentConfig cfg_;
    Mlp online_;
    RmsProp opt_;
    Mlp target_;
    ReplayBuffer buffer_;
    Rng rng_;
    std::optional<Episode> episode_;
    long env_steps_ = 0;
    long grad_steps_ = 0;
    long episodes_ = 0;
    double episode_loss_sum_ = 0;
    int episode_loss_count_ = 0;
    double last_loss_ = 0;
    std::vector<TrainLogRow> log_;
};

struct TrainResult {
    Mlp network;
    RmsProp optimizer;
    std::vector<TrainLogRow> log;
    long gradient_steps = 0;
};

TrainResult train(const Environment& env, const AgentConfig& cfg, std::uint64_t seed);

struct GreedyOutcome {
    JointAction action;
    double throughput = 0;
    int length = 0;
};

/// Runs an epsilon = 0 episode from `ctx` and returns the action taken just before
/// the terminating one (the initial allocation if the first action terminates).
GreedyOutcome greedy_episode(const Environment& env, const Mlp& net, EpisodeContext ctx,
                             StateVector state);

struct TestRecord {
    int sample = 0;
    std::uint64_t channel_seed = 0;
    double dql_throughput = 0;
    JointAction dql_action;
    int dql_episode_length = 0;
    double ga_throughput = 0;
    double wmmse_throughput = 0;
    double maxpower_throughput = 0;
    double random_throughput = 0;
};

struct TestOptions {
    int samples = 100;
    std::uint64_t seed = 1;
    GAConfig ga;
    WmmseOptions wmmse;
    int threads = 1;
};

/// Fresh channel per sample; DQL and every baseline see the same channel.
/// Each sample's draws depend only on (seed, sample index).
std::vector<TestRecord> test(const Environment& env, const Mlp& net, const TestOptions& opts);

TestRecord test_sample(const Environment& env, const Mlp& net, const TestOptions& opts,
                       int sample);

}  // namespace dqlpa
