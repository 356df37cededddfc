#pragma once

#include "dqlpa/config.hpp"
#include "dqlpa/netmodel.hpp"
#include "dqlpa/rng.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace dqlpa {

/// Budget-feasible per-cell power vectors, in lexicographic order of level indices
/// (first subband most significant). The joint Q layout is K blocks of size().
class ActionSpace {
public:
    ActionSpace(std::vector<double> levels, int subbands, double budget_w);

    int size() const { return static_cast<int>(level_indices_.size()); }
    int num_subbands() const { return subbands_; }
    const std::vector<double>& levels() const { return levels_; }
    double budget_w() const { return budget_w_; }

    std::span<const int> level_indices(int action) const;
    std::span<const double> powers(int action) const;
    double total_w(int action) const;
    /// Index of the vector whose level indices equal `indices`, if feasible.
    std::optional<int> find(std::span<const int> indices) const;
    /// The all-lowest-level vector; always index 0.
    int min_power_action() const { return 0; }

    /// CSV: index, p_0..p_{F-1}, total.
    void write_csv(std::ostream& out) const;

private:
    std::vector<double> levels_;
    int subbands_;
    double budget_w_;
    std::vector<std::vector<int>> level_indices_;
    std::vector<std::vector<double>> powers_;
};

/// Raises ConfigError when nothing fits the budget.
ActionSpace enumerate_actions(const std::vector<double>& levels, int subbands, double budget_w);

/// True when the per-cell sum fits the budget (with 1e-12 relative slack for
/// round-off in decimal power levels).
bool within_budget(double total_w, double budget_w);

struct StateVector {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    bool operator==(const StateVector&) const = default;
};

using JointAction = std::vector<int>;

struct Transition {
    StateVector state;
    JointAction joint_action;
    double reward = 0;
    StateVector next_state;
    bool terminal = false;

    bool operator==(const Transition&) const = default;
};

struct EpisodeContext {
    Topology topology;
    ChannelRealization channel;
    PowerAllocation current_power;
    JointAction current_action;
    JointAction initial_action;
    double initial_throughput = 0;
    double previous_throughput = 0;
    int step_count = 0;
    bool done = false;
};

struct StepResult {
    StateVector next_state;
    double reward = 0;
    bool terminal = false;
    double throughput = 0;
};

/// The episodic power-control process: an episode keeps going while each joint
/// action strictly raises total throughput on a channel frozen for the episode.
class Environment {
public:
    Environment(ScenarioConfig scenario, EnvOptions options = {});

    const ScenarioConfig& scenario() const { return scenario_; }
    const EnvOptions& options() const { return options_; }
    const ActionSpace& actions() const { return actions_; }
    double alpha() const { return alpha_; }
    int num_cells() const { return scenario_.num_cells; }
    int state_size() const;
    int output_size() const { return num_cells() * actions_.size(); }

    /// Every episode after this runs on the given topology and channel.
    void freeze_channel(Topology topo, ChannelRealization ch);
    void unfreeze_channel();
    bool channel_frozen() const { return frozen_.has_value(); }

    /// Fresh topology and channel (unless frozen), then a uniformly random feasible
    /// action per cell. The throughput baseline is the all-minimum-power allocation.
    std::pair<EpisodeContext, StateVector> reset(Rng& rng) const;
    /// As reset(), on a caller-supplied topology and channel.
    std::pair<EpisodeContext, StateVector> reset_on(Topology topo, ChannelRealization ch,
                                                    Rng& rng) const;

    StepResult step(EpisodeContext& ctx, std::span<const int> joint_action) const;

    StateVector encode_state(const EpisodeContext& ctx) const;
    StateVector encode_state(const Topology& topo, const ChannelRealization& ch,
                             const PowerAllocation& p) const;

    PowerAllocation allocation(std::span<const int> joint_action) const;
    double throughput(const EpisodeContext& ctx, const PowerAllocation& p) const;
    double throughput(const Topology& topo, const ChannelRealization& ch,
                      const PowerAllocation& p) const;

private:
    void check_action(std::span<const int> joint_action) const;

    ScenarioConfig scenario_;
    EnvOptions options_;
    ActionSpace actions_;
    double alpha_;
    std::optional<std::pair<Topology, ChannelRealization>> frozen_;
};

}  // namespace dqlpa
