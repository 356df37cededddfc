#include "dqlpa/env.hpp"

#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>

namespace dqlpa {

bool within_budget(double total_w, double budget_w) {
    return total_w <= budget_w * (1.0 + 1e-12);
}

ActionSpace::ActionSpace(std::vector<double> levels, int subbands, double budget_w)
    : levels_(std::move(levels)), subbands_(subbands), budget_w_(budget_w) {
    if (levels_.empty() || subbands_ < 1)
        throw ConfigError("action space needs at least one level and one subband");
    const int n = static_cast<int>(levels_.size());
    std::vector<int> digits(static_cast<std::size_t>(subbands_), 0);
    // Odometer with the first subband as the most significant digit.
    while (true) {
        std::vector<double> p;
        p.reserve(digits.size());
        for (int d : digits) p.push_back(levels_[static_cast<std::size_t>(d)]);
        if (within_budget(std::accumulate(p.begin(), p.end(), 0.0), budget_w_)) {
            level_indices_.push_back(digits);
            powers_.push_back(std::move(p));
        }
        int pos = subbands_ - 1;
        while (pos >= 0 && ++digits[static_cast<std::size_t>(pos)] == n) {
            digits[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
    }
    if (level_indices_.empty())
        throw ConfigError("no power vector satisfies the per-cell budget");
}

std::span<const int> ActionSpace::level_indices(int action) const {
    return level_indices_.at(static_cast<std::size_t>(action));
}

std::span<const double> ActionSpace::powers(int action) const {
    return powers_.at(static_cast<std::size_t>(action));
}

double ActionSpace::total_w(int action) const {
    const auto p = powers(action);
    return std::accumulate(p.begin(), p.end(), 0.0);
}

std::optional<int> ActionSpace::find(std::span<const int> indices) const {
    for (int a = 0; a < size(); ++a) {
        const auto li = level_indices(a);
        if (std::equal(li.begin(), li.end(), indices.begin(), indices.end())) return a;
    }
    return std::nullopt;
}

void ActionSpace::write_csv(std::ostream& out) const {
    out << "index";
    for (int f = 0; f < subbands_; ++f) out << ",p" << f << "_w";
    out << ",total_w\n";
    for (int a = 0; a < size(); ++a) {
        out << a;
        for (double p : powers(a)) {
            out << ',' << format_double(p);
        }
        out << ',' << format_double(total_w(a)) << '\n';
    }
}

ActionSpace enumerate_actions(const std::vector<double>& levels, int subbands, double budget_w) {
    return ActionSpace(levels, subbands, budget_w);
}

Environment::Environment(ScenarioConfig scenario, EnvOptions options)
    : scenario_((scenario.validate(), std::move(scenario))),
      options_((options.validate(), options)),
      actions_(scenario_.power_levels_w, scenario_.num_subbands, scenario_.max_power_w),
      alpha_(snr_gap(scenario_.target_ber)) {}

int Environment::state_size() const {
    return scenario_.num_cells * scenario_.users_per_cell * (scenario_.num_subbands + 1);
}

void Environment::freeze_channel(Topology topo, ChannelRealization ch) {
    frozen_.emplace(std::move(topo), std::move(ch));
}

void Environment::unfreeze_channel() { frozen_.reset(); }

std::pair<EpisodeContext, StateVector> Environment::reset(Rng& rng) const {
    if (frozen_) return reset_on(frozen_->first, frozen_->second, rng);
    Topology topo = build_topology(scenario_, rng);
    ChannelRealization ch = draw_channel(topo, scenario_, rng);
    return reset_on(std::move(topo), std::move(ch), rng);
}

std::pair<EpisodeContext, StateVector> Environment::reset_on(Topology topo,
                                                             ChannelRealization ch,
                                                             Rng& rng) const {
    EpisodeContext ctx;
    ctx.topology = std::move(topo);
    ctx.channel = std::move(ch);
    std::uniform_int_distribution<int> pick(0, actions_.size() - 1);
    ctx.initial_action.resize(static_cast<std::size_t>(num_cells()));
    for (int& a : ctx.initial_action) a = pick(rng);
    ctx.current_action = ctx.initial_action;
    ctx.current_power = allocation(ctx.current_action);
    ctx.initial_throughput = throughput(ctx, ctx.current_power);

    const JointAction min_action(static_cast<std::size_t>(num_cells()),
                                 actions_.min_power_action());
    ctx.previous_throughput = throughput(ctx, allocation(min_action));
    StateVector s = encode_state(ctx);
    return {std::move(ctx), std::move(s)};
}

StepResult Environment::step(EpisodeContext& ctx, std::span<const int> joint_action) const {
    if (ctx.done) throw UsageError("step() called on a terminated episode");
    check_action(joint_action);
    ctx.current_action.assign(joint_action.begin(), joint_action.end());
    ctx.current_power = allocation(joint_action);
    ++ctx.step_count;

    StepResult r;
    r.throughput = throughput(ctx, ctx.current_power);
    const bool improved = r.throughput > ctx.previous_throughput;
    r.terminal = !improved || ctx.step_count >= options_.max_episode_steps;
    r.reward = r.terminal ? options_.terminal_reward : options_.step_reward;
    ctx.previous_throughput = r.throughput;
    ctx.done = r.terminal;
    r.next_state = encode_state(ctx);
    return r;
}

StateVector Environment::encode_state(const EpisodeContext& ctx) const {
    return encode_state(ctx.topology, ctx.channel, ctx.current_power);
}

StateVector Environment::encode_state(const Topology& topo, const ChannelRealization& ch,
                                      const PowerAllocation& p) const {
    StateVector s;
    s.values.reserve(static_cast<std::size_t>(state_size()));
    for (int k = 0; k < topo.num_cells; ++k) {
        for (int i = 0; i < topo.users_per_cell; ++i) {
            const int u = topo.first_user(k) + i;
            for (int f = 0; f < ch.num_subbands; ++f)
                s.values.push_back(cqi_quantize(sinr(p, ch, u, k, f)) / 15.0);
            s.values.push_back(location_indicator(topo, u));
        }
    }
    return s;
}

PowerAllocation Environment::allocation(std::span<const int> joint_action) const {
    check_action(joint_action);
    PowerAllocation p(num_cells(), scenario_.num_subbands);
    for (int k = 0; k < num_cells(); ++k) {
        const auto powers = actions_.powers(joint_action[static_cast<std::size_t>(k)]);
        for (int f = 0; f < scenario_.num_subbands; ++f)
            p(k, f) = powers[static_cast<std::size_t>(f)];
    }
    return p;
}

double Environment::throughput(const EpisodeContext& ctx, const PowerAllocation& p) const {
    return throughput(ctx.topology, ctx.channel, p);
}

double Environment::throughput(const Topology& topo, const ChannelRealization& ch,
                               const PowerAllocation& p) const {
    return network_utility(p, ch, topo, alpha_, scenario_.subband_bandwidth_hz);
}

void Environment::check_action(std::span<const int> joint_action) const {
    if (static_cast<int>(joint_action.size()) != num_cells())
        throw UsageError("joint action has " + std::to_string(joint_action.size()) +
                         " entries, expected " + std::to_string(num_cells()));
    for (int a : joint_action)
        if (a < 0 || a >= actions_.size())
            throw UsageError("action index " + std::to_string(a) + " out of range");
}

}  // namespace dqlpa
