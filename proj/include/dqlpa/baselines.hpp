#pragma once

#include "dqlpa/config.hpp"
#include "dqlpa/env.hpp"
#include "dqlpa/netmodel.hpp"
#include "dqlpa/rng.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace dqlpa {

class SearchTooLarge : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GAResult {
    PowerAllocation allocation;
    double throughput = 0;
    std::vector<int> genes;  // K*F level indices, cell-major
    double best_initial_throughput = 0;
};

/// Genetic search over per-subband level indices: tournament selection, single-point
/// crossover, per-gene mutation, budget repair and elitism. Returns the best
/// individual ever evaluated.
GAResult ga_optimize(const ChannelRealization& ch, const Topology& topo,
                     const ScenarioConfig& cfg, const GAConfig& ga, Rng& rng);

/// Lowers the largest level of each over-budget cell (lowest subband on ties)
/// until every cell fits.
void repair_genes(std::vector<int>& genes, const ScenarioConfig& cfg);

PowerAllocation decode_genes(const std::vector<int>& genes, const ScenarioConfig& cfg);

struct ExhaustiveResult {
    PowerAllocation allocation;
    double throughput = 0;
    JointAction action;
    std::uint64_t evaluated = 0;
};

constexpr std::uint64_t kDefaultExhaustiveCap = 1'000'000;

/// Exact maximizer over all m^K joint actions; ties go to the lexicographically
/// smallest joint action. Throws SearchTooLarge past `cap` joint actions.
ExhaustiveResult exhaustive(const ChannelRealization& ch, const Topology& topo,
                            const ScenarioConfig& cfg, const ActionSpace& actions,
                            std::uint64_t cap = kDefaultExhaustiveCap);

struct WmmseResult {
    PowerAllocation allocation;  // continuous watts
    double throughput = 0;       // total throughput with subbands re-assigned to best users
    double objective = 0;        // throughput under the frozen assignment
    std::vector<double> objective_history;  // [0] is the uniform starting point
    SubbandAssignment assignment;
    int iterations = 0;
    bool converged = false;
};

/// Scalar WMMSE per subband with the subband assignment frozen at the uniform
/// Pmax/F starting point. The SNR gap scales each direct-link gain; per-BS power
/// budgets are enforced with a multiplier found by bisection.
WmmseResult wmmse(const ChannelRealization& ch, const Topology& topo, const ScenarioConfig& cfg,
                  const WmmseOptions& opts = {});

/// Every subband of every cell at cfg.fixed_power_level_w. ConfigError if that
/// breaks the per-cell budget.
PowerAllocation max_power_baseline(const ScenarioConfig& cfg);

struct RandomResult {
    PowerAllocation allocation;
    JointAction action;
};

RandomResult random_power_baseline(const ActionSpace& actions, int num_cells, Rng& rng);

}  // namespace dqlpa
