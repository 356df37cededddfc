#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace dqlpa {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Physical constants of one simulated network. Distances in meters, powers in watts,
/// bandwidth in Hz, noise density in dBm/Hz.
struct ScenarioConfig {
    int num_cells = 5;
    int users_per_cell = 5;
    int num_subbands = 3;
    double subband_bandwidth_hz = 2.88e6;
    double cell_radius_m = 500.0;
    double max_power_w = 40.0;
    std::vector<double> power_levels_w{6.4, 9.6, 12.8, 16.0, 19.2};
    double noise_density_dbm_hz = -174.0;
    double target_ber = 1e-6;
    double pathloss_ref_db = 128.1;
    double pathloss_exp_db_per_decade = 37.6;
    double shadowing_sigma_db = 8.0;
    double min_user_distance_m = 35.0;
    // Per-subband level used by the max-power baseline.
    double fixed_power_level_w = 12.8;
    std::uint64_t rng_seed = 1;

    void validate() const;
};

struct EnvOptions {
    double step_reward = 1.0;
    double terminal_reward = -1.0;
    int max_episode_steps = 500;

    void validate() const;
};

struct AgentConfig {
    double discount = 0.99;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    double epsilon_anneal_fraction = 0.1;
    int batch_size = 64;
    long target_update_steps = 1000;
    long replay_capacity = 80000;
    long train_steps = 100000;
    int train_frequency = 1;
    long learning_starts = 1000;
    double learning_rate = 0.00025;
    double rmsprop_decay = 0.95;
    double rmsprop_epsilon = 1e-6;
    // 0 selects twice the output width.
    int hidden_units = 0;

    void validate() const;
    double epsilon_at(long step) const;
    long training_gate() const;
};

struct GAConfig {
    int population = 100;
    int generations = 200;
    double crossover_prob = 0.9;
    double mutation_prob = 0.05;
    int tournament_size = 3;
    int elite_count = 2;

    void validate() const;
};

struct WmmseOptions {
    int max_iters = 1000;
    double tol = 1e-9;
};

/// Everything a run needs apart from where it writes.
struct RunConfig {
    ScenarioConfig scenario;
    EnvOptions env;
    AgentConfig agent;
    GAConfig ga;
    WmmseOptions wmmse;
    int test_samples = 100;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Presets: "scenario1", "scenario2", "scenario3" (K = 5, 10, 15) and "custom"
/// (library defaults, meant to be overridden from a config file).
RunConfig preset(const std::string& name);

using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines; '#' starts a comment. Duplicate keys are an error.
KeyValues parse_key_values(std::istream& in);
KeyValues read_key_value_file(const std::filesystem::path& path);

/// Applies overrides; unknown keys and malformed values raise ConfigError.
void apply_overrides(RunConfig& cfg, const KeyValues& kv);

/// Applies only scenario keys; any other key raises ConfigError.
ScenarioConfig load_scenario_config(const std::filesystem::path& path,
                                    ScenarioConfig base = {});

/// Canonical `key = value` dump of every field, in a fixed order. Round-trips
/// through parse_key_values/apply_overrides.
std::string to_key_values(const RunConfig& cfg);

std::uint64_t config_hash(const RunConfig& cfg);

/// Shortest text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace dqlpa
