#include "dqlpa/config.hpp"

#include "dqlpa/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>

namespace dqlpa {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw ConfigError(msg);
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a number: '" + text + "'");
    }
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& text) {
    Int v{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end)
        throw ConfigError("config key '" + key + "': not an integer: '" + text + "'");
    return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
    return out;
}

struct Field {
    const char* key;
    bool scenario;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

#define DQLPA_DOUBLE(section, name, is_scenario)                                     \
    Field {                                                                          \
        #name, is_scenario,                                                          \
            [](const RunConfig& c) { return format_double(c.section.name); },        \
            [](RunConfig& c, const std::string& k, const std::string& v) {           \
                c.section.name = parse_double(k, v);                                 \
            }                                                                        \
    }

#define DQLPA_INT(section, name, is_scenario)                                        \
    Field {                                                                          \
        #name, is_scenario,                                                          \
            [](const RunConfig& c) { return std::to_string(c.section.name); },       \
            [](RunConfig& c, const std::string& k, const std::string& v) {           \
                c.section.name = parse_int<decltype(c.section.name)>(k, v);          \
            }                                                                        \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        DQLPA_INT(scenario, num_cells, true),
        DQLPA_INT(scenario, users_per_cell, true),
        DQLPA_INT(scenario, num_subbands, true),
        DQLPA_DOUBLE(scenario, subband_bandwidth_hz, true),
        DQLPA_DOUBLE(scenario, cell_radius_m, true),
        DQLPA_DOUBLE(scenario, max_power_w, true),
        Field{"power_levels_w", true,
              [](const RunConfig& c) {
                  std::string s;
                  for (std::size_t i = 0; i < c.scenario.power_levels_w.size(); ++i) {
                      if (i) s += ", ";
                      s += format_double(c.scenario.power_levels_w[i]);
                  }
                  return s;
              },
              [](RunConfig& c, const std::string& k, const std::string& v) {
                  c.scenario.power_levels_w = parse_list(k, v);
              }},
        DQLPA_DOUBLE(scenario, noise_density_dbm_hz, true),
        DQLPA_DOUBLE(scenario, target_ber, true),
        DQLPA_DOUBLE(scenario, pathloss_ref_db, true),
        DQLPA_DOUBLE(scenario, pathloss_exp_db_per_decade, true),
        DQLPA_DOUBLE(scenario, shadowing_sigma_db, true),
        DQLPA_DOUBLE(scenario, min_user_distance_m, true),
        DQLPA_DOUBLE(scenario, fixed_power_level_w, true),
        DQLPA_INT(scenario, rng_seed, true),

        DQLPA_DOUBLE(env, step_reward, false),
        DQLPA_DOUBLE(env, terminal_reward, false),
        DQLPA_INT(env, max_episode_steps, false),

        DQLPA_DOUBLE(agent, discount, false),
        DQLPA_DOUBLE(agent, epsilon_start, false),
        DQLPA_DOUBLE(agent, epsilon_end, false),
        DQLPA_DOUBLE(agent, epsilon_anneal_fraction, false),
        DQLPA_INT(agent, batch_size, false),
        DQLPA_INT(agent, target_update_steps, false),
        DQLPA_INT(agent, replay_capacity, false),
        DQLPA_INT(agent, train_steps, false),
        DQLPA_INT(agent, train_frequency, false),
        DQLPA_INT(agent, learning_starts, false),
        DQLPA_DOUBLE(agent, learning_rate, false),
        DQLPA_DOUBLE(agent, rmsprop_decay, false),
        DQLPA_DOUBLE(agent, rmsprop_epsilon, false),
        DQLPA_INT(agent, hidden_units, false),

        Field{"ga_population", false,
              [](const RunConfig& c) { return std::to_string(c.ga.population); },
              [](RunConfig& c, const std::string& k, const std::string& v) {
                  c.ga.population = parse_int<int>(k, v);
              }},
        Field{"ga_generations", false,
              [](const RunConfig& c) { return std::to_string(c.ga.generations); },
              [](RunConfig& c, const std::string& k, const std::string& v) {
                  c.ga.generations = parse_int<int>(k, v);
              }},
        Field{"ga_crossover_prob", false,
              [](const RunConfig& c) { return format_double(c.ga.crossover_prob); },
              [](RunConfig& c, const std::string& k, const std::string& v) {
                  c.ga.crossover_prob = parse_double(k, v);
              }},
        Field{"ga_mutation_prob", false,
              [](const RunConfig& c) { return format_double(c.ga.mutation_prob); },
              [](RunConfig& c, const std::string& k, const std::string& v) {
                  c.ga.mutation_prob = parse_double(k, v);
              }},
        Field{"ga_tournament_size", false,
              [](const RunConfig& c) { return std::to_string(c.ga.tournament_size); },
              [](RunConfig& c, const std::string& k, const std::string& v) {
                  c.ga.tournament_size = parse_int<int>(k, v);
              }},
        Field{"ga_elite_count", false,
              [](const RunConfig& c) { return std::to_string(c.ga.elite_count); },
              [](RunConfig& c, const std::string& k, const std::string& v) {
                  c.ga.elite_count = parse_int<int>(k, v);
              }},
        Field{"wmmse_max_iters", false,
              [](const RunConfig& c) { return std::to_string(c.wmmse.max_iters); },
              [](RunConfig& c, const std::string& k, const std::string& v) {
                  c.wmmse.max_iters = parse_int<int>(k, v);
              }},
        Field{"wmmse_tol", false,
              [](const RunConfig& c) { return format_double(c.wmmse.tol); },
              [](RunConfig& c, const std::string& k, const std::string& v) {
                  c.wmmse.tol = parse_double(k, v);
              }},
        Field{"test_samples", false,
              [](const RunConfig& c) { return std::to_string(c.test_samples); },
              [](RunConfig& c, const std::string& k, const std::string& v) {
                  c.test_samples = parse_int<int>(k, v);
              }},
        Field{"seed", false, [](const RunConfig& c) { return std::to_string(c.seed); },
              [](RunConfig& c, const std::string& k, const std::string& v) {
                  c.seed = parse_int<std::uint64_t>(k, v);
              }},
    };
    return table;
}

#undef DQLPA_DOUBLE
#undef DQLPA_INT

const Field* find_field(const std::string& key) {
    for (const auto& f : fields())
        if (key == f.key) return &f;
    return nullptr;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void ScenarioConfig::validate() const {
    require(num_cells >= 1, "num_cells must be >= 1");
    require(users_per_cell >= 1, "users_per_cell must be >= 1");
    require(num_subbands >= 1, "num_subbands must be >= 1");
    require(subband_bandwidth_hz > 0, "subband_bandwidth_hz must be > 0");
    require(max_power_w > 0, "max_power_w must be > 0");
    require(!power_levels_w.empty(), "power_levels_w must not be empty");
    for (std::size_t i = 0; i < power_levels_w.size(); ++i) {
        require(power_levels_w[i] > 0 && std::isfinite(power_levels_w[i]),
                "power levels must be positive");
        if (i > 0)
            require(power_levels_w[i] > power_levels_w[i - 1],
                    "power_levels_w must be strictly increasing");
    }
    require(power_levels_w.front() * num_subbands <= max_power_w * (1.0 + 1e-12),
            "no feasible action: min power level * num_subbands exceeds max_power_w");
    require(target_ber > 0 && target_ber < 0.2, "target_ber must lie in (0, 0.2)");
    require(min_user_distance_m > 0, "min_user_distance_m must be > 0");
    require(cell_radius_m > min_user_distance_m,
            "cell_radius_m must exceed min_user_distance_m");
    require(shadowing_sigma_db >= 0, "shadowing_sigma_db must be >= 0");
    require(std::isfinite(noise_density_dbm_hz), "noise_density_dbm_hz must be finite");
}

void EnvOptions::validate() const {
    require(max_episode_steps >= 1, "max_episode_steps must be >= 1");
    require(std::isfinite(step_reward) && std::isfinite(terminal_reward),
            "rewards must be finite");
}

void AgentConfig::validate() const {
    require(discount > 0 && discount <= 1, "discount must lie in (0, 1]");
    require(epsilon_start >= 0 && epsilon_start <= 1, "epsilon_start must lie in [0, 1]");
    require(epsilon_end >= 0 && epsilon_end <= 1, "epsilon_end must lie in [0, 1]");
    require(epsilon_anneal_fraction >= 0 && epsilon_anneal_fraction <= 1,
            "epsilon_anneal_fraction must lie in [0, 1]");
    require(batch_size >= 1, "batch_size must be >= 1");
    require(target_update_steps >= 1, "target_update_steps must be >= 1");
    require(replay_capacity >= batch_size, "replay_capacity must be >= batch_size");
    require(train_steps >= 0, "train_steps must be >= 0");
    require(train_frequency >= 1, "train_frequency must be >= 1");
    require(learning_starts >= 0, "learning_starts must be >= 0");
    require(learning_rate > 0, "learning_rate must be > 0");
    require(rmsprop_decay >= 0 && rmsprop_decay < 1, "rmsprop_decay must lie in [0, 1)");
    require(rmsprop_epsilon > 0, "rmsprop_epsilon must be > 0");
    require(hidden_units >= 0, "hidden_units must be >= 0");
}

double AgentConfig::epsilon_at(long step) const {
    const double anneal = epsilon_anneal_fraction * static_cast<double>(train_steps);
    if (anneal <= 0 || static_cast<double>(step) >= anneal) return epsilon_end;
    const double t = static_cast<double>(step) / anneal;
    return std::clamp(epsilon_start + t * (epsilon_end - epsilon_start), 0.0, 1.0);
}

long AgentConfig::training_gate() const {
    return std::max<long>(learning_starts, batch_size);
}

void GAConfig::validate() const {
    require(population >= 2, "ga_population must be >= 2");
    require(generations >= 0, "ga_generations must be >= 0");
    require(crossover_prob >= 0 && crossover_prob <= 1, "ga_crossover_prob must lie in [0, 1]");
    require(mutation_prob >= 0 && mutation_prob <= 1, "ga_mutation_prob must lie in [0, 1]");
    require(tournament_size >= 1, "ga_tournament_size must be >= 1");
    require(elite_count >= 0 && elite_count < population,
            "ga_elite_count must lie in [0, ga_population)");
}

void RunConfig::validate() const {
    scenario.validate();
    env.validate();
    agent.validate();
    ga.validate();
    require(wmmse.max_iters >= 1, "wmmse_max_iters must be >= 1");
    require(wmmse.tol >= 0, "wmmse_tol must be >= 0");
    require(test_samples >= 0, "test_samples must be >= 0");
}

RunConfig preset(const std::string& name) {
    RunConfig cfg;
    if (name == "scenario1") {
        cfg.scenario.num_cells = 5;
    } else if (name == "scenario2") {
        cfg.scenario.num_cells = 10;
    } else if (name == "scenario3") {
        cfg.scenario.num_cells = 15;
    } else if (name != "custom") {
        throw ConfigError("unknown scenario preset '" + name +
                          "' (expected scenario1, scenario2, scenario3 or custom)");
    }
    return cfg;
}

KeyValues parse_key_values(std::istream& in) {
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(std::string_view(body).substr(0, eq));
        std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (!kv.emplace(key, value).second)
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    return kv;
}

KeyValues read_key_value_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse_key_values(in);
}

void apply_overrides(RunConfig& cfg, const KeyValues& kv) {
    for (const auto& [key, value] : kv) {
        const Field* f = find_field(key);
        if (f == nullptr) throw ConfigError("unknown config key '" + key + "'");
        f->set(cfg, key, value);
    }
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path, ScenarioConfig base) {
    RunConfig cfg;
    cfg.scenario = std::move(base);
    for (const auto& [key, value] : read_key_value_file(path)) {
        const Field* f = find_field(key);
        if (f == nullptr || !f->scenario)
            throw ConfigError("not a scenario config key: '" + key + "'");
        f->set(cfg, key, value);
    }
    cfg.scenario.validate();
    return cfg.scenario;
}

std::string to_key_values(const RunConfig& cfg) {
    std::string out;
    for (const auto& f : fields()) {
        out += f.key;
        out += " = ";
        out += f.get(cfg);
        out += '\n';
    }
    return out;
}

std::uint64_t config_hash(const RunConfig& cfg) {
    const std::string text = to_key_values(cfg);
    return fnv1a(text.data(), text.size());
}

}  // namespace dqlpa
