#include "dqlpa/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace dqlpa {

namespace {

double utility(const PowerAllocation& p, const ChannelRealization& ch, const Topology& topo,
               const ScenarioConfig& cfg, double alpha) {
    return network_utility(p, ch, topo, alpha, cfg.subband_bandwidth_hz);
}

struct Individual {
    std::vector<int> genes;
    double fitness = 0;
};

}  // namespace

PowerAllocation decode_genes(const std::vector<int>& genes, const ScenarioConfig& cfg) {
    PowerAllocation p(cfg.num_cells, cfg.num_subbands);
    for (int k = 0; k < cfg.num_cells; ++k)
        for (int f = 0; f < cfg.num_subbands; ++f)
            p(k, f) = cfg.power_levels_w[static_cast<std::size_t>(
                genes[static_cast<std::size_t>(k * cfg.num_subbands + f)])];
    return p;
}

void repair_genes(std::vector<int>& genes, const ScenarioConfig& cfg) {
    const int F = cfg.num_subbands;
    for (int k = 0; k < cfg.num_cells; ++k) {
        auto cell = std::span(genes).subspan(static_cast<std::size_t>(k * F),
                                             static_cast<std::size_t>(F));
        auto total = [&] {
            double s = 0;
            for (int g : cell) s += cfg.power_levels_w[static_cast<std::size_t>(g)];
            return s;
        };
        while (!within_budget(total(), cfg.max_power_w)) {
            auto largest = std::max_element(cell.begin(), cell.end());
            --*largest;
        }
    }
}

GAResult ga_optimize(const ChannelRealization& ch, const Topology& topo,
                     const ScenarioConfig& cfg, const GAConfig& ga, Rng& rng) {
    cfg.validate();
    ga.validate();
    const double alpha = snr_gap(cfg.target_ber);
    const int n_levels = static_cast<int>(cfg.power_levels_w.size());
    const int length = cfg.num_cells * cfg.num_subbands;
    std::uniform_int_distribution<int> level(0, n_levels - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, ga.population - 1);

    auto evaluate = [&](Individual& ind) {
        repair_genes(ind.genes, cfg);
        ind.fitness = utility(decode_genes(ind.genes, cfg), ch, topo, cfg, alpha);
    };

    std::vector<Individual> pop(static_cast<std::size_t>(ga.population));
    for (auto& ind : pop) {
        ind.genes.resize(static_cast<std::size_t>(length));
        for (int& g : ind.genes) g = level(rng);
        evaluate(ind);
    }

    Individual best = pop.front();
    for (const auto& ind : pop)
        if (ind.fitness > best.fitness) best = ind;
    GAResult result;
    result.best_initial_throughput = best.fitness;

    auto tournament = [&]() -> const Individual& {
        int winner = pick(rng);
        for (int t = 1; t < ga.tournament_size; ++t) {
            const int c = pick(rng);
            const auto& wc = pop[static_cast<std::size_t>(c)];
            const auto& ww = pop[static_cast<std::size_t>(winner)];
            if (wc.fitness > ww.fitness || (wc.fitness == ww.fitness && c < winner)) winner = c;
        }
        return pop[static_cast<std::size_t>(winner)];
    };

    auto mutate = [&](std::vector<int>& genes) {
        if (n_levels < 2) return;
        std::uniform_int_distribution<int> other(0, n_levels - 2);
        for (int& g : genes) {
            if (unit(rng) < ga.mutation_prob) {
                const int v = other(rng);
                g = v >= g ? v + 1 : v;
            }
        }
    };

    std::vector<int> order(static_cast<std::size_t>(ga.population));
    for (int gen = 0; gen < ga.generations; ++gen) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return pop[static_cast<std::size_t>(a)].fitness > pop[static_cast<std::size_t>(b)].fitness;
        });
        std::vector<Individual> next;
        next.reserve(pop.size());
        for (int e = 0; e < ga.elite_count; ++e)
            next.push_back(pop[static_cast<std::size_t>(order[static_cast<std::size_t>(e)])]);

        while (next.size() < pop.size()) {
            Individual a{tournament().genes, 0};
            Individual b{tournament().genes, 0};
            if (length > 1 && unit(rng) < ga.crossover_prob) {
                std::uniform_int_distribution<int> cut(1, length - 1);
                const int c = cut(rng);
                std::swap_ranges(a.genes.begin() + c, a.genes.end(), b.genes.begin() + c);
            }
            mutate(a.genes);
            mutate(b.genes);
            evaluate(a);
            if (a.fitness > best.fitness) best = a;
            next.push_back(std::move(a));
            if (next.size() < pop.size()) {
                evaluate(b);
                if (b.fitness > best.fitness) best = b;
                next.push_back(std::move(b));
            }
        }
        pop = std::move(next);
    }

    result.allocation = decode_genes(best.genes, cfg);
    result.throughput = best.fitness;
    result.genes = std::move(best.genes);
    return result;
}

ExhaustiveResult exhaustive(const ChannelRealization& ch, const Topology& topo,
                            const ScenarioConfig& cfg, const ActionSpace& actions,
                            std::uint64_t cap) {
    const int K = cfg.num_cells;
    const auto m = static_cast<std::uint64_t>(actions.size());
    std::uint64_t total = 1;
    for (int k = 0; k < K; ++k) {
        if (total > cap / m) {
            total = std::numeric_limits<std::uint64_t>::max();
            break;
        }
        total *= m;
    }
    if (total > cap)
        throw SearchTooLarge("exhaustive search over " + std::to_string(m) + "^" +
                             std::to_string(K) + " joint actions exceeds the cap of " +
                             std::to_string(cap));

    const double alpha = snr_gap(cfg.target_ber);
    ExhaustiveResult best;
    best.throughput = -1.0;
    JointAction joint(static_cast<std::size_t>(K), 0);
    PowerAllocation p(K, cfg.num_subbands);
    while (true) {
        for (int k = 0; k < K; ++k) {
            const auto powers = actions.powers(joint[static_cast<std::size_t>(k)]);
            for (int f = 0; f < cfg.num_subbands; ++f) p(k, f) = powers[static_cast<std::size_t>(f)];
        }
        const double u = utility(p, ch, topo, cfg, alpha);
        ++best.evaluated;
        if (u > best.throughput) {
            best.throughput = u;
            best.action = joint;
            best.allocation = p;
        }
        int pos = K - 1;
        while (pos >= 0 && ++joint[static_cast<std::size_t>(pos)] == actions.size()) {
            joint[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
    }
    return best;
}

WmmseResult wmmse(const ChannelRealization& ch, const Topology& topo, const ScenarioConfig& cfg,
                  const WmmseOptions& opts) {
    cfg.validate();
    const int K = cfg.num_cells;
    const int F = cfg.num_subbands;
    const double alpha = snr_gap(cfg.target_ber);
    const double bw = cfg.subband_bandwidth_hz;
    const double pmax = cfg.max_power_w;
    const double noise = ch.noise_power_w;

    WmmseResult res;
    PowerAllocation p(K, F, pmax / F);
    res.assignment = assign_subbands(p, ch, topo, alpha);

    // gain(k, j, f): from BS j at the receiver of link (k, f); direct links carry alpha.
    auto gain = [&](int k, int j, int f) {
        const double g = ch.gain(res.assignment(k, f), j, f);
        return j == k ? alpha * g : g;
    };

    std::vector<double> v(static_cast<std::size_t>(K * F));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sqrt(p.watts[i]);
    auto at = [F](int k, int f) { return static_cast<std::size_t>(k * F + f); };

    double obj = assigned_utility(p, ch, res.assignment, alpha, bw);
    res.objective_history.push_back(obj);
    PowerAllocation best_p = p;
    double best_obj = obj;

    std::vector<double> mmse_u(v.size());
    std::vector<double> weight(v.size());
    std::vector<double> num(static_cast<std::size_t>(F));
    std::vector<double> den(static_cast<std::size_t>(F));

    for (int it = 0; it < opts.max_iters; ++it) {
        for (int f = 0; f < F; ++f) {
            for (int k = 0; k < K; ++k) {
                double rx = noise;
                for (int j = 0; j < K; ++j) rx += gain(k, j, f) * v[at(j, f)] * v[at(j, f)];
                const double h = std::sqrt(gain(k, k, f));
                mmse_u[at(k, f)] = h * v[at(k, f)] / rx;
                weight[at(k, f)] = 1.0 / (1.0 - mmse_u[at(k, f)] * h * v[at(k, f)]);
            }
        }
        for (int k = 0; k < K; ++k) {
            for (int f = 0; f < F; ++f) {
                num[static_cast<std::size_t>(f)] =
                    weight[at(k, f)] * mmse_u[at(k, f)] * std::sqrt(gain(k, k, f));
                double d = 0;
                for (int j = 0; j < K; ++j)
                    d += weight[at(j, f)] * mmse_u[at(j, f)] * mmse_u[at(j, f)] * gain(j, k, f);
                den[static_cast<std::size_t>(f)] = d;
            }
            auto power_at = [&](double mu) {
                double s = 0;
                for (int f = 0; f < F; ++f) {
                    const double x = num[static_cast<std::size_t>(f)] /
                                     (den[static_cast<std::size_t>(f)] + mu);
                    s += x * x;
                }
                return s;
            };
            double mu = 0;
            if (!(power_at(0.0) <= pmax)) {
                const double max_num = *std::max_element(num.begin(), num.end());
                double lo = 0;
                double hi = max_num * std::sqrt(F / pmax);
                while (!(power_at(hi) <= pmax)) hi *= 2;
                for (int b = 0; b < 200 && hi - lo > hi * 1e-16; ++b) {
                    const double mid = 0.5 * (lo + hi);
                    (power_at(mid) <= pmax ? hi : lo) = mid;
                }
                mu = hi;
            }
            for (int f = 0; f < F; ++f)
                v[at(k, f)] = num[static_cast<std::size_t>(f)] / (den[static_cast<std::size_t>(f)] + mu);
        }

        for (std::size_t i = 0; i < v.size(); ++i) p.watts[i] = v[i] * v[i];
        const double next = assigned_utility(p, ch, res.assignment, alpha, bw);
        res.objective_history.push_back(next);
        res.iterations = it + 1;
        if (next > best_obj) {
            best_obj = next;
            best_p = p;
        }
        const double change = std::abs(next - obj) / std::max(std::abs(obj), 1e-300);
        obj = next;
        if (change < opts.tol) {
            res.converged = true;
            break;
        }
    }

    res.allocation = std::move(best_p);
    res.objective = best_obj;
    res.throughput = network_utility(res.allocation, ch, topo, alpha, bw);
    return res;
}

PowerAllocation max_power_baseline(const ScenarioConfig& cfg) {
    const double level = cfg.fixed_power_level_w;
    if (!(level > 0) || !within_budget(level * cfg.num_subbands, cfg.max_power_w))
        throw ConfigError("max-power level " + std::to_string(level) + " W on " +
                          std::to_string(cfg.num_subbands) + " subbands exceeds the " +
                          std::to_string(cfg.max_power_w) + " W budget");
    return PowerAllocation(cfg.num_cells, cfg.num_subbands, level);
}

RandomResult random_power_baseline(const ActionSpace& actions, int num_cells, Rng& rng) {
    RandomResult r;
    std::uniform_int_distribution<int> pick(0, actions.size() - 1);
    r.allocation = PowerAllocation(num_cells, actions.num_subbands());
    for (int k = 0; k < num_cells; ++k) {
        const int a = pick(rng);
        r.action.push_back(a);
        const auto powers = actions.powers(a);
        for (int f = 0; f < actions.num_subbands(); ++f)
            r.allocation(k, f) = powers[static_cast<std::size_t>(f)];
    }
    return r;
}

}  // namespace dqlpa
