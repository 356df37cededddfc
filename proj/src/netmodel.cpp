#include "dqlpa/netmodel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace dqlpa {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

double PowerAllocation::cell_total(int k) const {
    double total = 0;
    for (int f = 0; f < num_subbands; ++f) total += (*this)(k, f);
    return total;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double x) { return 10.0 * std::log10(x); }

double dbm_to_watts(double dbm) { return db_to_linear(dbm - 30.0); }

double snr_gap(double target_ber) {
    if (!(target_ber > 0 && target_ber < 0.2))
        throw ConfigError("target BER must lie in (0, 0.2)");
    return -1.5 / std::log(5.0 * target_ber);
}

double pathloss_db(const ScenarioConfig& cfg, double distance_m) {
    const double d = std::max(distance_m, cfg.min_user_distance_m);
    return cfg.pathloss_ref_db + cfg.pathloss_exp_db_per_decade * std::log10(d / 1000.0);
}

double noise_power_w(double density_dbm_hz, double bandwidth_hz) {
    return dbm_to_watts(density_dbm_hz + linear_to_db(bandwidth_hz));
}

Point hex_site(int index, double isd) {
    // Axial coordinates; ring r holds 6r sites.
    static constexpr std::array<std::array<int, 2>, 6> dirs{
        {{1, 0}, {1, -1}, {0, -1}, {-1, 0}, {-1, 1}, {0, 1}}};
    int q = 0;
    int r = 0;
    if (index > 0) {
        int ring = 1;
        int remaining = index - 1;
        while (remaining >= 6 * ring) {
            remaining -= 6 * ring;
            ++ring;
        }
        q = dirs[4][0] * ring;
        r = dirs[4][1] * ring;
        const int side = remaining / ring;
        const int step = remaining % ring;
        for (int s = 0; s < side; ++s) {
            q += dirs[s][0] * ring;
            r += dirs[s][1] * ring;
        }
        q += dirs[side][0] * step;
        r += dirs[side][1] * step;
    }
    return {isd * (q + r / 2.0), isd * (r * std::numbers::sqrt3 / 2.0)};
}

Topology build_topology(const ScenarioConfig& cfg, Rng& rng) {
    cfg.validate();
    Topology t;
    t.num_cells = cfg.num_cells;
    t.users_per_cell = cfg.users_per_cell;
    t.cell_radius_m = cfg.cell_radius_m;
    const double isd = 2.0 * cfg.cell_radius_m * std::cos(std::numbers::pi / 6.0);
    for (int k = 0; k < cfg.num_cells; ++k) t.bs_positions.push_back(hex_site(k, isd));

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double r2_min = cfg.min_user_distance_m * cfg.min_user_distance_m;
    const double r2_max = cfg.cell_radius_m * cfg.cell_radius_m;
    for (int k = 0; k < cfg.num_cells; ++k) {
        const Point bs = t.bs_positions[static_cast<std::size_t>(k)];
        for (int i = 0; i < cfg.users_per_cell; ++i) {
            double d = 0;
            double theta = 0;
            do {
                d = std::sqrt(unit(rng) * r2_max);
                theta = 2.0 * std::numbers::pi * unit(rng);
            } while (d * d < r2_min);
            t.user_positions.push_back({bs.x + d * std::cos(theta), bs.y + d * std::sin(theta)});
            t.serving_cell.push_back(k);
            t.serving_distance_m.push_back(d);
        }
    }
    return t;
}

ChannelRealization draw_channel(const Topology& topo, const ScenarioConfig& cfg, Rng& rng) {
    ChannelRealization ch(topo.num_users(), topo.num_cells, cfg.num_subbands,
                          noise_power_w(cfg.noise_density_dbm_hz, cfg.subband_bandwidth_hz));
    std::normal_distribution<double> shadowing(0.0, cfg.shadowing_sigma_db);
    std::exponential_distribution<double> rayleigh_power(1.0);
    for (int u = 0; u < topo.num_users(); ++u) {
        for (int k = 0; k < topo.num_cells; ++k) {
            const double d = distance(topo.user_positions[static_cast<std::size_t>(u)],
                                      topo.bs_positions[static_cast<std::size_t>(k)]);
            const double x = cfg.shadowing_sigma_db > 0 ? shadowing(rng) : 0.0;
            const double large_scale = db_to_linear(-(pathloss_db(cfg, d) + x));
            for (int f = 0; f < cfg.num_subbands; ++f)
                ch.gain(u, k, f) = large_scale * rayleigh_power(rng);
        }
    }
    return ch;
}

double sinr(const PowerAllocation& p, const ChannelRealization& ch, int u, int k, int f) {
    double interference = 0;
    for (int l = 0; l < ch.num_cells; ++l)
        if (l != k) interference += p(l, f) * ch.gain(u, l, f);
    return p(k, f) * ch.gain(u, k, f) / (ch.noise_power_w + interference);
}

double spectral_efficiency(double alpha, double sinr_value, LogBase base) {
    const double x = alpha * sinr_value;
    return base == LogBase::two ? std::log2(1.0 + x) : std::log1p(x);
}

SubbandAssignment assign_subbands(const PowerAllocation& p, const ChannelRealization& ch,
                                  const Topology& topo, double alpha) {
    SubbandAssignment a{topo.num_cells, ch.num_subbands, {}};
    a.users.reserve(static_cast<std::size_t>(topo.num_cells) * ch.num_subbands);
    for (int k = 0; k < topo.num_cells; ++k) {
        for (int f = 0; f < ch.num_subbands; ++f) {
            int best = topo.first_user(k);
            double best_rate = -1.0;
            for (int i = 0; i < topo.users_per_cell; ++i) {
                const int u = topo.first_user(k) + i;
                const double rate = spectral_efficiency(alpha, sinr(p, ch, u, k, f));
                if (rate > best_rate) {
                    best_rate = rate;
                    best = u;
                }
            }
            a.users.push_back(best);
        }
    }
    return a;
}

double assigned_utility(const PowerAllocation& p, const ChannelRealization& ch,
                        const SubbandAssignment& a, double alpha, double bandwidth_hz,
                        LogBase base) {
    double total = 0;
    for (int k = 0; k < a.num_cells; ++k)
        for (int f = 0; f < a.num_subbands; ++f)
            total += bandwidth_hz * spectral_efficiency(alpha, sinr(p, ch, a(k, f), k, f), base);
    return total;
}

double network_utility(const PowerAllocation& p, const ChannelRealization& ch,
                       const Topology& topo, double alpha, double bandwidth_hz, LogBase base) {
    return assigned_utility(p, ch, assign_subbands(p, ch, topo, alpha), alpha, bandwidth_hz,
                            base);
}

int cqi_quantize(double sinr_value) {
    constexpr double floor_db = -10.0;
    constexpr double ceil_db = 30.0;
    constexpr int bins = 15;
    const double db = sinr_value <= 0.1 ? floor_db : linear_to_db(sinr_value);
    const double width = (ceil_db - floor_db) / bins;
    const int bin = static_cast<int>(std::floor((db - floor_db) / width)) + 1;
    return std::clamp(bin, 1, bins);
}

int location_indicator(const Topology& topo, int u) {
    return topo.serving_distance_m[static_cast<std::size_t>(u)] > topo.cell_radius_m / 2.0 ? 1
                                                                                           : 0;
}

}  // namespace dqlpa
