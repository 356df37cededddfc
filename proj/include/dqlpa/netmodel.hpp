#pragma once

#include "dqlpa/config.hpp"
#include "dqlpa/rng.hpp"

#include <cstddef>
#include <vector>

namespace dqlpa {

struct Point {
    double x = 0;
    double y = 0;
};

double distance(Point a, Point b);

/// Base-station layout and user drop. Users carry a global index u = k * U + i for
/// the i-th user of cell k, so cell k owns the contiguous range [k*U, (k+1)*U).
struct Topology {
    int num_cells = 0;
    int users_per_cell = 0;
    double cell_radius_m = 0;
    std::vector<Point> bs_positions;
    std::vector<Point> user_positions;
    std::vector<int> serving_cell;
    std::vector<double> serving_distance_m;

    int num_users() const { return num_cells * users_per_cell; }
    int first_user(int cell) const { return cell * users_per_cell; }
};

/// Linear link gains G[u][k][f] and the per-subband noise power (watts).
struct ChannelRealization {
    int num_users = 0;
    int num_cells = 0;
    int num_subbands = 0;
    std::vector<double> gains;
    double noise_power_w = 0;

    ChannelRealization() = default;
    ChannelRealization(int users, int cells, int subbands, double noise, double fill = 1.0)
        : num_users(users), num_cells(cells), num_subbands(subbands),
          gains(static_cast<std::size_t>(users) * cells * subbands, fill),
          noise_power_w(noise) {}

    double gain(int u, int k, int f) const { return gains[index(u, k, f)]; }
    double& gain(int u, int k, int f) { return gains[index(u, k, f)]; }

private:
    std::size_t index(int u, int k, int f) const {
        return (static_cast<std::size_t>(u) * num_cells + k) * num_subbands + f;
    }
};

/// Transmit power P[k][f] in watts.
struct PowerAllocation {
    int num_cells = 0;
    int num_subbands = 0;
    std::vector<double> watts;

    PowerAllocation() = default;
    PowerAllocation(int cells, int subbands, double fill = 0.0)
        : num_cells(cells), num_subbands(subbands),
          watts(static_cast<std::size_t>(cells) * subbands, fill) {}

    double operator()(int k, int f) const { return watts[idx(k, f)]; }
    double& operator()(int k, int f) { return watts[idx(k, f)]; }
    double cell_total(int k) const;
    bool operator==(const PowerAllocation&) const = default;

private:
    std::size_t idx(int k, int f) const {
        return static_cast<std::size_t>(k) * num_subbands + f;
    }
};

/// A[k][f]: global index of the user that gets subband f of cell k.
struct SubbandAssignment {
    int num_cells = 0;
    int num_subbands = 0;
    std::vector<int> users;

    int operator()(int k, int f) const {
        return users[static_cast<std::size_t>(k) * num_subbands + f];
    }
};

enum class LogBase { two, natural };

double db_to_linear(double db);
double linear_to_db(double x);
double dbm_to_watts(double dbm);

/// SNR gap for M-QAM at the given bit error rate: -1.5 / ln(5 * BER).
double snr_gap(double target_ber);

/// Path loss in dB at `distance_m`, log-distance model referenced to 1 km.
double pathloss_db(const ScenarioConfig& cfg, double distance_m);

/// Noise power over one subband, in watts.
double noise_power_w(double density_dbm_hz, double bandwidth_hz);

/// Hexagonal grid site `index` in spiral order (0 = origin, then rings outward).
Point hex_site(int index, double inter_site_distance);

Topology build_topology(const ScenarioConfig& cfg, Rng& rng);

/// Draws shadowing per (user, cell) link and unit-mean Rayleigh power per
/// (user, cell, subband).
ChannelRealization draw_channel(const Topology& topo, const ScenarioConfig& cfg, Rng& rng);

double sinr(const PowerAllocation& p, const ChannelRealization& ch, int u, int k, int f);

/// log(1 + alpha * SINR), in the requested base, per Hz.
double spectral_efficiency(double alpha, double sinr_value, LogBase base = LogBase::two);

/// Best user of each cell on each subband; ties go to the lowest user index.
SubbandAssignment assign_subbands(const PowerAllocation& p, const ChannelRealization& ch,
                                  const Topology& topo, double alpha);

/// Total network throughput with each subband given to its best user. In bits/s for
/// LogBase::two, nats/s for LogBase::natural.
double network_utility(const PowerAllocation& p, const ChannelRealization& ch,
                       const Topology& topo, double alpha, double bandwidth_hz,
                       LogBase base = LogBase::two);

/// Throughput under a fixed subband assignment.
double assigned_utility(const PowerAllocation& p, const ChannelRealization& ch,
                        const SubbandAssignment& a, double alpha, double bandwidth_hz,
                        LogBase base = LogBase::two);

/// Uniform 15-bin quantizer of SINR over [-10, 30] dB; returns 1..15.
int cqi_quantize(double sinr_value);

/// 1 for a cell-edge user (serving distance > R/2), else 0.
int location_indicator(const Topology& topo, int u);

}  // namespace dqlpa
