#pragma once

#include <vector>

#include "aoimec/system_config.hpp"

namespace aoimec {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

// Per-run random draws that stay fixed across every slot and episode of a
// seeded run: node geometry plus the per-entity parameter values sampled
// from the configured ranges.
struct Deployment {
    std::vector<Point> device_pos;     // N
    std::vector<Point> bs_pos;         // M
    std::vector<double> distances;     // N*M row-major, meters
    std::vector<double> energy_cap;    // N, joules
    std::vector<double> compute_cap;   // M, cycles/s
    std::vector<double> tx_power;      // N, watts
    std::vector<double> priority;      // N, alpha_i
    std::vector<double> cycles_per_bit;  // N

    double distance(int device, int bs, int num_bs) const {
        return distances[static_cast<std::size_t>(device) * num_bs + bs];
    }
};

// Deterministic for a given (config, seed); geometry is uniform over the
// configured square.
Deployment make_deployment(const SystemConfig& cfg, std::uint64_t seed);

}  // namespace aoimec
