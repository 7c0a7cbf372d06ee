#include "aoimec/deployment.hpp"

#include <cmath>

#include "aoimec/rng.hpp"

namespace aoimec {

Deployment make_deployment(const SystemConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(fold_seed(seed, 0xdeb10ULL));

    const int n = cfg.num_devices;
    const int m = cfg.num_bs;
    Deployment dep;
    dep.device_pos.resize(n);
    dep.bs_pos.resize(m);
    for (auto& p : dep.device_pos) p = {rng.uniform(0.0, cfg.area_side_m), rng.uniform(0.0, cfg.area_side_m)};
    for (auto& p : dep.bs_pos) p = {rng.uniform(0.0, cfg.area_side_m), rng.uniform(0.0, cfg.area_side_m)};

    dep.distances.resize(static_cast<std::size_t>(n) * m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            const double dx = dep.device_pos[i].x - dep.bs_pos[j].x;
            const double dy = dep.device_pos[i].y - dep.bs_pos[j].y;
            dep.distances[static_cast<std::size_t>(i) * m + j] = std::hypot(dx, dy);
        }
    }

    dep.energy_cap.resize(n);
    for (auto& e : dep.energy_cap) e = rng.uniform(cfg.energy_cap_range.lo, cfg.energy_cap_range.hi);
    dep.compute_cap.resize(m);
    for (auto& f : dep.compute_cap) f = rng.uniform(cfg.compute_cap_range.lo, cfg.compute_cap_range.hi);

    dep.tx_power.assign(n, cfg.tx_power_w);
    dep.priority.assign(n, cfg.alpha);
    dep.cycles_per_bit.assign(n, cfg.cycles_per_bit);
    return dep;
}

}  // namespace aoimec
