#include "aoimec/system_config.hpp"

#include <cmath>

#include "aoimec/errors.hpp"

namespace aoimec {

namespace {
void require(bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid config: ") + what);
}
}  // namespace

void SystemConfig::validate() const {
    require(num_devices >= 1, "num_devices must be >= 1");
    require(num_bs >= 1, "num_bs must be >= 1");
    require(per_bs_cap >= 1, "per_bs_cap must be >= 1");
    require(slot_len > 0.0, "slot_len must be > 0");
    require(horizon >= 1, "horizon must be >= 1");
    require(bandwidth_cap_hz > 0.0, "bandwidth_cap_hz must be > 0");
    require(compute_cap_range.lo > 0.0 && compute_cap_range.hi >= compute_cap_range.lo,
            "compute_cap_range must be positive and ordered");
    require(energy_cap_range.lo > 0.0 && energy_cap_range.hi >= energy_cap_range.lo,
            "energy_cap_range must be positive and ordered");
    require(tx_power_w > 0.0, "tx_power_w must be > 0");
    require(alpha > 0.0, "alpha must be > 0");
    require(task_size_range.lo > 0.0 && task_size_range.hi >= task_size_range.lo,
            "task_size_range must be positive and ordered");
    require(cycles_per_bit > 0.0, "cycles_per_bit must be > 0");
    require(arrival_rate >= 0.0 && arrival_rate <= 1.0, "arrival_rate must be in [0,1]");
    require(offload_success_prob > 0.0 && offload_success_prob <= 1.0,
            "offload_success_prob must be in (0,1]");
    require(aoi_cap_slots > 0.0, "aoi_cap_slots must be > 0");
    require(relax_energy >= 0.0, "relax_energy must be >= 0");
    require(relax_delay >= 0.0, "relax_delay must be >= 0");
    require(area_side_m > 0.0, "area_side_m must be > 0");
}

double pathloss_db(double distance_m) {
    if (distance_m <= 0.0) throw ConfigError("pathloss: distance must be > 0");
    return 128.1 + 37.6 * std::log10(distance_m / 1000.0);
}

double pathloss_linear(double distance_m) {
    return std::pow(10.0, -pathloss_db(distance_m) / 10.0);
}

}  // namespace aoimec
