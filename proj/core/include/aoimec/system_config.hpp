#pragma once

#include <cmath>
#include <cstdint>
#include <string>

namespace aoimec {

inline double dbm_to_watt(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }

struct Range {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const { return x >= lo && x <= hi; }
};

// All physical and learning-environment parameters in one validated record.
// Defaults are the desk-scale settings used throughout the test suites.
struct SystemConfig {
    int num_devices = 4;        // N
    int num_bs = 2;             // M
    int per_bs_cap = 3;         // K, max devices served per BS per slot
    double slot_len = 1.0;      // seconds per decision slot
    int horizon = 200;          // slots per episode

    double bandwidth_cap_hz = 400e3;            // per-BS bandwidth budget
    Range compute_cap_range{7e9, 10e9};         // per-BS CPU cycles/s, drawn per BS
    Range energy_cap_range{0.5, 1.5};           // per-device joules per slot, drawn per device
    double tx_power_w = dbm_to_watt(27.8);      // fixed per device at its cap
    double noise_psd_dbm_hz = -174.0;

    double alpha = 1.0;                         // device priority weight, same for all
    Range task_size_range{1e6, 3e6};            // bits per update packet
    double cycles_per_bit = 1000.0;
    double arrival_rate = 0.5;                  // Bernoulli per device per slot
    double offload_success_prob = 0.95;
    double aoi_cap_slots = 20.0;                // AoI ceiling in units of slot_len
    double relax_energy = 0.8;                  // reward slack weight on energy headroom
    double relax_delay = 0.95;                  // reward slack weight on delay headroom
    double area_side_m = 1000.0;                // square deployment region

    std::uint64_t rng_seed = 1;

    double noise_psd_w_hz() const { return dbm_to_watt(noise_psd_dbm_hz); }
    double aoi_cap() const { return aoi_cap_slots * slot_len; }

    // throws ConfigError with the offending field name
    void validate() const;
};

// Large-scale loss in dB for a distance in meters: 128.1 + 37.6*log10(d_km).
double pathloss_db(double distance_m);
// Same as a linear power gain.
double pathloss_linear(double distance_m);

}  // namespace aoimec
