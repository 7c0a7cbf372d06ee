#pragma once

#include <optional>
#include <vector>

#include "aoimec/deployment.hpp"
#include "aoimec/rng.hpp"
#include "aoimec/system_config.hpp"

namespace aoimec {

// One status-update packet waiting at a device.
struct TaskRecord {
    double size_bits = 0.0;
    double cycles_per_bit = 0.0;
    double gen_time = 0.0;  // absolute seconds
};

// Power-domain channel gains |h|^2 for every device-BS pair, one fresh draw
// per slot: unit-mean Rayleigh power fading on top of distance path loss.
struct ChannelMatrix {
    int num_devices = 0;
    int num_bs = 0;
    std::vector<double> gain_pow;   // N*M row-major, linear |h|^2
    std::vector<double> distances;  // N*M row-major, meters

    double gain(int device, int bs) const {
        return gain_pow[static_cast<std::size_t>(device) * num_bs + bs];
    }
    double distance(int device, int bs) const {
        return distances[static_cast<std::size_t>(device) * num_bs + bs];
    }
};

// Binary device-to-BS assignment. Valid matrices have at most one BS per
// device row and at most K devices per BS column.
struct OffloadMatrix {
    int num_devices = 0;
    int num_bs = 0;
    std::vector<std::uint8_t> assign;  // N*M row-major

    bool assigned(int device, int bs) const {
        return assign[static_cast<std::size_t>(device) * num_bs + bs] != 0;
    }
    bool row_column_valid(int per_bs_cap) const;
};

// Continuous per-pair bandwidth (Hz) and compute (cycles/s) shares. Entries
// are zero wherever the device is not assigned to the BS.
struct AllocationMatrix {
    int num_devices = 0;
    int num_bs = 0;
    std::vector<double> bandwidth;  // N*M row-major
    std::vector<double> compute;    // N*M row-major

    static AllocationMatrix zeros(int n, int m) {
        AllocationMatrix a;
        a.num_devices = n;
        a.num_bs = m;
        a.bandwidth.assign(static_cast<std::size_t>(n) * m, 0.0);
        a.compute.assign(static_cast<std::size_t>(n) * m, 0.0);
        return a;
    }
    double bw(int device, int bs) const { return bandwidth[static_cast<std::size_t>(device) * num_bs + bs]; }
    double cpu(int device, int bs) const { return compute[static_cast<std::size_t>(device) * num_bs + bs]; }
    double& bw(int device, int bs) { return bandwidth[static_cast<std::size_t>(device) * num_bs + bs]; }
    double& cpu(int device, int bs) { return compute[static_cast<std::size_t>(device) * num_bs + bs]; }
    // caps respected per BS column, zero where unassigned
    bool respects(const OffloadMatrix& x, double bandwidth_cap, std::span<const double> compute_caps,
                  double tol = 1e-9) const;
};

struct DelayEnergy {
    double t_trans = 0.0;  // seconds on air
    double t_comp = 0.0;   // seconds on the MEC CPU
    double energy = 0.0;   // joules spent by the device radio
    double total() const { return t_trans + t_comp; }
};

enum class SlotOutcome : std::uint8_t { Idle, Pending, Failed, Completed };

const char* to_string(SlotOutcome o);

// Fresh per-slot channel draw: |h|^2 = Exp(1) * linear path gain.
ChannelMatrix sample_channel(Rng& rng, const Deployment& dep, const SystemConfig& cfg);

// Shannon rate in bits/s. noise_power is the receiver noise over the
// allocated band (PSD * bandwidth).
double transmission_rate(double bandwidth_hz, double tx_power_w, double gain_pow, double noise_power_w);

// Air delay, compute delay, and radio energy for one offloaded task.
DelayEnergy delays_and_energy(const TaskRecord& task, double compute_share, double rate_bps,
                              double tx_power_w);

// One-slot AoI update. Completed updates reset the age to end-to-end
// staleness (now - generation + both delays); everything else ages by one
// slot. The result is clamped to the configured ceiling.
double aoi_step(double aoi, SlotOutcome outcome, double now, const std::optional<TaskRecord>& task,
                double t_trans, double t_comp, const SystemConfig& cfg);

}  // namespace aoimec
