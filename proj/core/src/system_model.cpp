#include "aoimec/system_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aoimec {

const char* to_string(SlotOutcome o) {
    switch (o) {
        case SlotOutcome::Idle: return "idle";
        case SlotOutcome::Pending: return "pending";
        case SlotOutcome::Failed: return "failed";
        case SlotOutcome::Completed: return "completed";
    }
    return "?";
}

bool OffloadMatrix::row_column_valid(int per_bs_cap) const {
    for (int i = 0; i < num_devices; ++i) {
        int row = 0;
        for (int j = 0; j < num_bs; ++j) row += assigned(i, j) ? 1 : 0;
        if (row > 1) return false;
    }
    for (int j = 0; j < num_bs; ++j) {
        int col = 0;
        for (int i = 0; i < num_devices; ++i) col += assigned(i, j) ? 1 : 0;
        if (col > per_bs_cap) return false;
    }
    return true;
}

bool AllocationMatrix::respects(const OffloadMatrix& x, double bandwidth_cap,
                                std::span<const double> compute_caps, double tol) const {
    for (int i = 0; i < num_devices; ++i) {
        for (int j = 0; j < num_bs; ++j) {
            if (!x.assigned(i, j) && (bw(i, j) != 0.0 || cpu(i, j) != 0.0)) return false;
            if (bw(i, j) < 0.0 || cpu(i, j) < 0.0) return false;
        }
    }
    for (int j = 0; j < num_bs; ++j) {
        double b = 0.0, f = 0.0;
        for (int i = 0; i < num_devices; ++i) {
            b += bw(i, j);
            f += cpu(i, j);
        }
        if (b > bandwidth_cap * (1.0 + tol) || f > compute_caps[j] * (1.0 + tol)) return false;
    }
    return true;
}

ChannelMatrix sample_channel(Rng& rng, const Deployment& dep, const SystemConfig& cfg) {
    ChannelMatrix h;
    h.num_devices = cfg.num_devices;
    h.num_bs = cfg.num_bs;
    h.distances = dep.distances;
    h.gain_pow.resize(h.distances.size());
    for (std::size_t k = 0; k < h.distances.size(); ++k) {
        if (h.distances[k] <= 0.0) throw std::invalid_argument("sample_channel: zero distance");
        // Rayleigh amplitude fading ~ CN(0,1) gives unit-mean exponential power
        h.gain_pow[k] = rng.exponential() * pathloss_linear(h.distances[k]);
    }
    return h;
}

double transmission_rate(double bandwidth_hz, double tx_power_w, double gain_pow,
                         double noise_power_w) {
    if (bandwidth_hz <= 0.0) throw std::invalid_argument("transmission_rate: bandwidth must be > 0");
    if (noise_power_w <= 0.0) throw std::invalid_argument("transmission_rate: noise power must be > 0");
    const double snr = tx_power_w * gain_pow / noise_power_w;
    return bandwidth_hz * std::log2(1.0 + snr);
}

DelayEnergy delays_and_energy(const TaskRecord& task, double compute_share, double rate_bps,
                              double tx_power_w) {
    if (rate_bps <= 0.0) throw std::invalid_argument("delays_and_energy: rate must be > 0");
    if (compute_share <= 0.0) throw std::invalid_argument("delays_and_energy: infeasible allocation, zero compute");
    DelayEnergy d;
    d.t_trans = task.size_bits / rate_bps;
    d.t_comp = task.size_bits * task.cycles_per_bit / compute_share;
    d.energy = tx_power_w * d.t_trans;
    return d;
}

double aoi_step(double aoi, SlotOutcome outcome, double now, const std::optional<TaskRecord>& task,
                double t_trans, double t_comp, const SystemConfig& cfg) {
    double next;
    if (outcome == SlotOutcome::Completed) {
        if (!task) throw std::invalid_argument("aoi_step: completed outcome without a task record");
        next = now - task->gen_time + t_trans + t_comp;
    } else {
        next = aoi + cfg.slot_len;
    }
    return std::min(next, cfg.aoi_cap());
}

}  // namespace aoimec
