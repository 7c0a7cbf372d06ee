#pragma once

#include <span>
#include <string>
#include <vector>

#include "aoimec/system_model.hpp"

namespace aoimec {

// One device requesting service from a particular BS this slot.
struct AllocEntry {
    int device = 0;
    double task_bits = 0.0;
    double cycles_per_bit = 0.0;
    double priority = 1.0;       // alpha_i
    double gain_pow = 0.0;       // |h_ij|^2 toward this BS
    double tx_power = 0.0;
    double energy_cap = 0.0;
    double prio_aoi = 0.0;       // alpha_i * A_i, screening order key
    double staleness = 0.0;      // now - gen_time of the queued task
};

struct BsSubproblem {
    int bs = 0;
    double bandwidth_cap = 0.0;
    double compute_cap = 0.0;
    std::vector<AllocEntry> entries;
};

// The per-slot continuous allocation problem, grouped by BS. Groups are
// independent: the objective is separable across BSs and across the
// bandwidth/compute variables.
struct AllocationProblem {
    int num_devices = 0;
    int num_bs = 0;
    double noise_psd_w_hz = 0.0;
    double slot_len = 0.0;  // per-device delay budget
    std::vector<BsSubproblem> groups;
};

struct BsSolution {
    int bs = 0;
    std::vector<int> served;   // device ids that kept their allocation
    std::vector<int> dropped;  // device ids screened out as infeasible
    double objective = 0.0;        // sum alpha_i * (t_trans + t_comp) at the final split
    double staleness_const = 0.0;  // sum alpha_i * (now - gen); add for the full slot cost
    double kkt_bandwidth = 0.0;    // multiplier of the bandwidth cap
    double kkt_compute = 0.0;      // multiplier of the compute cap
};

struct AllocationSolution {
    AllocationMatrix alloc;
    std::vector<BsSolution> per_bs;
    std::vector<int> dropped;  // union over BSs
    bool fully_feasible = true;  // false iff screening dropped anyone

    double total_objective() const;        // allocation-dependent part
    double total_with_staleness() const;   // full per-slot cost
};

// Closed-form minimizer of sum_i w_i/x_i subject to sum_i x_i <= cap:
// x_i = cap * sqrt(w_i) / sum_k sqrt(w_k). The cap always binds because the
// objective is strictly decreasing in every coordinate.
std::vector<double> waterfill(std::span<const double> weights, double cap);

// Splits every BS's bandwidth and compute among its requesters, then screens
// out devices whose delay or energy budget cannot be met (lowest
// priority-AoI first) and re-solves until the remaining set is feasible.
AllocationSolution solve_p4(const AllocationProblem& problem);

// Numeric check of the allocator objective's curvature: analytic first and
// second derivatives against central finite differences, plus separability
// of the bandwidth/compute cross terms.
struct HessianEntry {
    int device = 0;
    double grad_bw_formula = 0.0, grad_bw_fd = 0.0;
    double curv_bw_formula = 0.0, curv_bw_fd = 0.0;
    double grad_cpu_formula = 0.0, grad_cpu_fd = 0.0;
    double curv_cpu_formula = 0.0, curv_cpu_fd = 0.0;
    double mixed_fd = 0.0;  // d2F/dB df, zero for a separable objective
};

struct HessianReport {
    std::vector<HessianEntry> entries;
    bool signs_ok = true;      // grads < 0, curvatures > 0
    double max_rel_err = 0.0;  // formula vs finite difference
    double max_mixed = 0.0;    // |mixed_fd| scaled by the curvature magnitude
    std::string summary() const;
};

// snr holds the fixed per-entry SNR values at which the surrogate objective
// is evaluated; bandwidth/compute are the allocation point to probe.
HessianReport hessian_probe(const BsSubproblem& group, std::span<const double> bandwidth,
                            std::span<const double> compute, std::span<const double> snr);

}  // namespace aoimec
