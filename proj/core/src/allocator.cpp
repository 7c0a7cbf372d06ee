#include "aoimec/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace aoimec {

double AllocationSolution::total_objective() const {
    double s = 0.0;
    for (const auto& b : per_bs) s += b.objective;
    return s;
}

double AllocationSolution::total_with_staleness() const {
    double s = 0.0;
    for (const auto& b : per_bs) s += b.objective + b.staleness_const;
    return s;
}

std::vector<double> waterfill(std::span<const double> weights, double cap) {
    if (weights.empty()) return {};
    if (cap <= 0.0) throw std::invalid_argument("waterfill: cap must be > 0");
    double root_sum = 0.0;
    for (double w : weights) {
        if (w <= 0.0) throw std::invalid_argument("waterfill: weights must be > 0");
        root_sum += std::sqrt(w);
    }
    std::vector<double> x(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) x[i] = cap * std::sqrt(weights[i]) / root_sum;
    return x;
}

namespace {

double spectral_efficiency(double tx_power, double gain, double noise_psd, double bandwidth) {
    return std::log2(1.0 + tx_power * gain / (noise_psd * bandwidth));
}

struct BsSplit {
    std::vector<double> bandwidth;
    std::vector<double> compute;
    double kkt_bw = 0.0;
    double kkt_cpu = 0.0;
};

// Bandwidth weights need a spectral efficiency, which itself depends on the
// split; start from an equal split and refine once at the resulting point.
BsSplit split_bs(const BsSubproblem& g, const std::vector<const AllocEntry*>& live,
                 double noise_psd) {
    const std::size_t n = live.size();
    std::vector<double> bw(n, g.bandwidth_cap / static_cast<double>(n));
    std::vector<double> w_bw(n);
    double root_sum = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
        root_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& e = *live[i];
            const double eff = spectral_efficiency(e.tx_power, e.gain_pow, noise_psd, bw[i]);
            w_bw[i] = e.priority * e.task_bits / eff;
            root_sum += std::sqrt(w_bw[i]);
        }
        bw = waterfill(w_bw, g.bandwidth_cap);
    }

    std::vector<double> w_cpu(n);
    double root_sum_cpu = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& e = *live[i];
        w_cpu[i] = e.priority * e.task_bits * e.cycles_per_bit;
        root_sum_cpu += std::sqrt(w_cpu[i]);
    }

    BsSplit out;
    out.bandwidth = std::move(bw);
    out.compute = waterfill(w_cpu, g.compute_cap);
    out.kkt_bw = (root_sum / g.bandwidth_cap) * (root_sum / g.bandwidth_cap);
    out.kkt_cpu = (root_sum_cpu / g.compute_cap) * (root_sum_cpu / g.compute_cap);
    return out;
}

}  // namespace

AllocationSolution solve_p4(const AllocationProblem& problem) {
    AllocationSolution sol;
    sol.alloc = AllocationMatrix::zeros(problem.num_devices, problem.num_bs);

    for (const auto& g : problem.groups) {
        BsSolution bs;
        bs.bs = g.bs;
        std::vector<const AllocEntry*> live;
        live.reserve(g.entries.size());
        for (const auto& e : g.entries) live.push_back(&e);

        BsSplit split;
        while (!live.empty()) {
            split = split_bs(g, live, problem.noise_psd_w_hz);

            // screen the split against the per-device delay and energy budgets
            bool violated = false;
            for (std::size_t i = 0; i < live.size(); ++i) {
                const auto& e = *live[i];
                const double rate =
                    split.bandwidth[i] *
                    spectral_efficiency(e.tx_power, e.gain_pow, problem.noise_psd_w_hz, split.bandwidth[i]);
                const double t_trans = e.task_bits / rate;
                const double t_comp = e.task_bits * e.cycles_per_bit / split.compute[i];
                if (t_trans + t_comp > problem.slot_len || e.tx_power * t_trans > e.energy_cap) {
                    violated = true;
                    break;
                }
            }
            if (!violated) break;

            // shed the least urgent device and give its share to the rest
            std::size_t victim = 0;
            for (std::size_t i = 1; i < live.size(); ++i) {
                if (live[i]->prio_aoi < live[victim]->prio_aoi) victim = i;
            }
            bs.dropped.push_back(live[victim]->device);
            sol.dropped.push_back(live[victim]->device);
            sol.fully_feasible = false;
            live.erase(live.begin() + static_cast<std::ptrdiff_t>(victim));
        }

        for (std::size_t i = 0; i < live.size(); ++i) {
            const auto& e = *live[i];
            sol.alloc.bw(e.device, g.bs) = split.bandwidth[i];
            sol.alloc.cpu(e.device, g.bs) = split.compute[i];
            const double rate = split.bandwidth[i] * spectral_efficiency(e.tx_power, e.gain_pow,
                                                                         problem.noise_psd_w_hz,
                                                                         split.bandwidth[i]);
            bs.objective += e.priority * (e.task_bits / rate +
                                          e.task_bits * e.cycles_per_bit / split.compute[i]);
            bs.staleness_const += e.priority * e.staleness;
            bs.served.push_back(e.device);
        }
        if (!live.empty()) {
            bs.kkt_bandwidth = split.kkt_bw;
            bs.kkt_compute = split.kkt_cpu;
        }
        sol.per_bs.push_back(std::move(bs));
    }
    std::sort(sol.dropped.begin(), sol.dropped.end());
    return sol;
}

namespace {

// Surrogate slot cost at fixed SNR; separable in every coordinate.
double surrogate_cost(const BsSubproblem& g, std::span<const double> bw,
                      std::span<const double> cpu, std::span<const double> snr) {
    double f = 0.0;
    for (std::size_t i = 0; i < g.entries.size(); ++i) {
        const auto& e = g.entries[i];
        f += e.priority * e.task_bits / (bw[i] * std::log2(1.0 + snr[i]));
        f += e.priority * e.task_bits * e.cycles_per_bit / cpu[i];
    }
    return f;
}

double rel_err(double a, double b) {
    const double den = std::max({std::fabs(a), std::fabs(b), 1e-300});
    return std::fabs(a - b) / den;
}

}  // namespace

HessianReport hessian_probe(const BsSubproblem& g, std::span<const double> bandwidth,
                            std::span<const double> compute, std::span<const double> snr) {
    if (bandwidth.size() != g.entries.size() || compute.size() != g.entries.size() ||
        snr.size() != g.entries.size()) {
        throw std::invalid_argument("hessian_probe: size mismatch");
    }
    HessianReport rep;
    std::vector<double> bw(bandwidth.begin(), bandwidth.end());
    std::vector<double> cpu(compute.begin(), compute.end());

    for (std::size_t i = 0; i < g.entries.size(); ++i) {
        const auto& e = g.entries[i];
        if (bw[i] <= 0.0 || cpu[i] <= 0.0) throw std::invalid_argument("hessian_probe: entries must be > 0");
        const double eff = std::log2(1.0 + snr[i]);
        HessianEntry h;
        h.device = e.device;
        h.grad_bw_formula = -e.priority * e.task_bits / (bw[i] * bw[i] * eff);
        h.curv_bw_formula = 2.0 * e.priority * e.task_bits / (bw[i] * bw[i] * bw[i] * eff);
        h.grad_cpu_formula = -e.priority * e.task_bits * e.cycles_per_bit / (cpu[i] * cpu[i]);
        h.curv_cpu_formula = 2.0 * e.priority * e.task_bits * e.cycles_per_bit / (cpu[i] * cpu[i] * cpu[i]);

        const double hb = 1e-4 * bw[i];
        const double hf = 1e-4 * cpu[i];
        auto eval_b = [&](double delta) {
            bw[i] += delta;
            const double v = surrogate_cost(g, bw, cpu, snr);
            bw[i] -= delta;
            return v;
        };
        auto eval_f = [&](double delta) {
            cpu[i] += delta;
            const double v = surrogate_cost(g, bw, cpu, snr);
            cpu[i] -= delta;
            return v;
        };
        const double f0 = surrogate_cost(g, bw, cpu, snr);
        h.grad_bw_fd = (eval_b(hb) - eval_b(-hb)) / (2.0 * hb);
        h.curv_bw_fd = (eval_b(hb) - 2.0 * f0 + eval_b(-hb)) / (hb * hb);
        h.grad_cpu_fd = (eval_f(hf) - eval_f(-hf)) / (2.0 * hf);
        h.curv_cpu_fd = (eval_f(hf) - 2.0 * f0 + eval_f(-hf)) / (hf * hf);

        // cross difference of a separable function
        bw[i] += hb; cpu[i] += hf; const double fpp = surrogate_cost(g, bw, cpu, snr);
        cpu[i] -= 2.0 * hf;        const double fpm = surrogate_cost(g, bw, cpu, snr);
        bw[i] -= 2.0 * hb;         const double fmm = surrogate_cost(g, bw, cpu, snr);
        cpu[i] += 2.0 * hf;        const double fmp = surrogate_cost(g, bw, cpu, snr);
        bw[i] += hb; cpu[i] -= hf;
        h.mixed_fd = (fpp - fpm - fmp + fmm) / (4.0 * hb * hf);

        rep.signs_ok = rep.signs_ok && h.grad_bw_formula < 0.0 && h.curv_bw_formula > 0.0 &&
                       h.grad_cpu_formula < 0.0 && h.curv_cpu_formula > 0.0;
        rep.max_rel_err = std::max({rep.max_rel_err, rel_err(h.grad_bw_formula, h.grad_bw_fd),
                                    rel_err(h.curv_bw_formula, h.curv_bw_fd),
                                    rel_err(h.grad_cpu_formula, h.grad_cpu_fd),
                                    rel_err(h.curv_cpu_formula, h.curv_cpu_fd)});
        const double scale = std::max(std::fabs(h.curv_bw_formula), std::fabs(h.curv_cpu_formula));
        rep.max_mixed = std::max(rep.max_mixed, std::fabs(h.mixed_fd) / scale);
        rep.entries.push_back(h);
    }
    return rep;
}

std::string HessianReport::summary() const {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "hessian probe: %zu entries, signs_ok=%d, max_rel_err=%.3e, max_mixed=%.3e",
                  entries.size(), signs_ok ? 1 : 0, max_rel_err, max_mixed);
    return buf;
}

}  // namespace aoimec
