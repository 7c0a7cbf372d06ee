#include "aoimec/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace aoimec {

SystemState make_initial_state(const SystemConfig& cfg, const Deployment& dep, Rng& rng) {
    SystemState s;
    s.aoi.assign(cfg.num_devices, cfg.slot_len);
    s.energy.assign(cfg.num_devices, 0.0);
    s.delay.assign(cfg.num_devices, 0.0);
    s.queue.assign(cfg.num_devices, std::nullopt);
    s.channel = sample_channel(rng, dep, cfg);
    s.clock = 0;
    return s;
}

std::vector<double> encode_state(const SystemState& s, const SystemConfig& cfg,
                                 const Deployment& dep) {
    const int n = cfg.num_devices;
    const int m = cfg.num_bs;
    std::vector<double> f;
    f.reserve(static_cast<std::size_t>(3 * n + n * m));
    for (int i = 0; i < n; ++i) f.push_back(s.aoi[i] / cfg.aoi_cap());
    for (int i = 0; i < n; ++i) f.push_back(s.energy[i] / dep.energy_cap[i]);
    for (int i = 0; i < n; ++i) f.push_back(s.delay[i] / cfg.slot_len);

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double g : s.channel.gain_pow) {
        const double lg = std::log10(g);
        lo = std::min(lo, lg);
        hi = std::max(hi, lg);
    }
    for (double g : s.channel.gain_pow) {
        const double lg = std::log10(g);
        f.push_back(hi > lo ? (lg - lo) / (hi - lo) : 0.5);
    }
    return f;
}

JointAction repair_action(const JointAction& raw, const SystemState& s, const SystemConfig& cfg,
                          const Deployment& dep) {
    if (static_cast<int>(raw.size()) != cfg.num_devices)
        throw std::invalid_argument("repair_action: wrong action length");
    JointAction act = raw;
    for (int j = 1; j <= cfg.num_bs; ++j) {
        std::vector<int> takers;
        for (int i = 0; i < cfg.num_devices; ++i) {
            if (act[i] < 0 || act[i] > cfg.num_bs)
                throw std::invalid_argument("repair_action: choice out of range");
            if (act[i] == j) takers.push_back(i);
        }
        if (static_cast<int>(takers.size()) <= cfg.per_bs_cap) continue;
        std::stable_sort(takers.begin(), takers.end(), [&](int a, int b) {
            return dep.priority[a] * s.aoi[a] > dep.priority[b] * s.aoi[b];
        });
        for (std::size_t k = cfg.per_bs_cap; k < takers.size(); ++k) act[takers[k]] = 0;
    }
    return act;
}

OffloadMatrix to_offload_matrix(const JointAction& act, int num_bs) {
    OffloadMatrix x;
    x.num_devices = static_cast<int>(act.size());
    x.num_bs = num_bs;
    x.assign.assign(static_cast<std::size_t>(x.num_devices) * num_bs, 0);
    for (int i = 0; i < x.num_devices; ++i) {
        if (act[i] > 0) x.assign[static_cast<std::size_t>(i) * num_bs + (act[i] - 1)] = 1;
    }
    return x;
}

double reward_fn(const SystemState& after, const SystemConfig& cfg, const Deployment& dep) {
    double penalty = 0.0;
    for (int i = 0; i < cfg.num_devices; ++i) {
        penalty += dep.priority[i] * after.aoi[i] -
                   cfg.relax_energy * (dep.energy_cap[i] - after.energy[i]) -
                   cfg.relax_delay * (cfg.slot_len - after.delay[i]);
    }
    return -penalty;
}

AllocationProblem build_allocation_problem(const SystemState& s, const JointAction& act,
                                           const SystemConfig& cfg, const Deployment& dep) {
    AllocationProblem p;
    p.num_devices = cfg.num_devices;
    p.num_bs = cfg.num_bs;
    p.noise_psd_w_hz = cfg.noise_psd_w_hz();
    p.slot_len = cfg.slot_len;
    const double now = s.now(cfg.slot_len);
    for (int j = 0; j < cfg.num_bs; ++j) {
        BsSubproblem g;
        g.bs = j;
        g.bandwidth_cap = cfg.bandwidth_cap_hz;
        g.compute_cap = dep.compute_cap[j];
        for (int i = 0; i < cfg.num_devices; ++i) {
            if (act[i] != j + 1 || !s.queue[i]) continue;
            const TaskRecord& t = *s.queue[i];
            AllocEntry e;
            e.device = i;
            e.task_bits = t.size_bits;
            e.cycles_per_bit = t.cycles_per_bit;
            e.priority = dep.priority[i];
            e.gain_pow = s.channel.gain(i, j);
            e.tx_power = dep.tx_power[i];
            e.energy_cap = dep.energy_cap[i];
            e.prio_aoi = dep.priority[i] * s.aoi[i];
            e.staleness = now - t.gen_time;
            g.entries.push_back(e);
        }
        if (!g.entries.empty()) p.groups.push_back(std::move(g));
    }
    return p;
}

StepOutcome step_slot(const SystemState& s, const JointAction& act, const AllocationSolution& asol,
                      const SystemConfig& cfg, const Deployment& dep, Rng& rng) {
    const int n = cfg.num_devices;
    const double now = s.now(cfg.slot_len);

    StepOutcome out;
    out.next = s;
    out.outcomes.assign(n, SlotOutcome::Idle);
    out.aoi_clamped.assign(n, 0);
    out.alloc_objective = asol.total_with_staleness();

    const auto dropped = [&](int i) {
        return std::find(asol.dropped.begin(), asol.dropped.end(), i) != asol.dropped.end();
    };

    for (int i = 0; i < n; ++i) {
        const int j = act[i];
        DelayEnergy de;
        SlotOutcome outcome = SlotOutcome::Idle;
        if (j > 0 && s.queue[i]) {
            if (dropped(i)) {
                outcome = SlotOutcome::Failed;  // screened out before transmitting
            } else {
                const double bw = asol.alloc.bw(i, j - 1);
                const double cpu = asol.alloc.cpu(i, j - 1);
                if (bw <= 0.0 || cpu <= 0.0)
                    throw std::invalid_argument("step_slot: allocation missing for offloading device");
                const double rate =
                    transmission_rate(bw, dep.tx_power[i], s.channel.gain(i, j - 1),
                                      cfg.noise_psd_w_hz() * bw);
                de = delays_and_energy(*s.queue[i], cpu, rate, dep.tx_power[i]);
                const bool over_budget =
                    de.total() > cfg.slot_len || de.energy > dep.energy_cap[i];
                if (over_budget) {
                    outcome = SlotOutcome::Failed;
                    ++out.attempted_violations;
                } else if (!rng.bernoulli(cfg.offload_success_prob)) {
                    outcome = SlotOutcome::Failed;
                } else {
                    outcome = SlotOutcome::Completed;
                }
            }
        }

        const double unclamped = outcome == SlotOutcome::Completed
                                     ? now - s.queue[i]->gen_time + de.t_trans + de.t_comp
                                     : s.aoi[i] + cfg.slot_len;
        out.next.aoi[i] = aoi_step(s.aoi[i], outcome, now, s.queue[i], de.t_trans, de.t_comp, cfg);
        out.aoi_clamped[i] = unclamped > cfg.aoi_cap() ? 1 : 0;

        if (outcome == SlotOutcome::Completed) {
            if (de.total() > cfg.slot_len || de.energy > dep.energy_cap[i]) ++out.executed_violations;
            out.next.queue[i].reset();
        }
        out.next.energy[i] = (j > 0 && s.queue[i] && !dropped(i)) ? de.energy : 0.0;
        out.next.delay[i] = (j > 0 && s.queue[i] && !dropped(i)) ? de.total() : 0.0;
        out.outcomes[i] = outcome;
    }

    out.reward = reward_fn(out.next, cfg, dep);

    // next-slot arrivals; a fresh packet replaces anything still queued
    for (int i = 0; i < n; ++i) {
        if (rng.bernoulli(cfg.arrival_rate)) {
            TaskRecord t;
            t.size_bits = rng.uniform(cfg.task_size_range.lo, cfg.task_size_range.hi);
            t.cycles_per_bit = dep.cycles_per_bit[i];
            t.gen_time = now + rng.uniform() * cfg.slot_len;
            out.next.queue[i] = t;
        }
    }
    out.next.channel = sample_channel(rng, dep, cfg);
    out.next.clock = s.clock + 1;
    return out;
}

Environment::Environment(SystemConfig cfg, std::uint64_t run_seed, AllocatorMode mode)
    : cfg_(std::move(cfg)), mode_(mode), rng_(0) {
    cfg_.validate();
    dep_ = make_deployment(cfg_, run_seed);
    reset(run_seed);
}

void Environment::reset(std::uint64_t episode_seed) {
    rng_ = Rng(fold_seed(episode_seed, 0xE41ULL));
    state_ = make_initial_state(cfg_, dep_, rng_);
}

JointAction Environment::sanitize(const JointAction& raw) const {
    JointAction act = raw;
    for (int i = 0; i < cfg_.num_devices; ++i) {
        if (!state_.queue[i]) act[i] = 0;
    }
    return act;
}

AllocationSolution Environment::allocate(const JointAction& repaired) const {
    AllocationProblem p = build_allocation_problem(state_, repaired, cfg_, dep_);
    if (mode_ == AllocatorMode::Waterfill) return solve_p4(p);

    AllocationSolution sol;
    sol.alloc = AllocationMatrix::zeros(cfg_.num_devices, cfg_.num_bs);
    for (const auto& g : p.groups) {
        BsSolution bs;
        bs.bs = g.bs;
        const double share_bw = g.bandwidth_cap / static_cast<double>(g.entries.size());
        const double share_cpu = g.compute_cap / static_cast<double>(g.entries.size());
        for (const auto& e : g.entries) {
            sol.alloc.bw(e.device, g.bs) = share_bw;
            sol.alloc.cpu(e.device, g.bs) = share_cpu;
            const double rate = transmission_rate(share_bw, e.tx_power, e.gain_pow,
                                                  p.noise_psd_w_hz * share_bw);
            bs.objective += e.priority * (e.task_bits / rate +
                                          e.task_bits * e.cycles_per_bit / share_cpu);
            bs.staleness_const += e.priority * e.staleness;
            bs.served.push_back(e.device);
        }
        sol.per_bs.push_back(std::move(bs));
    }
    return sol;
}

StepOutcome Environment::step(const JointAction& raw) {
    const JointAction act = repair_action(sanitize(raw), state_, cfg_, dep_);
    const AllocationSolution asol = allocate(act);

    // executed actions and allocations must satisfy the access and cap limits
    if (!to_offload_matrix(act, cfg_.num_bs).row_column_valid(cfg_.per_bs_cap)) ++executed_violations_;
    if (!asol.alloc.respects(to_offload_matrix(act, cfg_.num_bs), cfg_.bandwidth_cap_hz,
                             dep_.compute_cap)) {
        ++executed_violations_;
    }

    StepOutcome out = step_slot(state_, act, asol, cfg_, dep_, rng_);
    executed_violations_ += out.executed_violations;
    attempted_violations_ += out.attempted_violations;
    state_ = out.next;
    return out;
}

}  // namespace aoimec
