#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "aoimec/allocator.hpp"
#include "aoimec/deployment.hpp"
#include "aoimec/rng.hpp"
#include "aoimec/system_model.hpp"

namespace aoimec {

// Per-device BS choice: 0 = hold this slot, j in 1..M = offload to BS j.
using JointAction = std::vector<int>;

struct SystemState {
    std::vector<double> aoi;     // N, seconds
    std::vector<double> energy;  // N, joules spent last slot
    std::vector<double> delay;   // N, total processing delay last slot
    ChannelMatrix channel;
    std::vector<std::optional<TaskRecord>> queue;  // head-of-line packet per device
    long clock = 0;                                // slots elapsed

    double now(double slot_len) const { return static_cast<double>(clock) * slot_len; }
};

struct StepOutcome {
    SystemState next;
    double reward = 0.0;
    std::vector<SlotOutcome> outcomes;     // N
    std::vector<std::uint8_t> aoi_clamped; // N, ceiling bound this slot
    double alloc_objective = 0.0;          // full allocator slot cost incl. staleness
    int attempted_violations = 0;  // offload attempts over budget, downgraded to failed
    int executed_violations = 0;   // completed offloads that broke a constraint; must stay 0
};

SystemState make_initial_state(const SystemConfig& cfg, const Deployment& dep, Rng& rng);

// Flat feature vector [aoi/cap ; energy/cap_i ; delay/slot ; min-max scaled
// log10 gains], length 3N + N*M.
std::vector<double> encode_state(const SystemState& s, const SystemConfig& cfg,
                                 const Deployment& dep);

// Enforces the per-BS access cap: when a BS is over-chosen, the K devices
// with the largest priority*AoI keep it (ties to the lower device index) and
// the rest fall back to holding. Idempotent.
JointAction repair_action(const JointAction& raw, const SystemState& s, const SystemConfig& cfg,
                          const Deployment& dep);

OffloadMatrix to_offload_matrix(const JointAction& act, int num_bs);

// Negative weighted AoI, softened by the energy and delay headroom left this
// slot.
double reward_fn(const SystemState& after, const SystemConfig& cfg, const Deployment& dep);

// Groups every device that holds a task and chose a BS into that BS's
// allocation subproblem.
AllocationProblem build_allocation_problem(const SystemState& s, const JointAction& act,
                                           const SystemConfig& cfg, const Deployment& dep);

// Advances one slot: executes the (already repaired) action under the given
// allocation, applies the success lottery and budget checks, updates AoI,
// draws next-slot arrivals and channel. Throws if an offloading device has
// no allocation and was not screened out.
StepOutcome step_slot(const SystemState& s, const JointAction& act, const AllocationSolution& asol,
                      const SystemConfig& cfg, const Deployment& dep, Rng& rng);

// Owns one trajectory: config, deployment, state and RNG stream.
class Environment {
public:
    enum class AllocatorMode { Waterfill, EqualSplit };

    Environment(SystemConfig cfg, std::uint64_t run_seed,
                AllocatorMode mode = AllocatorMode::Waterfill);

    // Deterministic: same seed, same trajectory.
    void reset(std::uint64_t episode_seed);

    // Drops choices without a queued task, repairs the access cap, solves the
    // per-slot allocation and steps.
    StepOutcome step(const JointAction& raw);

    JointAction sanitize(const JointAction& raw) const;
    AllocationSolution allocate(const JointAction& repaired) const;

    const SystemState& state() const { return state_; }
    const SystemConfig& config() const { return cfg_; }
    const Deployment& deployment() const { return dep_; }
    AllocatorMode allocator_mode() const { return mode_; }

    long long executed_violations() const { return executed_violations_; }
    long long attempted_violations() const { return attempted_violations_; }

private:
    SystemConfig cfg_;
    Deployment dep_;
    AllocatorMode mode_;
    SystemState state_;
    Rng rng_;
    long long executed_violations_ = 0;
    long long attempted_violations_ = 0;
};

}  // namespace aoimec
