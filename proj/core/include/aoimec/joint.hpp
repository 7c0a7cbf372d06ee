#pragma once

#include <functional>

#include "aoimec/agents.hpp"

namespace aoimec {

// Anything that maps the current environment state to a joint action.
using PolicyFn = std::function<JointAction(const Environment&, Rng&)>;

PolicyFn policy_of(const QAgent& agent);  // pure exploitation
PolicyFn policy_greedy();
PolicyFn policy_random();

struct EvalMetrics {
    int episodes = 0;
    // (1/T) sum_t sum_i alpha_i * A_i(t), averaged over episodes
    double weighted_aoi = 0.0;
    double weighted_aoi_ci = 0.0;  // 95% half-width over episodes
    double mean_reward = 0.0;      // per-episode total reward
    double mean_aoi = 0.0;         // per-device per-slot
    double mean_alloc_objective = 0.0;
    long long completed = 0;
    std::vector<double> per_episode_weighted_aoi;
};

// Greedy rollouts of a frozen policy; deterministic for a given seed.
EvalMetrics evaluate_policy(Environment& env, const PolicyFn& policy, int episodes,
                            std::uint64_t seed);

struct AOConfig {
    int max_outer_iters = 5;
    double tolerance = 0.01;     // relative change in evaluation weighted AoI
    int episodes_per_iter = 100;
    int eval_episodes = 5;

    void validate() const;
};

struct AOIterStats {
    double eval_weighted_aoi = 0.0;
    double eval_reward = 0.0;
    double eval_alloc_objective = 0.0;
    double train_reward = 0.0;  // mean total reward across this iteration's episodes
};

struct AOTrace {
    std::vector<AOIterStats> iters;
    bool converged = false;
    Checkpoint final_policy;  // frozen strategy; the allocator re-fits per slot
};

// Alternates policy-improvement phases (training epochs) with the per-slot
// convex allocation that already runs inside every environment step. Stops
// when the evaluation weighted AoI settles within the tolerance.
AOTrace ao_run(QAgent& agent, Environment& env, const AOConfig& ao, std::uint64_t seed);

}  // namespace aoimec
