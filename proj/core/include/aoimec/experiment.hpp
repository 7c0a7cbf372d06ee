#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aoimec/agents.hpp"
#include "aoimec/joint.hpp"

namespace aoimec {

// One fully resolved experiment: scenario, physics, agent, schedule, seeds.
struct ExperimentSpec {
    std::string scenario = "default";
    SystemConfig system;
    AgentKind agent = AgentKind::BD3QN;
    AgentHyper hyper;
    NetArch arch;
    int episodes = 2000;
    int eval_episodes = 5;
    Environment::AllocatorMode allocator = Environment::AllocatorMode::Waterfill;
    bool slot_trace = false;  // also emit a per-slot trace CSV during evaluation
    int smooth_window = 50;

    std::string sweep_variable;  // lambda | N | M | bandwidth | compute | batch_size | learning_rate
    std::vector<double> sweep_values;
    std::vector<AgentKind> compare_agents;

    std::vector<std::uint64_t> seeds{1};
    std::string out_dir = ".";

    void validate() const;
};

// Applies one sweep-variable value to a copy of the spec's config/hypers.
ExperimentSpec with_sweep_value(const ExperimentSpec& spec, double value);

struct TrainRun {
    std::uint64_t seed = 0;
    std::vector<EpisodeResult> episodes;
    EvalMetrics final_eval;
    std::string csv_path;
    std::string checkpoint_path;  // empty for non-learning agents
    long long executed_violations = 0;   // constraint breaches in executed offloads
    long long attempted_violations = 0;  // over-budget attempts, downgraded to failures
};

// Per-seed training (or plain rollouts for greedy/random): per-episode
// metrics CSV plus a final checkpoint for learning agents.
std::vector<TrainRun> run_train(const ExperimentSpec& spec);

struct SweepPoint {
    double value = 0.0;
    std::uint64_t seed = 0;
    EvalMetrics eval;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::string rows_path;
    std::string summary_path;
};

// Train+evaluate per (value, seed); long-format rows plus a mean/std pivot.
SweepResult run_sweep(const ExperimentSpec& spec);

struct CompareEntry {
    AgentKind agent;
    std::vector<double> per_seed_weighted_aoi;
    double mean_weighted_aoi = 0.0;
};

struct CompareResult {
    std::vector<CompareEntry> entries;  // in spec.compare_agents order
    std::string table_path;
};

// Same seeds and physics for every listed agent; paired differences and a
// two-sided sign test against the first agent.
CompareResult run_compare(const ExperimentSpec& spec);

// Rolls out a frozen checkpoint (or a parameter-free baseline) and writes
// one summary CSV; returns the metrics.
EvalMetrics run_eval(const ExperimentSpec& spec, const std::string& checkpoint_path);

// Two-sided sign-test p-value for `wins` out of `n` informative pairs.
double sign_test_p(int wins, int n);

}  // namespace aoimec
