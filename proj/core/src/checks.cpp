#include "aoimec/checks.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "aoimec/agents.hpp"
#include "aoimec/checkpoint.hpp"
#include "aoimec/csv.hpp"
#include "aoimec/joint.hpp"

namespace aoimec {
namespace {

SystemConfig small_config() {
    SystemConfig cfg;
    cfg.num_devices = 4;
    cfg.num_bs = 2;
    cfg.per_bs_cap = 2;
    cfg.horizon = 40;
    return cfg;
}

CheckResult check_repair_cap(std::uint64_t seed) {
    CheckResult r{"repair-cap-and-idempotence", true, ""};
    const SystemConfig cfg = small_config();
    Environment env(cfg, seed);
    Rng rng(fold_seed(seed, 11));
    for (int trial = 0; trial < 200 && r.pass; ++trial) {
        const JointAction raw = random_policy(cfg.num_devices, cfg.num_bs, rng);
        const JointAction rep = repair_action(raw, env.state(), cfg, env.deployment());
        const JointAction again = repair_action(rep, env.state(), cfg, env.deployment());
        if (rep != again) {
            r.pass = false;
            r.detail = "repair is not idempotent";
        }
        if (!to_offload_matrix(rep, cfg.num_bs).row_column_valid(cfg.per_bs_cap)) {
            r.pass = false;
            r.detail = "per-BS cap violated after repair";
        }
        env.step(raw);
    }
    return r;
}

CheckResult check_allocation_caps(std::uint64_t seed) {
    CheckResult r{"allocation-caps", true, ""};
    const SystemConfig cfg = small_config();
    Environment env(cfg, seed);
    Rng rng(fold_seed(seed, 12));
    for (int t = 0; t < 120 && r.pass; ++t) {
        const JointAction raw = random_policy(cfg.num_devices, cfg.num_bs, rng);
        const JointAction rep = repair_action(env.sanitize(raw), env.state(), cfg, env.deployment());
        const AllocationSolution sol = env.allocate(rep);
        if (!sol.alloc.respects(to_offload_matrix(rep, cfg.num_bs), cfg.bandwidth_cap_hz,
                                env.deployment().compute_cap)) {
            r.pass = false;
            r.detail = "bandwidth or compute cap violated at slot " + std::to_string(t);
        }
        env.step(raw);
    }
    return r;
}

CheckResult check_aoi_bounds(std::uint64_t seed) {
    CheckResult r{"aoi-bounds", true, ""};
    const SystemConfig cfg = small_config();
    Environment env(cfg, seed);
    Rng rng(fold_seed(seed, 13));
    for (int t = 0; t < 200 && r.pass; ++t) {
        const StepOutcome out = env.step(random_policy(cfg.num_devices, cfg.num_bs, rng));
        for (double a : out.next.aoi) {
            if (!(a > 0.0) || a > cfg.aoi_cap() + 1e-12) {
                r.pass = false;
                r.detail = "AoI left (0, cap]: " + format_double(a);
            }
        }
    }
    return r;
}

CheckResult check_idle_aging(std::uint64_t seed) {
    CheckResult r{"aoi-linear-aging-when-idle", true, ""};
    const SystemConfig cfg = small_config();
    Environment env(cfg, seed);
    const JointAction hold(cfg.num_devices, 0);
    for (int t = 1; t <= 60 && r.pass; ++t) {
        const StepOutcome out = env.step(hold);
        const double expect = std::min(cfg.slot_len + t * cfg.slot_len, cfg.aoi_cap());
        for (double a : out.next.aoi) {
            if (a != expect) {
                r.pass = false;
                r.detail = "expected " + format_double(expect) + " got " + format_double(a);
            }
        }
    }
    return r;
}

CheckResult check_budget_compliance(std::uint64_t seed) {
    CheckResult r{"executed-budget-compliance", true, ""};
    const SystemConfig cfg = small_config();
    Environment env(cfg, seed);
    Rng rng(fold_seed(seed, 14));
    for (int ep = 0; ep < 10; ++ep) {
        env.reset(fold_seed(seed, 100 + ep));
        for (int t = 0; t < cfg.horizon; ++t)
            env.step(random_policy(cfg.num_devices, cfg.num_bs, rng));
    }
    if (env.executed_violations() != 0) {
        r.pass = false;
        r.detail = std::to_string(env.executed_violations()) + " executed violations";
    }
    return r;
}

CheckResult check_determinism(std::uint64_t seed) {
    CheckResult r{"seeded-determinism", true, ""};
    const SystemConfig cfg = small_config();
    double totals[2] = {0.0, 0.0};
    for (int rep = 0; rep < 2; ++rep) {
        Environment env(cfg, seed);
        Rng rng(fold_seed(seed, 15));
        env.reset(fold_seed(seed, 200));
        for (int t = 0; t < cfg.horizon; ++t)
            totals[rep] += env.step(random_policy(cfg.num_devices, cfg.num_bs, rng)).reward;
    }
    if (totals[0] != totals[1]) {
        r.pass = false;
        r.detail = "reruns differ: " + format_double(totals[0]) + " vs " + format_double(totals[1]);
    }
    return r;
}

CheckResult check_waterfill_stationarity(std::uint64_t seed) {
    CheckResult r{"waterfill-stationarity", true, ""};
    Rng rng(fold_seed(seed, 16));
    for (int trial = 0; trial < 50 && r.pass; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(5));
        std::vector<double> w(n);
        for (double& x : w) x = rng.uniform(0.1, 5.0);
        const double cap = rng.uniform(1.0, 10.0);
        const std::vector<double> x = waterfill(w, cap);
        double total = 0.0;
        for (double v : x) total += v;
        if (std::abs(total - cap) > 1e-9 * cap) {
            r.pass = false;
            r.detail = "cap does not bind";
            break;
        }
        // equal marginals w_i/x_i^2 at the optimum
        const double m0 = w[0] / (x[0] * x[0]);
        for (int i = 1; i < n; ++i) {
            const double mi = w[i] / (x[i] * x[i]);
            if (std::abs(mi - m0) > 1e-9 * std::abs(m0)) {
                r.pass = false;
                r.detail = "marginals differ: " + format_double(m0) + " vs " + format_double(mi);
            }
        }
    }
    return r;
}

CheckResult check_dueling_mean_zero(std::uint64_t seed) {
    CheckResult r{"dueling-mean-zero", true, ""};
    Rng rng(fold_seed(seed, 17));
    for (int trial = 0; trial < 20 && r.pass; ++trial) {
        NetSpec spec;
        spec.kind = NetSpec::Kind::Branching;
        spec.input_dim = 2 + static_cast<int>(rng.below(6));
        spec.trunk = {8};
        spec.head_hidden = 6;
        spec.num_branches = 1 + static_cast<int>(rng.below(4));
        spec.actions_per_branch = 2 + static_cast<int>(rng.below(4));
        const Net net(spec, rng.bits());
        std::vector<double> x(spec.input_dim);
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
        Net::Trace t;
        net.forward(x, 1, t);
        for (int n = 0; n < spec.num_branches; ++n) {
            double mean = 0.0;
            for (int c = 0; c < spec.actions_per_branch; ++c)
                mean += t.q[static_cast<std::size_t>(n) * spec.actions_per_branch + c];
            mean = mean / spec.actions_per_branch - t.value[0];
            if (std::abs(mean) > 1e-9) {
                r.pass = false;
                r.detail = "per-branch mean(Q) - V = " + format_double(mean);
            }
        }
    }
    return r;
}

CheckResult check_checkpoint_roundtrip(std::uint64_t seed) {
    CheckResult r{"checkpoint-roundtrip", true, ""};
    const SystemConfig cfg = small_config();
    AgentHyper hyper;
    hyper.batch_size = 8;
    hyper.buffer_capacity = 256;
    NetArch arch;
    arch.trunk = {16};
    arch.head_hidden = 8;
    QAgent agent(AgentKind::BD3QN, cfg, hyper, arch, seed);
    Environment env(cfg, seed);
    agent.train_episode(env, fold_seed(seed, 300));

    const Checkpoint before = agent.to_checkpoint();
    const std::string path =
        (std::filesystem::temp_directory_path() / ("aoimec_check_" + std::to_string(seed) + ".ckpt"))
            .string();
    save_checkpoint(path, before);
    const Checkpoint after = load_checkpoint(path);
    std::filesystem::remove(path);
    if (before.online != after.online || before.target != after.target ||
        before.adam.m != after.adam.m || before.adam.v != after.adam.v ||
        before.adam.step != after.adam.step || before.epsilon != after.epsilon) {
        r.pass = false;
        r.detail = "round trip not bit-exact";
    }
    return r;
}

CheckResult check_epsilon_schedule(std::uint64_t seed) {
    CheckResult r{"epsilon-schedule", true, ""};
    const SystemConfig cfg = small_config();
    AgentHyper hyper;
    hyper.batch_size = 8;
    hyper.buffer_capacity = 256;
    hyper.eps_decay = 0.9;
    hyper.eps_min = 0.4;
    NetArch arch;
    arch.trunk = {8};
    arch.head_hidden = 4;
    QAgent agent(AgentKind::BD3QN, cfg, hyper, arch, seed);
    Environment env(cfg, seed);
    double prev = agent.epsilon();
    for (int ep = 0; ep < 12; ++ep) {
        agent.train_episode(env, fold_seed(seed, 400 + ep));
        if (agent.epsilon() > prev || agent.epsilon() < hyper.eps_min - 1e-15) {
            r.pass = false;
            r.detail = "schedule not non-increasing within bounds";
        }
        prev = agent.epsilon();
    }
    if (std::abs(prev - hyper.eps_min) > 1e-12) {
        r.pass = false;
        r.detail = "schedule did not settle at eps_min";
    }
    return r;
}

CheckResult check_target_staleness(std::uint64_t seed) {
    CheckResult r{"target-sync-staleness", true, ""};
    const SystemConfig cfg = small_config();
    AgentHyper hyper;
    hyper.batch_size = 8;
    hyper.buffer_capacity = 256;
    hyper.target_sync = 1;
    NetArch arch;
    arch.trunk = {8};
    arch.head_hidden = 4;
    QAgent agent(AgentKind::BD3QN, cfg, hyper, arch, seed);
    Environment env(cfg, seed);
    agent.train_episode(env, fold_seed(seed, 500));
    if (agent.train_steps() == 0 || agent.target().params() != agent.online().params()) {
        r.pass = false;
        r.detail = "with sync interval 1 the target must track the online net exactly";
    }
    return r;
}

CheckResult check_eval_reproducibility(std::uint64_t seed) {
    CheckResult r{"evaluation-reproducibility", true, ""};
    const SystemConfig cfg = small_config();
    Environment env(cfg, seed);
    const EvalMetrics a = evaluate_policy(env, policy_greedy(), 3, fold_seed(seed, 600));
    const EvalMetrics b = evaluate_policy(env, policy_greedy(), 3, fold_seed(seed, 600));
    if (a.weighted_aoi != b.weighted_aoi || a.mean_reward != b.mean_reward) {
        r.pass = false;
        r.detail = "same seed produced different evaluation metrics";
    }
    return r;
}

}  // namespace

std::vector<CheckResult> run_invariant_checks(std::uint64_t seed) {
    return {
        check_repair_cap(seed),        check_allocation_caps(seed),
        check_aoi_bounds(seed),        check_idle_aging(seed),
        check_budget_compliance(seed), check_determinism(seed),
        check_waterfill_stationarity(seed), check_dueling_mean_zero(seed),
        check_checkpoint_roundtrip(seed),   check_epsilon_schedule(seed),
        check_target_staleness(seed),  check_eval_reproducibility(seed),
    };
}

}  // namespace aoimec
