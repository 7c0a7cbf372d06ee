#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "aoimec/environment.hpp"
#include "aoimec/errors.hpp"

using namespace aoimec;

namespace {

SystemConfig tiny_cfg() {
    SystemConfig cfg;
    cfg.num_devices = 1;
    cfg.num_bs = 1;
    cfg.per_bs_cap = 1;
    cfg.arrival_rate = 0.0;
    cfg.offload_success_prob = 1.0;
    return cfg;
}

Deployment tiny_dep() {
    Deployment dep;
    dep.device_pos = {{0.0, 0.0}};
    dep.bs_pos = {{300.0, 0.0}};
    dep.distances = {300.0};
    dep.energy_cap = {1.0};
    dep.compute_cap = {8e9};
    dep.tx_power = {0.6};
    dep.priority = {1.0};
    dep.cycles_per_bit = {1000.0};
    return dep;
}

// state at t = 5 with one queued packet generated half a slot ago
SystemState tiny_state(double task_bits) {
    SystemState s;
    s.aoi = {3.0};
    s.energy = {0.0};
    s.delay = {0.0};
    s.clock = 5;
    TaskRecord t;
    t.size_bits = task_bits;
    t.cycles_per_bit = 1000.0;
    t.gen_time = 4.5;
    s.queue = {t};
    s.channel.num_devices = 1;
    s.channel.num_bs = 1;
    s.channel.gain_pow = {1e-9};
    s.channel.distances = {300.0};
    return s;
}

}  // namespace

TEST_CASE("initial state: one-slot-old devices with empty queues") {
    SystemConfig cfg;
    Environment env(cfg, 3);
    const SystemState& s = env.state();
    CHECK(s.clock == 0);
    for (int i = 0; i < cfg.num_devices; ++i) {
        CHECK(s.aoi[i] == doctest::Approx(cfg.slot_len));
        CHECK(s.energy[i] == 0.0);
        CHECK(s.delay[i] == 0.0);
        CHECK_FALSE(s.queue[i].has_value());
    }
    CHECK(s.channel.gain_pow.size() == std::size_t(cfg.num_devices) * cfg.num_bs);
}

TEST_CASE("encode: layout, scaling and the degenerate single-gain case") {
    SystemConfig cfg;
    Environment env(cfg, 3);
    const auto f = encode_state(env.state(), cfg, env.deployment());
    const int n = cfg.num_devices, m = cfg.num_bs;
    REQUIRE(int(f.size()) == 3 * n + n * m);
    for (int i = 0; i < n; ++i) CHECK(f[i] == doctest::Approx(cfg.slot_len / cfg.aoi_cap()));
    for (int i = n; i < 3 * n; ++i) CHECK(f[i] == 0.0);
    double lo = 1.0, hi = 0.0;
    for (int k = 3 * n; k < 3 * n + n * m; ++k) {
        CHECK(f[k] >= 0.0);
        CHECK(f[k] <= 1.0);
        lo = std::min(lo, f[k]);
        hi = std::max(hi, f[k]);
    }
    CHECK(lo == doctest::Approx(0.0));  // min-max scaling pins both endpoints
    CHECK(hi == doctest::Approx(1.0));

    const auto f2 = encode_state(env.state(), cfg, env.deployment());
    CHECK(f == f2);

    SystemConfig one = tiny_cfg();
    const auto g = encode_state(tiny_state(1e6), one, tiny_dep());
    REQUIRE(g.size() == 4);
    CHECK(g[3] == doctest::Approx(0.5));  // single pair has no spread to scale
}

TEST_CASE("repair: oversubscribed cell keeps the highest priority-age takers") {
    SystemConfig cfg;
    cfg.num_devices = 2;
    cfg.num_bs = 1;
    cfg.per_bs_cap = 1;
    Deployment dep = tiny_dep();
    dep.priority = {1.0, 1.0};
    SystemState s;
    s.aoi = {5.0, 9.0};

    const JointAction fixed = repair_action({1, 1}, s, cfg, dep);
    CHECK(fixed == JointAction{0, 1});
    CHECK(repair_action(fixed, s, cfg, dep) == fixed);  // idempotent

    s.aoi = {7.0, 7.0};  // tie goes to the lower device index
    CHECK(repair_action({1, 1}, s, cfg, dep) == JointAction{1, 0});

    CHECK_THROWS_AS(repair_action({1}, s, cfg, dep), std::invalid_argument);
    CHECK_THROWS_AS(repair_action({1, 2}, s, cfg, dep), std::invalid_argument);
    CHECK_THROWS_AS(repair_action({-1, 0}, s, cfg, dep), std::invalid_argument);
}

TEST_CASE("repair: priorities weight the age ranking") {
    SystemConfig cfg;
    cfg.num_devices = 2;
    cfg.num_bs = 1;
    cfg.per_bs_cap = 1;
    Deployment dep = tiny_dep();
    dep.priority = {3.0, 1.0};  // 3*5 > 1*9
    SystemState s;
    s.aoi = {5.0, 9.0};
    CHECK(repair_action({1, 1}, s, cfg, dep) == JointAction{1, 0});
}

TEST_CASE("offload matrix from a joint action") {
    const auto x = to_offload_matrix({0, 2, 1}, 2);
    CHECK(x.num_devices == 3);
    CHECK(x.num_bs == 2);
    CHECK_FALSE(x.assigned(0, 0));
    CHECK_FALSE(x.assigned(0, 1));
    CHECK(x.assigned(1, 1));
    CHECK(x.assigned(2, 0));
    CHECK_FALSE(x.assigned(2, 1));
}

TEST_CASE("reward: weighted age softened by energy and delay headroom") {
    SystemConfig cfg = tiny_cfg();
    Deployment dep = tiny_dep();
    SystemState s = tiny_state(1e6);
    s.aoi = {2.0};
    s.energy = {0.5};  // cap 1.0 leaves 0.5 J of slack
    s.delay = {0.5};   // slot 1.0 leaves 0.5 s of slack
    CHECK(reward_fn(s, cfg, dep) == doctest::Approx(-1.125).epsilon(1e-12));

    // with both relaxations off the reward is exactly the negative weighted age
    cfg.relax_energy = 0.0;
    cfg.relax_delay = 0.0;
    CHECK(reward_fn(s, cfg, dep) == doctest::Approx(-2.0).epsilon(1e-12));
    dep.priority = {2.5};
    CHECK(reward_fn(s, cfg, dep) == doctest::Approx(-5.0).epsilon(1e-12));
}

TEST_CASE("allocation problem: only queue-holding choosers enter their cell") {
    SystemConfig cfg;
    cfg.num_devices = 3;
    cfg.num_bs = 2;
    Deployment dep;
    dep.distances = {100, 200, 150, 250, 300, 120};
    dep.energy_cap = {1.0, 1.0, 1.0};
    dep.compute_cap = {8e9, 9e9};
    dep.tx_power = {0.6, 0.6, 0.6};
    dep.priority = {1.0, 2.0, 1.0};
    dep.cycles_per_bit = {1000, 1000, 1000};

    SystemState s;
    s.aoi = {4.0, 6.0, 2.0};
    s.clock = 10;
    s.channel.num_devices = 3;
    s.channel.num_bs = 2;
    s.channel.gain_pow = {1e-9, 2e-9, 3e-9, 4e-9, 5e-9, 6e-9};
    s.channel.distances = dep.distances;
    TaskRecord t0;
    t0.size_bits = 1e6;
    t0.cycles_per_bit = 1000;
    t0.gen_time = 9.25;
    TaskRecord t1 = t0;
    t1.gen_time = 8.0;
    s.queue = {t0, t1, std::nullopt};

    // device 2 has no task, so its request is ignored; groups skip empty cells
    const auto p = build_allocation_problem(s, {1, 1, 2}, cfg, dep);
    REQUIRE(p.groups.size() == 1);
    const auto& g = p.groups[0];
    CHECK(g.bs == 0);
    CHECK(g.compute_cap == doctest::Approx(8e9));
    REQUIRE(g.entries.size() == 2);
    CHECK(g.entries[0].device == 0);
    CHECK(g.entries[0].prio_aoi == doctest::Approx(4.0));
    CHECK(g.entries[0].staleness == doctest::Approx(0.75));
    CHECK(g.entries[0].gain_pow == doctest::Approx(1e-9));
    CHECK(g.entries[1].device == 1);
    CHECK(g.entries[1].prio_aoi == doctest::Approx(12.0));
    CHECK(g.entries[1].staleness == doctest::Approx(2.0));
}

TEST_CASE("step: successful offload resets age to end-to-end staleness") {
    SystemConfig cfg = tiny_cfg();
    Deployment dep = tiny_dep();
    SystemState s = tiny_state(2e6);
    Rng rng(4);

    const JointAction act{1};
    const auto prob = build_allocation_problem(s, act, cfg, dep);
    const auto asol = solve_p4(prob);
    REQUIRE(asol.fully_feasible);

    const double bw = asol.alloc.bw(0, 0);
    const double cpu = asol.alloc.cpu(0, 0);
    const double rate = transmission_rate(bw, 0.6, 1e-9, cfg.noise_psd_w_hz() * bw);
    const double t_trans = 2e6 / rate;
    const double t_comp = 2e9 / cpu;

    const auto out = step_slot(s, act, asol, cfg, dep, rng);
    REQUIRE(out.outcomes[0] == SlotOutcome::Completed);
    CHECK(out.next.aoi[0] == doctest::Approx(5.0 - 4.5 + t_trans + t_comp).epsilon(1e-12));
    CHECK(out.next.delay[0] == doctest::Approx(t_trans + t_comp).epsilon(1e-12));
    CHECK(out.next.energy[0] == doctest::Approx(0.6 * t_trans).epsilon(1e-12));
    CHECK_FALSE(out.next.queue[0].has_value());  // consumed, no arrivals configured
    CHECK(out.attempted_violations == 0);
    CHECK(out.executed_violations == 0);
    CHECK(out.aoi_clamped[0] == 0);
    CHECK(out.next.clock == 6);
    // allocator cost for the slot includes the packet's existing staleness
    CHECK(out.alloc_objective == doctest::Approx(t_trans + t_comp + 0.5).epsilon(1e-9));
}

TEST_CASE("step: over-budget allocation downgrades to a failed attempt") {
    SystemConfig cfg = tiny_cfg();
    Deployment dep = tiny_dep();
    SystemState s = tiny_state(4.2e6);  // too big to finish inside one slot
    Rng rng(4);

    AllocationSolution asol;
    asol.alloc = AllocationMatrix::zeros(1, 1);
    asol.alloc.bw(0, 0) = 400e3;
    asol.alloc.cpu(0, 0) = 8e9;
    asol.per_bs.push_back({});

    const auto out = step_slot(s, {1}, asol, cfg, dep, rng);
    CHECK(out.outcomes[0] == SlotOutcome::Failed);
    CHECK(out.attempted_violations == 1);
    CHECK(out.executed_violations == 0);
    CHECK(out.next.aoi[0] == doctest::Approx(4.0));  // aged, not reset
    CHECK(out.next.queue[0].has_value());            // packet stays queued
    CHECK(out.next.delay[0] > cfg.slot_len);         // the budget breach is visible
    CHECK(out.next.energy[0] > 0.0);
}

TEST_CASE("step: screened-out devices fail without spending anything") {
    SystemConfig cfg = tiny_cfg();
    Deployment dep = tiny_dep();
    SystemState s = tiny_state(1e6);
    Rng rng(4);

    AllocationSolution asol;
    asol.alloc = AllocationMatrix::zeros(1, 1);
    asol.dropped = {0};
    asol.fully_feasible = false;

    const auto out = step_slot(s, {1}, asol, cfg, dep, rng);
    CHECK(out.outcomes[0] == SlotOutcome::Failed);
    CHECK(out.attempted_violations == 0);
    CHECK(out.next.energy[0] == 0.0);
    CHECK(out.next.delay[0] == 0.0);
    CHECK(out.next.aoi[0] == doctest::Approx(4.0));
}

TEST_CASE("step: offloading without an allocation is a logic error") {
    SystemConfig cfg = tiny_cfg();
    Deployment dep = tiny_dep();
    SystemState s = tiny_state(1e6);
    Rng rng(4);
    AllocationSolution empty;
    empty.alloc = AllocationMatrix::zeros(1, 1);
    CHECK_THROWS_AS(step_slot(s, {1}, empty, cfg, dep, rng), std::invalid_argument);
}

TEST_CASE("environment: holding forever ages every device linearly to the cap") {
    SystemConfig cfg;
    cfg.arrival_rate = 0.0;
    Environment env(cfg, 11);
    const JointAction hold(cfg.num_devices, 0);
    for (int k = 1; k <= 18; ++k) {
        const auto out = env.step(hold);
        for (int i = 0; i < cfg.num_devices; ++i) {
            CHECK(env.state().aoi[i] == doctest::Approx(cfg.slot_len * (1 + k)));
            CHECK(out.outcomes[i] == SlotOutcome::Idle);
            CHECK(out.aoi_clamped[i] == 0);
        }
    }
    const auto reach = env.step(hold);  // hits the ceiling exactly, not clamped yet
    for (int i = 0; i < cfg.num_devices; ++i) {
        CHECK(env.state().aoi[i] == doctest::Approx(cfg.aoi_cap()));
        CHECK(reach.aoi_clamped[i] == 0);
    }
    const auto out = env.step(hold);  // and now the clamp engages
    for (int i = 0; i < cfg.num_devices; ++i) {
        CHECK(env.state().aoi[i] == doctest::Approx(cfg.aoi_cap()));
        CHECK(out.aoi_clamped[i] == 1);
    }
    CHECK(env.executed_violations() == 0);
}

TEST_CASE("environment: idle-slot reward matches the closed form") {
    SystemConfig cfg;
    cfg.arrival_rate = 0.0;
    Environment env(cfg, 11);
    const auto out = env.step(JointAction(cfg.num_devices, 0));
    double expect = 0.0;
    for (int i = 0; i < cfg.num_devices; ++i) {
        expect -= 2.0 * cfg.slot_len - cfg.relax_energy * env.deployment().energy_cap[i] -
                  cfg.relax_delay * cfg.slot_len;
    }
    CHECK(out.reward == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("environment: requests without a queued packet are dropped silently") {
    SystemConfig cfg;
    cfg.arrival_rate = 0.0;  // no packets can ever arrive
    Environment env(cfg, 11);
    JointAction all_offload(cfg.num_devices, 1);
    const auto out = env.step(all_offload);
    for (auto o : out.outcomes) CHECK(o == SlotOutcome::Idle);
    CHECK(env.executed_violations() == 0);
}

TEST_CASE("environment: arrivals replace the queue head with a fresh packet") {
    SystemConfig cfg;
    cfg.arrival_rate = 1.0;
    Environment env(cfg, 11);
    env.step(JointAction(cfg.num_devices, 0));
    for (int i = 0; i < cfg.num_devices; ++i) {
        REQUIRE(env.state().queue[i].has_value());
        const TaskRecord& t = *env.state().queue[i];
        CHECK(t.gen_time >= 0.0);
        CHECK(t.gen_time < cfg.slot_len);
        CHECK(cfg.task_size_range.contains(t.size_bits));
        CHECK(t.cycles_per_bit == doctest::Approx(cfg.cycles_per_bit));
    }
}

TEST_CASE("environment: identical seeds replay identical trajectories") {
    SystemConfig cfg;
    Environment a(cfg, 21), b(cfg, 21);
    a.reset(9);
    b.reset(9);
    Rng pa(5), pb(5);
    for (int t = 0; t < 50; ++t) {
        JointAction act(cfg.num_devices);
        for (auto& v : act) v = int(pa.below(cfg.num_bs + 1));
        JointAction act2(cfg.num_devices);
        for (auto& v : act2) v = int(pb.below(cfg.num_bs + 1));
        REQUIRE(act == act2);
        const auto oa = a.step(act);
        const auto ob = b.step(act2);
        CHECK(oa.reward == ob.reward);  // bitwise, not approximate
        CHECK(encode_state(a.state(), cfg, a.deployment()) ==
              encode_state(b.state(), cfg, b.deployment()));
    }
}

TEST_CASE("environment: different episode seeds give different trajectories") {
    SystemConfig cfg;
    Environment a(cfg, 21), b(cfg, 21);
    a.reset(9);
    b.reset(10);
    const JointAction hold(cfg.num_devices, 0);
    bool any_diff = false;
    for (int t = 0; t < 20; ++t) {
        a.step(hold);
        b.step(hold);
        if (encode_state(a.state(), cfg, a.deployment()) !=
            encode_state(b.state(), cfg, b.deployment()))
            any_diff = true;
    }
    CHECK(any_diff);
}

TEST_CASE("environment: random play never executes a constraint violation") {
    SystemConfig cfg;
    cfg.arrival_rate = 0.8;
    Environment env(cfg, 33);
    Rng policy(77);
    for (int ep = 0; ep < 3; ++ep) {
        env.reset(100 + ep);
        for (int t = 0; t < 100; ++t) {
            JointAction act(cfg.num_devices);
            for (auto& v : act) v = int(policy.below(cfg.num_bs + 1));
            env.step(act);
        }
    }
    CHECK(env.executed_violations() == 0);
}

TEST_CASE("environment: equal-split mode divides the cell budget evenly") {
    SystemConfig cfg;
    cfg.arrival_rate = 1.0;
    Environment env(cfg, 17, Environment::AllocatorMode::EqualSplit);
    CHECK(env.allocator_mode() == Environment::AllocatorMode::EqualSplit);
    env.step(JointAction(cfg.num_devices, 0));  // let packets arrive everywhere

    JointAction act(cfg.num_devices, 0);
    act[0] = 1;
    act[1] = 1;
    const auto sol = env.allocate(act);
    CHECK(sol.alloc.bw(0, 0) == doctest::Approx(cfg.bandwidth_cap_hz / 2.0));
    CHECK(sol.alloc.bw(1, 0) == doctest::Approx(cfg.bandwidth_cap_hz / 2.0));
    CHECK(sol.alloc.cpu(0, 0) == doctest::Approx(env.deployment().compute_cap[0] / 2.0));
    CHECK(sol.dropped.empty());
    CHECK(sol.fully_feasible);
}
