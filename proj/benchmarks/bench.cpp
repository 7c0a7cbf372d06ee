// Hot-path microbenchmarks: network passes, the closed-form split, the full
// per-slot allocator and one environment step.
#include <benchmark/benchmark.h>

#include <vector>

#include "aoimec/agents.hpp"
#include "aoimec/allocator.hpp"
#include "aoimec/environment.hpp"
#include "aoimec/net.hpp"
#include "aoimec/rng.hpp"

namespace {

using namespace aoimec;

NetSpec bench_spec() {
    NetSpec s;
    s.kind = NetSpec::Kind::Branching;
    s.input_dim = 20;
    s.trunk = {128, 128};
    s.head_hidden = 64;
    s.num_branches = 4;
    s.actions_per_branch = 3;
    return s;
}

void net_forward(benchmark::State& state) {
    const NetSpec spec = bench_spec();
    const Net net(spec, 1);
    const int batch = static_cast<int>(state.range(0));
    std::vector<double> x(static_cast<std::size_t>(batch) * spec.input_dim);
    Rng rng(7);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(net.forward(x, batch));
}
BENCHMARK(net_forward)->Arg(1)->Arg(32);

void net_forward_backward(benchmark::State& state) {
    const NetSpec spec = bench_spec();
    const Net net(spec, 1);
    const int batch = 32;
    std::vector<double> x(static_cast<std::size_t>(batch) * spec.input_dim);
    std::vector<double> dq(static_cast<std::size_t>(batch) * spec.q_count(), 0.01);
    Rng rng(7);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    Net::Trace tr;
    std::vector<double> grad(spec.param_count());
    for (auto _ : state) {
        net.forward(x, batch, tr);
        std::fill(grad.begin(), grad.end(), 0.0);
        net.backward(tr, dq, grad);
        benchmark::DoNotOptimize(grad.data());
    }
}
BENCHMARK(net_forward_backward);

void closed_form_split(benchmark::State& state) {
    const std::vector<double> w{2.0, 3.0, 5.0, 1.0, 8.0, 0.5, 4.0, 2.5};
    for (auto _ : state) benchmark::DoNotOptimize(waterfill(w, 400e3));
}
BENCHMARK(closed_form_split);

void slot_allocator(benchmark::State& state) {
    AllocationProblem prob;
    prob.num_devices = 6;
    prob.num_bs = 2;
    prob.noise_psd_w_hz = dbm_to_watt(-174.0);
    prob.slot_len = 1.0;
    Rng rng(5);
    for (int bs = 0; bs < 2; ++bs) {
        BsSubproblem g;
        g.bs = bs;
        g.bandwidth_cap = 400e3;
        g.compute_cap = 8e9;
        for (int i = 0; i < 3; ++i) {
            AllocEntry e;
            e.device = bs * 3 + i;
            e.task_bits = rng.uniform(0.5e6, 1.5e6);
            e.cycles_per_bit = 1000.0;
            e.gain_pow = 1e-10 * rng.uniform(0.5, 2.0);
            e.tx_power = 0.6;
            e.energy_cap = 1.0;
            e.prio_aoi = rng.uniform(1.0, 10.0);
            g.entries.push_back(e);
        }
        prob.groups.push_back(g);
    }
    for (auto _ : state) benchmark::DoNotOptimize(solve_p4(prob));
}
BENCHMARK(slot_allocator);

void environment_step(benchmark::State& state) {
    SystemConfig cfg;
    cfg.horizon = 1000000;  // never reset inside the loop
    Environment env(cfg, 3);
    for (auto _ : state) {
        const JointAction act = greedy_policy(env.state(), cfg, env.deployment());
        benchmark::DoNotOptimize(env.step(act));
    }
}
BENCHMARK(environment_step);

}  // namespace

BENCHMARK_MAIN();
