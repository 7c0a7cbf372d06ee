#include <doctest.h>

#include <cmath>
#include <optional>
#include <vector>

#include "aoimec/deployment.hpp"
#include "aoimec/rng.hpp"
#include "aoimec/system_model.hpp"

using namespace aoimec;

namespace {
SystemConfig small_cfg() {
    SystemConfig cfg;
    cfg.num_devices = 3;
    cfg.num_bs = 2;
    return cfg;
}
}  // namespace

TEST_CASE("channel: per-slot power fading has unit mean over the path gain") {
    SystemConfig cfg = small_cfg();
    Deployment dep = make_deployment(cfg, 5);
    Rng rng(123);
    const int slots = 40000;
    std::vector<double> acc(dep.distances.size(), 0.0);
    for (int t = 0; t < slots; ++t) {
        const ChannelMatrix h = sample_channel(rng, dep, cfg);
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += h.gain_pow[k] / pathloss_linear(h.distances[k]);
    }
    for (double a : acc) CHECK(std::abs(a / slots - 1.0) < 0.02);
}

TEST_CASE("channel: gains are fresh each slot but distances stay fixed") {
    SystemConfig cfg = small_cfg();
    Deployment dep = make_deployment(cfg, 5);
    Rng rng(9);
    const ChannelMatrix h1 = sample_channel(rng, dep, cfg);
    const ChannelMatrix h2 = sample_channel(rng, dep, cfg);
    bool any_gain_diff = false;
    for (std::size_t k = 0; k < h1.gain_pow.size(); ++k) {
        any_gain_diff = any_gain_diff || h1.gain_pow[k] != h2.gain_pow[k];
        CHECK(h1.distances[k] == h2.distances[k]);
    }
    CHECK(any_gain_diff);
}

TEST_CASE("rate: matches the closed-form reference points") {
    const double n0 = dbm_to_watt(-174.0);
    // 400 kHz, 0.6 W, |h|^2 = 1e-9 over thermal noise
    CHECK(transmission_rate(400e3, 0.6, 1e-9, n0 * 400e3) ==
          doctest::Approx(7409351.216835774).epsilon(1e-12));
    // SNR exactly 3 gives log2(4) = 2 bits/s/Hz
    CHECK(transmission_rate(400e3, 3.0, 1.0, 1.0) == doctest::Approx(800000.0).epsilon(1e-12));
    // zero received power floors at zero rate
    CHECK(transmission_rate(1e6, 0.0, 1e-9, 1e-15) == 0.0);
}

TEST_CASE("rate: monotone in bandwidth, power and gain; rejects bad inputs") {
    const double n0 = dbm_to_watt(-174.0);
    auto r = [&](double b, double p, double g) { return transmission_rate(b, p, g, n0 * b); };
    CHECK(r(400e3, 0.6, 1e-9) < r(800e3, 0.6, 1e-9));
    CHECK(r(400e3, 0.6, 1e-9) < r(400e3, 1.2, 1e-9));
    CHECK(r(400e3, 0.6, 1e-9) < r(400e3, 0.6, 2e-9));
    CHECK_THROWS_AS(transmission_rate(0.0, 0.6, 1e-9, 1e-15), std::invalid_argument);
    CHECK_THROWS_AS(transmission_rate(400e3, 0.6, 1e-9, 0.0), std::invalid_argument);
}

TEST_CASE("delays and energy: reference task at a round rate") {
    TaskRecord task;
    task.size_bits = 2e6;
    task.cycles_per_bit = 1000.0;
    task.gen_time = 0.0;
    // rate equal to the task size gives exactly one second on air
    const DelayEnergy d = delays_and_energy(task, 8e9, 2e6, 0.6);
    CHECK(d.t_trans == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.t_comp == doctest::Approx(0.25).epsilon(1e-12));  // 2e9 cycles / 8e9 Hz
    CHECK(d.energy == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(d.total() == doctest::Approx(1.25).epsilon(1e-12));

    CHECK_THROWS_AS(delays_and_energy(task, 8e9, 0.0, 0.6), std::invalid_argument);
    CHECK_THROWS_AS(delays_and_energy(task, 0.0, 2e6, 0.6), std::invalid_argument);
}

TEST_CASE("aoi step: idle and pending age by one slot") {
    SystemConfig cfg;
    cfg.slot_len = 1.0;
    cfg.aoi_cap_slots = 20.0;
    CHECK(aoi_step(3.0, SlotOutcome::Idle, 10.0, std::nullopt, 0.0, 0.0, cfg) == doctest::Approx(4.0));
    CHECK(aoi_step(3.0, SlotOutcome::Pending, 10.0, std::nullopt, 0.0, 0.0, cfg) == doctest::Approx(4.0));
    CHECK(aoi_step(3.0, SlotOutcome::Failed, 10.0, std::nullopt, 0.0, 0.0, cfg) == doctest::Approx(4.0));
}

TEST_CASE("aoi step: completion resets to end-to-end staleness") {
    SystemConfig cfg;
    cfg.slot_len = 1.0;
    cfg.aoi_cap_slots = 20.0;
    TaskRecord task;
    task.gen_time = 9.0;
    CHECK(aoi_step(7.0, SlotOutcome::Completed, 10.0, task, 0.2, 0.3, cfg) ==
          doctest::Approx(1.5).epsilon(1e-12));
    CHECK_THROWS_AS(aoi_step(7.0, SlotOutcome::Completed, 10.0, std::nullopt, 0.2, 0.3, cfg),
                    std::invalid_argument);
}

TEST_CASE("aoi step: the ceiling binds in both directions") {
    SystemConfig cfg;
    cfg.slot_len = 1.0;
    cfg.aoi_cap_slots = 20.0;
    // half a slot below the cap, idle: ages to the cap, not past it
    CHECK(aoi_step(19.5, SlotOutcome::Idle, 50.0, std::nullopt, 0.0, 0.0, cfg) ==
          doctest::Approx(20.0));
    // an extremely stale completion is also clamped
    TaskRecord task;
    task.gen_time = 0.0;
    CHECK(aoi_step(20.0, SlotOutcome::Completed, 100.0, task, 1.0, 1.0, cfg) ==
          doctest::Approx(20.0));
}

TEST_CASE("offload matrix: validity of rows and columns") {
    OffloadMatrix x;
    x.num_devices = 3;
    x.num_bs = 2;
    x.assign = {1, 0, 0, 1, 1, 0};
    CHECK(x.row_column_valid(2));
    CHECK_FALSE(x.row_column_valid(1));  // BS 0 serves devices 0 and 2

    OffloadMatrix bad = x;
    bad.assign = {1, 1, 0, 0, 0, 0};  // device 0 picks both BSs
    CHECK_FALSE(bad.row_column_valid(3));
}

TEST_CASE("allocation matrix: respects caps and assignment support") {
    OffloadMatrix x;
    x.num_devices = 2;
    x.num_bs = 1;
    x.assign = {1, 1};
    AllocationMatrix a = AllocationMatrix::zeros(2, 1);
    a.bw(0, 0) = 250e3;
    a.bw(1, 0) = 150e3;
    a.cpu(0, 0) = 4e9;
    a.cpu(1, 0) = 4e9;
    const std::vector<double> fcap{8e9};
    CHECK(a.respects(x, 400e3, fcap));

    AllocationMatrix over = a;
    over.bw(0, 0) = 300e3;  // total 450e3 > 400e3
    CHECK_FALSE(over.respects(x, 400e3, fcap));

    AllocationMatrix stray = a;
    x.assign = {1, 0};  // device 1 now unassigned but still holds bandwidth
    CHECK_FALSE(stray.respects(x, 400e3, fcap));

    AllocationMatrix neg = a;
    x.assign = {1, 1};
    neg.cpu(1, 0) = -1.0;
    CHECK_FALSE(neg.respects(x, 400e3, fcap));
}
