#include <doctest.h>

#include <cmath>
#include <vector>

#include "aoimec/errors.hpp"
#include "aoimec/net.hpp"

using namespace aoimec;

namespace {

// 89-parameter reference net: 3 inputs, one trunk layer of 4, value head and
// two 3-action advantage heads with hidden width 3.
NetSpec ref_spec() {
    NetSpec s;
    s.kind = NetSpec::Kind::Branching;
    s.input_dim = 3;
    s.trunk = {4};
    s.head_hidden = 3;
    s.num_branches = 2;
    s.actions_per_branch = 3;
    return s;
}

Net ref_net() {
    Net net(ref_spec(), 1);
    auto& p = net.params();
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = std::sin(0.1 * double(k + 1));
    return net;
}

const std::vector<double> kRefInput{0.3, -0.7, 1.1, -0.2, 0.5, 0.9};

}  // namespace

TEST_CASE("net spec: parameter and output unit counts") {
    const NetSpec s = ref_spec();
    CHECK(s.param_count() == 89);
    CHECK(s.q_count() == 6);
    CHECK(s.output_units() == 7);  // six action values plus the scalar state value
    CHECK(s.trunk_out() == 4);

    NetSpec flat;
    flat.kind = NetSpec::Kind::FlatPlain;
    flat.input_dim = 5;
    flat.trunk = {8};
    flat.head_hidden = 4;
    flat.num_branches = 1;
    flat.actions_per_branch = 7;
    CHECK(flat.param_count() == 48 + 36 + 35);
    CHECK(flat.output_units() == 7);  // no value head
    CHECK_FALSE(flat.dueling());

    NetSpec no_trunk = ref_spec();
    no_trunk.trunk = {};
    CHECK(no_trunk.trunk_out() == 3);
}

TEST_CASE("net spec: validation rejects malformed shapes") {
    auto bad = [](auto&& mutate) {
        NetSpec s;
        s.kind = NetSpec::Kind::Branching;
        s.input_dim = 3;
        s.trunk = {4};
        s.head_hidden = 3;
        s.num_branches = 2;
        s.actions_per_branch = 3;
        mutate(s);
        CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    };
    bad([](NetSpec& s) { s.input_dim = 0; });
    bad([](NetSpec& s) { s.head_hidden = 0; });
    bad([](NetSpec& s) { s.actions_per_branch = 0; });
    bad([](NetSpec& s) { s.num_branches = 0; });
    bad([](NetSpec& s) { s.trunk = {4, 0}; });
    bad([](NetSpec& s) { s.kind = NetSpec::Kind::FlatDueling; });  // 2 branches
}

TEST_CASE("net init: bounded fan-in weights, zero biases, seed-deterministic") {
    const NetSpec s = ref_spec();
    Net a(s, 42), b(s, 42), c(s, 43);
    CHECK(a.params() == b.params());
    CHECK(a.params() != c.params());

    // first trunk layer: 12 weights bounded by 1/sqrt(3), then 4 zero biases
    const double bound = 1.0 / std::sqrt(3.0);
    bool nonzero = false;
    for (int k = 0; k < 12; ++k) {
        CHECK(std::abs(a.params()[k]) <= bound);
        nonzero = nonzero || a.params()[k] != 0.0;
    }
    CHECK(nonzero);
    for (int k = 12; k < 16; ++k) CHECK(a.params()[k] == 0.0);
}

TEST_CASE("net forward: matches the reference evaluation exactly") {
    const Net net = ref_net();
    Net::Trace t;
    net.forward(kRefInput, 2, t);

    REQUIRE(t.value.size() == 2);
    CHECK(t.value[0] == doctest::Approx(-2.088395195317498).epsilon(1e-14));
    CHECK(t.value[1] == doctest::Approx(-2.4390495636396565).epsilon(1e-14));

    const std::vector<double> expect{
        // row 0: branch 0 then branch 1
        -2.1862548917535847, -2.089001897826754, -1.9899287963721553,
        -0.8842157483872111, -1.7598036959274204, -3.621166141637868,
        // row 1
        -2.5369092600757432, -2.4396562661489125, -2.340583164694314,
        -1.039346312001248, -2.0549621655802373, -4.2228402133374825};
    REQUIRE(t.q.size() == expect.size());
    for (std::size_t k = 0; k < expect.size(); ++k)
        CHECK(t.q[k] == doctest::Approx(expect[k]).epsilon(1e-14));

    // the trace-free overload returns the same values
    const auto q = net.forward(kRefInput, 2);
    CHECK(q == t.q);
}

TEST_CASE("net forward: advantage aggregation centers every branch on V") {
    NetSpec s = ref_spec();
    s.trunk = {6, 5};
    Net net(s, 7);
    Rng rng(19);
    std::vector<double> x(3 * 3);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    Net::Trace t;
    net.forward(x, 3, t);
    for (int b = 0; b < 3; ++b) {
        for (int h = 0; h < s.num_branches; ++h) {
            double mean = 0.0;
            for (int c = 0; c < s.actions_per_branch; ++c)
                mean += t.q[(std::size_t(b) * s.num_branches + h) * s.actions_per_branch + c];
            mean /= s.actions_per_branch;
            CHECK(mean == doctest::Approx(t.value[b]).epsilon(1e-12));
        }
    }
}

TEST_CASE("net forward: hand-crafted value and advantages combine as expected") {
    NetSpec s;
    s.kind = NetSpec::Kind::Branching;
    s.input_dim = 1;
    s.trunk = {};
    s.head_hidden = 1;
    s.num_branches = 1;
    s.actions_per_branch = 2;
    Net net(s, 1);
    REQUIRE(net.params().size() == 10);
    // identity value path producing V = 1, advantages (2, 4)
    net.params() = {1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 2.0, 4.0, 0.0, 0.0};
    const auto q = net.forward(std::vector<double>{1.0}, 1);
    REQUIRE(q.size() == 2);
    CHECK(q[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(q[1] == doctest::Approx(2.0).epsilon(1e-14));

    // a constant advantage vector cancels out entirely
    net.params() = {1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 5.0, 5.0};
    const auto qc = net.forward(std::vector<double>{1.0}, 1);
    CHECK(qc[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(qc[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("net forward: input size is checked") {
    const Net net = ref_net();
    CHECK_THROWS_AS(net.forward(std::vector<double>{1.0, 2.0}, 1), std::invalid_argument);
}

TEST_CASE("net backward: gradients match central finite differences") {
    Net net = ref_net();
    Rng rng(23);
    std::vector<double> dq(12);
    for (auto& v : dq) v = rng.uniform(-1.0, 1.0);

    Net::Trace t;
    net.forward(kRefInput, 2, t);
    std::vector<double> grad(net.params().size(), 0.0);
    net.backward(t, dq, grad);

    auto scalar_loss = [&]() {
        const auto q = net.forward(kRefInput, 2);
        double s = 0.0;
        for (std::size_t k = 0; k < q.size(); ++k) s += dq[k] * q[k];
        return s;
    };
    const double h = 1e-6;
    double max_rel = 0.0;
    for (std::size_t k = 0; k < grad.size(); ++k) {
        const double save = net.params()[k];
        net.params()[k] = save + h;
        const double up = scalar_loss();
        net.params()[k] = save - h;
        const double dn = scalar_loss();
        net.params()[k] = save;
        const double fd = (up - dn) / (2.0 * h);
        const double rel = std::abs(fd - grad[k]) / std::max({std::abs(fd), std::abs(grad[k]), 1e-6});
        max_rel = std::max(max_rel, rel);
    }
    CHECK(max_rel < 1e-4);
}

TEST_CASE("net backward: zero upstream signal leaves the gradient untouched") {
    const Net net = ref_net();
    Net::Trace t;
    net.forward(kRefInput, 2, t);
    std::vector<double> grad(net.params().size(), 0.0);
    net.backward(t, std::vector<double>(12, 0.0), grad);
    for (double g : grad) CHECK(g == 0.0);

    std::vector<double> wrong(11, 0.0);
    CHECK_THROWS_AS(net.backward(t, wrong, grad), std::invalid_argument);
    std::vector<double> small(net.params().size() - 1, 0.0);
    CHECK_THROWS_AS(net.backward(t, std::vector<double>(12, 0.0), small), std::invalid_argument);
}

TEST_CASE("adam: reference trajectory over three updates") {
    std::vector<double> p{0.5, -0.3};
    AdamState st;
    st.lr = 0.1;

    adam_step(p, std::vector<double>{0.2, -0.4}, st);
    CHECK(p[0] == doctest::Approx(0.4000000049999997).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(-0.2000000024999999).epsilon(1e-14));

    adam_step(p, std::vector<double>{0.1, 0.3}, st);
    CHECK(p[0] == doctest::Approx(0.3067820470153658).epsilon(1e-13));
    CHECK(p[1] == doctest::Approx(-0.19106750201213565).epsilon(1e-13));

    adam_step(p, std::vector<double>{-0.5, 0.05}, st);
    CHECK(p[0] == doctest::Approx(0.3357108402736406).epsilon(1e-13));
    CHECK(p[1] == doctest::Approx(-0.19055857420305314).epsilon(1e-13));
    CHECK(st.step == 3);
}

TEST_CASE("adam: stepped learning-rate decay") {
    AdamState st;
    st.lr = 1e-3;
    st.step = 0;
    CHECK(st.effective_lr() == doctest::Approx(1e-3).epsilon(1e-14));
    st.step = 9999;
    CHECK(st.effective_lr() == doctest::Approx(1e-3).epsilon(1e-14));
    st.step = 10000;
    CHECK(st.effective_lr() == doctest::Approx(0.95e-3).epsilon(1e-14));
    st.step = 20000;
    CHECK(st.effective_lr() == doctest::Approx(0.95 * 0.95e-3).epsilon(1e-14));
}

TEST_CASE("adam: zero gradient changes nothing but advances the step count") {
    std::vector<double> p{1.0, -2.0};
    AdamState st;
    adam_step(p, std::vector<double>{0.0, 0.0}, st);
    CHECK(p[0] == 1.0);
    CHECK(p[1] == -2.0);
    CHECK(st.step == 1);
}

TEST_CASE("adam: drives a quadratic to its minimum") {
    std::vector<double> p{3.0};
    AdamState st;
    st.lr = 0.1;
    for (int k = 0; k < 500; ++k) adam_step(p, std::vector<double>{2.0 * p[0]}, st);
    CHECK(std::abs(p[0]) < 1e-2);
}

TEST_CASE("adam: non-finite inputs are divergence, size mismatch is usage") {
    std::vector<double> p{1.0};
    AdamState st;
    CHECK_THROWS_AS(adam_step(p, std::vector<double>{std::nan("")}, st), DivergenceError);
    CHECK_THROWS_AS(
        adam_step(p, std::vector<double>{std::numeric_limits<double>::infinity()}, st),
        DivergenceError);
    CHECK_THROWS_AS(adam_step(p, std::vector<double>{1.0, 2.0}, st), std::invalid_argument);

    std::vector<double> broken{std::numeric_limits<double>::infinity()};
    AdamState st2;
    CHECK_THROWS_AS(adam_step(broken, std::vector<double>{0.0}, st2), DivergenceError);
}
