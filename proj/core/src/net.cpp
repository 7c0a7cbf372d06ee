#include "aoimec/net.hpp"

#include <cmath>
#include <stdexcept>

#include "aoimec/errors.hpp"

namespace aoimec {

void NetSpec::validate() const {
    if (input_dim <= 0) throw std::invalid_argument("net: input_dim must be positive");
    if (head_hidden < 1) throw std::invalid_argument("net: head_hidden must be >= 1");
    if (actions_per_branch < 1) throw std::invalid_argument("net: actions_per_branch must be >= 1");
    if (num_branches < 1) throw std::invalid_argument("net: num_branches must be >= 1");
    if (kind != Kind::Branching && num_branches != 1)
        throw std::invalid_argument("net: flat kinds take a single branch");
    for (int w : trunk)
        if (w < 1) throw std::invalid_argument("net: trunk widths must be >= 1");
}

std::size_t NetSpec::param_count() const {
    auto dense = [](int in, int out) {
        return static_cast<std::size_t>(in) * out + static_cast<std::size_t>(out);
    };
    std::size_t total = 0;
    int width = input_dim;
    for (int w : trunk) {
        total += dense(width, w);
        width = w;
    }
    if (dueling()) total += dense(width, head_hidden) + dense(head_hidden, 1);
    for (int h = 0; h < num_branches; ++h)
        total += dense(width, head_hidden) + dense(head_hidden, actions_per_branch);
    return total;
}

Net::Linear Net::add_layer(int in, int out, std::size_t& cursor) {
    Linear l;
    l.in = in;
    l.out = out;
    l.w = cursor;
    cursor += static_cast<std::size_t>(in) * out;
    l.b = cursor;
    cursor += static_cast<std::size_t>(out);
    return l;
}

Net::Net(NetSpec spec, std::uint64_t init_seed) : spec_(std::move(spec)) {
    spec_.validate();
    std::size_t cursor = 0;
    int width = spec_.input_dim;
    for (int w : spec_.trunk) {
        trunk_.push_back(add_layer(width, w, cursor));
        width = w;
    }
    if (spec_.dueling()) {
        value_hidden_l_ = add_layer(width, spec_.head_hidden, cursor);
        value_out_l_ = add_layer(spec_.head_hidden, 1, cursor);
    }
    for (int h = 0; h < spec_.num_branches; ++h) {
        head_hidden_l_.push_back(add_layer(width, spec_.head_hidden, cursor));
        head_out_l_.push_back(add_layer(spec_.head_hidden, spec_.actions_per_branch, cursor));
    }
    params_.resize(cursor);

    // uniform fan-in weight init with zero biases, one stream over the layout
    Rng rng(fold_seed(init_seed, 0x9e7ULL));
    auto fill = [&](const Linear& l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
        for (std::size_t k = 0; k < static_cast<std::size_t>(l.in) * l.out; ++k)
            params_[l.w + k] = rng.uniform(-bound, bound);
        for (int k = 0; k < l.out; ++k) params_[l.b + k] = 0.0;
    };
    for (const auto& l : trunk_) fill(l);
    if (spec_.dueling()) {
        fill(value_hidden_l_);
        fill(value_out_l_);
    }
    for (int h = 0; h < spec_.num_branches; ++h) {
        fill(head_hidden_l_[h]);
        fill(head_out_l_[h]);
    }
}

void Net::apply(const Linear& l, std::span<const double> x, int batch, std::vector<double>& y,
                bool relu) const {
    y.assign(static_cast<std::size_t>(batch) * l.out, 0.0);
    for (int b = 0; b < batch; ++b) {
        const double* xi = x.data() + static_cast<std::size_t>(b) * l.in;
        double* yi = y.data() + static_cast<std::size_t>(b) * l.out;
        for (int o = 0; o < l.out; ++o) {
            const double* w = params_.data() + l.w + static_cast<std::size_t>(o) * l.in;
            double acc = params_[l.b + o];
            for (int i = 0; i < l.in; ++i) acc += w[i] * xi[i];
            yi[o] = relu && acc < 0.0 ? 0.0 : acc;
        }
    }
}

void Net::apply_backward(const Linear& l, std::span<const double> x, std::span<const double> dy,
                         int batch, std::span<double> grad, std::vector<double>& dx) const {
    dx.assign(static_cast<std::size_t>(batch) * l.in, 0.0);
    for (int b = 0; b < batch; ++b) {
        const double* xi = x.data() + static_cast<std::size_t>(b) * l.in;
        const double* dyi = dy.data() + static_cast<std::size_t>(b) * l.out;
        double* dxi = dx.data() + static_cast<std::size_t>(b) * l.in;
        for (int o = 0; o < l.out; ++o) {
            const double g = dyi[o];
            if (g == 0.0) continue;
            grad[l.b + o] += g;
            const double* w = params_.data() + l.w + static_cast<std::size_t>(o) * l.in;
            double* gw = grad.data() + l.w + static_cast<std::size_t>(o) * l.in;
            for (int i = 0; i < l.in; ++i) {
                gw[i] += g * xi[i];
                dxi[i] += g * w[i];
            }
        }
    }
}

void Net::forward(std::span<const double> states, int batch, Trace& t) const {
    if (states.size() != static_cast<std::size_t>(batch) * spec_.input_dim)
        throw std::invalid_argument("net: state batch has the wrong size");
    const int H = spec_.num_branches;
    const int C = spec_.actions_per_branch;

    t.batch = batch;
    t.trunk_act.assign(trunk_.size() + 1, {});
    t.trunk_act[0].assign(states.begin(), states.end());
    for (std::size_t li = 0; li < trunk_.size(); ++li)
        apply(trunk_[li], t.trunk_act[li], batch, t.trunk_act[li + 1], true);
    const std::vector<double>& top = t.trunk_act.back();

    if (spec_.dueling()) {
        apply(value_hidden_l_, top, batch, t.value_hidden, true);
        apply(value_out_l_, t.value_hidden, batch, t.value, false);
    } else {
        t.value_hidden.clear();
        t.value.clear();
    }

    t.head_hidden.assign(H, {});
    t.head_out.assign(H, {});
    t.q.assign(static_cast<std::size_t>(batch) * H * C, 0.0);
    for (int h = 0; h < H; ++h) {
        apply(head_hidden_l_[h], top, batch, t.head_hidden[h], true);
        apply(head_out_l_[h], t.head_hidden[h], batch, t.head_out[h], false);
        for (int b = 0; b < batch; ++b) {
            const double* adv = t.head_out[h].data() + static_cast<std::size_t>(b) * C;
            double* q = t.q.data() + (static_cast<std::size_t>(b) * H + h) * C;
            if (spec_.dueling()) {
                double mean = 0.0;
                for (int c = 0; c < C; ++c) mean += adv[c];
                mean /= C;
                for (int c = 0; c < C; ++c) q[c] = t.value[b] + adv[c] - mean;
            } else {
                for (int c = 0; c < C; ++c) q[c] = adv[c];
            }
        }
    }
}

std::vector<double> Net::forward(std::span<const double> states, int batch) const {
    Trace t;
    forward(states, batch, t);
    return std::move(t.q);
}

void Net::backward(const Trace& t, std::span<const double> dq, std::span<double> grad) const {
    const int H = spec_.num_branches;
    const int C = spec_.actions_per_branch;
    const int batch = t.batch;
    if (dq.size() != static_cast<std::size_t>(batch) * H * C)
        throw std::invalid_argument("net: dq has the wrong size");
    if (grad.size() != params_.size())
        throw std::invalid_argument("net: grad buffer has the wrong size");

    const std::vector<double>& top = t.trunk_act.back();
    std::vector<double> dtop(top.size(), 0.0);
    std::vector<double> dvalue(spec_.dueling() ? batch : 0, 0.0);
    std::vector<double> dhead(static_cast<std::size_t>(batch) * C);
    std::vector<double> scratch, scratch2;

    // the aggregation Q = V + A - mean(A) splits dq into the two heads
    for (int h = 0; h < H; ++h) {
        for (int b = 0; b < batch; ++b) {
            const double* dqi = dq.data() + (static_cast<std::size_t>(b) * H + h) * C;
            double* dai = dhead.data() + static_cast<std::size_t>(b) * C;
            if (spec_.dueling()) {
                double sum = 0.0;
                for (int c = 0; c < C; ++c) sum += dqi[c];
                dvalue[b] += sum;
                for (int c = 0; c < C; ++c) dai[c] = dqi[c] - sum / C;
            } else {
                for (int c = 0; c < C; ++c) dai[c] = dqi[c];
            }
        }
        apply_backward(head_out_l_[h], t.head_hidden[h], dhead, batch, grad, scratch);
        for (std::size_t k = 0; k < scratch.size(); ++k)
            if (t.head_hidden[h][k] <= 0.0) scratch[k] = 0.0;
        apply_backward(head_hidden_l_[h], top, scratch, batch, grad, scratch2);
        for (std::size_t k = 0; k < dtop.size(); ++k) dtop[k] += scratch2[k];
    }

    if (spec_.dueling()) {
        apply_backward(value_out_l_, t.value_hidden, dvalue, batch, grad, scratch);
        for (std::size_t k = 0; k < scratch.size(); ++k)
            if (t.value_hidden[k] <= 0.0) scratch[k] = 0.0;
        apply_backward(value_hidden_l_, top, scratch, batch, grad, scratch2);
        for (std::size_t k = 0; k < dtop.size(); ++k) dtop[k] += scratch2[k];
    }

    std::vector<double> dcur = std::move(dtop);
    for (std::size_t li = trunk_.size(); li-- > 0;) {
        const std::vector<double>& act = t.trunk_act[li + 1];
        for (std::size_t k = 0; k < dcur.size(); ++k)
            if (act[k] <= 0.0) dcur[k] = 0.0;
        apply_backward(trunk_[li], t.trunk_act[li], dcur, batch, grad, scratch);
        dcur = std::move(scratch);
        scratch.clear();
    }
}

double AdamState::effective_lr() const {
    return lr * std::pow(lr_decay, static_cast<double>(step / decay_every));
}

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& st) {
    if (grad.size() != params.size())
        throw std::invalid_argument("adam: grad/param size mismatch");
    for (double g : grad)
        if (!std::isfinite(g))
            throw DivergenceError("training diverged: non-finite gradient at update " +
                                  std::to_string(st.step + 1));
    if (st.m.size() != params.size()) {
        st.m.assign(params.size(), 0.0);
        st.v.assign(params.size(), 0.0);
    }
    const double lr_eff = st.effective_lr();
    ++st.step;
    const double t = static_cast<double>(st.step);
    const double c1 = 1.0 - std::pow(st.beta1, t);
    const double c2 = 1.0 - std::pow(st.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        st.m[k] = st.beta1 * st.m[k] + (1.0 - st.beta1) * grad[k];
        st.v[k] = st.beta2 * st.v[k] + (1.0 - st.beta2) * grad[k] * grad[k];
        params[k] -= lr_eff * (st.m[k] / c1) / (std::sqrt(st.v[k] / c2) + st.eps);
        if (!std::isfinite(params[k]))
            throw DivergenceError("training diverged: non-finite parameter after update " +
                                  std::to_string(st.step));
    }
}

}  // namespace aoimec
