#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "aoimec/rng.hpp"

namespace aoimec {

// Dense Q-network shapes. Branching: one shared trunk, a scalar state-value
// head and num_branches advantage heads of actions_per_branch outputs each.
// FlatDueling: the single-branch special case over a joint action set.
// FlatPlain: one plain Q head, no value head, no aggregation.
struct NetSpec {
    enum class Kind { Branching, FlatDueling, FlatPlain };

    Kind kind = Kind::Branching;
    int input_dim = 0;
    std::vector<int> trunk;      // hidden widths, ReLU after each
    int head_hidden = 64;        // hidden width inside every head, >= 1
    int num_branches = 1;
    int actions_per_branch = 0;

    bool dueling() const { return kind != Kind::FlatPlain; }
    int trunk_out() const { return trunk.empty() ? input_dim : trunk.back(); }
    int q_count() const { return num_branches * actions_per_branch; }
    // Final linear outputs summed over heads; the scalar value head adds one.
    int output_units() const { return q_count() + (dueling() ? 1 : 0); }
    std::size_t param_count() const;
    void validate() const;
};

class Net {
public:
    // Everything the backward pass needs from a forward pass.
    struct Trace {
        int batch = 0;
        std::vector<std::vector<double>> trunk_act;   // [L+1], [0] = input, each B x width
        std::vector<double> value_hidden;             // B x head_hidden (dueling only)
        std::vector<double> value;                    // B (dueling only)
        std::vector<std::vector<double>> head_hidden; // [H], each B x head_hidden
        std::vector<std::vector<double>> head_out;    // [H], each B x C
        std::vector<double> q;                        // B x (H*C)
    };

    Net() = default;
    Net(NetSpec spec, std::uint64_t init_seed);

    // states is row-major B x input_dim; returns Q row-major B x (H*C).
    std::vector<double> forward(std::span<const double> states, int batch) const;
    void forward(std::span<const double> states, int batch, Trace& t) const;

    // dq is B x (H*C), zero except where the loss reads Q; adds into grad,
    // which must have param_count() entries.
    void backward(const Trace& t, std::span<const double> dq, std::span<double> grad) const;

    const NetSpec& spec() const { return spec_; }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

private:
    struct Linear {
        int in = 0, out = 0;
        std::size_t w = 0, b = 0;  // offsets into params_
    };

    Linear add_layer(int in, int out, std::size_t& cursor);
    void apply(const Linear& l, std::span<const double> x, int batch, std::vector<double>& y,
               bool relu) const;
    // dy is B x out (already masked); accumulates weight grads and writes dx.
    void apply_backward(const Linear& l, std::span<const double> x, std::span<const double> dy,
                        int batch, std::span<double> grad, std::vector<double>& dx) const;

    NetSpec spec_;
    std::vector<Linear> trunk_;
    Linear value_hidden_l_, value_out_l_;
    std::vector<Linear> head_hidden_l_, head_out_l_;
    std::vector<double> params_;
};

// Adam with a stepped exponential learning-rate decay. The effective rate of
// the k-th update (k counted from zero) is lr * lr_decay^(k / decay_every).
struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double lr_decay = 0.95;
    long long decay_every = 10000;
    long long step = 0;  // completed updates
    std::vector<double> m, v;

    double effective_lr() const;  // rate the next update will use
};

// One in-place update; sizes the moment buffers on first use. Throws
// DivergenceError if any parameter stops being finite.
void adam_step(std::span<double> params, std::span<const double> grad, AdamState& st);

}  // namespace aoimec
