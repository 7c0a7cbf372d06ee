#include "aoimec/agents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "aoimec/errors.hpp"

namespace aoimec {

AgentKind parse_agent_kind(const std::string& name) {
    if (name == "bd3qn") return AgentKind::BD3QN;
    if (name == "dqn") return AgentKind::FlatDQN;
    if (name == "ddqn") return AgentKind::FlatDDQN;
    if (name == "d3qn") return AgentKind::FlatD3QN;
    if (name == "greedy") return AgentKind::Greedy;
    if (name == "random") return AgentKind::Random;
    throw ConfigError("unknown agent '" + name +
                      "' (expected bd3qn, dqn, ddqn, d3qn, greedy or random)");
}

const char* to_string(AgentKind k) {
    switch (k) {
        case AgentKind::BD3QN: return "bd3qn";
        case AgentKind::FlatDQN: return "dqn";
        case AgentKind::FlatDDQN: return "ddqn";
        case AgentKind::FlatD3QN: return "d3qn";
        case AgentKind::Greedy: return "greedy";
        case AgentKind::Random: return "random";
    }
    return "?";
}

bool is_learning(AgentKind k) { return k != AgentKind::Greedy && k != AgentKind::Random; }

TdMode parse_td_mode(const std::string& name) {
    if (name == "global-max") return TdMode::GlobalMax;
    if (name == "per-branch") return TdMode::PerBranch;
    throw ConfigError("unknown td mode '" + name + "' (expected global-max or per-branch)");
}

const char* to_string(TdMode m) { return m == TdMode::GlobalMax ? "global-max" : "per-branch"; }

void AgentHyper::validate() const {
    if (gamma < 0.0 || gamma > 1.0) throw ConfigError("agent: gamma must lie in [0,1]");
    if (target_sync < 1) throw ConfigError("agent: target_sync must be >= 1");
    if (batch_size < 1) throw ConfigError("agent: batch_size must be >= 1");
    if (buffer_capacity < static_cast<std::size_t>(batch_size))
        throw ConfigError("agent: buffer capacity below the batch size");
    if (eps_start < 0.0 || eps_start > 1.0 || eps_min < 0.0 || eps_min > eps_start)
        throw ConfigError("agent: epsilon schedule must satisfy 0 <= eps_min <= eps_start <= 1");
    if (eps_decay <= 0.0 || eps_decay > 1.0) throw ConfigError("agent: eps_decay must be in (0,1]");
}

long long flat_action_count(int num_devices, int num_bs) {
    long long count = 1;
    for (int i = 0; i < num_devices; ++i) {
        count *= num_bs + 1;
        if (count > 4096)
            throw ConfigError("flat action space (M+1)^N = " + std::to_string(num_bs + 1) + "^" +
                              std::to_string(num_devices) +
                              " exceeds the 4096 guard; the joint action count grows "
                              "exponentially with the device count - use the branching agent");
    }
    return count;
}

int flat_index(const JointAction& act, int num_bs) {
    long long idx = 0;
    for (int a : act) {
        if (a < 0 || a > num_bs) throw std::invalid_argument("flat_index: choice out of range");
        idx = idx * (num_bs + 1) + a;
    }
    return static_cast<int>(idx);
}

JointAction unflatten_action(int index, int num_devices, int num_bs) {
    JointAction act(num_devices, 0);
    for (int i = num_devices - 1; i >= 0; --i) {
        act[i] = index % (num_bs + 1);
        index /= (num_bs + 1);
    }
    return act;
}

namespace {

int argmax_row(const double* q, int count) {
    int best = 0;
    for (int c = 1; c < count; ++c)
        if (q[c] > q[best]) best = c;
    return best;
}

}  // namespace

JointAction select_action_bd3qn(const Net& net, std::span<const double> state, double eps,
                                std::span<const std::uint8_t> boost, Rng& rng) {
    const int H = net.spec().num_branches;
    const int C = net.spec().actions_per_branch;
    if (static_cast<int>(boost.size()) != H)
        throw std::invalid_argument("select_action: boost flag per branch required");

    JointAction act(H, 0);
    if (rng.uniform() < eps) {
        std::vector<double> w(C);
        for (int n = 0; n < H; ++n) {
            for (int c = 0; c < C; ++c) w[c] = (boost[n] && c > 0) ? 2.0 : 1.0;
            act[n] = static_cast<int>(rng.categorical(w));
        }
        return act;
    }
    const std::vector<double> q = net.forward(state, 1);
    for (int n = 0; n < H; ++n) act[n] = argmax_row(q.data() + static_cast<std::size_t>(n) * C, C);
    return act;
}

TdBatch pack_batch(const std::vector<const Transition*>& sample, int branches) {
    if (sample.empty()) throw std::invalid_argument("pack_batch: empty sample");
    TdBatch b;
    b.batch = static_cast<int>(sample.size());
    b.branches = branches;
    b.state_dim = static_cast<int>(sample[0]->state.size());
    b.states.reserve(static_cast<std::size_t>(b.batch) * b.state_dim);
    b.next_states.reserve(b.states.capacity());
    b.actions.reserve(static_cast<std::size_t>(b.batch) * branches);
    b.rewards.reserve(b.batch);
    b.done.reserve(b.batch);
    for (const Transition* t : sample) {
        if (static_cast<int>(t->state.size()) != b.state_dim ||
            static_cast<int>(t->action.size()) != branches)
            throw std::invalid_argument("pack_batch: ragged transition");
        b.states.insert(b.states.end(), t->state.begin(), t->state.end());
        b.next_states.insert(b.next_states.end(), t->next_state.begin(), t->next_state.end());
        b.actions.insert(b.actions.end(), t->action.begin(), t->action.end());
        b.rewards.push_back(t->reward);
        b.done.push_back(t->done ? 1 : 0);
    }
    return b;
}

std::vector<double> td_targets_bd3qn(const TdBatch& b, const Net& online, const Net& target,
                                     double gamma, TdMode mode) {
    if (b.batch == 0) throw std::invalid_argument("td_targets: empty batch");
    if (mode != TdMode::GlobalMax && mode != TdMode::PerBranch)
        throw ConfigError("td_targets: unknown mode");
    const int H = b.branches;
    const int C = online.spec().actions_per_branch;
    const std::vector<double> qo = online.forward(b.next_states, b.batch);
    const std::vector<double> qt = target.forward(b.next_states, b.batch);

    std::vector<double> y(static_cast<std::size_t>(b.batch) * H);
    std::vector<double> val(H);
    for (int k = 0; k < b.batch; ++k) {
        if (b.done[k]) {
            for (int n = 0; n < H; ++n) y[static_cast<std::size_t>(k) * H + n] = b.rewards[k];
            continue;
        }
        for (int n = 0; n < H; ++n) {
            const std::size_t row = (static_cast<std::size_t>(k) * H + n) * C;
            const int pick = argmax_row(qo.data() + row, C);
            val[n] = qt[row + pick];
        }
        if (mode == TdMode::GlobalMax) {
            const double best = *std::max_element(val.begin(), val.end());
            for (int n = 0; n < H; ++n)
                y[static_cast<std::size_t>(k) * H + n] = b.rewards[k] + gamma * best;
        } else {
            for (int n = 0; n < H; ++n)
                y[static_cast<std::size_t>(k) * H + n] = b.rewards[k] + gamma * val[n];
        }
    }
    return y;
}

std::vector<double> td_targets_flat(const TdBatch& b, const Net& online, const Net& target,
                                    double gamma, FlatVariant v) {
    if (b.batch == 0) throw std::invalid_argument("td_targets: empty batch");
    if (b.branches != 1) throw std::invalid_argument("td_targets: flat batch must be one branch");
    const int C = online.spec().actions_per_branch;
    const std::vector<double> qt = target.forward(b.next_states, b.batch);
    std::vector<double> qo;
    if (v != FlatVariant::DQN) qo = online.forward(b.next_states, b.batch);

    std::vector<double> y(b.batch);
    for (int k = 0; k < b.batch; ++k) {
        if (b.done[k]) {
            y[k] = b.rewards[k];
            continue;
        }
        const std::size_t row = static_cast<std::size_t>(k) * C;
        const int pick = v == FlatVariant::DQN ? argmax_row(qt.data() + row, C)
                                               : argmax_row(qo.data() + row, C);
        y[k] = b.rewards[k] + gamma * qt[row + pick];
    }
    return y;
}

double td_loss(const TdBatch& b, std::span<const double> targets, const Net& online,
               Net::Trace& trace, std::vector<double>& dq) {
    const int H = b.branches;
    const int C = online.spec().actions_per_branch;
    if (targets.size() != static_cast<std::size_t>(b.batch) * H)
        throw std::invalid_argument("td_loss: target size mismatch");

    online.forward(b.states, b.batch, trace);
    dq.assign(static_cast<std::size_t>(b.batch) * H * C, 0.0);

    double loss = 0.0;
    const double scale = 1.0 / (static_cast<double>(b.batch) * H);
    for (int k = 0; k < b.batch; ++k) {
        for (int n = 0; n < H; ++n) {
            const int a = b.actions[static_cast<std::size_t>(k) * H + n];
            if (a < 0 || a >= C) throw std::invalid_argument("td_loss: action out of range");
            const std::size_t at = (static_cast<std::size_t>(k) * H + n) * C + a;
            const double err = trace.q[at] - targets[static_cast<std::size_t>(k) * H + n];
            loss += err * err * scale;
            dq[at] = 2.0 * err * scale;
        }
    }
    return loss;
}

JointAction greedy_policy(const SystemState& s, const SystemConfig& cfg, const Deployment& dep) {
    const int n = cfg.num_devices;
    JointAction act(n, 0);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return dep.priority[a] * s.aoi[a] > dep.priority[b] * s.aoi[b];
    });
    std::vector<int> load(cfg.num_bs, 0);
    for (int i : order) {
        if (!s.queue[i]) continue;
        int best = -1;
        for (int j = 0; j < cfg.num_bs; ++j) {
            if (load[j] >= cfg.per_bs_cap) continue;
            if (best < 0 || dep.distance(i, j, cfg.num_bs) < dep.distance(i, best, cfg.num_bs))
                best = j;
        }
        if (best >= 0) {
            act[i] = best + 1;
            ++load[best];
        }
    }
    return act;
}

JointAction random_policy(int num_devices, int num_bs, Rng& rng) {
    JointAction act(num_devices, 0);
    for (int i = 0; i < num_devices; ++i)
        act[i] = static_cast<int>(rng.below(static_cast<std::uint64_t>(num_bs) + 1));
    return act;
}

namespace {

NetSpec spec_for(AgentKind kind, const SystemConfig& cfg, const NetArch& arch) {
    NetSpec s;
    s.input_dim = 3 * cfg.num_devices + cfg.num_devices * cfg.num_bs;
    s.trunk = arch.trunk;
    s.head_hidden = arch.head_hidden;
    switch (kind) {
        case AgentKind::BD3QN:
            s.kind = NetSpec::Kind::Branching;
            s.num_branches = cfg.num_devices;
            s.actions_per_branch = cfg.num_bs + 1;
            break;
        case AgentKind::FlatDQN:
        case AgentKind::FlatDDQN:
            s.kind = NetSpec::Kind::FlatPlain;
            s.num_branches = 1;
            s.actions_per_branch =
                static_cast<int>(flat_action_count(cfg.num_devices, cfg.num_bs));
            break;
        case AgentKind::FlatD3QN:
            s.kind = NetSpec::Kind::FlatDueling;
            s.num_branches = 1;
            s.actions_per_branch =
                static_cast<int>(flat_action_count(cfg.num_devices, cfg.num_bs));
            break;
        default:
            throw ConfigError("agent: greedy/random take no network");
    }
    return s;
}

FlatVariant variant_of(AgentKind kind) {
    switch (kind) {
        case AgentKind::FlatDQN: return FlatVariant::DQN;
        case AgentKind::FlatDDQN: return FlatVariant::DDQN;
        case AgentKind::FlatD3QN: return FlatVariant::D3QN;
        default: throw std::logic_error("variant_of: not a flat agent");
    }
}

}  // namespace

QAgent::QAgent(AgentKind kind, const SystemConfig& cfg, const AgentHyper& hyper,
               const NetArch& arch, std::uint64_t seed)
    : kind_(kind),
      hyper_(hyper),
      online_(spec_for(kind, cfg, arch), fold_seed(seed, 0x01ULL)),
      target_(online_),
      adam_(hyper.adam),
      buffer_(hyper.buffer_capacity),
      rng_(fold_seed(seed, 0x02ULL)),
      epsilon_(hyper.eps_start),
      num_devices_(cfg.num_devices),
      num_bs_(cfg.num_bs) {
    hyper_.validate();
    adam_.step = 0;
    adam_.m.clear();
    adam_.v.clear();
    boost_.assign(num_devices_, 0);
    grad_.assign(online_.params().size(), 0.0);
}

JointAction QAgent::pick(const Environment& env, double eps) {
    const std::vector<double> s = encode_state(env.state(), env.config(), env.deployment());
    if (kind_ == AgentKind::BD3QN) return select_action_bd3qn(online_, s, eps, boost_, rng_);

    const int C = online_.spec().actions_per_branch;
    if (rng_.uniform() < eps)
        return unflatten_action(static_cast<int>(rng_.below(C)), num_devices_, num_bs_);
    const std::vector<double> q = online_.forward(s, 1);
    return unflatten_action(argmax_row(q.data(), C), num_devices_, num_bs_);
}

JointAction QAgent::greedy_action(const Environment& env) const {
    const std::vector<double> s = encode_state(env.state(), env.config(), env.deployment());
    const std::vector<double> q = online_.forward(s, 1);
    const int C = online_.spec().actions_per_branch;
    if (kind_ != AgentKind::BD3QN) return unflatten_action(argmax_row(q.data(), C), num_devices_, num_bs_);
    JointAction act(num_devices_, 0);
    for (int n = 0; n < num_devices_; ++n)
        act[n] = argmax_row(q.data() + static_cast<std::size_t>(n) * C, C);
    return act;
}

double QAgent::learn_step() {
    const auto sample = buffer_.sample(static_cast<std::size_t>(hyper_.batch_size), rng_);
    const TdBatch b = pack_batch(sample, online_.spec().num_branches);
    const std::vector<double> y =
        kind_ == AgentKind::BD3QN
            ? td_targets_bd3qn(b, online_, target_, hyper_.gamma, hyper_.td_mode)
            : td_targets_flat(b, online_, target_, hyper_.gamma, variant_of(kind_));

    Net::Trace trace;
    std::vector<double> dq;
    const double loss = td_loss(b, y, online_, trace, dq);
    grad_.assign(online_.params().size(), 0.0);
    online_.backward(trace, dq, grad_);
    adam_step(online_.params(), grad_, adam_);

    ++train_steps_;
    if (train_steps_ % hyper_.target_sync == 0) target_.params() = online_.params();
    return loss;
}

EpisodeResult QAgent::train_episode(Environment& env, std::uint64_t episode_seed) {
    env.reset(episode_seed);
    boost_.assign(num_devices_, 0);

    EpisodeResult res;
    res.epsilon = epsilon_;
    double loss_sum = 0.0;
    double aoi_sum = 0.0;
    const int horizon = env.config().horizon;

    for (int t = 0; t < horizon; ++t) {
        std::vector<double> s_enc = encode_state(env.state(), env.config(), env.deployment());
        const JointAction exec = repair_action(env.sanitize(pick(env, epsilon_)), env.state(),
                                               env.config(), env.deployment());
        const StepOutcome out = env.step(exec);
        res.total_reward += out.reward;

        for (int i = 0; i < num_devices_; ++i) {
            aoi_sum += out.next.aoi[i];
            if (out.outcomes[i] == SlotOutcome::Completed) {
                ++res.completed;
                boost_[i] = 0;
            } else if (out.aoi_clamped[i]) {
                boost_[i] = 1;
            }
        }

        Transition tr;
        tr.state = std::move(s_enc);
        tr.action = kind_ == AgentKind::BD3QN
                        ? exec
                        : JointAction{flat_index(exec, num_bs_)};
        tr.reward = out.reward;
        tr.next_state = encode_state(env.state(), env.config(), env.deployment());
        tr.done = t == horizon - 1;
        buffer_.push(std::move(tr));

        if (buffer_.ready(static_cast<std::size_t>(hyper_.batch_size))) {
            loss_sum += learn_step();
            ++res.grad_steps;
        }
    }

    if (res.grad_steps > 0) res.mean_loss = loss_sum / res.grad_steps;
    res.mean_aoi = aoi_sum / (static_cast<double>(horizon) * num_devices_);
    epsilon_ = std::max(hyper_.eps_min, epsilon_ * hyper_.eps_decay);
    ++episodes_done_;
    return res;
}

Checkpoint QAgent::to_checkpoint() const {
    Checkpoint c;
    c.spec = online_.spec();
    c.online = online_.params();
    c.target = target_.params();
    c.adam = adam_;
    c.train_steps = static_cast<std::uint64_t>(train_steps_);
    c.episodes_done = episodes_done_;
    c.epsilon = epsilon_;
    return c;
}

void QAgent::restore(const Checkpoint& c) {
    if (c.online.size() != online_.params().size() || c.target.size() != target_.params().size())
        throw ConfigError("checkpoint: parameter count does not match this agent's architecture");
    online_.params() = c.online;
    target_.params() = c.target;
    adam_ = c.adam;
    train_steps_ = static_cast<long long>(c.train_steps);
    episodes_done_ = c.episodes_done;
    epsilon_ = c.epsilon;
}

}  // namespace aoimec
