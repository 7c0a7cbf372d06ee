#pragma once

#include <limits>
#include <string>

#include "aoimec/checkpoint.hpp"
#include "aoimec/environment.hpp"
#include "aoimec/net.hpp"
#include "aoimec/replay.hpp"

namespace aoimec {

enum class AgentKind { BD3QN, FlatDQN, FlatDDQN, FlatD3QN, Greedy, Random };

AgentKind parse_agent_kind(const std::string& name);
const char* to_string(AgentKind k);
bool is_learning(AgentKind k);

// How the bootstrap value of the next state is aggregated across branches.
enum class TdMode { GlobalMax, PerBranch };

TdMode parse_td_mode(const std::string& name);
const char* to_string(TdMode m);

struct AgentHyper {
    double gamma = 0.95;
    int target_sync = 100;  // whole-copy target refresh, in gradient steps
    double eps_start = 1.0;
    double eps_min = 0.05;
    double eps_decay = 0.999;  // multiplicative, once per episode
    int batch_size = 64;
    std::size_t buffer_capacity = 50000;
    TdMode td_mode = TdMode::GlobalMax;
    AdamState adam;  // hyperparameter template; moments live in the agent

    void validate() const;
};

struct NetArch {
    std::vector<int> trunk{128, 128};
    int head_hidden = 64;
};

// Joint actions as a single index, device 0 most significant. The count is
// guarded: past 4096 the flat formulation is out of budget by design.
long long flat_action_count(int num_devices, int num_bs);
int flat_index(const JointAction& act, int num_bs);
JointAction unflatten_action(int index, int num_devices, int num_bs);

// eps-greedy over the branching net: exploit takes each branch's argmax
// (ties to the lowest index); explore draws each branch from a categorical
// where a boosted device's offload choices carry twice the weight.
JointAction select_action_bd3qn(const Net& net, std::span<const double> state, double eps,
                                std::span<const std::uint8_t> boost, Rng& rng);

// A sampled minibatch rearranged into dense arrays.
struct TdBatch {
    int batch = 0;
    int branches = 1;
    int state_dim = 0;
    std::vector<double> states;       // B x state_dim
    std::vector<double> next_states;  // B x state_dim
    std::vector<int> actions;         // B x branches
    std::vector<double> rewards;      // B
    std::vector<std::uint8_t> done;   // B
};

TdBatch pack_batch(const std::vector<const Transition*>& sample, int branches);

// Double-Q targets: branch argmax under the online net, valued by the target
// net. GlobalMax shares max_n across branches; PerBranch keeps them apart.
// Terminal transitions bootstrap nothing.
std::vector<double> td_targets_bd3qn(const TdBatch& b, const Net& online, const Net& target,
                                     double gamma, TdMode mode);

enum class FlatVariant { DQN, DDQN, D3QN };

// DQN maxes directly over the target net; DDQN and D3QN decouple selection
// (online) from evaluation (target).
std::vector<double> td_targets_flat(const TdBatch& b, const Net& online, const Net& target,
                                    double gamma, FlatVariant v);

// Mean over the batch of the branch-averaged squared TD error. Fills the
// forward trace and the gradient seed dq, nonzero only at taken actions.
double td_loss(const TdBatch& b, std::span<const double> targets, const Net& online,
               Net::Trace& trace, std::vector<double>& dq);

// Devices in descending priority*AoI order each grab the nearest BS that
// still has access slots left; everyone else holds.
JointAction greedy_policy(const SystemState& s, const SystemConfig& cfg, const Deployment& dep);

// Uniform over {hold, BS 1..M} per device; the environment repairs overflow.
JointAction random_policy(int num_devices, int num_bs, Rng& rng);

struct EpisodeResult {
    double total_reward = 0.0;
    double mean_loss = std::numeric_limits<double>::quiet_NaN();  // NaN until learning starts
    double mean_aoi = 0.0;
    double epsilon = 0.0;  // value used during this episode
    int grad_steps = 0;
    long long completed = 0;
};

// One Q-learning agent (branching or flat) with its buffer, optimizer state
// and exploration schedule.
class QAgent {
public:
    QAgent(AgentKind kind, const SystemConfig& cfg, const AgentHyper& hyper, const NetArch& arch,
           std::uint64_t seed);

    AgentKind kind() const { return kind_; }
    const AgentHyper& hyper() const { return hyper_; }
    double epsilon() const { return epsilon_; }
    long long train_steps() const { return train_steps_; }
    std::uint64_t episodes_done() const { return episodes_done_; }
    const Net& online() const { return online_; }
    const Net& target() const { return target_; }

    // One episode: eps-greedy rollout, per-slot replay updates, periodic
    // target sync, then the per-episode epsilon decay.
    EpisodeResult train_episode(Environment& env, std::uint64_t episode_seed);

    // Pure exploitation; used by evaluation rollouts.
    JointAction greedy_action(const Environment& env) const;

    Checkpoint to_checkpoint() const;
    void restore(const Checkpoint& c);

private:
    JointAction pick(const Environment& env, double eps);
    double learn_step();

    AgentKind kind_;
    AgentHyper hyper_;
    Net online_;
    Net target_;
    AdamState adam_;
    ReplayBuffer buffer_;
    Rng rng_;
    double epsilon_;
    long long train_steps_ = 0;
    std::uint64_t episodes_done_ = 0;
    std::vector<std::uint8_t> boost_;
    std::vector<double> grad_;
    int num_devices_ = 0;
    int num_bs_ = 0;
};

}  // namespace aoimec
