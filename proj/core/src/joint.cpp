#include "aoimec/joint.hpp"

#include <cmath>

#include "aoimec/errors.hpp"

namespace aoimec {

PolicyFn policy_of(const QAgent& agent) {
    return [&agent](const Environment& env, Rng&) { return agent.greedy_action(env); };
}

PolicyFn policy_greedy() {
    return [](const Environment& env, Rng&) {
        return greedy_policy(env.state(), env.config(), env.deployment());
    };
}

PolicyFn policy_random() {
    return [](const Environment& env, Rng& rng) {
        return random_policy(env.config().num_devices, env.config().num_bs, rng);
    };
}

EvalMetrics evaluate_policy(Environment& env, const PolicyFn& policy, int episodes,
                            std::uint64_t seed) {
    if (episodes <= 0) throw ConfigError("evaluation needs at least one episode");
    const SystemConfig& cfg = env.config();
    const Deployment& dep = env.deployment();

    EvalMetrics m;
    m.episodes = episodes;
    double alloc_sum = 0.0;
    for (int ep = 0; ep < episodes; ++ep) {
        env.reset(fold_seed(seed, 0xA110ULL + static_cast<std::uint64_t>(ep)));
        Rng policy_rng(fold_seed(seed, 0xB0B0ULL + static_cast<std::uint64_t>(ep)));
        double weighted = 0.0;
        for (int t = 0; t < cfg.horizon; ++t) {
            const StepOutcome out = env.step(policy(env, policy_rng));
            m.mean_reward += out.reward;
            alloc_sum += out.alloc_objective;
            for (int i = 0; i < cfg.num_devices; ++i) {
                weighted += dep.priority[i] * out.next.aoi[i];
                m.mean_aoi += out.next.aoi[i];
                if (out.outcomes[i] == SlotOutcome::Completed) ++m.completed;
            }
        }
        m.per_episode_weighted_aoi.push_back(weighted / cfg.horizon);
    }

    double sum = 0.0;
    for (double v : m.per_episode_weighted_aoi) sum += v;
    m.weighted_aoi = sum / episodes;
    if (episodes > 1) {
        double ss = 0.0;
        for (double v : m.per_episode_weighted_aoi) ss += (v - m.weighted_aoi) * (v - m.weighted_aoi);
        m.weighted_aoi_ci = 1.96 * std::sqrt(ss / (episodes - 1)) / std::sqrt(double(episodes));
    }
    m.mean_reward /= episodes;
    m.mean_aoi /= static_cast<double>(episodes) * cfg.horizon * cfg.num_devices;
    m.mean_alloc_objective = alloc_sum / (static_cast<double>(episodes) * cfg.horizon);
    if (!std::isfinite(m.weighted_aoi) || !std::isfinite(m.mean_reward))
        throw DivergenceError("evaluation produced non-finite metrics");
    return m;
}

void AOConfig::validate() const {
    if (max_outer_iters < 1) throw ConfigError("ao: max_outer_iters must be >= 1");
    if (tolerance <= 0.0 || tolerance > 1.0) throw ConfigError("ao: tolerance must lie in (0,1]");
    if (episodes_per_iter < 1) throw ConfigError("ao: episodes_per_iter must be >= 1");
    if (eval_episodes < 1) throw ConfigError("ao: eval_episodes must be >= 1");
}

AOTrace ao_run(QAgent& agent, Environment& env, const AOConfig& ao, std::uint64_t seed) {
    ao.validate();
    AOTrace trace;
    double prev_aoi = 0.0;
    for (int it = 0; it < ao.max_outer_iters; ++it) {
        AOIterStats stats;
        double train_sum = 0.0;
        for (int ep = 0; ep < ao.episodes_per_iter; ++ep) {
            const EpisodeResult r = agent.train_episode(
                env, fold_seed(seed, (static_cast<std::uint64_t>(it) << 20) + ep));
            if (!std::isfinite(r.total_reward))
                throw DivergenceError("training reward became non-finite in outer iteration " +
                                      std::to_string(it + 1));
            train_sum += r.total_reward;
        }
        stats.train_reward = train_sum / ao.episodes_per_iter;

        const EvalMetrics m = evaluate_policy(env, policy_of(agent), ao.eval_episodes,
                                              fold_seed(seed, 0xE7A1ULL + static_cast<std::uint64_t>(it)));
        stats.eval_weighted_aoi = m.weighted_aoi;
        stats.eval_reward = m.mean_reward;
        stats.eval_alloc_objective = m.mean_alloc_objective;
        trace.iters.push_back(stats);

        if (it > 0) {
            const double rel = std::abs(stats.eval_weighted_aoi - prev_aoi) /
                               std::max({std::abs(stats.eval_weighted_aoi), std::abs(prev_aoi), 1e-300});
            if (rel < ao.tolerance) {
                trace.converged = true;
                break;
            }
        }
        prev_aoi = stats.eval_weighted_aoi;
    }
    trace.final_policy = agent.to_checkpoint();
    return trace;
}

}  // namespace aoimec
