#include "aoimec/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>

#include "aoimec/csv.hpp"
#include "aoimec/errors.hpp"

namespace aoimec {
namespace {

constexpr std::uint64_t kAgentStream = 0xA6E17ULL;
constexpr std::uint64_t kEvalStream = 0xEAA1ULL;
constexpr std::uint64_t kRolloutStream = 0x9A11DULL;
constexpr std::uint64_t kTraceStream = 0x7ACEULL;

std::string join_path(const std::string& dir, const std::string& file) {
    return (std::filesystem::path(dir) / file).string();
}

std::string run_tag(const ExperimentSpec& spec, std::uint64_t seed) {
    return spec.scenario + "_" + to_string(spec.agent) + "_seed" + std::to_string(seed);
}

void write_metadata(CsvWriter& w, const ExperimentSpec& spec, std::uint64_t seed) {
    w.comment("scenario=" + spec.scenario + " agent=" + std::string(to_string(spec.agent)) +
              " seed=" + std::to_string(seed));
    w.comment("devices=" + std::to_string(spec.system.num_devices) +
              " bs=" + std::to_string(spec.system.num_bs) +
              " per_bs_cap=" + std::to_string(spec.system.per_bs_cap) +
              " horizon=" + std::to_string(spec.system.horizon) +
              " arrival_rate=" + format_double(spec.system.arrival_rate));
    w.comment("episodes=" + std::to_string(spec.episodes) +
              " smooth_window=" + std::to_string(spec.smooth_window) + " allocator=" +
              (spec.allocator == Environment::AllocatorMode::Waterfill ? "waterfill"
                                                                       : "equal-split"));
}

PolicyFn baseline_policy(AgentKind kind) {
    return kind == AgentKind::Greedy ? policy_greedy() : policy_random();
}

// Per-episode rollout metrics for the parameter-free baselines.
EpisodeResult rollout_episode(Environment& env, const PolicyFn& pol, Rng& rng,
                              std::uint64_t episode_seed) {
    env.reset(episode_seed);
    EpisodeResult r;
    const SystemConfig& cfg = env.config();
    double aoi_sum = 0.0;
    for (int t = 0; t < cfg.horizon; ++t) {
        const StepOutcome out = env.step(pol(env, rng));
        r.total_reward += out.reward;
        for (int i = 0; i < cfg.num_devices; ++i) {
            aoi_sum += out.next.aoi[i];
            if (out.outcomes[i] == SlotOutcome::Completed) ++r.completed;
        }
    }
    r.mean_aoi = aoi_sum / (static_cast<double>(cfg.horizon) * cfg.num_devices);
    return r;
}

void write_episode_csv(const std::string& path, const ExperimentSpec& spec, std::uint64_t seed,
                       const std::vector<EpisodeResult>& eps) {
    CsvWriter w(path);
    write_metadata(w, spec, seed);
    w.row({"episode", "total_reward", "mean_loss", "mean_aoi", "epsilon", "reward_smooth"});
    std::vector<double> rewards(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) rewards[i] = eps[i].total_reward;
    const std::vector<double> smooth = trailing_mean(rewards, spec.smooth_window);
    for (std::size_t i = 0; i < eps.size(); ++i) {
        w.row({std::to_string(i), format_double(eps[i].total_reward),
               format_double(eps[i].mean_loss), format_double(eps[i].mean_aoi),
               format_double(eps[i].epsilon), format_double(smooth[i])});
    }
}

void write_slot_trace(const std::string& path, const ExperimentSpec& spec, std::uint64_t seed,
                      Environment& env, const PolicyFn& pol) {
    CsvWriter w(path);
    write_metadata(w, spec, seed);
    w.row({"slot", "device", "action", "outcome", "aoi", "reward"});
    env.reset(fold_seed(seed, kTraceStream));
    Rng rng(fold_seed(seed, kTraceStream + 1));
    for (int t = 0; t < spec.system.horizon; ++t) {
        const JointAction act = pol(env, rng);
        const StepOutcome out = env.step(act);
        for (int i = 0; i < spec.system.num_devices; ++i) {
            w.row({std::to_string(t), std::to_string(i), std::to_string(act[i]),
                   to_string(out.outcomes[i]), format_double(out.next.aoi[i]),
                   format_double(out.reward)});
        }
    }
}

// Train (when the agent learns) and evaluate one (spec, seed) cell.
EvalMetrics train_then_eval(const ExperimentSpec& spec, std::uint64_t seed,
                            long long* executed_violations = nullptr) {
    Environment env(spec.system, seed, spec.allocator);
    EvalMetrics m;
    if (is_learning(spec.agent)) {
        QAgent agent(spec.agent, spec.system, spec.hyper, spec.arch, fold_seed(seed, kAgentStream));
        for (int ep = 0; ep < spec.episodes; ++ep)
            agent.train_episode(env, fold_seed(seed, static_cast<std::uint64_t>(ep)));
        m = evaluate_policy(env, policy_of(agent), spec.eval_episodes, fold_seed(seed, kEvalStream));
    } else {
        m = evaluate_policy(env, baseline_policy(spec.agent), spec.eval_episodes,
                            fold_seed(seed, kEvalStream));
    }
    if (executed_violations) *executed_violations += env.executed_violations();
    return m;
}

}  // namespace

void ExperimentSpec::validate() const {
    system.validate();
    hyper.validate();
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (episodes < 1) throw ConfigError("run.episodes must be >= 1");
    if (eval_episodes < 1) throw ConfigError("run.eval_episodes must be >= 1");
    if (smooth_window < 1) throw ConfigError("run.smooth_window must be >= 1");
    if (out_dir.empty()) throw ConfigError("output directory must not be empty");
    if (is_learning(agent) && agent != AgentKind::BD3QN)
        flat_action_count(system.num_devices, system.num_bs);  // reject blow-ups early
}

ExperimentSpec with_sweep_value(const ExperimentSpec& spec, double value) {
    ExperimentSpec out = spec;
    const std::string& var = spec.sweep_variable;
    if (var == "lambda") out.system.arrival_rate = value;
    else if (var == "N") out.system.num_devices = static_cast<int>(std::llround(value));
    else if (var == "M") out.system.num_bs = static_cast<int>(std::llround(value));
    else if (var == "bandwidth") out.system.bandwidth_cap_hz = value;
    else if (var == "compute") out.system.compute_cap_range = Range{value, value};
    else if (var == "batch_size") out.hyper.batch_size = static_cast<int>(std::llround(value));
    else if (var == "learning_rate") out.hyper.adam.lr = value;
    else
        throw ConfigError("unknown sweep variable '" + var +
                          "' (expected lambda, N, M, bandwidth, compute, batch_size or "
                          "learning_rate)");
    return out;
}

std::vector<TrainRun> run_train(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<TrainRun> runs;
    for (const std::uint64_t seed : spec.seeds) {
        TrainRun run;
        run.seed = seed;
        Environment env(spec.system, seed, spec.allocator);
        PolicyFn frozen;

        if (is_learning(spec.agent)) {
            QAgent agent(spec.agent, spec.system, spec.hyper, spec.arch,
                         fold_seed(seed, kAgentStream));
            for (int ep = 0; ep < spec.episodes; ++ep)
                run.episodes.push_back(
                    agent.train_episode(env, fold_seed(seed, static_cast<std::uint64_t>(ep))));
            run.checkpoint_path = join_path(spec.out_dir, run_tag(spec, seed) + ".ckpt");
            std::filesystem::create_directories(spec.out_dir);
            save_checkpoint(run.checkpoint_path, agent.to_checkpoint());
            run.final_eval = evaluate_policy(env, policy_of(agent), spec.eval_episodes,
                                             fold_seed(seed, kEvalStream));
            if (spec.slot_trace)
                write_slot_trace(join_path(spec.out_dir, run_tag(spec, seed) + "_trace.csv"), spec,
                                 seed, env, policy_of(agent));
        } else {
            const PolicyFn pol = baseline_policy(spec.agent);
            Rng rng(fold_seed(seed, kRolloutStream));
            for (int ep = 0; ep < spec.episodes; ++ep)
                run.episodes.push_back(
                    rollout_episode(env, pol, rng, fold_seed(seed, static_cast<std::uint64_t>(ep))));
            run.final_eval =
                evaluate_policy(env, pol, spec.eval_episodes, fold_seed(seed, kEvalStream));
            if (spec.slot_trace)
                write_slot_trace(join_path(spec.out_dir, run_tag(spec, seed) + "_trace.csv"), spec,
                                 seed, env, pol);
        }

        run.csv_path = join_path(spec.out_dir, run_tag(spec, seed) + "_train.csv");
        write_episode_csv(run.csv_path, spec, seed, run.episodes);
        run.executed_violations = env.executed_violations();
        run.attempted_violations = env.attempted_violations();
        runs.push_back(std::move(run));
    }
    return runs;
}

SweepResult run_sweep(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.sweep_variable.empty() || spec.sweep_values.empty())
        throw ConfigError("sweep needs sweep.variable and sweep.values");

    SweepResult res;
    res.rows_path = join_path(spec.out_dir, spec.scenario + "_sweep_rows.csv");
    res.summary_path = join_path(spec.out_dir, spec.scenario + "_sweep_summary.csv");

    CsvWriter rows(res.rows_path);
    rows.comment("long-format sweep results; one metric per row");
    rows.row({"scenario", "agent", "variable", "value", "seed", "metric", "metric_value"});

    for (const double value : spec.sweep_values) {
        const ExperimentSpec pt = with_sweep_value(spec, value);
        pt.validate();
        for (const std::uint64_t seed : spec.seeds) {
            const EvalMetrics m = train_then_eval(pt, seed);
            SweepPoint p;
            p.value = value;
            p.seed = seed;
            p.eval = m;
            res.points.push_back(p);
            const auto emit = [&](const std::string& name, double v) {
                rows.row({spec.scenario, to_string(spec.agent), spec.sweep_variable,
                          format_double(value), std::to_string(seed), name, format_double(v)});
            };
            emit("eval_weighted_aoi", m.weighted_aoi);
            emit("eval_mean_aoi", m.mean_aoi);
            emit("eval_mean_reward", m.mean_reward);
            emit("eval_completed", static_cast<double>(m.completed));
        }
    }

    CsvWriter summary(res.summary_path);
    summary.comment("mean and sample std over seeds");
    summary.row({"variable", "value", "agent", "metric", "mean", "std", "n"});
    for (const double value : spec.sweep_values) {
        std::vector<double> aoi, waoi;
        for (const SweepPoint& p : res.points) {
            if (p.value != value) continue;
            aoi.push_back(p.eval.mean_aoi);
            waoi.push_back(p.eval.weighted_aoi);
        }
        const auto stat = [&](const std::vector<double>& xs, const std::string& name) {
            double mean = 0.0;
            for (double x : xs) mean += x;
            mean /= static_cast<double>(xs.size());
            double ss = 0.0;
            for (double x : xs) ss += (x - mean) * (x - mean);
            const double sd = xs.size() > 1 ? std::sqrt(ss / (static_cast<double>(xs.size()) - 1)) : 0.0;
            summary.row({spec.sweep_variable, format_double(value), to_string(spec.agent), name,
                         format_double(mean), format_double(sd), std::to_string(xs.size())});
        };
        stat(waoi, "eval_weighted_aoi");
        stat(aoi, "eval_mean_aoi");
    }
    return res;
}

double sign_test_p(int wins, int n) {
    if (n <= 0) return 1.0;
    if (wins < 0 || wins > n) throw std::invalid_argument("sign_test_p: wins out of range");
    const int k = std::min(wins, n - wins);
    // tail mass of Binomial(n, 1/2) up to k, doubled
    double tail = 0.0;
    double coeff = std::pow(0.5, n);  // C(n,0)/2^n
    for (int i = 0; i <= k; ++i) {
        tail += coeff;
        coeff = coeff * (n - i) / (i + 1);
    }
    return std::min(1.0, 2.0 * tail);
}

CompareResult run_compare(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.compare_agents.size() < 2)
        throw ConfigError("compare needs at least two agents in compare.agents");

    CompareResult res;
    res.table_path = join_path(spec.out_dir, spec.scenario + "_compare.csv");
    CsvWriter w(res.table_path);
    w.comment("same seeds and physics for every agent; diffs are vs the first agent");
    w.row({"agent", "seed", "eval_weighted_aoi", "eval_mean_aoi", "eval_mean_reward"});

    for (const AgentKind kind : spec.compare_agents) {
        ExperimentSpec one = spec;
        one.agent = kind;
        one.validate();
        CompareEntry entry;
        entry.agent = kind;
        for (const std::uint64_t seed : spec.seeds) {
            const EvalMetrics m = train_then_eval(one, seed);
            entry.per_seed_weighted_aoi.push_back(m.weighted_aoi);
            w.row({to_string(kind), std::to_string(seed), format_double(m.weighted_aoi),
                   format_double(m.mean_aoi), format_double(m.mean_reward)});
        }
        for (double v : entry.per_seed_weighted_aoi) entry.mean_weighted_aoi += v;
        entry.mean_weighted_aoi /= static_cast<double>(entry.per_seed_weighted_aoi.size());
        res.entries.push_back(std::move(entry));
    }

    w.row({});
    w.row({"agent", "mean_weighted_aoi", "diff_vs_first", "wins_vs_first", "n", "sign_p"});
    const CompareEntry& base = res.entries.front();
    for (const CompareEntry& e : res.entries) {
        int wins = 0, informative = 0;
        for (std::size_t s = 0; s < e.per_seed_weighted_aoi.size(); ++s) {
            const double d = e.per_seed_weighted_aoi[s] - base.per_seed_weighted_aoi[s];
            if (d == 0.0) continue;
            ++informative;
            if (d < 0.0) ++wins;  // lower AoI wins
        }
        w.row({to_string(e.agent), format_double(e.mean_weighted_aoi),
               format_double(e.mean_weighted_aoi - base.mean_weighted_aoi), std::to_string(wins),
               std::to_string(informative), format_double(sign_test_p(wins, informative))});
    }
    return res;
}

EvalMetrics run_eval(const ExperimentSpec& spec, const std::string& checkpoint_path) {
    spec.validate();
    std::optional<QAgent> agent;
    PolicyFn pol;
    if (is_learning(spec.agent)) {
        if (checkpoint_path.empty())
            throw ConfigError("eval of a learning agent needs a checkpoint path");
        const Checkpoint c = load_checkpoint(checkpoint_path);
        agent.emplace(spec.agent, spec.system, spec.hyper, spec.arch, 0);
        agent->restore(c);
        pol = policy_of(*agent);
    } else {
        pol = baseline_policy(spec.agent);
    }

    CsvWriter w(join_path(spec.out_dir, spec.scenario + "_" + to_string(spec.agent) + "_eval.csv"));
    write_metadata(w, spec, spec.seeds.front());
    w.row({"seed", "episode", "weighted_aoi"});

    EvalMetrics pooled;
    double reward_sum = 0.0, aoi_sum = 0.0, alloc_sum = 0.0;
    for (const std::uint64_t seed : spec.seeds) {
        Environment env(spec.system, seed, spec.allocator);
        const EvalMetrics m =
            evaluate_policy(env, pol, spec.eval_episodes, fold_seed(seed, kEvalStream));
        for (std::size_t ep = 0; ep < m.per_episode_weighted_aoi.size(); ++ep) {
            w.row({std::to_string(seed), std::to_string(ep),
                   format_double(m.per_episode_weighted_aoi[ep])});
            pooled.per_episode_weighted_aoi.push_back(m.per_episode_weighted_aoi[ep]);
        }
        pooled.completed += m.completed;
        reward_sum += m.mean_reward;
        aoi_sum += m.mean_aoi;
        alloc_sum += m.mean_alloc_objective;
        if (spec.slot_trace && seed == spec.seeds.front())
            write_slot_trace(join_path(spec.out_dir, run_tag(spec, seed) + "_trace.csv"), spec,
                             seed, env, pol);
    }

    pooled.episodes = static_cast<int>(pooled.per_episode_weighted_aoi.size());
    double sum = 0.0;
    for (double v : pooled.per_episode_weighted_aoi) sum += v;
    pooled.weighted_aoi = sum / pooled.episodes;
    if (pooled.episodes > 1) {
        double ss = 0.0;
        for (double v : pooled.per_episode_weighted_aoi)
            ss += (v - pooled.weighted_aoi) * (v - pooled.weighted_aoi);
        pooled.weighted_aoi_ci = 1.96 * std::sqrt(ss / (pooled.episodes - 1)) /
                                 std::sqrt(static_cast<double>(pooled.episodes));
    }
    const double ns = static_cast<double>(spec.seeds.size());
    pooled.mean_reward = reward_sum / ns;
    pooled.mean_aoi = aoi_sum / ns;
    pooled.mean_alloc_objective = alloc_sum / ns;
    w.comment("pooled weighted_aoi=" + format_double(pooled.weighted_aoi) +
              " ci95=" + format_double(pooled.weighted_aoi_ci));
    return pooled;
}

}  // namespace aoimec
