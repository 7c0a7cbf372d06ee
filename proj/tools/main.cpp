#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aoimec/checks.hpp"
#include "aoimec/config_io.hpp"
#include "aoimec/csv.hpp"
#include "aoimec/errors.hpp"
#include "aoimec/experiment.hpp"

namespace {

using namespace aoimec;

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::string item;
    std::stringstream ss(text);
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        char* end = nullptr;
        const unsigned long long v = std::strtoull(item.c_str(), &end, 10);
        if (end == item.c_str() || *end != '\0')
            throw ConfigError("bad seed '" + item + "' in --seed-list");
        seeds.push_back(v);
    }
    if (seeds.empty()) throw ConfigError("--seed-list must name at least one seed");
    return seeds;
}

std::string default_out_root() {
    const char* env = std::getenv("AOIMEC_OUT_ROOT");
    return env && *env ? env : ".";
}

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::string agent_name;
    std::string seed_list;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, CommonFlags& f) {
    sub->add_option("--config", f.config_path, "settings file of 'key = value' lines");
    sub->add_option("--out", f.out_dir, "output directory (default: $AOIMEC_OUT_ROOT or .)");
    sub->add_option("--agent", f.agent_name, "bd3qn | dqn | ddqn | d3qn | greedy | random");
    sub->add_option("--seed-list", f.seed_list, "comma-separated run seeds");
    sub->add_option("--override", f.overrides, "extra key=value setting, repeatable");
}

ExperimentSpec build_spec(const CommonFlags& f) {
    ExperimentSpec spec;
    spec.out_dir = default_out_root();
    KvMap kv = f.config_path.empty() ? KvMap{} : parse_kv_file(f.config_path);
    merge_overrides(kv, f.overrides);
    apply_settings(spec, kv);
    // explicit flags win over file settings
    if (!f.agent_name.empty()) spec.agent = parse_agent_kind(f.agent_name);
    if (!f.seed_list.empty()) spec.seeds = parse_seed_list(f.seed_list);
    if (!f.out_dir.empty()) spec.out_dir = f.out_dir;
    return spec;
}

int cmd_train(const CommonFlags& f) {
    const ExperimentSpec spec = build_spec(f);
    const std::vector<TrainRun> runs = run_train(spec);
    for (const TrainRun& r : runs) {
        std::printf("seed %llu: %zu episodes, eval weighted AoI %s (ci %s), files: %s%s%s\n",
                    static_cast<unsigned long long>(r.seed), r.episodes.size(),
                    format_double(r.final_eval.weighted_aoi).c_str(),
                    format_double(r.final_eval.weighted_aoi_ci).c_str(), r.csv_path.c_str(),
                    r.checkpoint_path.empty() ? "" : ", ",
                    r.checkpoint_path.c_str());
        if (r.executed_violations != 0)
            std::printf("  WARNING: %lld executed constraint violations\n", r.executed_violations);
    }
    return 0;
}

int cmd_sweep(const CommonFlags& f) {
    const ExperimentSpec spec = build_spec(f);
    const SweepResult res = run_sweep(spec);
    std::printf("%zu sweep points -> %s and %s\n", res.points.size(), res.rows_path.c_str(),
                res.summary_path.c_str());
    return 0;
}

int cmd_compare(const CommonFlags& f) {
    const ExperimentSpec spec = build_spec(f);
    const CompareResult res = run_compare(spec);
    for (const CompareEntry& e : res.entries)
        std::printf("%-8s mean weighted AoI %s\n", to_string(e.agent),
                    format_double(e.mean_weighted_aoi).c_str());
    std::printf("table: %s\n", res.table_path.c_str());
    return 0;
}

int cmd_eval(const CommonFlags& f, const std::string& checkpoint) {
    const ExperimentSpec spec = build_spec(f);
    const EvalMetrics m = run_eval(spec, checkpoint);
    std::printf("weighted AoI %s (ci %s) over %d episodes, mean reward %s\n",
                format_double(m.weighted_aoi).c_str(), format_double(m.weighted_aoi_ci).c_str(),
                m.episodes, format_double(m.mean_reward).c_str());
    return 0;
}

int cmd_check(std::uint64_t seed) {
    const std::vector<CheckResult> results = run_invariant_checks(seed);
    int failures = 0;
    for (const CheckResult& r : results) {
        std::printf("[%s] %s%s%s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                    r.detail.empty() ? "" : ": ", r.detail.c_str());
        if (!r.pass) ++failures;
    }
    std::printf("%zu checks, %d failures\n", results.size(), failures);
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AoI-aware task offloading laboratory for multi-BS MEC networks"};
    app.require_subcommand(1);

    CommonFlags train_f, sweep_f, compare_f, eval_f;
    std::string checkpoint;
    std::uint64_t check_seed = 1;

    CLI::App* train = app.add_subcommand("train", "train an agent (or roll out a baseline) per seed");
    add_common(train, train_f);
    CLI::App* sweep = app.add_subcommand("sweep", "train + evaluate across a swept variable");
    add_common(sweep, sweep_f);
    CLI::App* compare = app.add_subcommand("compare", "evaluate several agents on paired seeds");
    add_common(compare, compare_f);
    CLI::App* eval = app.add_subcommand("eval", "evaluate a frozen checkpoint or baseline");
    add_common(eval, eval_f);
    eval->add_option("--checkpoint", checkpoint, "checkpoint produced by train");
    CLI::App* check = app.add_subcommand("check", "run the invariant suites");
    check->add_option("--seed", check_seed, "seed for the randomized checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train(train_f);
        if (sweep->parsed()) return cmd_sweep(sweep_f);
        if (compare->parsed()) return cmd_compare(compare_f);
        if (eval->parsed()) return cmd_eval(eval_f, checkpoint);
        if (check->parsed()) return cmd_check(check_seed);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
