#include "aoimec/config_io.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "aoimec/errors.hpp"

namespace aoimec {
namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("value for " + key + " is not a number: '" + v + "'");
    return x;
}

long long to_int(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("value for " + key + " is not an integer: '" + v + "'");
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw ConfigError("value for " + key + " is not a boolean: '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

KvMap parse_kv_text(const std::string& text) {
    KvMap kv;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + " has no '=': " + t);
        const std::string key = trim(t.substr(0, eq));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + " has no key");
        kv[key] = trim(t.substr(eq + 1));
    }
    return kv;
}

KvMap parse_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_kv_text(buf.str());
}

void merge_overrides(KvMap& base, const std::vector<std::string>& items) {
    for (const std::string& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("override must look like key=value, got '" + item + "'");
        base[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
    }
}

void apply_settings(ExperimentSpec& spec, const KvMap& kv) {
    std::vector<std::string> unknown;
    for (const auto& [key, v] : kv) {
        SystemConfig& sys = spec.system;
        AgentHyper& hy = spec.hyper;
        if (key == "system.num_devices") sys.num_devices = static_cast<int>(to_int(key, v));
        else if (key == "system.num_bs") sys.num_bs = static_cast<int>(to_int(key, v));
        else if (key == "system.per_bs_cap") sys.per_bs_cap = static_cast<int>(to_int(key, v));
        else if (key == "system.slot_len") sys.slot_len = to_double(key, v);
        else if (key == "system.horizon") sys.horizon = static_cast<int>(to_int(key, v));
        else if (key == "system.bandwidth_cap_hz") sys.bandwidth_cap_hz = to_double(key, v);
        else if (key == "system.compute_cap_lo") sys.compute_cap_range.lo = to_double(key, v);
        else if (key == "system.compute_cap_hi") sys.compute_cap_range.hi = to_double(key, v);
        else if (key == "system.energy_cap_lo") sys.energy_cap_range.lo = to_double(key, v);
        else if (key == "system.energy_cap_hi") sys.energy_cap_range.hi = to_double(key, v);
        else if (key == "system.tx_power_w") sys.tx_power_w = to_double(key, v);
        else if (key == "system.tx_power_dbm") sys.tx_power_w = dbm_to_watt(to_double(key, v));
        else if (key == "system.noise_psd_dbm_hz") sys.noise_psd_dbm_hz = to_double(key, v);
        else if (key == "system.alpha") sys.alpha = to_double(key, v);
        else if (key == "system.task_size_lo") sys.task_size_range.lo = to_double(key, v);
        else if (key == "system.task_size_hi") sys.task_size_range.hi = to_double(key, v);
        else if (key == "system.cycles_per_bit") sys.cycles_per_bit = to_double(key, v);
        else if (key == "system.arrival_rate") sys.arrival_rate = to_double(key, v);
        else if (key == "system.offload_success_prob") sys.offload_success_prob = to_double(key, v);
        else if (key == "system.aoi_cap_slots") sys.aoi_cap_slots = to_double(key, v);
        else if (key == "system.relax_energy") sys.relax_energy = to_double(key, v);
        else if (key == "system.relax_delay") sys.relax_delay = to_double(key, v);
        else if (key == "system.area_side_m") sys.area_side_m = to_double(key, v);
        else if (key == "system.rng_seed") sys.rng_seed = static_cast<std::uint64_t>(to_int(key, v));
        else if (key == "agent.kind") spec.agent = parse_agent_kind(v);
        else if (key == "agent.gamma") hy.gamma = to_double(key, v);
        else if (key == "agent.target_sync") hy.target_sync = static_cast<int>(to_int(key, v));
        else if (key == "agent.eps_start") hy.eps_start = to_double(key, v);
        else if (key == "agent.eps_min") hy.eps_min = to_double(key, v);
        else if (key == "agent.eps_decay") hy.eps_decay = to_double(key, v);
        else if (key == "agent.batch_size") hy.batch_size = static_cast<int>(to_int(key, v));
        else if (key == "agent.buffer_capacity") hy.buffer_capacity = static_cast<std::size_t>(to_int(key, v));
        else if (key == "agent.td_mode") hy.td_mode = parse_td_mode(v);
        else if (key == "agent.lr") hy.adam.lr = to_double(key, v);
        else if (key == "agent.lr_decay") hy.adam.lr_decay = to_double(key, v);
        else if (key == "agent.lr_decay_every") hy.adam.decay_every = to_int(key, v);
        else if (key == "net.trunk") {
            spec.arch.trunk.clear();
            for (const std::string& item : split_list(v))
                spec.arch.trunk.push_back(static_cast<int>(to_int(key, item)));
        } else if (key == "net.head_hidden") spec.arch.head_hidden = static_cast<int>(to_int(key, v));
        else if (key == "run.scenario") spec.scenario = v;
        else if (key == "run.episodes") spec.episodes = static_cast<int>(to_int(key, v));
        else if (key == "run.eval_episodes") spec.eval_episodes = static_cast<int>(to_int(key, v));
        else if (key == "run.allocator") {
            if (v == "waterfill") spec.allocator = Environment::AllocatorMode::Waterfill;
            else if (v == "equal-split") spec.allocator = Environment::AllocatorMode::EqualSplit;
            else throw ConfigError("run.allocator must be waterfill or equal-split, got '" + v + "'");
        } else if (key == "run.slot_trace") spec.slot_trace = to_bool(key, v);
        else if (key == "run.smooth_window") spec.smooth_window = static_cast<int>(to_int(key, v));
        else if (key == "run.out_dir") spec.out_dir = v;
        else if (key == "run.seeds") {
            spec.seeds.clear();
            for (const std::string& item : split_list(v))
                spec.seeds.push_back(static_cast<std::uint64_t>(to_int(key, item)));
        } else if (key == "sweep.variable") spec.sweep_variable = v;
        else if (key == "sweep.values") {
            spec.sweep_values.clear();
            for (const std::string& item : split_list(v))
                spec.sweep_values.push_back(to_double(key, item));
        } else if (key == "compare.agents") {
            spec.compare_agents.clear();
            for (const std::string& item : split_list(v))
                spec.compare_agents.push_back(parse_agent_kind(item));
        } else {
            unknown.push_back(key);
        }
    }
    if (!unknown.empty()) {
        std::string msg = "unknown config keys:";
        for (const std::string& k : unknown) msg += " " + k;
        throw ConfigError(msg);
    }
}

}  // namespace aoimec
