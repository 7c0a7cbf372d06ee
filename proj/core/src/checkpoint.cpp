#include "aoimec/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "aoimec/errors.hpp"

namespace aoimec {
namespace {

constexpr std::uint64_t kMagic = 0x43454D494F41ULL;  // "AOIMEC" little-endian
constexpr std::uint32_t kVersion = 1;

void put_u64(std::ostream& os, std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }
void put_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void put_i32(std::ostream& os, std::int32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void put_f64(std::ostream& os, double v) { os.write(reinterpret_cast<const char*>(&v), 8); }
void put_vec(std::ostream& os, const std::vector<double>& v) {
    put_u64(os, v.size());
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * 8));
}

std::uint64_t get_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
}
std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
std::int32_t get_i32(std::istream& is) {
    std::int32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
double get_f64(std::istream& is) {
    double v = 0;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
}
std::vector<double> get_vec(std::istream& is) {
    std::vector<double> v(get_u64(is));
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * 8));
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& c) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("checkpoint: cannot open for write: " + path);

    put_u64(os, kMagic);
    put_u32(os, kVersion);

    put_i32(os, static_cast<std::int32_t>(c.spec.kind));
    put_i32(os, c.spec.input_dim);
    put_u64(os, c.spec.trunk.size());
    for (int w : c.spec.trunk) put_i32(os, w);
    put_i32(os, c.spec.head_hidden);
    put_i32(os, c.spec.num_branches);
    put_i32(os, c.spec.actions_per_branch);

    put_vec(os, c.online);
    put_vec(os, c.target);

    put_f64(os, c.adam.lr);
    put_f64(os, c.adam.beta1);
    put_f64(os, c.adam.beta2);
    put_f64(os, c.adam.eps);
    put_f64(os, c.adam.lr_decay);
    put_u64(os, static_cast<std::uint64_t>(c.adam.decay_every));
    put_u64(os, static_cast<std::uint64_t>(c.adam.step));
    put_vec(os, c.adam.m);
    put_vec(os, c.adam.v);

    put_u64(os, c.train_steps);
    put_u64(os, c.episodes_done);
    put_f64(os, c.epsilon);
    if (!os) throw ConfigError("checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("checkpoint: cannot open: " + path);
    if (get_u64(is) != kMagic) throw ConfigError("checkpoint: bad magic in " + path);
    const std::uint32_t version = get_u32(is);
    if (version != kVersion)
        throw ConfigError("checkpoint: unsupported version " + std::to_string(version));

    Checkpoint c;
    c.spec.kind = static_cast<NetSpec::Kind>(get_i32(is));
    c.spec.input_dim = get_i32(is);
    c.spec.trunk.resize(get_u64(is));
    for (int& w : c.spec.trunk) w = get_i32(is);
    c.spec.head_hidden = get_i32(is);
    c.spec.num_branches = get_i32(is);
    c.spec.actions_per_branch = get_i32(is);

    c.online = get_vec(is);
    c.target = get_vec(is);

    c.adam.lr = get_f64(is);
    c.adam.beta1 = get_f64(is);
    c.adam.beta2 = get_f64(is);
    c.adam.eps = get_f64(is);
    c.adam.lr_decay = get_f64(is);
    c.adam.decay_every = static_cast<long long>(get_u64(is));
    c.adam.step = static_cast<long long>(get_u64(is));
    c.adam.m = get_vec(is);
    c.adam.v = get_vec(is);

    c.train_steps = get_u64(is);
    c.episodes_done = get_u64(is);
    c.epsilon = get_f64(is);
    if (!is) throw ConfigError("checkpoint: truncated file: " + path);
    return c;
}

}  // namespace aoimec
