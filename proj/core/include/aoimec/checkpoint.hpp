#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aoimec/net.hpp"

namespace aoimec {

// Everything needed to resume training where it stopped. Round trips are
// bit-exact: doubles are stored raw.
struct Checkpoint {
    NetSpec spec;
    std::vector<double> online;
    std::vector<double> target;
    AdamState adam;
    std::uint64_t train_steps = 0;
    std::uint64_t episodes_done = 0;
    double epsilon = 1.0;
};

void save_checkpoint(const std::string& path, const Checkpoint& c);

// Throws ConfigError on a missing file, bad magic or unsupported version.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace aoimec
