#pragma once

#include <stdexcept>
#include <string>

namespace aoimec {

// Bad configuration file, unknown key, invalid parameter. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite metrics or gradients during training. CLI exit code 3.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace aoimec
