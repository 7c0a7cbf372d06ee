#pragma once

#include <map>
#include <string>
#include <vector>

#include "aoimec/experiment.hpp"

namespace aoimec {

using KvMap = std::map<std::string, std::string>;

// Flat "key = value" lines with '#' comments and blank lines.
KvMap parse_kv_file(const std::string& path);
KvMap parse_kv_text(const std::string& text);

// "key=value" items from the command line; later items win.
void merge_overrides(KvMap& base, const std::vector<std::string>& items);

// Applies every setting onto the spec. Unknown keys are collected and
// reported together in one ConfigError.
void apply_settings(ExperimentSpec& spec, const KvMap& kv);

}  // namespace aoimec
