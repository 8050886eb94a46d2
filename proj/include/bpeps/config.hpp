#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "bpeps/evolve.hpp"
#include "bpeps/exact.hpp"

namespace bpeps {

struct ExperimentConfig {
  RunConfig run;
  std::string out_dir = "out";
  std::vector<std::string> formats{"csv", "json"};
  bool oracle = true;
  Index oracle_cap = kDefaultOracleCap;
  bool deterministic = false;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Parse failure anchored to a line of the config text (line 0 when not attributable to a line).
struct ConfigError : std::runtime_error {
  ConfigError(int line, const std::string& msg);
  int line;
};

// Sections [model], [run], [output] with `key = value` lines; '#' and ';' start comments.
// Unknown sections or keys, duplicates and malformed values are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& c);

}  // namespace bpeps
