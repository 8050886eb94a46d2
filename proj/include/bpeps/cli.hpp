#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "bpeps/config.hpp"

namespace bpeps::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kInvariantFailure = 3,
  kCapExceeded = 4,
  kSnapshotError = 5,
};

// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<bool> deterministic;
  std::optional<Index> oracle_cap;
};

void apply(const Overrides& o, ExperimentConfig& c);

// Writes trace.csv, summary.json and checkpoint_NNNNNN.bpck files into the output directory.
int run(const std::string& config_path, const Overrides& o, std::ostream& out, std::ostream& err);

// Oracle-equivalence checks on the configured instance; prints a pass/fail table.
int verify(const std::string& config_path, const Overrides& o, std::ostream& out, std::ostream& err);

// Continues a run from a checkpoint for `extra` more iterations.
int resume(const std::string& checkpoint_path, int extra, const Overrides& o, std::ostream& out, std::ostream& err);

// Times one iteration on lattices up to the configured size against the cost model.
int bench(const std::string& config_path, const Overrides& o, std::ostream& out, std::ostream& err);

// L_x^2 (chi^4 eta^3 d p + chi^3 eta^4 d^2 p + chi^2 eta^5 p^2)
double cost_model(int lx, double chi, double eta, double d, double p);

std::string checkpoint_name(int iteration);

}  // namespace bpeps::cli
