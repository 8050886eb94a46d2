#include <CLI11.hpp>
#include <iostream>

#include "bpeps/cli.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool deterministic = false;
  long long oracle_cap = 0;
};

void add_common(CLI::App* cmd, Flags& f, bool needs_config) {
  auto* c = cmd->add_option("--config", f.config, "experiment config file")->envname("BPEPS_CONFIG");
  if (needs_config) c->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory (overrides [output] dir)")->envname("BPEPS_OUT");
  cmd->add_option("--seed", f.seed, "random seed (overrides [run] seed)")->envname("BPEPS_SEED");
  cmd->add_flag("--deterministic", f.deterministic, "single-threaded BLAS, reproducible runs")
      ->envname("BPEPS_DETERMINISTIC");
  cmd->add_option("--oracle-cap", f.oracle_cap, "largest Hilbert-space dimension for exact references")
      ->envname("BPEPS_ORACLE_CAP")
      ->check(CLI::PositiveNumber);
}

bpeps::cli::Overrides overrides(const CLI::App* cmd, const Flags& f) {
  bpeps::cli::Overrides o;
  if (cmd->count("--out")) o.out_dir = f.out;
  if (cmd->count("--seed")) o.seed = f.seed;
  if (cmd->count("--deterministic")) o.deterministic = f.deterministic;
  if (cmd->count("--oracle-cap")) o.oracle_cap = static_cast<bpeps::Index>(f.oracle_cap);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"block-isoPEPS subspace iteration"};
  app.set_version_flag("--version", std::string(BPEPS_VERSION));
  app.require_subcommand(1);

  Flags run_f, verify_f, bench_f, resume_f;
  std::string checkpoint;
  int extra = 0;

  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  add_common(run, run_f, true);
  auto* verify = app.add_subcommand("verify", "oracle-equivalence checks on the configured instance");
  add_common(verify, verify_f, true);
  auto* bench = app.add_subcommand("bench", "time one iteration against the cost model");
  add_common(bench, bench_f, true);
  auto* resume = app.add_subcommand("resume", "continue a run from a checkpoint");
  add_common(resume, resume_f, false);
  resume->add_option("checkpoint", checkpoint, "checkpoint file")->required();
  resume->add_option("--iterations", extra, "additional iterations")->required()->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return bpeps::cli::kConfigError;
  }

  if (*run) return bpeps::cli::run(run_f.config, overrides(run, run_f), std::cout, std::cerr);
  if (*verify) return bpeps::cli::verify(verify_f.config, overrides(verify, verify_f), std::cout, std::cerr);
  if (*bench) return bpeps::cli::bench(bench_f.config, overrides(bench, bench_f), std::cout, std::cerr);
  return bpeps::cli::resume(checkpoint, extra, overrides(resume, resume_f), std::cout, std::cerr);
}
