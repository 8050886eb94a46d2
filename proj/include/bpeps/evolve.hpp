#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bpeps/errors.hpp"
#include "bpeps/isopeps.hpp"
#include "bpeps/models.hpp"

namespace bpeps {

struct RunConfig {
  std::string kind = "tfi";
  int lx = 2, ly = 2;
  double g = 3.5;
  Index p = 2;
  Index chi = 4, eta = 8;
  double tau = 0.1;
  int iterations = 50;
  std::uint64_t seed = 1;
  double zipup_tol = 1e-6;
  double svd_tol = 1e-12;
  int disentangler_iters = 30;
  bool disentangle = true;
  bool reduced_update = true;
  int zipup_oversample = 1;
  int measure_scale = 1;
  int energy_period = 1;
  int checkpoint_period = 10;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

ModelSpec build_model(const RunConfig& c);
void validate(const RunConfig& c);

struct SweepOptions {
  bool reduced = true;
  double svd_tol = 1e-12;
  // Energy measurement runs with both caps multiplied by this factor.
  int measure_scale = 1;
  MosesOptions moses;
};

SweepOptions sweep_options(const RunConfig& c);

// Two-site gates keyed by the original site labels of their endpoints.
class GateTable {
 public:
  GateTable(const ModelSpec& model, double tau);
  GateTable(const ModelSpec& model, const std::vector<Matrix>& per_bond);
  // Gate matrix ordered (top/left factor, bottom/right factor) for the given labels.
  Matrix oriented(int label_first, int label_second) const;
  std::size_t bond_index(int label_first, int label_second) const;
  int d() const { return d_; }

 private:
  int d_ = 2, n_ = 0;
  std::vector<std::pair<int, int>> ends_;
  std::vector<Matrix> gates_;
};

struct GateReport {
  double discarded_weight = 0.0;
  Index kept_rank = 0;
};

// Gate on sites (i, j) and (i + 1, j) of the center column, center at (i, j). Afterwards the center is at (i + 1, j).
BlockIsoPeps apply_bond_gate(BlockIsoPeps s, int i, const Matrix& gate, bool reduced = true, double svd_tol = 1e-12,
                             GateReport* report = nullptr);

// Requires the standard layout; returns it in the frame rotated once counter-clockwise.
BlockIsoPeps tebd2_half_sweep(BlockIsoPeps s, const GateTable& gates, const SweepOptions& opt = {});

// Two half sweeps with a rotation after each: the frame advances by two quarter turns.
BlockIsoPeps apply_trotter_step(BlockIsoPeps s, const GateTable& gates, const SweepOptions& opt = {});

// Bond indices in the order one Trotter step applies them, starting from the given rotation.
std::vector<std::size_t> trotter_gate_order(const ModelSpec& model, int rotation);

// Center at (0, 0) with every arrow pointing left and up.
bool is_standard_layout(const BlockIsoPeps& s);

std::vector<double> rayleigh_quotients(const BlockIsoPeps& s, const ModelSpec& model, const SweepOptions& opt = {});

struct TraceRow {
  int iter = 0;
  std::vector<double> energies;
  std::vector<double> norms;        // before orthonormalization
  double gram_condition = 1.0;      // of the pre-orthonormalization Gram matrix
  double discard_increment = 0.0;
  double cum_discard = 0.0;
  double wall_ms = 0.0;
  std::vector<Index> replaced;
};

struct EnergyTrace {
  std::vector<TraceRow> rows;
};

struct RunHooks {
  std::function<void(const TraceRow&, const BlockIsoPeps&)> on_iteration;
  bool audit_every_iteration = true;
  double audit_tol = 1e-8;
};

// Audit failure during a run; carries the offending state for a diagnostic snapshot.
struct AuditFailure : InvariantError {
  AuditFailure(const std::string& what, BlockIsoPeps s, int iteration)
      : InvariantError(what), state(std::move(s)), iter(iteration) {}
  BlockIsoPeps state;
  int iter;
};

struct RunResult {
  BlockIsoPeps state;
  EnergyTrace trace;
};

BlockIsoPeps initial_state(const RunConfig& c);

// Continues from `state` after `done` iterations up to c.iterations. Throws InvariantError on a failed audit.
RunResult subspace_iteration(const RunConfig& c, BlockIsoPeps state, int done, const RunHooks& hooks = {});
RunResult subspace_iteration(const RunConfig& c, const RunHooks& hooks = {});

}  // namespace bpeps
