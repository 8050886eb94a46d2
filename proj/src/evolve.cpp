#include "bpeps/evolve.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <limits>

#include "bpeps/errors.hpp"

namespace bpeps {

ModelSpec build_model(const RunConfig& c) {
  if (c.kind == "tfi") return tfi_model(c.lx, c.ly, c.g);
  if (c.kind == "heisenberg") return heisenberg_model(c.lx, c.ly);
  throw ArgumentError("unknown model kind '" + c.kind + "'");
}

void validate(const RunConfig& c) {
  if (c.kind != "tfi" && c.kind != "heisenberg") throw ArgumentError("unknown model kind '" + c.kind + "'");
  if (c.lx < 1 || c.ly < 1 || c.lx * c.ly < 2) throw ArgumentError("lattice needs at least two sites");
  if (c.p < 1) throw ArgumentError("p must be at least 1");
  if (c.chi < 1 || c.eta < 1) throw ArgumentError("bond caps must be at least 1");
  if (!(c.tau >= 0.0) || !std::isfinite(c.tau)) throw ArgumentError("tau must be finite and nonnegative");
  if (c.iterations < 0) throw ArgumentError("iterations must be nonnegative");
  if (!(c.zipup_tol >= 0.0) || !(c.svd_tol >= 0.0)) throw ArgumentError("tolerances must be nonnegative");
  if (c.disentangler_iters < 0) throw ArgumentError("disentangler_iters must be nonnegative");
  if (c.zipup_oversample < 1) throw ArgumentError("zipup_oversample must be at least 1");
  if (c.measure_scale < 1) throw ArgumentError("measure_scale must be at least 1");
  if (c.energy_period < 1 || c.checkpoint_period < 0) throw ArgumentError("periods out of range");
  const double dim = std::pow(2.0, c.lx * c.ly);
  if (static_cast<double>(c.p) > dim) throw ArgumentError("p exceeds the Hilbert space dimension");
}

SweepOptions sweep_options(const RunConfig& c) {
  SweepOptions o;
  o.reduced = c.reduced_update;
  o.svd_tol = c.svd_tol;
  o.moses.disentangle = c.disentangle;
  o.moses.disentangler_iters = c.disentangler_iters;
  o.moses.svd_tol = c.svd_tol;
  o.moses.zipup_tol = c.zipup_tol;
  o.moses.oversample = c.zipup_oversample;
  o.measure_scale = c.measure_scale;
  return o;
}

GateTable::GateTable(const ModelSpec& model, const std::vector<Matrix>& per_bond) : d_(model.d), n_(model.lx * model.ly) {
  if (per_bond.size() != model.bonds.size()) throw ArgumentError("GateTable: one matrix per bond expected");
  for (std::size_t k = 0; k < model.bonds.size(); ++k) {
    ends_.emplace_back(model.position(model.bonds[k].a), model.position(model.bonds[k].b));
    gates_.push_back(per_bond[k]);
  }
}

GateTable::GateTable(const ModelSpec& model, double tau) : d_(model.d), n_(model.lx * model.ly) {
  for (const BondGate& bg : make_gates(model, tau)) {
    const Bond& b = model.bonds[bg.bond];
    ends_.emplace_back(model.position(b.a), model.position(b.b));
    gates_.push_back(bg.gate.g_matrix);
  }
}

std::size_t GateTable::bond_index(int first, int second) const {
  for (std::size_t k = 0; k < ends_.size(); ++k) {
    const auto [a, b] = ends_[k];
    if ((a == first && b == second) || (a == second && b == first)) return k;
  }
  throw ArgumentError("no bond between sites " + std::to_string(first) + " and " + std::to_string(second));
}

Matrix GateTable::oriented(int first, int second) const {
  const std::size_t k = bond_index(first, second);
  return ends_[k].first == first ? gates_[k] : swap_factors(gates_[k], d_);
}

BlockIsoPeps apply_bond_gate(BlockIsoPeps s, int i, const Matrix& gate, bool reduced, double svd_tol, GateReport* report) {
  const int j = s.center.j;
  if (s.center.i != i || i + 1 >= s.lx) throw ArgumentError("apply_bond_gate: center must sit on the upper site of the bond");
  const Index d = s.d;
  if (gate.rows() != d * d || gate.cols() != d * d) throw ArgumentError("apply_bond_gate: gate dimension mismatch");
  const Tensor g = Tensor::from_matrix(RowMatrix(gate), {d, d, d, d});  // (out_top, out_bottom, in_top, in_bottom)
  const Tensor& a = s.at(i, j);
  const Tensor& b = s.at(i + 1, j);
  const TruncationSpec spec{s.eta_max, svd_tol};
  Tensor top, bottom;
  TruncationReport rep;
  if (reduced) {
    QrSplit qa = qr_split(a, {ax::up, ax::left, ax::right});   // r: (ka, down, phys, block)
    QrSplit qb = qr_split(b, {ax::left, ax::down, ax::right});  // r: (kb, up, phys)
    Tensor theta = contract(qa.r, qb.r, {{1, 1}});             // (ka, pa, block, kb, pb)
    theta = contract(g, theta, {{2, 1}, {3, 4}});               // (ot, ob, ka, block, kb)
    SvdSplit f = svd_split(theta, {2, 0}, spec);                // u: (ka, ot, k); v: (k, ob, block, kb)
    rep = f.report;
    top = permute(contract(qa.q, f.u, {{3, 0}}), {0, 1, 4, 2, 3});
    bottom = permute(contract(scale_axis(f.v, 0, f.s), qb.q, {{3, 3}}), {0, 3, 4, 5, 1, 2});
  } else {
    Tensor theta = contract(a, b, {{ax::down, ax::up}});  // (upA, leftA, rightA, pa, block, leftB, downB, rightB, pb)
    theta = contract(g, theta, {{2, 3}, {3, 8}});         // (ot, ob, upA, leftA, rightA, block, leftB, downB, rightB)
    SvdSplit f = svd_split(theta, {2, 3, 4, 0}, spec);    // v: (k, ob, block, leftB, downB, rightB)
    rep = f.report;
    top = permute(f.u, {0, 1, 4, 2, 3});
    bottom = permute(scale_axis(f.v, 0, f.s), {0, 3, 4, 5, 1, 2});
  }
  s.at(i, j) = std::move(top);
  s.at(i + 1, j) = std::move(bottom);
  s.varrow(i, j) = VArrow::Down;
  s.center = {i + 1, j};
  s.cum_discard = std::sqrt(s.cum_discard * s.cum_discard + rep.discarded_weight * rep.discarded_weight);
  if (report) *report = {rep.discarded_weight, rep.kept_rank};
  return s;
}

bool is_standard_layout(const BlockIsoPeps& s) {
  if (!(s.center == Site{0, 0})) return false;
  for (VArrow v : s.vert)
    if (v != VArrow::Up) return false;
  for (HArrow h : s.horiz)
    if (h != HArrow::Left) return false;
  return true;
}

namespace {

int label_at(const BlockIsoPeps& s, int i, int j) { return s.label[static_cast<std::size_t>(i * s.ly + j)]; }

// Moves the center from the bottom of column j to the top of column j + 1, or to the top of the last column.
BlockIsoPeps advance_column(BlockIsoPeps s, const SweepOptions& opt) {
  if (s.center.j + 1 < s.ly) return moses_move_column(std::move(s), opt.moses);
  const TruncationSpec spec{s.eta_max, opt.svd_tol};
  return move_center_within_column(std::move(s), 0, spec);
}

}  // namespace

BlockIsoPeps tebd2_half_sweep(BlockIsoPeps s, const GateTable& gates, const SweepOptions& opt) {
  if (!is_standard_layout(s)) throw ArgumentError("tebd2_half_sweep: state is not in the standard layout");
  for (int j = 0; j < s.ly; ++j) {
    for (int i = 0; i + 1 < s.lx; ++i)
      s = apply_bond_gate(std::move(s), i, gates.oriented(label_at(s, i, j), label_at(s, i + 1, j)), opt.reduced,
                          opt.svd_tol);
    s = advance_column(std::move(s), opt);
  }
  return rotate_ccw(std::move(s));
}

BlockIsoPeps apply_trotter_step(BlockIsoPeps s, const GateTable& gates, const SweepOptions& opt) {
  s = tebd2_half_sweep(std::move(s), gates, opt);
  return tebd2_half_sweep(std::move(s), gates, opt);
}

std::vector<std::size_t> trotter_gate_order(const ModelSpec& model, int rotation) {
  int lx = model.lx, ly = model.ly;
  std::vector<int> label(static_cast<std::size_t>(lx * ly));
  for (int q = 0; q < lx * ly; ++q) label[static_cast<std::size_t>(q)] = q;
  auto rotate = [&] {
    std::vector<int> next(label.size());
    for (int a = 0; a < ly; ++a)
      for (int b = 0; b < lx; ++b) next[static_cast<std::size_t>(a * lx + b)] = label[static_cast<std::size_t>(b * ly + ly - 1 - a)];
    label = std::move(next);
    std::swap(lx, ly);
  };
  for (int r = 0; r < ((rotation % 4) + 4) % 4; ++r) rotate();
  const GateTable table(model, std::vector<Matrix>(model.bonds.size()));
  std::vector<std::size_t> order;
  for (int half = 0; half < 2; ++half) {
    for (int j = 0; j < ly; ++j)
      for (int i = 0; i + 1 < lx; ++i)
        order.push_back(table.bond_index(label[static_cast<std::size_t>(i * ly + j)], label[static_cast<std::size_t>((i + 1) * ly + j)]));
    rotate();
  }
  return order;
}

std::vector<double> rayleigh_quotients(const BlockIsoPeps& state, const ModelSpec& model, const SweepOptions& opt) {
  if (!is_standard_layout(state)) throw ArgumentError("rayleigh_quotients: state is not in the standard layout");
  std::vector<Matrix> terms;
  for (const Bond& b : model.bonds) terms.push_back(b.term);
  const GateTable table(model, terms);
  const Index p = state.p, d = state.d;
  std::vector<double> energy(static_cast<std::size_t>(p), 0.0);
  BlockIsoPeps s = state;
  const auto scaled = [&](Index cap) { return cap >= kUnbounded / opt.measure_scale ? kUnbounded : cap * opt.measure_scale; };
  s.chi_max = scaled(s.chi_max);
  s.eta_max = scaled(s.eta_max);
  SweepOptions full = opt;
  full.moses.zipup_cap = 0;
  full.moses.oversample = 1;
  for (int half = 0; half < 2; ++half) {
    for (int j = 0; j < s.ly; ++j) {
      for (int i = 0; i + 1 < s.lx; ++i) {
        const RowMatrix h = table.oriented(label_at(s, i, j), label_at(s, i + 1, j));
        QrSplit qa = qr_split(s.at(i, j), {ax::up, ax::left, ax::right});
        QrSplit qb = qr_split(s.at(i + 1, j), {ax::left, ax::down, ax::right});
        Tensor theta = permute(contract(qa.r, qb.r, {{1, 1}}), {2, 0, 3, 1, 4});  // (block, ka, kb, pa, pb)
        const Index rows = theta.size() / (p * d * d);
        for (Index a = 0; a < p; ++a) {
          Eigen::Map<const RowMatrix> m(theta.raw() + a * rows * d * d, rows, d * d);
          const double nrm = m.squaredNorm();
          if (!(nrm > 0.0)) throw DegenerateStateError("rayleigh_quotients: block member " + std::to_string(a) + " has zero norm");
          const cplx e = (m.conjugate().cwiseProduct(m * h.transpose())).sum();
          if (std::abs(e.imag()) > 1e-8 * std::max(1.0, std::abs(e.real())) * nrm)
            throw InvariantError("rayleigh_quotients: bond energy is not real");
          energy[static_cast<std::size_t>(a)] += e.real() / nrm;
        }
        s = move_center_within_column(std::move(s), i + 1);
      }
      if (half == 1 && j + 1 == s.ly) break;
      s = advance_column(std::move(s), full);
    }
    if (half == 0) s = rotate_ccw(std::move(s));
  }
  return energy;
}

BlockIsoPeps initial_state(const RunConfig& c) {
  return random_state(c.lx, c.ly, 2, c.p, c.chi, c.eta, c.seed);
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double condition_number(const Matrix& g) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

}  // namespace

RunResult subspace_iteration(const RunConfig& c, BlockIsoPeps s, int done, const RunHooks& hooks) {
  validate(c);
  const ModelSpec model = build_model(c);
  const GateTable gates(model, c.tau);
  const SweepOptions opt = sweep_options(c);
  RunResult out;
  using clock = std::chrono::steady_clock;
  for (int it = done + 1; it <= c.iterations; ++it) {
    const auto t0 = clock::now();
    const double before = s.cum_discard;
    s = apply_trotter_step(std::move(s), gates, opt);
    TraceRow row;
    row.iter = it;
    const Matrix gram = block_overlap(s);
    for (Index a = 0; a < s.p; ++a) row.norms.push_back(std::sqrt(std::max(0.0, gram(a, a).real())));
    row.gram_condition = condition_number(gram);
    OrthonormalizeResult orth = orthonormalize_block(std::move(s), splitmix(c.seed ^ splitmix(static_cast<std::uint64_t>(it))));
    s = std::move(orth.state);
    row.replaced = std::move(orth.replaced);
    if (it % c.energy_period == 0 || it == c.iterations) row.energies = rayleigh_quotients(s, model, opt);
    if (hooks.audit_every_iteration) {
      const AuditReport a = audit(s);
      if (!a.ok(hooks.audit_tol)) {
        std::string msg = "audit failed at iteration " + std::to_string(it) + ": " + a.message;
        msg += "max isometry deviation " + std::to_string(a.max_isometry_deviation);
        throw AuditFailure(msg, std::move(s), it);
      }
    }
    row.cum_discard = s.cum_discard;
    row.discard_increment = std::sqrt(std::max(0.0, s.cum_discard * s.cum_discard - before * before));
    row.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    if (hooks.on_iteration) hooks.on_iteration(row, s);
    out.trace.rows.push_back(std::move(row));
  }
  out.state = std::move(s);
  return out;
}

RunResult subspace_iteration(const RunConfig& c, const RunHooks& hooks) {
  validate(c);
  return subspace_iteration(c, initial_state(c), 0, hooks);
}

}  // namespace bpeps
