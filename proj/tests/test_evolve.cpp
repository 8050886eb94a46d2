#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "bpeps/evolve.hpp"
#include "bpeps/exact.hpp"
#include "oracles.hpp"

using namespace bpeps;

namespace {

Eigen::VectorXcd dense(const BlockIsoPeps& s, Index a) { return oracle::to_vector(contract_to_vector(s, a)); }

BlockIsoPeps exact_state(int lx, int ly, Index p, std::uint64_t seed) {
  BlockIsoPeps s = orthonormalize_block(random_state(lx, ly, 2, p, 2, 2, seed)).state;
  s.chi_max = s.eta_max = kUnbounded;
  return s;
}

SweepOptions exact_options() {
  SweepOptions o;
  o.svd_tol = 0.0;
  o.moses.svd_tol = 0.0;
  o.moses.zipup_tol = 0.0;
  return o;
}

Matrix random_gate(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Matrix g(4, 4);
  for (Index r = 0; r < 4; ++r)
    for (Index c = 0; c < 4; ++c) g(r, c) = cplx(gauss(rng), gauss(rng));
  return g;
}

// Ordered product of bond gates embedded in the full space.
Matrix ordered_product(const ModelSpec& m, double tau, const std::vector<std::size_t>& order) {
  const int n = m.lx * m.ly;
  Matrix u = Matrix::Identity(Index(1) << n, Index(1) << n);
  for (std::size_t k : order) {
    const Bond& b = m.bonds[k];
    u = oracle::embed_pair(oracle::expm_series(b.term, tau), m.position(b.a), m.position(b.b), n) * u;
  }
  return u;
}

}  // namespace

TEST_CASE("apply_bond_gate: direct and reduced updates match the dense gate") {
  std::mt19937_64 rng(1);
  for (bool reduced : {false, true}) {
    const BlockIsoPeps s = exact_state(3, 3, 2, 2);
    const Matrix g = random_gate(rng);
    GateReport rep;
    const BlockIsoPeps t = apply_bond_gate(s, 0, g, reduced, 0.0, &rep);
    CHECK(t.center == Site{1, 0});
    CHECK(t.varrow(0, 0) == VArrow::Down);
    CHECK(audit(t).ok(1e-10));
    CHECK(rep.discarded_weight < 1e-12);
    const Matrix big = oracle::embed_pair(g, 0, 3, 9);
    for (Index a = 0; a < 2; ++a) CHECK((dense(t, a) - big * dense(s, a)).norm() < 1e-9);
  }
}

TEST_CASE("apply_bond_gate: reduced and direct agree under truncation") {
  std::mt19937_64 rng(2);
  BlockIsoPeps s = move_center_within_column(exact_state(3, 3, 2, 3), 1);
  s.eta_max = 2;
  const Matrix g = random_gate(rng);
  GateReport r1, r2;
  const BlockIsoPeps a = apply_bond_gate(s, 1, g, true, 0.0, &r1);
  const BlockIsoPeps b = apply_bond_gate(s, 1, g, false, 0.0, &r2);
  CHECK(r1.kept_rank <= 2);
  CHECK(r1.discarded_weight == doctest::Approx(r2.discarded_weight).epsilon(1e-8));
  for (Index k = 0; k < 2; ++k) CHECK((dense(a, k) - dense(b, k)).norm() < 1e-8 * dense(b, k).norm());
}

TEST_CASE("apply_bond_gate: preconditions") {
  const BlockIsoPeps s = exact_state(2, 2, 1, 4);
  std::mt19937_64 rng(3);
  CHECK_THROWS_AS(apply_bond_gate(s, 1, random_gate(rng)), ArgumentError);
  CHECK_THROWS_AS(apply_bond_gate(s, 0, Matrix::Identity(2, 2)), ArgumentError);
}

TEST_CASE("tebd2_half_sweep: exact caps reproduce the first half of the gate order") {
  const ModelSpec m = tfi_model(3, 3, 2.0);
  const GateTable gates(m, 0.1);
  const BlockIsoPeps s = exact_state(3, 3, 2, 5);
  const BlockIsoPeps t = tebd2_half_sweep(s, gates, exact_options());
  CHECK(t.rotation == 1);
  CHECK(is_standard_layout(t));
  CHECK(audit(t).ok(1e-8));
  auto order = trotter_gate_order(m, 0);
  REQUIRE(order.size() == m.bonds.size());
  order.resize(6);
  const Matrix u = ordered_product(m, 0.1, order);
  for (Index a = 0; a < 2; ++a) CHECK((dense(t, a) - u * dense(s, a)).norm() < 1e-8);
}

TEST_CASE("apply_trotter_step: every bond once, in the order for the current frame") {
  for (const ModelSpec& m : {tfi_model(3, 3, 3.5), heisenberg_model(2, 3)}) {
    const GateTable gates(m, 0.1);
    BlockIsoPeps s = exact_state(m.lx, m.ly, 2, 6);
    for (int step = 0; step < 2; ++step) {
      auto order = trotter_gate_order(m, s.rotation);
      std::vector<std::size_t> sorted = order;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t k = 0; k < sorted.size(); ++k) CHECK(sorted[k] == k);
      const BlockIsoPeps t = apply_trotter_step(s, gates, exact_options());
      CHECK(t.rotation == (s.rotation + 2) % 4);
      const Matrix u = ordered_product(m, 0.1, order);
      for (Index a = 0; a < 2; ++a) CHECK((dense(t, a) - u * dense(s, a)).norm() < 1e-8);
      s = orthonormalize_block(t).state;
    }
  }
}

TEST_CASE("apply_trotter_step: tau 0 is the identity") {
  const ModelSpec m = tfi_model(3, 3, 1.0);
  const BlockIsoPeps s = exact_state(3, 3, 2, 7);
  const BlockIsoPeps t = apply_trotter_step(s, GateTable(m, 0.0), exact_options());
  for (Index a = 0; a < 2; ++a) CHECK((dense(t, a) - dense(s, a)).norm() < 1e-9);
}

TEST_CASE("apply_trotter_step: local error scales as tau squared") {
  const ModelSpec m = tfi_model(2, 2, 3.5);
  const Matrix h = assemble(m).to_dense();
  const BlockIsoPeps s = exact_state(2, 2, 1, 8);
  std::vector<double> lt, le;
  for (double tau : {0.1, 0.05, 0.025, 0.0125}) {
    const BlockIsoPeps t = apply_trotter_step(s, GateTable(m, tau), exact_options());
    const Eigen::VectorXcd want = oracle::expm_series(h, tau) * dense(s, 0);
    lt.push_back(std::log(tau));
    le.push_back(std::log((dense(t, 0) - want).norm()));
  }
  const double mt = (lt[0] + lt[1] + lt[2] + lt[3]) / 4, me = (le[0] + le[1] + le[2] + le[3]) / 4;
  double num = 0.0, den = 0.0;
  for (int k = 0; k < 4; ++k) {
    num += (lt[k] - mt) * (le[k] - me);
    den += (lt[k] - mt) * (lt[k] - mt);
  }
  CHECK(num / den == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("rayleigh_quotients: match dense expectation values") {
  for (const ModelSpec& m : {tfi_model(3, 3, 3.5), heisenberg_model(3, 3)}) {
    const BlockIsoPeps s = exact_state(3, 3, 3, 9);
    const Matrix h = assemble(m).to_dense();
    const auto e = rayleigh_quotients(s, m, exact_options());
    REQUIRE(e.size() == 3);
    for (Index a = 0; a < 3; ++a) {
      const Eigen::VectorXcd v = dense(s, a);
      CHECK(e[a] == doctest::Approx(v.dot(h * v).real() / v.squaredNorm()).epsilon(1e-9));
    }
  }
  const BlockIsoPeps moved = move_center_to_bottom(exact_state(2, 2, 1, 10));
  CHECK_THROWS_AS(rayleigh_quotients(moved, tfi_model(2, 2, 1.0)), ArgumentError);
}

TEST_CASE("rayleigh_quotients: measurement caps scale with measure_scale") {
  const ModelSpec m = heisenberg_model(3, 3);
  BlockIsoPeps s = orthonormalize_block(random_state(3, 3, 2, 2, 4, 4, 11)).state;
  s.chi_max = s.eta_max = 1;
  const Matrix h = assemble(m).to_dense();
  SweepOptions o = exact_options();
  o.measure_scale = 64;
  const auto e = rayleigh_quotients(s, m, o);
  o.measure_scale = 1;
  const auto t = rayleigh_quotients(s, m, o);
  double gap = 0.0;
  for (Index a = 0; a < 2; ++a) {
    const Eigen::VectorXcd v = dense(s, a);
    const double want = v.dot(h * v).real() / v.squaredNorm();
    CHECK(e[a] == doctest::Approx(want).epsilon(1e-9));
    gap = std::max(gap, std::abs(t[a] - want));
  }
  CHECK(gap > 1e-6);
}

TEST_CASE("trotter_gate_order: vertical bonds then horizontal ones in the original frame") {
  const ModelSpec m = tfi_model(2, 3, 1.0);
  const auto order = trotter_gate_order(m, 0);
  REQUIRE(order.size() == 7);
  for (std::size_t k = 0; k < 3; ++k) CHECK(m.bonds[order[k]].a.i != m.bonds[order[k]].b.i);
  for (std::size_t k = 3; k < 7; ++k) CHECK(m.bonds[order[k]].a.i == m.bonds[order[k]].b.i);
  const auto rotated = trotter_gate_order(m, 2);
  for (std::size_t k = 0; k < 3; ++k) CHECK(m.bonds[rotated[k]].a.i != m.bonds[rotated[k]].b.i);
}

TEST_CASE("subspace_iteration: 2x2 block converges to the two lowest levels") {
  RunConfig c;
  c.lx = c.ly = 2;
  c.g = 3.5;
  c.p = 2;
  c.chi = c.eta = 8;
  c.iterations = 120;
  c.energy_period = 20;
  int calls = 0;
  RunHooks hooks;
  hooks.on_iteration = [&](const TraceRow& row, const BlockIsoPeps& s) {
    ++calls;
    CHECK(row.iter == calls);
    CHECK((block_overlap(s) - Matrix::Identity(2, 2)).norm() < 1e-10);
  };
  const RunResult r = subspace_iteration(c, hooks);
  CHECK(calls == 120);
  REQUIRE(r.trace.rows.size() == 120);
  CHECK(r.trace.rows[18].energies.empty());
  CHECK(r.trace.rows[19].energies.size() == 2);
  const Eigenpairs ex = lowest_eigenpairs(assemble(tfi_model(2, 2, 3.5)), 2);
  auto e = r.trace.rows.back().energies;
  std::sort(e.begin(), e.end());
  // First-order splitting at tau = 0.1 leaves a fixed-point error of about 2e-3.
  for (int k = 0; k < 2; ++k) {
    const double rel = std::abs(e[k] - ex.values[k]) / std::abs(ex.values[k]);
    CHECK(rel < 5e-3);
    CHECK(e[k] >= ex.values[k] - 1e-9);
  }
}

TEST_CASE("subspace_iteration: resuming equals one long run") {
  RunConfig c;
  c.lx = 2;
  c.ly = 3;
  c.chi = c.eta = 3;
  c.iterations = 6;
  const RunResult full = subspace_iteration(c);
  RunConfig first = c;
  first.iterations = 4;
  const RunResult part = subspace_iteration(first);
  const RunResult rest = subspace_iteration(c, part.state, 4);
  REQUIRE(rest.trace.rows.size() == 2);
  CHECK(rest.trace.rows[0].iter == 5);
  CHECK(rest.trace.rows.back().energies == full.trace.rows.back().energies);
}

TEST_CASE("validate: rejects out-of-range settings") {
  RunConfig c;
  CHECK_NOTHROW(validate(c));
  auto bad = [&](auto mutate) {
    RunConfig b = c;
    mutate(b);
    CHECK_THROWS_AS(validate(b), ArgumentError);
  };
  bad([](RunConfig& b) { b.kind = "potts"; });
  bad([](RunConfig& b) { b.tau = -0.1; });
  bad([](RunConfig& b) { b.p = 0; });
  bad([](RunConfig& b) { b.p = 17; });
  bad([](RunConfig& b) { b.chi = 0; });
  bad([](RunConfig& b) { b.zipup_oversample = 0; });
  bad([](RunConfig& b) { b.measure_scale = 0; });
  bad([](RunConfig& b) { b.energy_period = 0; });
  bad([](RunConfig& b) { b.lx = 1, b.ly = 1; });
}
