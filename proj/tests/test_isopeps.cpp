#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bpeps/exact.hpp"
#include "bpeps/isopeps.hpp"
#include "bpeps/snapshot.hpp"
#include "oracles.hpp"

using namespace bpeps;

namespace {

Eigen::VectorXcd dense(const BlockIsoPeps& s, Index a) { return oracle::to_vector(contract_to_vector(s, a)); }

Matrix dense_gram(const BlockIsoPeps& s) {
  Matrix g(s.p, s.p);
  for (Index a = 0; a < s.p; ++a)
    for (Index b = 0; b < s.p; ++b) g(a, b) = dense(s, a).dot(dense(s, b));
  return g;
}

double max_deviation(const BlockIsoPeps& x, const BlockIsoPeps& y) {
  double worst = 0.0;
  for (Index a = 0; a < x.p; ++a) worst = std::max(worst, (dense(x, a) - dense(y, a)).norm());
  return worst;
}

double block_deviation(const BlockIsoPeps& x, const BlockIsoPeps& y) {
  double num = 0.0, den = 0.0;
  for (Index a = 0; a < x.p; ++a) {
    num += (dense(x, a) - dense(y, a)).squaredNorm();
    den += dense(x, a).squaredNorm();
  }
  return std::sqrt(num / den);
}

BlockIsoPeps normalized_state(int lx, int ly, Index p, Index chi, Index eta, std::uint64_t seed) {
  return orthonormalize_block(random_state(lx, ly, 2, p, chi, eta, seed)).state;
}

// Lossless moves of a center with a block axis may grow bonds past the caps.
BlockIsoPeps uncapped(BlockIsoPeps s) {
  s.chi_max = s.eta_max = kUnbounded;
  return s;
}

}  // namespace

TEST_CASE("random_state: standard layout, isometric, within caps") {
  const BlockIsoPeps s = random_state(3, 4, 2, 2, 2, 3, 1);
  CHECK(s.center == Site{0, 0});
  CHECK(s.at(0, 0).rank() == 6);
  CHECK(s.at(0, 0).dim(ax::block) == 2);
  for (VArrow a : s.vert) CHECK(a == VArrow::Up);
  for (HArrow a : s.horiz) CHECK(a == HArrow::Left);
  const AuditReport r = audit(s);
  CHECK(r.ok(1e-10));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) {
      CHECK(s.at(i, j).dim(ax::right) <= 2);
      CHECK(s.at(i, j).dim(ax::down) <= 3);
    }
  CHECK(max_deviation(s, random_state(3, 4, 2, 2, 2, 3, 1)) == 0.0);
}

TEST_CASE("block_overlap and norms match dense contraction") {
  for (Index p : {1, 2, 3}) {
    const BlockIsoPeps s = random_state(3, 3, 2, p, 2, 4, 10 + p);
    CHECK((block_overlap(s) - dense_gram(s)).norm() < 1e-8);
    const auto n = norms(s);
    for (Index a = 0; a < p; ++a) CHECK(n[a] == doctest::Approx(dense(s, a).norm()).epsilon(1e-10));
  }
}

TEST_CASE("orthonormalize_block: identity Gram, leading member direction kept, idempotent") {
  const BlockIsoPeps s = random_state(3, 3, 2, 3, 2, 4, 5);
  const OrthonormalizeResult r = orthonormalize_block(s);
  CHECK(r.replaced.empty());
  CHECK((dense_gram(r.state) - Matrix::Identity(3, 3)).norm() < 1e-10);
  const Eigen::VectorXcd v0 = dense(s, 0);
  CHECK((dense(r.state, 0) - v0 / v0.norm()).norm() < 1e-10);
  CHECK(max_deviation(r.state, orthonormalize_block(r.state).state) < 1e-10);
}

TEST_CASE("orthonormalize_block: dependent member is replaced") {
  BlockIsoPeps s = random_state(2, 2, 2, 2, 2, 2, 6);
  Tensor& c = s.at(0, 0);
  auto m = c.matrix(5);
  m.col(1) = 2.0 * m.col(0);
  const OrthonormalizeResult r = orthonormalize_block(s, 3);
  REQUIRE(r.replaced.size() == 1);
  CHECK(r.replaced[0] == 1);
  CHECK((dense_gram(r.state) - Matrix::Identity(2, 2)).norm() < 1e-10);
}

TEST_CASE("center moves and rotations are lossless") {
  for (Index p : {1, 2, 3}) {
    const BlockIsoPeps s = uncapped(normalized_state(3, 3, p, 2, 3, 20 + p));
    BlockIsoPeps t = move_center_to_bottom(s);
    CHECK(t.center == Site{2, 0});
    CHECK(audit(t).ok(1e-10));
    CHECK(max_deviation(s, t) < 1e-10);
    t = move_center_within_column(std::move(t), 1);
    CHECK(t.center == Site{1, 0});
    CHECK(max_deviation(s, t) < 1e-10);
    t = move_center_to_top(std::move(t));
    CHECK(max_deviation(s, t) < 1e-10);
    BlockIsoPeps r = s;
    for (int k = 1; k <= 4; ++k) {
      r = rotate_ccw(std::move(r));
      CHECK(r.rotation == k % 4);
      CHECK(audit(r).ok(1e-10));
      CHECK(max_deviation(s, r) < 1e-10);
    }
    CHECK((block_overlap(r) - block_overlap(s)).norm() < 1e-10);
  }
}

TEST_CASE("rotate_ccw: non-square lattice swaps the dimensions") {
  const BlockIsoPeps s = uncapped(normalized_state(2, 3, 2, 2, 2, 30));
  const BlockIsoPeps r = rotate_ccw(s);
  CHECK(r.lx == 3);
  CHECK(r.ly == 2);
  CHECK(max_deviation(s, r) < 1e-10);
}

TEST_CASE("truncated center move reports its discarded weight") {
  const BlockIsoPeps s = uncapped(normalized_state(3, 3, 2, 2, 4, 40));
  BlockIsoPeps t = move_center_to_bottom(s);
  t.cum_discard = 0.0;
  t = move_center_within_column(std::move(t), 0, TruncationSpec{1, 0.0});
  CHECK(t.cum_discard > 0.0);
  for (int i = 0; i + 1 < 3; ++i) CHECK(t.at(i, 0).dim(ax::down) == 1);
  CHECK(audit(t).ok(1e-10));
}

TEST_CASE("moses_move_column: exact at generous caps") {
  for (Index p : {1, 2}) {
    BlockIsoPeps s = move_center_to_bottom(normalized_state(3, 3, p, 2, 2, 50 + p));
    s.chi_max = s.eta_max = kUnbounded;
    MosesOptions opt;
    opt.zipup_tol = 0.0;
    MosesReport rep;
    const BlockIsoPeps t = moses_move_column(s, opt, &rep);
    CHECK(t.center == Site{0, 1});
    CHECK(audit(t).ok(1e-8));
    CHECK(max_deviation(s, t) < 1e-8);
    CHECK(rep.weight < 1e-8);
  }
}

TEST_CASE("moses_move_column: tight caps, perturbation bounded by reported weight") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    BlockIsoPeps s = move_center_to_bottom(normalized_state(3, 3, 2, 2, 4, 100 + seed));
    s.chi_max = s.eta_max = 2;
    MosesReport rep;
    const BlockIsoPeps t = moses_move_column(s, {}, &rep);
    CHECK(audit(t).ok(1e-8));
    for (int i = 0; i < 3; ++i) {
      CHECK(t.at(i, 0).dim(ax::right) <= 2);
      CHECK(t.at(i, 1).dim(ax::down) <= 2);
    }
    CHECK(block_deviation(s, t) <= 3.0 * rep.weight + 1e-10);
  }
}

TEST_CASE("moses_move_column: oversampled zip-up keeps the caps") {
  BlockIsoPeps s = move_center_to_bottom(normalized_state(3, 3, 2, 2, 4, 200));
  s.chi_max = s.eta_max = 2;
  MosesOptions opt;
  opt.oversample = 3;
  MosesReport rep;
  const BlockIsoPeps t = moses_move_column(s, opt, &rep);
  CHECK(audit(t).ok(1e-8));
  for (int i = 0; i + 1 < 3; ++i) CHECK(t.at(i, 1).dim(ax::down) <= 2);
  CHECK(block_deviation(s, t) <= 3.0 * rep.weight + 1e-10);
}

TEST_CASE("snapshot: round trip is bit exact") {
  BlockIsoPeps s = rotate_ccw(normalized_state(2, 3, 2, 2, 2, 60));
  s.cum_discard = 0.125;
  const BlockIsoPeps t = decode_state(encode_state(s));
  CHECK(t.lx == s.lx);
  CHECK(t.ly == s.ly);
  CHECK(t.p == s.p);
  CHECK(t.center == s.center);
  CHECK(t.rotation == s.rotation);
  CHECK(t.label == s.label);
  CHECK(t.vert == s.vert);
  CHECK(t.horiz == s.horiz);
  CHECK(t.cum_discard == s.cum_discard);
  CHECK(t.chi_max == s.chi_max);
  for (std::size_t k = 0; k < s.grid.size(); ++k) {
    CHECK(t.grid[k].shape() == s.grid[k].shape());
    CHECK(t.grid[k].data() == s.grid[k].data());
  }
  const Checkpoint c = decode_checkpoint(encode_checkpoint({"{\"iteration\":3}", s}));
  CHECK(c.metadata == "{\"iteration\":3}");
  CHECK(encode_state(c.state) == encode_state(s));
}

TEST_CASE("snapshot: corruption, truncation and bad magic are rejected") {
  const std::string bytes = encode_state(normalized_state(2, 2, 2, 2, 2, 70));
  for (std::size_t pos : {std::size_t(20), bytes.size() / 2, bytes.size() - 1}) {
    std::string bad = bytes;
    bad[pos] = static_cast<char>(bad[pos] ^ 0x40);
    CHECK_THROWS_AS(decode_state(bad), SnapshotError);
  }
  CHECK_THROWS_AS(decode_state(bytes.substr(0, bytes.size() - 9)), SnapshotError);
  CHECK_THROWS_AS(decode_state(""), SnapshotError);
  std::string magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(decode_state(magic), SnapshotError);
  CHECK_THROWS_AS(decode_checkpoint(bytes), SnapshotError);
}
