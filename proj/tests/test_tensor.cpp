#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "bpeps/tensor.hpp"
#include "oracles.hpp"

using namespace bpeps;

namespace {

double max_diff(const Tensor& a, const Tensor& b) {
  REQUIRE(a.shape() == b.shape());
  double m = 0.0;
  for (Index k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

Matrix as_matrix(const Tensor& t, int split) { return Matrix(t.matrix(split)); }

Tensor reconstruct(const SvdSplit& f) {
  return contract(scale_axis(f.u, f.u.rank() - 1, f.s), f.v, {{f.u.rank() - 1, 0}});
}

}  // namespace

TEST_CASE("permute: transpose involution and identity") {
  std::mt19937_64 rng(1);
  Tensor a = Tensor::random({2, 3}, rng);
  Tensor t = permute(a, {1, 0});
  CHECK(t.shape() == Shape{3, 2});
  CHECK(t.at({2, 1}) == a.at({1, 2}));
  CHECK(max_diff(permute(t, {1, 0}), a) == 0.0);

  Tensor b = Tensor::random({2, 3, 4}, rng);
  Tensor same = permute(b, {0, 1, 2});
  CHECK(same.data() == b.data());
}

TEST_CASE("permute: matches element-loop oracle") {
  std::mt19937_64 rng(2);
  Tensor a = Tensor::random({2, 3, 4}, rng);
  Tensor p = permute(a, {2, 0, 1});
  CHECK(p.at({3, 1, 2}) == a.at({1, 2, 3}));
  CHECK(max_diff(p, oracle::permute_loop(a, {2, 0, 1})) == 0.0);

  Tensor big = Tensor::random({3, 1, 4, 2, 5}, rng);
  for (const Axes& order : {Axes{4, 3, 2, 1, 0}, Axes{1, 0, 2, 4, 3}, Axes{2, 3, 0, 4, 1}, Axes{0, 1, 3, 4, 2}})
    CHECK(max_diff(permute(big, order), oracle::permute_loop(big, order)) == 0.0);
}

TEST_CASE("permute: malformed order is rejected") {
  Tensor a({2, 3});
  CHECK_THROWS_AS(permute(a, {0, 0}), ArgumentError);
  CHECK_THROWS_AS(permute(a, {0}), ArgumentError);
  CHECK_THROWS_AS(permute(a, {0, 2}), ArgumentError);
}

TEST_CASE("tensor: constructors reject bad data") {
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<cplx>(3)), ArgumentError);
  CHECK_THROWS_AS(Tensor({2, 0}), ArgumentError);
  std::vector<cplx> d(4, 1.0);
  d[2] = cplx(std::nan(""), 0.0);
  CHECK_THROWS_AS(Tensor({2, 2}, d), ArgumentError);
}

TEST_CASE("contract: matrix product matches triple loop") {
  std::mt19937_64 rng(3);
  Tensor a = Tensor::random({2, 3}, rng);
  Tensor b = Tensor::random({3, 2}, rng);
  Tensor c = contract(a, b, {{1, 0}});
  Matrix ref = oracle::matmul_loop(as_matrix(a, 1), as_matrix(b, 1));
  CHECK((as_matrix(c, 1) - ref).norm() < 1e-13);
}

TEST_CASE("contract: identity, norm and multi-axis cases") {
  std::mt19937_64 rng(4);
  Tensor t = Tensor::random({3, 4, 5}, rng);
  Tensor id = Tensor::identity(4);
  Tensor r = contract(t, id, {{1, 0}});
  CHECK(max_diff(permute(r, {0, 2, 1}), t) < 1e-15);

  Tensor v = Tensor::random({4}, rng);
  Tensor nrm = contract(v.conj(), v, {{0, 0}});
  CHECK(nrm.rank() == 0);
  CHECK(std::abs(nrm[0] - v.norm() * v.norm()) < 1e-12);

  Tensor a = Tensor::random({2, 3, 4}, rng);
  Tensor b = Tensor::random({4, 5, 2}, rng);
  Tensor c = contract(a, b, {{2, 0}, {0, 2}});
  CHECK(c.shape() == Shape{3, 5});
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 5; ++j) {
      cplx acc = 0.0;
      for (Index x = 0; x < 2; ++x)
        for (Index y = 0; y < 4; ++y) acc += a.at({x, i, y}) * b.at({y, j, x});
      CHECK(std::abs(c.at({i, j}) - acc) < 1e-12);
    }
  CHECK_THROWS_AS(contract(a, b, {{1, 0}}), ArgumentError);
  CHECK_THROWS_AS(contract(a, b, {{2, 0}, {2, 2}}), ArgumentError);
}

TEST_CASE("contract: transposed operand layouts") {
  std::mt19937_64 rng(5);
  Tensor a = Tensor::random({4, 3}, rng);
  Tensor b = Tensor::random({5, 4}, rng);
  Tensor c = contract(a, b, {{0, 1}});
  Matrix ref = as_matrix(a, 1).transpose() * as_matrix(b, 1).transpose();
  CHECK((as_matrix(c, 1) - ref).norm() < 1e-12);
}

TEST_CASE("property: contract is bilinear") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor a = Tensor::random({3, 2, 4}, rng);
    Tensor b = Tensor::random({3, 2, 4}, rng);
    Tensor c = Tensor::random({4, 3, 5}, rng);
    const cplx alpha(0.3 * trial - 1.0, 0.7);
    Tensor lhs = contract(alpha * a + b, c, {{2, 0}, {0, 1}});
    Tensor rhs = alpha * contract(a, c, {{2, 0}, {0, 1}}) + contract(b, c, {{2, 0}, {0, 1}});
    CHECK(max_diff(lhs, rhs) < 1e-12);
  }
}

TEST_CASE("svd_split: rank-1 and identity examples") {
  std::mt19937_64 rng(7);
  Tensor u = Tensor::random({3}, rng);
  Tensor v = Tensor::random({4}, rng);
  u *= 1.0 / u.norm();
  v *= 1.0 / v.norm();
  Tensor outer = contract(u.reshaped({3, 1}), v.reshaped({1, 4}), {{1, 0}});
  SvdSplit f = svd_split(outer, {0}, {kUnbounded, 1e-12});
  CHECK(f.report.kept_rank == 1);
  CHECK(f.s[0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(f.report.discarded_weight < 1e-13);

  SvdSplit id = svd_split(Tensor::identity(4), {0}, {2, 0.0});
  CHECK(id.report.kept_rank == 2);
  CHECK(id.report.discarded_weight == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-13));
}

TEST_CASE("svd_split: singular values match Gram eigenvalue oracle") {
  std::mt19937_64 rng(8);
  Tensor a = Tensor::random({6, 8}, rng);
  SvdSplit f = svd_split(a, {0});
  Matrix m = as_matrix(a, 1);
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.adjoint() * m);
  auto ev = es.eigenvalues();
  REQUIRE(f.s.size() == 6);
  for (int k = 0; k < 6; ++k) CHECK(std::abs(f.s[k] - std::sqrt(ev(7 - k))) < 1e-10);
  for (int k = 0; k + 1 < 6; ++k) CHECK(f.s[k] >= f.s[k + 1]);
}

TEST_CASE("svd_split: degenerate inputs") {
  Tensor z({3, 4});
  SvdSplit f = svd_split(z, {0}, {2, 0.1});
  CHECK(f.report.kept_rank == 1);
  CHECK(f.s.size() == 1);
  CHECK(f.s[0] == 0.0);
  CHECK(f.report.discarded_weight == 0.0);
  CHECK(isometry_deviation(f.u, {0}) < 1e-12);
}

TEST_CASE("property: svd_split reconstruction and Eckart-Young consistency") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> dim(1, 6);
  for (int trial = 0; trial < 40; ++trial) {
    Shape shape{dim(rng), dim(rng), dim(rng), dim(rng)};
    Tensor a = Tensor::random(shape, rng);
    const Axes left = trial % 2 ? Axes{2, 0} : Axes{1};
    SvdSplit full = svd_split(a, left);
    Tensor back = reconstruct(full);
    Axes rest;
    for (int k = 0; k < 4; ++k)
      if (std::find(left.begin(), left.end(), k) == left.end()) rest.push_back(k);
    Axes order = left;
    order.insert(order.end(), rest.begin(), rest.end());
    Tensor ref = permute(a, order).reshaped(back.shape());
    CHECK((back - ref).norm() / a.norm() < 1e-10);
    Axes u_in(left.size());
    std::iota(u_in.begin(), u_in.end(), 0);
    CHECK(isometry_deviation(full.u, u_in) < 1e-10);
    Axes v_in(rest.size());
    std::iota(v_in.begin(), v_in.end(), 1);
    CHECK(isometry_deviation(full.v, v_in) < 1e-10);

    const TruncationSpec spec{std::max<Index>(1, full.report.kept_rank / 2), trial % 3 == 0 ? 0.2 : 0.0};
    SvdSplit cut = svd_split(a, left, spec);
    CHECK(cut.report.kept_rank <= spec.max_rank);
    const double err = (reconstruct(cut) - ref).norm() / a.norm();
    CHECK(std::abs(err - cut.report.discarded_weight) < 1e-10);
    CHECK(cut.report.discarded_weight >= 0.0);
    CHECK(cut.report.discarded_weight <= 1.0);
  }
}

TEST_CASE("svd_split: tolerance rule keeps the smallest passing rank") {
  Tensor d({4, 4});
  d.at({0, 0}) = 1.0;
  d.at({1, 1}) = 0.1;
  d.at({2, 2}) = 0.01;
  d.at({3, 3}) = 0.001;
  SvdSplit f = svd_split(d, {0}, {kUnbounded, 0.05});
  CHECK(f.report.kept_rank == 2);
  SvdSplit g = svd_split(d, {0}, {1, 1e-9});
  CHECK(g.report.kept_rank == 1);
  SvdSplit h = svd_split(d, {0}, {kUnbounded, 0.0});
  CHECK(h.report.kept_rank == 4);
  CHECK_THROWS_AS(svd_split(d, {0}, {kUnbounded, 1.0}), ArgumentError);
  CHECK_THROWS_AS(svd_split(d, {0, 1}), ArgumentError);
}

TEST_CASE("qr_split: isometric input gives unitary R") {
  std::mt19937_64 rng(10);
  QrSplit base = qr_split(Tensor::random({6, 3}, rng), {0});
  QrSplit again = qr_split(base.q, {0});
  Matrix r = as_matrix(again.r, 1);
  CHECK((r.adjoint() * r - Matrix::Identity(3, 3)).norm() < 1e-12);
  CHECK(isometry_deviation(again.q, {0}) < 1e-12);
}

TEST_CASE("qr_split: reconstruct 2x2x3 and zero tensor") {
  std::mt19937_64 rng(11);
  Tensor a = Tensor::random({2, 2, 3}, rng);
  QrSplit f = qr_split(a, {0, 1});
  CHECK(f.q.shape() == Shape{2, 2, 3});
  CHECK((contract(f.q, f.r, {{2, 0}}) - a).norm() / a.norm() < 1e-12);

  Tensor z({3, 2});
  QrSplit g = qr_split(z, {0});
  CHECK(isometry_deviation(g.q, {0}) < 1e-12);
  CHECK(g.r.norm() == 0.0);
  CHECK(contract(g.q, g.r, {{1, 0}}).norm() == 0.0);
}

TEST_CASE("property: qr and lq reconstruct") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> dim(1, 5);
  for (int trial = 0; trial < 30; ++trial) {
    Tensor a = Tensor::random({dim(rng), dim(rng), dim(rng)}, rng);
    QrSplit f = qr_split(a, {0, 2});
    Tensor back = contract(f.q, f.r, {{2, 0}});
    CHECK((back - permute(a, {0, 2, 1})).norm() / a.norm() < 1e-12);
    CHECK(f.q.dim(2) == std::min(a.dim(0) * a.dim(2), a.dim(1)));

    LqSplit l = lq_split(a, {1});
    Tensor lback = contract(l.l, l.q, {{1, 0}});
    CHECK((lback - permute(a, {1, 0, 2})).norm() / a.norm() < 1e-12);
    CHECK(isometry_deviation(l.q, {1, 2}) < 1e-12);
  }
}
