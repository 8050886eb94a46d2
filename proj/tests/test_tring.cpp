#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bpeps/tring.hpp"
#include "oracles.hpp"

using namespace bpeps;

namespace {

double rel_error(const Tensor& a, const Tensor& b) { return (a - b).norm() / b.norm(); }

// (a, b, x, y) with an exact product structure across (a, x) | (b, y).
Tensor product_tensor(Index a, Index b, Index x, Index y, std::mt19937_64& rng) {
  const Tensor l = Tensor::random({a, x}, rng);
  const Tensor r = Tensor::random({b, y}, rng);
  return permute(contract(l, r, {}), {0, 2, 1, 3});
}

}  // namespace

TEST_CASE("renyi_half_entropy: closed forms") {
  CHECK(renyi_half_entropy({1.0}) == doctest::Approx(0.0));
  CHECK(renyi_half_entropy({1.0, 1.0}) == doctest::Approx(std::log(2.0)));
  CHECK(renyi_half_entropy({3.0, 3.0, 3.0, 3.0}) == doctest::Approx(std::log(4.0)));
  CHECK(renyi_half_entropy({2.0, 0.0, 0.0}) == doctest::Approx(0.0));
  // Scale invariant, and between 0 and ln(n).
  const double s = renyi_half_entropy({0.9, 0.3, 0.1});
  CHECK(renyi_half_entropy({9.0, 3.0, 1.0}) == doctest::Approx(s));
  CHECK(s > 0.0);
  CHECK(s < std::log(3.0));
}

TEST_CASE("cut_entropy: zero for product tensors, ln 2 for a Bell pair") {
  std::mt19937_64 rng(1);
  CHECK(cut_entropy(product_tensor(2, 3, 2, 2, rng)) == doctest::Approx(0.0).epsilon(1e-10));
  Tensor bell({2, 2, 1, 1});
  bell.at({0, 0, 0, 0}) = 1.0;
  bell.at({1, 1, 0, 0}) = 1.0;
  CHECK(cut_entropy(bell) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("optimize_disentangler: unitary, monotone trace, removes an applied unitary") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor t = Tensor::random({2, 2, 3, 3}, rng);
    const DisentanglerResult r = optimize_disentangler(t, 40);
    const Matrix& d = r.d.d_matrix;
    CHECK((d.adjoint() * d - Matrix::Identity(4, 4)).norm() < 1e-10);
    REQUIRE(!r.entropy_trace.empty());
    CHECK(r.entropy_trace.front() == doctest::Approx(cut_entropy(t)));
    for (std::size_t k = 1; k < r.entropy_trace.size(); ++k)
      CHECK(r.entropy_trace[k] <= r.entropy_trace[k - 1] + 1e-12);
    CHECK(cut_entropy(r.transformed) == doctest::Approx(r.entropy_trace.back()).epsilon(1e-9));
    const RowMatrix applied = d * t.matrix(2);
    CHECK((Tensor::from_matrix(applied, t.shape()) - r.transformed).norm() < 1e-10);
  }
  // A product tensor scrambled by a random unitary on (a, b) is disentangled to near zero entropy.
  const Tensor p = product_tensor(2, 2, 4, 4, rng);
  const Matrix u = oracle::random_unitary(4, rng);
  const Tensor scrambled = Tensor::from_matrix(RowMatrix(u * p.matrix(2)), p.shape());
  CHECK(cut_entropy(scrambled) > 0.05);
  const DisentanglerResult r = optimize_disentangler(scrambled, 300, 0.0);
  CHECK(r.entropy_trace.back() < 0.75 * r.entropy_trace.front());
}

TEST_CASE("decompose_ring: exact at generous caps, with and without block") {
  std::mt19937_64 rng(3);
  for (bool block : {false, true}) {
    Shape s{8, 2, 3};
    if (block) s.push_back(2);
    const Tensor b = Tensor::random(s, rng);
    const RingFactors f = decompose_ring(b, 16, 16);
    CHECK(f.has_block == block);
    CHECK(rel_error(ring_contract(f), b) < 1e-10);
    CHECK(f.err < 1e-10);
    CHECK(isometry_deviation(f.q, {0}) < 1e-10);
    CHECK(isometry_deviation(f.v, {1, 2}) < 1e-10);
  }
}

TEST_CASE("decompose_ring: caps respected, reported error equals the actual error") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor b = Tensor::random({4, 2, 4, 2}, rng);
    const RingFactors f = decompose_ring(b, 2, 2);
    CHECK(f.q.dim(1) <= 2);
    CHECK(f.q.dim(2) <= 2);
    CHECK(f.u.dim(2) <= 2);
    CHECK(f.v.shape()[0] == f.u.dim(2));
    CHECK(f.u.rank() == 4);
    CHECK(f.u.dim(3) == 2);
    CHECK(isometry_deviation(f.q, {0}) < 1e-10);
    CHECK(isometry_deviation(f.v, {1, 2}) < 1e-10);
    CHECK(rel_error(ring_contract(f), b) == doctest::Approx(f.err).epsilon(1e-8));
  }
}

TEST_CASE("decompose_ring: disentangler never worse, entropy trace monotone") {
  std::mt19937_64 rng(5);
  int not_worse = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const Tensor b = Tensor::random({4, 2, 4}, rng);
    const RingFactors with = decompose_ring(b, 2, 2, {true, 30, 0.0});
    const RingFactors without = decompose_ring(b, 2, 2, {false, 30, 0.0});
    if (with.err <= without.err + 1e-12) ++not_worse;
    for (std::size_t k = 1; k < with.entropy_trace.size(); ++k)
      CHECK(with.entropy_trace[k] <= with.entropy_trace[k - 1] + 1e-12);
    CHECK(without.entropy_trace.empty());
  }
  CHECK(not_worse == 30);
}

TEST_CASE("decompose_ring: argument checks") {
  std::mt19937_64 rng(6);
  CHECK_THROWS_AS(decompose_ring(Tensor::random({2, 2}, rng), 2, 2), ArgumentError);
  CHECK_THROWS_AS(decompose_ring(Tensor::random({2, 2, 2}, rng), 0, 2), ArgumentError);
}
