#pragma once

#include <cstdint>
#include <vector>

#include "bpeps/tensor.hpp"

namespace bpeps {

struct Disentangler {
  Matrix d_matrix;  // unitary on the fused (a, b) bond pair
};

struct DisentanglerResult {
  Disentangler d;
  Tensor transformed;  // D applied to the (a, b) axes
  std::vector<double> entropy_trace;
};

// S_1/2 = 2 ln(sum s) - ln(sum s^2).
double renyi_half_entropy(const std::vector<double>& s);

// t has axes (a, b, x, y); the entropy is measured across the cut (a, x) | (b, y).
double cut_entropy(const Tensor& t);

// Riemannian conjugate gradient on U(ab) from the identity. Uphill steps are rejected.
DisentanglerResult optimize_disentangler(const Tensor& t, int max_iters = 30, double rel_change_tol = 1e-8);

struct RingOptions {
  bool disentangle = true;
  int max_iters = 30;
  double svd_tol = 0.0;
};

// q: (left, a, b) isometric from left; u: (a, up, k[, block]); v: (k, b, right) isometric from (b, right).
struct RingFactors {
  Tensor q, u, v;
  double err = 0.0;
  TruncationReport first, second;
  std::vector<double> entropy_trace;
  bool disentangler_used = false;
  bool has_block = false;
};

// b has axes (left, up, right) or (left, up, right, block). The block ends on u.
RingFactors decompose_ring(const Tensor& b, Index eta, Index chi, const RingOptions& opt = {});

// Contraction of the three factors back to (left, up, right[, block]).
Tensor ring_contract(const RingFactors& f);

}  // namespace bpeps
