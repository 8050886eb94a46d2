#pragma once

#include "bpeps/tensor.hpp"

namespace bpeps {

struct MatrixSvd {
  RowMatrix u;   // m x k
  std::vector<double> s;
  RowMatrix vh;  // k x n
};

// Thin SVD, singular values descending. LAPACK divide and conquer with fallbacks.
MatrixSvd thin_svd(const Eigen::Ref<const RowMatrix>& a);
std::vector<double> singular_values(const Eigen::Ref<const RowMatrix>& a);

struct MatrixQr {
  RowMatrix q;  // m x k, orthonormal columns
  RowMatrix r;  // k x n, real nonnegative diagonal
};

MatrixQr thin_qr(const Eigen::Ref<const RowMatrix>& a);

// Orthonormal columns spanning the complement of the columns of q (q has orthonormal columns).
RowMatrix orthonormal_complement(const RowMatrix& q, Index count, std::mt19937_64& rng);

}  // namespace bpeps
