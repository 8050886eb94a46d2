#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "bpeps/models.hpp"
#include "bpeps/tensor.hpp"

namespace bpeps {

struct BlockMps;
struct BlockIsoPeps;

inline constexpr Index kDefaultOracleCap = Index(1) << 20;

// Hermitian sparse matrix stored row-wise: row r owns entries [row_start[r], row_start[r+1]).
struct SparseOperator {
  Index dim = 0;
  std::vector<Index> row_start;
  std::vector<Index> cols;
  std::vector<cplx> values;

  Index nnz() const { return static_cast<Index>(values.size()); }
  void apply(const cplx* x, cplx* y) const;
  void for_each_entry(const std::function<void(Index, Index, cplx)>& f) const;
  Matrix to_dense() const;
};

// Site (i, j) is tensor factor i*ly + j, factor 0 leftmost (most significant digit).
SparseOperator assemble(const ModelSpec& model, Index cap = kDefaultOracleCap);

struct Eigenpairs {
  std::vector<double> values;  // ascending
  Matrix vectors;              // dim x k
  std::vector<double> residuals;
};

struct LanczosOptions {
  Index dense_limit = 4096;
  Index basis_size = 0;  // 0 picks a default from k
  int max_restarts = 2000;
  double rel_tol = 1e-10;
  std::uint64_t seed = 7;
};

Eigenpairs lowest_eigenpairs(const SparseOperator& op, int k, const LanczosOptions& opt = {});

std::vector<cplx> contract_to_vector(const BlockMps& m, Index alpha, Index cap = kDefaultOracleCap);
std::vector<cplx> contract_to_vector(const BlockIsoPeps& s, Index alpha, Index cap = kDefaultOracleCap);

// Dense dimension d^n, or throws CapacityError above cap.
Index checked_dimension(int d, int sites, Index cap);

}  // namespace bpeps
