#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "bpeps/tensor.hpp"

namespace bpeps {

// Cores have axes (left, phys, right); the center core carries a fourth block axis (size p, possibly 1).
// The gauge is not enforced by the type: canonicalize() establishes it.
struct BlockMps {
  std::vector<Tensor> cores;
  std::size_t center = 0;

  std::size_t length() const { return cores.size(); }
  Index p() const { return cores.at(center).dim(3); }
};

enum class Direction { Left, Right };

void validate(const BlockMps& m);
BlockMps random_mps(const std::vector<Index>& phys, Index bond, Index p, std::size_t center, std::mt19937_64& rng);

BlockMps canonicalize(BlockMps m, std::size_t j);
BlockMps shift_block_center(BlockMps m, Direction dir);

// Largest isometry deviation over the non-center cores.
double canonical_deviation(const BlockMps& m);

// Column of operator tensors with axes (up, down, out, in); at most one site carries a fifth block axis.
struct OperatorColumn {
  std::vector<Tensor> sites;
  int block_site = -1;
};

struct ZipupResult {
  BlockMps column;  // phys = (out, rest); center and block on core 0
  TruncationReport report;
};

// The operator's `in` leg contracts the leading factor of each state core's phys axis.
// The output block index is alpha_op * p_state + alpha_state.
ZipupResult zipup_apply(OperatorColumn op, const BlockMps& state, const TruncationSpec& spec);

}  // namespace bpeps
