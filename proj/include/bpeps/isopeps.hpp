#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bpeps/models.hpp"
#include "bpeps/tensor.hpp"

namespace bpeps {

// Site tensor axes. The center tensor carries the block axis last.
namespace ax {
inline constexpr int up = 0, left = 1, down = 2, right = 3, phys = 4, block = 5;
}

// Arrow direction along a bond: the endpoint it points to.
enum class VArrow : std::uint8_t { Up = 0, Down = 1 };
enum class HArrow : std::uint8_t { Left = 0, Right = 1 };

struct BlockIsoPeps {
  int lx = 0, ly = 0, d = 2;
  Index p = 1;
  std::vector<Tensor> grid;  // row-major, row 0 on top
  Site center;
  Index chi_max = kUnbounded, eta_max = kUnbounded;
  double cum_discard = 0.0;
  int rotation = 0;         // quarter turns ccw relative to the original frame
  std::vector<int> label;   // original row-major position of each site
  std::vector<VArrow> vert;   // bond (i,j)-(i+1,j) at i*ly + j
  std::vector<HArrow> horiz;  // bond (i,j)-(i,j+1) at i*(ly-1) + j

  Tensor& at(int i, int j) { return grid[static_cast<std::size_t>(i * ly + j)]; }
  const Tensor& at(int i, int j) const { return grid[static_cast<std::size_t>(i * ly + j)]; }
  VArrow& varrow(int i, int j) { return vert[static_cast<std::size_t>(i * ly + j)]; }
  VArrow varrow(int i, int j) const { return vert[static_cast<std::size_t>(i * ly + j)]; }
  HArrow& harrow(int i, int j) { return horiz[static_cast<std::size_t>(i * (ly - 1) + j)]; }
  HArrow harrow(int i, int j) const { return horiz[static_cast<std::size_t>(i * (ly - 1) + j)]; }
  int original_ly() const { return rotation % 2 == 0 ? ly : lx; }
  Site original_site(int i, int j) const;
};

// Standard layout: center at (0,0), every arrow pointing left and up.
BlockIsoPeps random_state(int lx, int ly, int d, Index p, Index chi, Index eta, std::uint64_t seed);

Tensor center_slice(const BlockIsoPeps& s, Index alpha);
Matrix block_overlap(const BlockIsoPeps& s);
std::vector<double> norms(const BlockIsoPeps& s);

struct OrthonormalizeResult {
  BlockIsoPeps state;
  std::vector<Index> replaced;
};

OrthonormalizeResult orthonormalize_block(BlockIsoPeps s, std::uint64_t seed = 0);

BlockIsoPeps move_center_within_column(BlockIsoPeps s, int target_row);
// Same path through truncated SVDs; discarded weight is added to cum_discard.
BlockIsoPeps move_center_within_column(BlockIsoPeps s, int target_row, const TruncationSpec& spec);
BlockIsoPeps move_center_to_top(BlockIsoPeps s);
BlockIsoPeps move_center_to_bottom(BlockIsoPeps s);

BlockIsoPeps rotate_ccw(BlockIsoPeps s);

struct MosesOptions {
  bool disentangle = true;
  int disentangler_iters = 30;
  double svd_tol = 1e-12;
  double zipup_tol = 1e-6;
  Index zipup_cap = 0;  // 0 uses the state's eta_max
  // When > 1 the zip-up keeps oversample * cap and the absorbed column is then truncated to the cap
  // by a QR sweep down and an SVD sweep up, which is optimal for each bond.
  int oversample = 1;
};

struct MosesReport {
  double weight = 0.0;  // root-sum-square of all discarded weights in the move
  std::vector<double> ring_errors;
  double top_weight = 0.0;
  double zipup_weight = 0.0;
  double recompress_weight = 0.0;
};

// Center at the bottom of column j (its column); afterwards at the top of column j + 1.
BlockIsoPeps moses_move_column(BlockIsoPeps s, const MosesOptions& opt = {}, MosesReport* report = nullptr);

struct AuditReport {
  double max_isometry_deviation = 0.0;
  bool arrows_ok = true;
  bool shapes_ok = true;
  bool caps_ok = true;
  std::string message;
  bool ok(double tol = 1e-8) const { return arrows_ok && shapes_ok && caps_ok && max_isometry_deviation <= tol; }
};

AuditReport audit(const BlockIsoPeps& s);

// Incoming axes of the tensor at (i, j) under the stored arrows (phys and boundary legs included).
Axes incoming_axes(const BlockIsoPeps& s, int i, int j);

}  // namespace bpeps
