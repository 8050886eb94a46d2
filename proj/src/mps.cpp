#include "bpeps/mps.hpp"

#include <algorithm>
#include <cmath>

namespace bpeps {

namespace {

bool has_block(const Tensor& core) { return core.rank() == 4; }

// QR-move the gauge from core i to core i + 1; a block axis on core i travels with R.
void qr_right(BlockMps& m, std::size_t i) {
  Tensor& core = m.cores[i];
  const bool block = has_block(core);
  QrSplit f = qr_split(core, {0, 1});
  Tensor next = contract(f.r, m.cores[i + 1], {{1, 0}});
  if (block) next = permute(next, {0, 2, 3, 1});  // (k, p, d, r) -> (k, d, r, p)
  core = std::move(f.q);
  m.cores[i + 1] = std::move(next);
}

void lq_left(BlockMps& m, std::size_t i) {
  Tensor& core = m.cores[i];
  const bool block = has_block(core);
  LqSplit f = lq_split(core, block ? Axes{0, 3} : Axes{0});
  Tensor prev = contract(m.cores[i - 1], f.l, {{2, 0}});
  if (block || has_block(m.cores[i - 1])) prev = permute(prev, {0, 1, 3, 2});  // (l, d, p, k) -> (l, d, k, p)
  core = std::move(f.q);
  m.cores[i - 1] = std::move(prev);
}

std::size_t block_core(const BlockMps& m) {
  for (std::size_t i = 0; i < m.cores.size(); ++i)
    if (has_block(m.cores[i])) return i;
  throw ArgumentError("block mps has no block axis");
}

Tensor with_block_axis(const Tensor& t, int rank) {
  if (t.rank() == rank) return t;
  Shape s = t.shape();
  s.push_back(1);
  return t.reshaped(s);
}

}  // namespace

void validate(const BlockMps& m) {
  if (m.cores.empty()) throw ArgumentError("block mps is empty");
  if (m.center >= m.cores.size()) throw ArgumentError("block mps center out of range");
  for (std::size_t i = 0; i < m.cores.size(); ++i) {
    const Tensor& c = m.cores[i];
    const int want = i == m.center ? 4 : 3;
    if (c.rank() != want) throw ArgumentError("block mps core has the wrong rank");
    if (i + 1 < m.cores.size() && c.dim(2) != m.cores[i + 1].dim(0))
      throw ArgumentError("block mps bond mismatch");
  }
  if (m.cores.front().dim(0) != 1 || m.cores.back().dim(2) != 1)
    throw ArgumentError("block mps boundary bonds must be 1");
}

BlockMps random_mps(const std::vector<Index>& phys, Index bond, Index p, std::size_t center, std::mt19937_64& rng) {
  BlockMps m;
  const std::size_t n = phys.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Index l = i == 0 ? 1 : bond;
    const Index r = i + 1 == n ? 1 : bond;
    Shape s{l, phys[i], r};
    if (i == center) s.push_back(p);
    m.cores.push_back(Tensor::random(s, rng));
  }
  m.center = center;
  validate(m);
  return m;
}

BlockMps canonicalize(BlockMps m, std::size_t j) {
  validate(m);
  if (j >= m.length()) throw ArgumentError("canonicalize: target out of range");
  for (std::size_t i = 0; i < j; ++i) qr_right(m, i);
  for (std::size_t i = m.length() - 1; i > j; --i) lq_left(m, i);
  m.center = block_core(m);
  return m;
}

BlockMps shift_block_center(BlockMps m, Direction dir) {
  validate(m);
  if (dir == Direction::Right) {
    if (m.center + 1 >= m.length()) throw ArgumentError("shift_block_center: already at the right end");
    qr_right(m, m.center);
    ++m.center;
  } else {
    if (m.center == 0) throw ArgumentError("shift_block_center: already at the left end");
    lq_left(m, m.center);
    --m.center;
  }
  return m;
}

double canonical_deviation(const BlockMps& m) {
  double dev = 0.0;
  for (std::size_t i = 0; i < m.length(); ++i) {
    if (i < m.center) dev = std::max(dev, isometry_deviation(m.cores[i], {0, 1}));
    if (i > m.center) dev = std::max(dev, isometry_deviation(m.cores[i], {1, 2}));
  }
  return dev;
}

ZipupResult zipup_apply(OperatorColumn op, const BlockMps& state, const TruncationSpec& spec) {
  validate(state);
  const std::size_t n = state.length();
  if (op.sites.size() != n) throw ArgumentError("zipup_apply: column lengths differ");
  for (std::size_t i = 0; i < n; ++i) {
    const Tensor& o = op.sites[i];
    const int want = static_cast<int>(i) == op.block_site ? 5 : 4;
    if (o.rank() != want) throw ArgumentError("zipup_apply: operator tensor has the wrong rank");
    if (i + 1 < n && o.dim(1) != op.sites[i + 1].dim(0)) throw ArgumentError("zipup_apply: operator bond mismatch");
    if (state.cores[i].dim(1) % o.dim(3) != 0) throw ArgumentError("zipup_apply: operator and state legs differ");
  }
  if (op.sites.front().dim(0) != 1 || op.sites.back().dim(1) != 1)
    throw ArgumentError("zipup_apply: operator boundary bonds must be 1");

  // Orthogonalize the operator column top to bottom.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const bool block = static_cast<int>(i) == op.block_site;
    QrSplit f = qr_split(op.sites[i], {0, 2, 3});
    Tensor next = contract(f.r, op.sites[i + 1], {{1, 0}});
    if (block) {
      next = permute(next, {0, 2, 3, 4, 1});  // (k, b, down, out, in) -> (k, down, out, in, b)
      op.block_site = static_cast<int>(i + 1);
    }
    op.sites[i] = permute(f.q, {0, 3, 1, 2});
    op.sites[i + 1] = std::move(next);
  }

  BlockMps out;
  out.cores.resize(n);
  out.center = 0;
  Tensor carry = Tensor({1, 1, 1, 1, 1});  // (new, down_op, down_state, block_op, block_state)
  carry[0] = 1.0;
  double weight2 = 0.0;
  Index max_kept = 1;
  for (std::size_t i = n; i-- > 0;) {
    const Tensor o = with_block_axis(op.sites[i], 5);
    const Tensor& sc = state.cores[i];
    const Index in = o.dim(3);
    const Index rest = sc.dim(1) / in;
    Shape ss{sc.dim(0), in, rest, sc.dim(2), sc.rank() == 4 ? sc.dim(3) : 1};
    const Tensor s = sc.reshaped(ss);

    Tensor t1 = contract(carry, o, {{1, 1}});                   // (new, ds, bo, bs, up_o, out, in, bo_i)
    Tensor t2 = contract(t1, s, {{1, 3}, {6, 1}});              // (new, bo, bs, up_o, out, bo_i, up_s, rest, bs_i)
    Tensor th = permute(t2, {4, 7, 0, 3, 6, 1, 5, 2, 8});
    const Index out_dim = o.dim(2);
    const Index new_dim = carry.dim(0);
    const Index bo = carry.dim(3) * o.dim(4);
    const Index bs = carry.dim(4) * ss[4];
    th = std::move(th).reshaped({out_dim, rest, new_dim, o.dim(0), s.dim(0), bo, bs});
    if (i > 0) {
      SvdSplit f = svd_split(th, {0, 1, 2}, spec);
      weight2 += f.report.discarded_weight * f.report.discarded_weight;
      const Index k = f.report.kept_rank;
      max_kept = std::max(max_kept, k);
      out.cores[i] = permute(f.u, {3, 0, 1, 2}).reshaped({k, out_dim * rest, new_dim});
      carry = scale_axis(f.v, 0, f.s);
    } else {
      out.cores[0] = std::move(th).reshaped({1, out_dim * rest, new_dim, bo * bs});
    }
  }
  return {std::move(out), {max_kept, std::sqrt(weight2)}};
}

}  // namespace bpeps
