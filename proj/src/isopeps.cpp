#include "bpeps/isopeps.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <sstream>

#include "bpeps/linalg.hpp"
#include "bpeps/mps.hpp"
#include "bpeps/tring.hpp"

namespace bpeps {

Site BlockIsoPeps::original_site(int i, int j) const {
  const int q = label[static_cast<std::size_t>(i * ly + j)];
  return {q / original_ly(), q % original_ly()};
}

namespace {

Tensor random_isometry(Index rows, Index cols, std::mt19937_64& rng) {
  Tensor g = Tensor::random({rows, cols}, rng);
  MatrixQr qr = thin_qr(g.matrix(1));
  return Tensor::from_matrix(qr.q, {rows, cols});
}

Index bond_limit(Index chi, Index eta) { return std::max(chi, eta); }

void require_center_column_inward(const BlockIsoPeps& s) {
  const int j = s.center.j;
  for (int i = 0; i < s.lx; ++i) {
    if (j > 0 && s.harrow(i, j - 1) != HArrow::Right)
      throw InvariantError("center column: bond from the left does not point into the column");
    if (j + 1 < s.ly && s.harrow(i, j) != HArrow::Left)
      throw InvariantError("center column: bond from the right does not point into the column");
  }
}

}  // namespace

BlockIsoPeps random_state(int lx, int ly, int d, Index p, Index chi, Index eta, std::uint64_t seed) {
  if (lx < 1 || ly < 1 || d < 1 || p < 1 || chi < 1 || eta < 1) throw ArgumentError("random_state: sizes must be positive");
  BlockIsoPeps s;
  s.lx = lx;
  s.ly = ly;
  s.d = d;
  s.p = p;
  s.chi_max = chi;
  s.eta_max = eta;
  s.center = {0, 0};
  s.label.resize(static_cast<std::size_t>(lx * ly));
  for (int q = 0; q < lx * ly; ++q) s.label[static_cast<std::size_t>(q)] = q;
  s.vert.assign(static_cast<std::size_t>(std::max(0, (lx - 1) * ly)), VArrow::Up);
  s.horiz.assign(static_cast<std::size_t>(std::max(0, lx * (ly - 1))), HArrow::Left);
  s.grid.resize(static_cast<std::size_t>(lx * ly));

  // Bond dims chosen from the bottom-right corner so that no isometry is asked to grow.
  std::vector<Index> vdim(static_cast<std::size_t>(lx * ly), 1), hdim(static_cast<std::size_t>(lx * ly), 1);
  auto up_of = [&](int i, int j) -> Index& { return vdim[static_cast<std::size_t>((i - 1) * ly + j)]; };
  auto left_of = [&](int i, int j) -> Index& { return hdim[static_cast<std::size_t>(i * ly + j - 1)]; };
  auto down_of = [&](int i, int j) { return i + 1 < lx ? vdim[static_cast<std::size_t>(i * ly + j)] : Index(1); };
  auto right_of = [&](int i, int j) { return j + 1 < ly ? hdim[static_cast<std::size_t>(i * ly + j)] : Index(1); };
  for (int i = lx - 1; i >= 0; --i)
    for (int j = ly - 1; j >= 0; --j) {
      const Index in = d * down_of(i, j) * right_of(i, j);
      if (i > 0 && j > 0) {
        const auto root = static_cast<Index>(std::floor(std::sqrt(static_cast<double>(in))));
        up_of(i, j) = std::min(chi, std::max<Index>(1, root));
        left_of(i, j) = std::min(chi, in / up_of(i, j));
      } else if (i > 0) {
        up_of(i, j) = std::min(chi, in);
      } else if (j > 0) {
        left_of(i, j) = std::min(chi, in);
      }
    }

  std::mt19937_64 rng(seed);
  for (int i = lx - 1; i >= 0; --i)
    for (int j = ly - 1; j >= 0; --j) {
      const Index up = i > 0 ? up_of(i, j) : 1;
      const Index left = j > 0 ? left_of(i, j) : 1;
      const Index down = down_of(i, j), right = right_of(i, j);
      if (i == 0 && j == 0) {
        const Index rows = down * right * d;
        if (p > rows) throw ArgumentError("random_state: block size exceeds the center tensor");
        Tensor m = random_isometry(rows, p, rng);  // (down, right, phys, block)
        s.at(0, 0) = m.reshaped({1, 1, down, right, d, p});
        continue;
      }
      Tensor q = random_isometry(down * right * d, up * left, rng).reshaped({down, right, d, up, left});
      s.at(i, j) = permute(q, {3, 4, 0, 1, 2});
    }
  return s;
}

Tensor center_slice(const BlockIsoPeps& s, Index alpha) {
  const Tensor& c = s.at(s.center.i, s.center.j);
  if (alpha < 0 || alpha >= s.p) throw ArgumentError("center_slice: block index out of range");
  Shape sh(c.shape().begin(), c.shape().end() - 1);
  Tensor out(sh);
  for (Index k = 0; k < out.size(); ++k) out[k] = c[k * s.p + alpha];
  return out;
}

Matrix block_overlap(const BlockIsoPeps& s) {
  const auto m = s.at(s.center.i, s.center.j).matrix(5);
  Matrix g = m.adjoint() * m;
  return 0.5 * (g + g.adjoint());
}

std::vector<double> norms(const BlockIsoPeps& s) {
  const Matrix g = block_overlap(s);
  std::vector<double> out;
  for (Index a = 0; a < g.rows(); ++a) out.push_back(std::sqrt(std::max(0.0, g(a, a).real())));
  return out;
}

OrthonormalizeResult orthonormalize_block(BlockIsoPeps s, std::uint64_t seed) {
  Tensor& c = s.at(s.center.i, s.center.j);
  auto m = c.matrix(5);
  const Index rows = m.rows();
  OrthonormalizeResult out;
  for (Index a = 0; a < s.p; ++a) {
    Eigen::VectorXcd v = m.col(a);
    const double original = v.norm();
    for (int pass = 0; pass < 2; ++pass)
      for (Index b = 0; b < a; ++b) v -= m.col(b).dot(v) * m.col(b);
    double nv = v.norm();
    if (!(nv >= 1e-10 * original) || original == 0.0) {
      out.replaced.push_back(a);
      std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(a + 1)));
      std::normal_distribution<double> gauss;
      do {
        for (Index r = 0; r < rows; ++r) v(r) = cplx(gauss(rng), gauss(rng));
        for (int pass = 0; pass < 2; ++pass)
          for (Index b = 0; b < a; ++b) v -= m.col(b).dot(v) * m.col(b);
        nv = v.norm();
      } while (nv < 1e-8);
    }
    m.col(a) = v / nv;
  }
  out.state = std::move(s);
  return out;
}

namespace {

// Splits the center tensor at `left_axes`; the isometric factor stays, the rest goes to the neighbour.
// Returns (isometry, remainder) with the remainder's bond axis first, and accumulates discarded weight.
std::pair<Tensor, Tensor> split_center(const Tensor& c, const Axes& left_axes, const TruncationSpec* spec, double& w2) {
  if (!spec) {
    QrSplit f = qr_split(c, left_axes);
    return {std::move(f.q), std::move(f.r)};
  }
  SvdSplit f = svd_split(c, left_axes, *spec);
  w2 += f.report.discarded_weight * f.report.discarded_weight;
  return {std::move(f.u), scale_axis(f.v, 0, f.s)};
}

BlockIsoPeps move_within_column(BlockIsoPeps s, int target_row, const TruncationSpec* spec) {
  if (target_row < 0 || target_row >= s.lx) throw ArgumentError("move_center_within_column: row outside the lattice");
  if (target_row == s.center.i) return s;
  require_center_column_inward(s);
  const int j = s.center.j;
  double w2 = 0.0;
  while (s.center.i > target_row) {
    const int i = s.center.i;
    auto [q, r] = split_center(s.at(i, j), {ax::left, ax::down, ax::right, ax::phys}, spec, w2);
    Tensor above = contract(s.at(i - 1, j), r, {{ax::down, 1}});  // (up, left, right, phys, k, block)
    s.at(i, j) = permute(q, {4, 0, 1, 2, 3});
    s.at(i - 1, j) = permute(above, {0, 1, 4, 2, 3, 5});
    s.varrow(i - 1, j) = VArrow::Up;
    s.center.i = i - 1;
  }
  while (s.center.i < target_row) {
    const int i = s.center.i;
    auto [q, r] = split_center(s.at(i, j), {ax::up, ax::left, ax::right, ax::phys}, spec, w2);
    Tensor below = contract(r, s.at(i + 1, j), {{1, ax::up}});  // (k, block, left, down, right, phys)
    s.at(i, j) = permute(q, {0, 1, 4, 2, 3});
    s.at(i + 1, j) = permute(below, {0, 2, 3, 4, 5, 1});
    s.varrow(i, j) = VArrow::Down;
    s.center.i = i + 1;
  }
  s.cum_discard = std::sqrt(s.cum_discard * s.cum_discard + w2);
  return s;
}

}  // namespace

BlockIsoPeps move_center_within_column(BlockIsoPeps s, int target_row) {
  return move_within_column(std::move(s), target_row, nullptr);
}

BlockIsoPeps move_center_within_column(BlockIsoPeps s, int target_row, const TruncationSpec& spec) {
  return move_within_column(std::move(s), target_row, &spec);
}

BlockIsoPeps move_center_to_top(BlockIsoPeps s) { return move_center_within_column(std::move(s), 0); }
BlockIsoPeps move_center_to_bottom(BlockIsoPeps s) {
  const int last = s.lx - 1;
  return move_center_within_column(std::move(s), last);
}

BlockIsoPeps rotate_ccw(BlockIsoPeps s) {
  BlockIsoPeps r;
  r.lx = s.ly;
  r.ly = s.lx;
  r.d = s.d;
  r.p = s.p;
  r.chi_max = s.chi_max;
  r.eta_max = s.eta_max;
  r.cum_discard = s.cum_discard;
  r.rotation = (s.rotation + 1) % 4;
  r.grid.resize(s.grid.size());
  r.label.resize(s.label.size());
  r.vert.assign(static_cast<std::size_t>(std::max(0, (r.lx - 1) * r.ly)), VArrow::Up);
  r.horiz.assign(static_cast<std::size_t>(std::max(0, r.lx * (r.ly - 1))), HArrow::Left);
  // New site (a, b) holds old site (b, ly - 1 - a).
  for (int a = 0; a < r.lx; ++a)
    for (int b = 0; b < r.ly; ++b) {
      const int oi = b, oj = s.ly - 1 - a;
      const Tensor& t = s.at(oi, oj);
      r.at(a, b) = t.rank() == 6 ? permute(t, {3, 0, 1, 2, 4, 5}) : permute(t, {3, 0, 1, 2, 4});
      r.label[static_cast<std::size_t>(a * r.ly + b)] = s.label[static_cast<std::size_t>(oi * s.ly + oj)];
    }
  for (int a = 0; a + 1 < r.lx; ++a)
    for (int b = 0; b < r.ly; ++b)
      r.varrow(a, b) = s.harrow(b, s.ly - 2 - a) == HArrow::Right ? VArrow::Up : VArrow::Down;
  for (int a = 0; a < r.lx; ++a)
    for (int b = 0; b + 1 < r.ly; ++b)
      r.harrow(a, b) = s.varrow(b, s.ly - 1 - a) == VArrow::Down ? HArrow::Right : HArrow::Left;
  r.center = {s.ly - 1 - s.center.j, s.center.i};
  return r;
}

BlockIsoPeps moses_move_column(BlockIsoPeps s, const MosesOptions& opt, MosesReport* report) {
  const int n = s.lx, j = s.center.j;
  if (j + 1 >= s.ly) throw ArgumentError("moses_move_column: no column to the right of the center");
  if (s.center.i != n - 1) throw ArgumentError("moses_move_column: center must be at the bottom of its column");
  require_center_column_inward(s);
  for (int i = 0; i + 1 < n; ++i)
    if (s.varrow(i, j) != VArrow::Down) throw InvariantError("moses_move_column: column arrows must point down");

  MosesReport rep;
  double w2 = 0.0;
  OperatorColumn op;
  op.sites.resize(static_cast<std::size_t>(n));
  op.block_site = 0;
  const RingOptions ring_opt{opt.disentangle, opt.disentangler_iters, opt.svd_tol};

  // x: (phys, left, downQ, up, right, downR, block)
  Tensor x;
  {
    const Tensor& a = s.at(n - 1, j);  // (up, left, down, right, phys, block)
    Tensor t = permute(a, {4, 1, 2, 0, 3, 5});
    Shape sh = t.shape();
    sh.insert(sh.begin() + 5, 1);
    x = std::move(t).reshaped(sh);
  }
  for (int i = n - 1; i >= 0; --i) {
    const Index ph = x.dim(0), lf = x.dim(1), dq = x.dim(2), up = x.dim(3), rt = x.dim(4), dr = x.dim(5), pb = x.dim(6);
    if (i > 0) {
      Tensor b = x.reshaped({ph * lf * dq, up, rt * dr, pb});
      RingFactors f = decompose_ring(b, s.eta_max, s.chi_max, ring_opt);
      rep.ring_errors.push_back(f.err);
      w2 += f.err * f.err;
      const Index a = f.q.dim(1), bw = f.q.dim(2), k = f.v.dim(0);
      s.at(i, j) = permute(f.q.reshaped({ph, lf, dq, a, bw}), {3, 1, 2, 4, 0});
      op.sites[static_cast<std::size_t>(i)] = permute(f.v.reshaped({k, bw, rt, dr}), {0, 3, 1, 2});
      s.varrow(i - 1, j) = VArrow::Up;
      s.harrow(i, j) = HArrow::Right;
      // Absorb u (a, up, k, block) into the tensor above through its down leg.
      Tensor above = contract(s.at(i - 1, j), f.u, {{ax::down, 1}});  // (up, left, right, phys, a, k, block)
      x = permute(above, {3, 1, 4, 0, 2, 5, 6});
    } else {
      SvdSplit f = svd_split(x, {0, 1, 2, 3}, {s.chi_max, opt.svd_tol});
      rep.top_weight = f.report.discarded_weight;
      w2 += rep.top_weight * rep.top_weight;
      const Index bw = f.report.kept_rank;
      s.at(0, j) = permute(f.u, {3, 1, 2, 4, 0});
      Tensor r0 = scale_axis(f.v, 0, f.s).reshaped({1, bw, rt, dr, pb});  // (up, b, right, downR, block)
      op.sites[0] = permute(r0, {0, 3, 1, 2, 4});
      s.harrow(0, j) = HArrow::Right;
    }
  }

  BlockMps col;
  col.center = 0;
  for (int i = 0; i < n; ++i) {
    const Tensor& c = s.at(i, j + 1);
    Tensor core = permute(c, {0, 1, 3, 4, 2});
    core = std::move(core).reshaped({c.dim(ax::up), c.dim(ax::left) * c.dim(ax::right) * c.dim(ax::phys), c.dim(ax::down)});
    if (i == 0) core = std::move(core).reshaped({core.dim(0), core.dim(1), core.dim(2), 1});
    col.cores.push_back(std::move(core));
  }
  const Index cap = opt.zipup_cap > 0 ? opt.zipup_cap : s.eta_max;
  const Index zip_cap = opt.oversample > 1 ? (cap >= kUnbounded / opt.oversample ? kUnbounded : cap * opt.oversample) : cap;
  ZipupResult z = zipup_apply(std::move(op), col, {zip_cap, opt.zipup_tol});
  rep.zipup_weight = z.report.discarded_weight;
  w2 += rep.zipup_weight * rep.zipup_weight;
  for (int i = 0; i < n; ++i) {
    const Tensor& old = s.at(i, j + 1);
    Tensor& core = z.column.cores[static_cast<std::size_t>(i)];
    const Index bw = s.at(i, j).dim(ax::right);
    Shape sh{core.dim(0), bw, old.dim(ax::right), old.dim(ax::phys), core.dim(2)};
    if (i == 0) sh.push_back(core.dim(3));
    Tensor t = std::move(core).reshaped(sh);
    s.at(i, j + 1) = i == 0 ? permute(t, {0, 1, 4, 2, 3, 5}) : permute(t, {0, 1, 4, 2, 3});
    if (i + 1 < n) s.varrow(i, j + 1) = VArrow::Up;
  }
  s.center = {0, j + 1};
  if (opt.oversample > 1) {
    const double before = s.cum_discard;
    s = move_center_within_column(std::move(s), n - 1);
    s.cum_discard = 0.0;
    s = move_center_within_column(std::move(s), 0, TruncationSpec{cap, opt.svd_tol});
    rep.recompress_weight = s.cum_discard;
    w2 += s.cum_discard * s.cum_discard;
    s.cum_discard = before;
  }
  rep.weight = std::sqrt(w2);
  s.cum_discard = std::sqrt(s.cum_discard * s.cum_discard + w2);
  if (report) *report = std::move(rep);
  return s;
}

Axes incoming_axes(const BlockIsoPeps& s, int i, int j) {
  Axes in;
  if (i == 0 || s.varrow(i - 1, j) == VArrow::Down) in.push_back(ax::up);
  if (j == 0 || s.harrow(i, j - 1) == HArrow::Right) in.push_back(ax::left);
  if (i + 1 == s.lx || s.varrow(i, j) == VArrow::Up) in.push_back(ax::down);
  if (j + 1 == s.ly || s.harrow(i, j) == HArrow::Left) in.push_back(ax::right);
  in.push_back(ax::phys);
  return in;
}

AuditReport audit(const BlockIsoPeps& s) {
  AuditReport rep;
  std::ostringstream msg;
  const int n = s.lx * s.ly;
  if (static_cast<int>(s.grid.size()) != n || static_cast<int>(s.label.size()) != n) {
    rep.shapes_ok = false;
    rep.message = "grid size mismatch";
    return rep;
  }
  const Index cap = bond_limit(s.chi_max, s.eta_max);
  for (int i = 0; i < s.lx; ++i)
    for (int j = 0; j < s.ly; ++j) {
      const Tensor& t = s.at(i, j);
      const bool is_center = Site{i, j} == s.center;
      const int want = is_center ? 6 : 5;
      if (t.rank() != want || t.dim(ax::phys) != s.d || (is_center && t.dim(ax::block) != s.p)) {
        rep.shapes_ok = false;
        msg << "bad tensor shape at (" << i << "," << j << "); ";
        continue;
      }
      if ((i == 0 && t.dim(ax::up) != 1) || (j == 0 && t.dim(ax::left) != 1) ||
          (i + 1 == s.lx && t.dim(ax::down) != 1) || (j + 1 == s.ly && t.dim(ax::right) != 1)) {
        rep.shapes_ok = false;
        msg << "boundary leg longer than 1 at (" << i << "," << j << "); ";
      }
      if (i + 1 < s.lx && t.dim(ax::down) != s.at(i + 1, j).dim(ax::up)) {
        rep.shapes_ok = false;
        msg << "vertical bond mismatch below (" << i << "," << j << "); ";
      }
      if (j + 1 < s.ly && t.dim(ax::right) != s.at(i, j + 1).dim(ax::left)) {
        rep.shapes_ok = false;
        msg << "horizontal bond mismatch right of (" << i << "," << j << "); ";
      }
      if (t.dim(ax::down) > cap || t.dim(ax::right) > cap) {
        rep.caps_ok = false;
        msg << "bond above cap at (" << i << "," << j << "); ";
      }
      if (!is_center) {
        const double dev = isometry_deviation(t, incoming_axes(s, i, j));
        rep.max_isometry_deviation = std::max(rep.max_isometry_deviation, dev);
      }
    }

  // The arrow graph must be acyclic with the center as its only sink.
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
  std::vector<int> indeg(static_cast<std::size_t>(n), 0);
  auto edge = [&](int from, int to) {
    out[static_cast<std::size_t>(from)].push_back(to);
    ++indeg[static_cast<std::size_t>(to)];
  };
  for (int i = 0; i + 1 < s.lx; ++i)
    for (int j = 0; j < s.ly; ++j) {
      const int a = i * s.ly + j, b = a + s.ly;
      if (s.varrow(i, j) == VArrow::Up) edge(b, a); else edge(a, b);
    }
  for (int i = 0; i < s.lx; ++i)
    for (int j = 0; j + 1 < s.ly; ++j) {
      const int a = i * s.ly + j, b = a + 1;
      if (s.harrow(i, j) == HArrow::Left) edge(b, a); else edge(a, b);
    }
  const int c = s.center.i * s.ly + s.center.j;
  for (int q = 0; q < n; ++q) {
    const bool sink = out[static_cast<std::size_t>(q)].empty();
    if (sink != (q == c)) {
      rep.arrows_ok = false;
      msg << "site " << q << (sink ? " is a spurious sink; " : " is the center but has outgoing arrows; ");
    }
  }
  std::queue<int> ready;
  for (int q = 0; q < n; ++q)
    if (indeg[static_cast<std::size_t>(q)] == 0) ready.push(q);
  int seen = 0;
  while (!ready.empty()) {
    const int q = ready.front();
    ready.pop();
    ++seen;
    for (int t : out[static_cast<std::size_t>(q)])
      if (--indeg[static_cast<std::size_t>(t)] == 0) ready.push(t);
  }
  if (seen != n) {
    rep.arrows_ok = false;
    msg << "arrow graph has a cycle; ";
  }
  rep.message = msg.str();
  return rep;
}

}  // namespace bpeps
