#include "bpeps/tring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bpeps/linalg.hpp"

namespace bpeps {

double renyi_half_entropy(const std::vector<double>& s) {
  double l1 = 0.0, l2 = 0.0;
  for (double x : s) {
    if (x < 0.0) throw ArgumentError("renyi_half_entropy: negative singular value");
    l1 += x;
    l2 += x * x;
  }
  if (l2 <= 0.0) throw ArgumentError("renyi_half_entropy: all values are zero");
  return std::max(0.0, 2.0 * std::log(l1) - std::log(l2));
}

namespace {

struct CutEval {
  double f = 0.0;
  double nuclear = 0.0;
  RowMatrix grad;  // Euclidean gradient with respect to D
};

// Cut matrix ((a, x) | (b, y)) of the (a, b, x, y) tensor stored as an (ab) x (xy) matrix.
RowMatrix cut_matrix(const RowMatrix& tm, const Shape& shape) {
  Tensor t = Tensor::from_matrix(tm, shape);
  Tensor c = permute(t, {0, 2, 1, 3});
  return c.matrix(2);
}

CutEval evaluate(const RowMatrix& dt, const Shape& shape, const RowMatrix& tmat, bool with_grad) {
  const RowMatrix m = cut_matrix(dt, shape);
  CutEval ev;
  if (!with_grad) {
    const auto s = singular_values(m);
    ev.f = renyi_half_entropy(s);
    return ev;
  }
  MatrixSvd svd = thin_svd(m);
  ev.f = renyi_half_entropy(svd.s);
  ev.nuclear = std::accumulate(svd.s.begin(), svd.s.end(), 0.0);
  const double floor = 1e-14 * svd.s.front();
  Index r = 0;
  while (r < static_cast<Index>(svd.s.size()) && svd.s[static_cast<std::size_t>(r)] > floor) ++r;
  const RowMatrix y = svd.u.leftCols(r) * svd.vh.topRows(r);
  // y lives on the cut layout (a, x, b, y); bring it back to (a, b, x, y).
  Tensor yt = Tensor::from_matrix(y, {shape[0], shape[2], shape[1], shape[3]});
  const Tensor back = permute(yt, {0, 2, 1, 3});
  ev.grad = (2.0 / ev.nuclear) * (back.matrix(2) * tmat.adjoint());
  return ev;
}

RowMatrix skew(const RowMatrix& g, const RowMatrix& d) {
  const RowMatrix gd = g * d.adjoint();
  return 0.5 * (gd - gd.adjoint());
}

RowMatrix retract(const RowMatrix& d, const RowMatrix& h, double t) {
  const RowMatrix moved = d + t * (h * d);
  return thin_qr(moved).q;
}

double real_inner(const RowMatrix& a, const RowMatrix& b) { return (a.adjoint() * b).trace().real(); }

}  // namespace

double cut_entropy(const Tensor& t) {
  if (t.rank() != 4) throw ArgumentError("cut_entropy: expected (a, b, x, y)");
  return renyi_half_entropy(singular_values(permute(t, {0, 2, 1, 3}).matrix(2)));
}

DisentanglerResult optimize_disentangler(const Tensor& t, int max_iters, double rel_change_tol) {
  if (t.rank() != 4) throw ArgumentError("optimize_disentangler: expected (a, b, x, y)");
  const Shape& shape = t.shape();
  const Index n = shape[0] * shape[1];
  const RowMatrix tmat = t.matrix(2);
  RowMatrix d = RowMatrix::Identity(n, n);
  DisentanglerResult out;

  CutEval cur = evaluate(tmat, shape, tmat, true);
  out.entropy_trace.push_back(cur.f);
  if (max_iters > 0 && cur.f > 1e-14 && n > 1) {
    RowMatrix omega = skew(cur.grad, d);
    RowMatrix dir = -omega;
    double step = 0.1 / std::max(omega.norm(), 1e-12);
    bool steepest = true;
    for (int it = 0; it < max_iters; ++it) {
      const double slope = real_inner(omega, dir);
      if (omega.norm() < 1e-12) break;
      bool accepted = false;
      RowMatrix d_new;
      CutEval next;
      double t_try = step;
      for (int halving = 0; halving < 30; ++halving, t_try *= 0.5) {
        d_new = retract(d, dir, t_try);
        next = evaluate(d_new * tmat, shape, tmat, false);
        if (next.f <= cur.f + 1e-4 * t_try * slope && next.f < cur.f) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        if (steepest) break;
        dir = -omega;
        steepest = true;
        continue;
      }
      next = evaluate(d_new * tmat, shape, tmat, true);
      const double change = cur.f - next.f;
      d = d_new;
      step = std::min(2.0 * t_try, 1.0 / std::max(dir.norm(), 1e-12));
      const RowMatrix omega_new = skew(next.grad, d);
      const double beta = std::max(0.0, real_inner(omega_new, omega_new - omega) / std::max(omega.squaredNorm(), 1e-300));
      dir = -omega_new + beta * dir;
      steepest = beta == 0.0;
      if (real_inner(omega_new, dir) >= 0.0) {
        dir = -omega_new;
        steepest = true;
      }
      omega = omega_new;
      cur = std::move(next);
      out.entropy_trace.push_back(cur.f);
      if (change < rel_change_tol * std::max(std::abs(out.entropy_trace[out.entropy_trace.size() - 2]), 1e-300)) break;
      if (cur.f <= 1e-14) break;
    }
  }
  out.d.d_matrix = d;
  out.transformed = Tensor::from_matrix(d * tmat, shape);
  return out;
}

namespace {

Index saturating_product(Index a, Index b) {
  if (a != 0 && b > kUnbounded / a) return kUnbounded;
  return a * b;
}

// Second SVD across (a, x) | (b, y) of the (a, b, x, y) tensor.
SvdSplit cut_svd(const Tensor& t, Index eta, double tol) {
  return svd_split(t, {0, 2}, {eta, tol});
}

}  // namespace

namespace {

// Factors for a fixed split (a, bw) of the first SVD bond.
RingFactors ring_with_split(const MatrixSvd& svd, const Shape& dims, bool has_block, Index a, Index bw, Index eta,
                            const RingOptions& opt) {
  RingFactors f;
  f.has_block = has_block;
  const Index nl = dims[0], nu = dims[1], nr = dims[2], np = dims[3];
  const Index k = static_cast<Index>(svd.s.size());
  const Index rp = a * bw;
  const Index kept = std::min(rp, k);
  double tail = 0.0, total = 0.0;
  for (Index i = 0; i < k; ++i) {
    const double s2 = svd.s[static_cast<std::size_t>(i)] * svd.s[static_cast<std::size_t>(i)];
    total += s2;
    if (i >= kept) tail += s2;
  }
  f.first.kept_rank = kept;
  f.first.discarded_weight = total > 0.0 ? std::sqrt(tail / total) : 0.0;

  RowMatrix qt(nl, rp);
  qt.leftCols(kept) = svd.u.leftCols(kept);
  if (rp > kept) {
    std::mt19937_64 rng(0x5eed + static_cast<std::uint64_t>(nl * 131 + rp));
    qt.rightCols(rp - kept) = orthonormal_complement(svd.u.leftCols(kept), rp - kept, rng);
  }
  RowMatrix vt = RowMatrix::Zero(rp, nu * nr * np);
  for (Index i = 0; i < kept; ++i) vt.row(i) = svd.s[static_cast<std::size_t>(i)] * svd.vh.row(i);

  // (a, bw, up, right, block) -> (a, bw, x = (up, block), y = right)
  Tensor v5 = Tensor::from_matrix(vt, {a, bw, nu, nr, np});
  Tensor vtil = permute(v5, {0, 1, 2, 4, 3}).reshaped({a, bw, nu * np, nr});

  RowMatrix dmat = RowMatrix::Identity(rp, rp);
  SvdSplit second;
  if (opt.disentangle && a > 1 && bw > 1 && opt.max_iters > 0) {
    DisentanglerResult dr = optimize_disentangler(vtil, opt.max_iters);
    f.entropy_trace = dr.entropy_trace;
    SvdSplit with = cut_svd(dr.transformed, eta, opt.svd_tol);
    SvdSplit without = cut_svd(vtil, eta, opt.svd_tol);
    if (with.report.discarded_weight <= without.report.discarded_weight) {
      second = std::move(with);
      dmat = dr.d.d_matrix;
      f.disentangler_used = true;
    } else {
      second = std::move(without);
    }
  } else {
    second = cut_svd(vtil, eta, opt.svd_tol);
  }
  f.second = second.report;
  const Index k2 = second.report.kept_rank;

  f.q = Tensor::from_matrix(qt * dmat.adjoint(), {nl, a, bw});
  // u: (a, x, k2) scaled by s -> (a, up, block, k2) -> (a, up, k2, block)
  Tensor us = scale_axis(second.u, 2, second.s).reshaped({a, nu, np, k2});
  us = permute(us, {0, 1, 3, 2});
  f.u = has_block ? std::move(us) : std::move(us).reshaped({a, nu, k2});
  f.v = std::move(second.v);  // (k2, bw, right)

  const double w1 = f.first.discarded_weight, w2 = f.second.discarded_weight;
  f.err = std::sqrt(std::max(0.0, w1 * w1 + w2 * w2 * (1.0 - w1 * w1)));
  return f;
}

}  // namespace

RingFactors decompose_ring(const Tensor& b, Index eta, Index chi, const RingOptions& opt) {
  if (b.rank() != 3 && b.rank() != 4) throw ArgumentError("decompose_ring: expected (left, up, right[, block])");
  if (eta < 1 || chi < 1) throw ArgumentError("decompose_ring: caps must be positive");
  const bool has_block = b.rank() == 4;
  const Shape dims{b.dim(0), b.dim(1), b.dim(2), has_block ? b.dim(3) : 1};
  const Index nl = dims[0];

  // First SVD: left | (up, right, block).
  const MatrixSvd svd = thin_svd(b.matrix(1));
  const TruncationReport first = choose_rank(svd.s, {saturating_product(eta, chi), opt.svd_tol});
  const Index r = first.kept_rank;

  // Split the bond into (a, bw) with a <= eta, bw <= chi and a * bw <= nl so q stays isometric.
  // Among splits keeping the most of the rank, bw nearest sqrt(r), then the least padding.
  Index a = 1, bw = 1, best_kept = 0, best_size = 0;
  double best_balance = 0.0;
  const double root = std::sqrt(static_cast<double>(r));
  for (Index c = 1; c <= std::min(chi, r); ++c) {
    Index ac = std::min(eta, (r + c - 1) / c);
    if (ac * c > nl) ac = nl / c;
    if (ac < 1) continue;
    const Index kept_c = std::min(ac * c, r);
    const double balance = std::abs(static_cast<double>(c) - root);
    const bool better = kept_c > best_kept || (kept_c == best_kept && balance < best_balance) ||
                        (kept_c == best_kept && balance == best_balance && ac * c < best_size);
    if (better) {
      a = ac;
      bw = c;
      best_kept = kept_c;
      best_size = ac * c;
      best_balance = balance;
    }
  }
  return ring_with_split(svd, dims, has_block, a, bw, eta, opt);
}

Tensor ring_contract(const RingFactors& f) {
  // q (l, a, b) . u (a, up, k[, p]) -> (l, b, up, k[, p]); then v (k, b, r)
  Tensor qu = contract(f.q, f.u, {{1, 0}});
  Tensor full = contract(qu, f.v, {{1, 1}, {3, 0}});  // (l, up, [p], r)
  if (f.has_block) return permute(full, {0, 1, 3, 2});
  return full;
}

}  // namespace bpeps
