#include "bpeps/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bpeps/linalg.hpp"

namespace bpeps {

namespace {

void check_shape(const Shape& shape) {
  for (Index n : shape)
    if (n < 1) throw ArgumentError("tensor axis lengths must be positive");
}

std::vector<Index> strides_of(const Shape& shape) {
  std::vector<Index> st(shape.size(), 1);
  for (std::size_t k = shape.size(); k-- > 1;) st[k - 1] = st[k] * shape[k];
  return st;
}

void check_axes(const Axes& axes, int rank, const char* what) {
  std::vector<bool> seen(static_cast<std::size_t>(rank), false);
  for (int ax : axes) {
    if (ax < 0 || ax >= rank || seen[static_cast<std::size_t>(ax)])
      throw ArgumentError(std::string(what) + ": bad axis list");
    seen[static_cast<std::size_t>(ax)] = true;
  }
}

Axes complement(const Axes& axes, int rank) {
  std::vector<bool> used(static_cast<std::size_t>(rank), false);
  for (int ax : axes) used[static_cast<std::size_t>(ax)] = true;
  Axes rest;
  for (int k = 0; k < rank; ++k)
    if (!used[static_cast<std::size_t>(k)]) rest.push_back(k);
  return rest;
}

bool is_identity(const Axes& order) {
  for (std::size_t k = 0; k < order.size(); ++k)
    if (order[k] != static_cast<int>(k)) return false;
  return true;
}

struct Bipartition {
  Axes left, right;
  Shape left_shape, right_shape;
  Index rows = 1, cols = 1;
};

Bipartition bipartition(const Tensor& a, const Axes& left_axes, const char* what) {
  check_axes(left_axes, a.rank(), what);
  if (left_axes.empty() || static_cast<int>(left_axes.size()) == a.rank())
    throw ArgumentError(std::string(what) + ": left axes must be a nonempty proper subset");
  Bipartition b;
  b.left = left_axes;
  b.right = complement(left_axes, a.rank());
  for (int ax : b.left) b.left_shape.push_back(a.dim(ax));
  for (int ax : b.right) b.right_shape.push_back(a.dim(ax));
  b.rows = product(b.left_shape);
  b.cols = product(b.right_shape);
  return b;
}

Tensor grouped(const Tensor& a, const Bipartition& b) {
  Axes order = b.left;
  order.insert(order.end(), b.right.begin(), b.right.end());
  return permute(a, order);
}

Shape with_bond(Shape s, Index bond, bool front) {
  if (front)
    s.insert(s.begin(), bond);
  else
    s.push_back(bond);
  return s;
}

}  // namespace

Tensor::Tensor() : shape_{}, data_(1, cplx(0.0)) {}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(static_cast<std::size_t>(product(shape_)), cplx(0.0));
}

Tensor::Tensor(Shape shape, std::vector<cplx> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (product(shape_) != static_cast<Index>(data_.size()))
    throw ArgumentError("tensor data size does not match shape");
  if (!is_finite(*this)) throw ArgumentError("tensor data contains NaN or Inf");
}

Tensor::Tensor(Unchecked, Shape shape, std::vector<cplx> data)
    : shape_(std::move(shape)), data_(std::move(data)) {}

Tensor make_unchecked(Shape shape, std::vector<cplx> data) {
  return Tensor(Tensor::Unchecked{}, std::move(shape), std::move(data));
}

Tensor Tensor::from_matrix(const RowMatrix& m, Shape shape) {
  if (product(shape) != m.size()) throw ArgumentError("from_matrix: shape mismatch");
  return make_unchecked(std::move(shape), std::vector<cplx>(m.data(), m.data() + m.size()));
}

Tensor Tensor::scalar(cplx v) { return make_unchecked({}, {v}); }

Tensor Tensor::identity(Index n) {
  Tensor t({n, n});
  for (Index i = 0; i < n; ++i) t[i * n + i] = 1.0;
  return t;
}

Tensor Tensor::random(Shape shape, std::mt19937_64& rng) {
  check_shape(shape);
  std::normal_distribution<double> gauss;
  std::vector<cplx> data(static_cast<std::size_t>(product(shape)));
  for (auto& x : data) {
    const double re = gauss(rng);
    x = cplx(re, gauss(rng));
  }
  return make_unchecked(std::move(shape), std::move(data));
}

Index Tensor::offset(std::initializer_list<Index> idx) const {
  if (idx.size() != shape_.size()) throw ArgumentError("tensor index has wrong rank");
  Index off = 0;
  std::size_t k = 0;
  for (Index i : idx) {
    if (i < 0 || i >= shape_[k]) throw ArgumentError("tensor index out of range");
    off = off * shape_[k++] + i;
  }
  return off;
}

cplx& Tensor::at(std::initializer_list<Index> idx) { return data_[static_cast<std::size_t>(offset(idx))]; }
cplx Tensor::at(std::initializer_list<Index> idx) const { return data_[static_cast<std::size_t>(offset(idx))]; }

Tensor Tensor::reshaped(Shape shape) const& {
  Tensor t = *this;
  return std::move(t).reshaped(std::move(shape));
}

Tensor Tensor::reshaped(Shape shape) && {
  check_shape(shape);
  if (product(shape) != size()) throw ArgumentError("reshape changes the number of entries");
  shape_ = std::move(shape);
  return std::move(*this);
}

Eigen::Map<const RowMatrix> Tensor::matrix(int split) const {
  const auto s = static_cast<std::size_t>(split);
  return {raw(), product(shape_, 0, s), product(shape_, s)};
}

Eigen::Map<RowMatrix> Tensor::matrix(int split) {
  const auto s = static_cast<std::size_t>(split);
  return {raw(), product(shape_, 0, s), product(shape_, s)};
}

double Tensor::norm() const {
  double acc = 0.0;
  for (const auto& x : data_) acc += std::norm(x);
  return std::sqrt(acc);
}

Tensor Tensor::conj() const {
  Tensor t = *this;
  for (auto& x : t.data_) x = std::conj(x);
  return t;
}

Tensor& Tensor::operator*=(cplx s) {
  for (auto& x : data_) x *= s;
  return *this;
}

Tensor& Tensor::operator+=(const Tensor& o) {
  if (o.shape_ != shape_) throw ArgumentError("tensor sum: shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& o) {
  if (o.shape_ != shape_) throw ArgumentError("tensor difference: shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

Tensor operator*(cplx s, Tensor t) { return std::move(t *= s); }
Tensor operator+(Tensor a, const Tensor& b) { return std::move(a += b); }
Tensor operator-(Tensor a, const Tensor& b) { return std::move(a -= b); }

Index product(const Shape& shape, std::size_t begin, std::size_t end) {
  end = std::min(end, shape.size());
  Index p = 1;
  for (std::size_t k = begin; k < end; ++k) p *= shape[k];
  return p;
}

bool is_finite(const Tensor& t) {
  for (const auto& x : t.data())
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
  return true;
}

Tensor permute(const Tensor& a, const Axes& order) {
  const int r = a.rank();
  if (static_cast<int>(order.size()) != r) throw ArgumentError("permute: order has wrong length");
  check_axes(order, r, "permute");
  if (is_identity(order)) return a;

  // Fuse runs of axes that stay adjacent.
  const auto in_strides = strides_of(a.shape());
  Shape dims;
  std::vector<Index> st;
  for (int k = 0; k < r; ++k) {
    const auto ax = static_cast<std::size_t>(order[static_cast<std::size_t>(k)]);
    if (a.shape()[ax] == 1) continue;
    if (!dims.empty() && st.back() == in_strides[ax] * a.shape()[ax]) {
      dims.back() *= a.shape()[ax];
      st.back() = in_strides[ax];
    } else {
      dims.push_back(a.shape()[ax]);
      st.push_back(in_strides[ax]);
    }
  }
  Shape out_shape(static_cast<std::size_t>(r));
  for (int k = 0; k < r; ++k)
    out_shape[static_cast<std::size_t>(k)] = a.dim(order[static_cast<std::size_t>(k)]);

  std::vector<cplx> out(static_cast<std::size_t>(a.size()));
  if (dims.size() <= 1) {
    std::copy(a.data().begin(), a.data().end(), out.begin());
    return make_unchecked(std::move(out_shape), std::move(out));
  }
  const std::size_t nd = dims.size();
  const Index inner = dims[nd - 1], inner_stride = st[nd - 1];
  std::vector<Index> idx(nd - 1, 0);
  Index in_off = 0;
  const cplx* src = a.raw();
  for (Index o = 0; o < a.size(); o += inner) {
    cplx* dst = out.data() + o;
    const cplx* s = src + in_off;
    if (inner_stride == 1) {
      std::copy(s, s + inner, dst);
    } else {
      for (Index t = 0; t < inner; ++t) dst[t] = s[t * inner_stride];
    }
    for (std::size_t k = nd - 1; k-- > 0;) {
      if (++idx[k] < dims[k]) {
        in_off += st[k];
        break;
      }
      in_off -= st[k] * (dims[k] - 1);
      idx[k] = 0;
    }
  }
  return make_unchecked(std::move(out_shape), std::move(out));
}

Tensor contract(const Tensor& a, const Tensor& b, const std::vector<std::pair<int, int>>& pairs) {
  Axes pa, pb;
  for (auto [x, y] : pairs) {
    if (x < 0 || x >= a.rank() || y < 0 || y >= b.rank())
      throw ArgumentError("contract: axis out of range");
    if (a.dim(x) != b.dim(y)) throw ArgumentError("contract: paired axes have different lengths");
    pa.push_back(x);
    pb.push_back(y);
  }
  check_axes(pa, a.rank(), "contract");
  check_axes(pb, b.rank(), "contract");
  const Axes fa = complement(pa, a.rank());
  const Axes fb = complement(pb, b.rank());

  Shape out_shape;
  Index m = 1, n = 1, k = 1;
  for (int ax : fa) {
    out_shape.push_back(a.dim(ax));
    m *= a.dim(ax);
  }
  for (int ax : fb) {
    out_shape.push_back(b.dim(ax));
    n *= b.dim(ax);
  }
  for (int ax : pa) k *= a.dim(ax);

  Axes a_fp = fa, a_pf = pa, b_pf = pb, b_fp = fb;
  a_fp.insert(a_fp.end(), pa.begin(), pa.end());
  a_pf.insert(a_pf.end(), fa.begin(), fa.end());
  b_pf.insert(b_pf.end(), fb.begin(), fb.end());
  b_fp.insert(b_fp.end(), pb.begin(), pb.end());

  std::vector<cplx> out(static_cast<std::size_t>(m * n));
  Eigen::Map<RowMatrix> c(out.data(), m, n);

  Tensor ta, tb;
  const cplx* pa_data = a.raw();
  const cplx* pb_data = b.raw();
  bool a_trans = false, b_trans = false;
  if (is_identity(a_fp)) {
  } else if (is_identity(a_pf)) {
    a_trans = true;
  } else {
    ta = permute(a, a_fp);
    pa_data = ta.raw();
  }
  if (is_identity(b_pf)) {
  } else if (is_identity(b_fp)) {
    b_trans = true;
  } else {
    tb = permute(b, b_pf);
    pb_data = tb.raw();
  }
  using CMap = Eigen::Map<const RowMatrix>;
  if (!a_trans && !b_trans)
    c.noalias() = CMap(pa_data, m, k) * CMap(pb_data, k, n);
  else if (a_trans && !b_trans)
    c.noalias() = CMap(pa_data, k, m).transpose() * CMap(pb_data, k, n);
  else if (!a_trans && b_trans)
    c.noalias() = CMap(pa_data, m, k) * CMap(pb_data, n, k).transpose();
  else
    c.noalias() = CMap(pa_data, k, m).transpose() * CMap(pb_data, n, k).transpose();
  return make_unchecked(std::move(out_shape), std::move(out));
}

cplx inner(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) throw ArgumentError("inner: size mismatch");
  cplx acc = 0.0;
  for (Index k = 0; k < a.size(); ++k) acc += std::conj(a[k]) * b[k];
  return acc;
}

TruncationReport choose_rank(const std::vector<double>& s, const TruncationSpec& spec) {
  if (spec.max_rank < 1) throw ArgumentError("max_rank must be positive");
  if (!(spec.rel_tol >= 0.0 && spec.rel_tol < 1.0)) throw ArgumentError("rel_tol must lie in [0, 1)");
  const std::size_t n = s.size();
  std::vector<double> tail(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) tail[i] = tail[i + 1] + s[i] * s[i];
  const double total = tail[0];
  TruncationReport rep;
  if (n == 0 || total == 0.0) {
    rep.kept_rank = 1;
    return rep;
  }
  std::size_t k = n;
  if (spec.rel_tol > 0.0) {
    for (std::size_t c = 1; c <= n; ++c) {
      if (std::sqrt(tail[c] / total) < spec.rel_tol) {
        k = c;
        break;
      }
    }
  }
  k = std::min<std::size_t>(k, static_cast<std::size_t>(std::min<Index>(spec.max_rank, static_cast<Index>(n))));
  k = std::max<std::size_t>(k, 1);
  rep.kept_rank = static_cast<Index>(k);
  rep.discarded_weight = std::min(1.0, std::sqrt(tail[k] / total));
  return rep;
}

SvdSplit svd_split(const Tensor& a, const Axes& left_axes, const TruncationSpec& spec) {
  if (!is_finite(a)) throw ArgumentError("svd_split: input contains NaN or Inf");
  const Bipartition bp = bipartition(a, left_axes, "svd_split");
  const Tensor g = grouped(a, bp);
  MatrixSvd svd = thin_svd(g.matrix(static_cast<int>(bp.left.size())));
  SvdSplit out;
  out.report = choose_rank(svd.s, spec);
  const Index k = out.report.kept_rank;
  out.s.assign(svd.s.begin(), svd.s.begin() + k);
  out.u = Tensor::from_matrix(svd.u.leftCols(k), with_bond(bp.left_shape, k, false));
  out.v = Tensor::from_matrix(svd.vh.topRows(k), with_bond(bp.right_shape, k, true));
  return out;
}

QrSplit qr_split(const Tensor& a, const Axes& left_axes) {
  const Bipartition bp = bipartition(a, left_axes, "qr_split");
  const Tensor g = grouped(a, bp);
  MatrixQr qr = thin_qr(g.matrix(static_cast<int>(bp.left.size())));
  const Index k = qr.q.cols();
  return {Tensor::from_matrix(qr.q, with_bond(bp.left_shape, k, false)),
          Tensor::from_matrix(qr.r, with_bond(bp.right_shape, k, true))};
}

LqSplit lq_split(const Tensor& a, const Axes& left_axes) {
  const Bipartition bp = bipartition(a, left_axes, "lq_split");
  const Tensor g = grouped(a, bp);
  const RowMatrix adj = g.matrix(static_cast<int>(bp.left.size())).adjoint();
  MatrixQr qr = thin_qr(adj);
  const Index k = qr.q.cols();
  const RowMatrix l = qr.r.adjoint();
  const RowMatrix q = qr.q.adjoint();
  return {Tensor::from_matrix(l, with_bond(bp.left_shape, k, false)),
          Tensor::from_matrix(q, with_bond(bp.right_shape, k, true))};
}

Tensor scale_axis(const Tensor& t, int axis, const std::vector<double>& s) {
  if (axis < 0 || axis >= t.rank() || t.dim(axis) != static_cast<Index>(s.size()))
    throw ArgumentError("scale_axis: length mismatch");
  Tensor out = t;
  const auto ax = static_cast<std::size_t>(axis);
  const Index outer = product(t.shape(), 0, ax);
  const Index inner = product(t.shape(), ax + 1);
  const Index n = t.dim(axis);
  for (Index o = 0; o < outer; ++o)
    for (Index i = 0; i < n; ++i) {
      cplx* p = out.raw() + (o * n + i) * inner;
      const double f = s[static_cast<std::size_t>(i)];
      for (Index q = 0; q < inner; ++q) p[q] *= f;
    }
  return out;
}

double isometry_deviation(const Tensor& t, const Axes& in_axes) {
  check_axes(in_axes, t.rank(), "isometry_deviation");
  const Axes out_axes = complement(in_axes, t.rank());
  Axes order = in_axes;
  order.insert(order.end(), out_axes.begin(), out_axes.end());
  const Tensor g = permute(t, order);
  const auto m = g.matrix(static_cast<int>(in_axes.size()));
  RowMatrix gram = m.adjoint() * m;
  gram -= RowMatrix::Identity(gram.rows(), gram.cols());
  return gram.norm();
}

}  // namespace bpeps
