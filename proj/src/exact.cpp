#include "bpeps/exact.hpp"

#include <lapacke.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

#include "bpeps/isopeps.hpp"
#include "bpeps/mps.hpp"

namespace bpeps {

void SparseOperator::apply(const cplx* x, cplx* y) const {
  for (Index r = 0; r < dim; ++r) {
    cplx acc = 0.0;
    for (Index k = row_start[static_cast<std::size_t>(r)]; k < row_start[static_cast<std::size_t>(r + 1)]; ++k)
      acc += values[static_cast<std::size_t>(k)] * x[cols[static_cast<std::size_t>(k)]];
    y[r] = acc;
  }
}

void SparseOperator::for_each_entry(const std::function<void(Index, Index, cplx)>& f) const {
  for (Index r = 0; r < dim; ++r)
    for (Index k = row_start[static_cast<std::size_t>(r)]; k < row_start[static_cast<std::size_t>(r + 1)]; ++k)
      f(r, cols[static_cast<std::size_t>(k)], values[static_cast<std::size_t>(k)]);
}

Matrix SparseOperator::to_dense() const {
  Matrix m = Matrix::Zero(dim, dim);
  for_each_entry([&](Index r, Index c, cplx v) { m(r, c) += v; });
  return m;
}

Index checked_dimension(int d, int sites, Index cap) {
  Index dim = 1;
  for (int k = 0; k < sites; ++k) {
    if (dim > cap / d) throw CapacityError("dense dimension exceeds the oracle cap");
    dim *= d;
  }
  if (dim > cap) throw CapacityError("dense dimension exceeds the oracle cap");
  return dim;
}

SparseOperator assemble(const ModelSpec& model, Index cap) {
  const int n = model.lx * model.ly;
  const int d = model.d;
  const Index dim = checked_dimension(d, n, cap);
  std::vector<Index> weight(static_cast<std::size_t>(n));
  {
    Index w = 1;
    for (int q = n; q-- > 0;) {
      weight[static_cast<std::size_t>(q)] = w;
      w *= d;
    }
  }
  SparseOperator op;
  op.dim = dim;
  op.row_start.reserve(static_cast<std::size_t>(dim + 1));
  op.row_start.push_back(0);
  std::vector<std::pair<Index, cplx>> buf;
  for (Index r = 0; r < dim; ++r) {
    buf.clear();
    for (const Bond& b : model.bonds) {
      const Index wa = weight[static_cast<std::size_t>(model.position(b.a))];
      const Index wb = weight[static_cast<std::size_t>(model.position(b.b))];
      const Index ra = (r / wa) % d, rb = (r / wb) % d;
      const Index base = r - ra * wa - rb * wb;
      for (Index ca = 0; ca < d; ++ca)
        for (Index cb = 0; cb < d; ++cb) {
          const cplx v = b.term(ra * d + rb, ca * d + cb);
          if (v != cplx(0.0)) buf.emplace_back(base + ca * wa + cb * wb, v);
        }
    }
    std::sort(buf.begin(), buf.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (std::size_t k = 0; k < buf.size();) {
      const Index c = buf[k].first;
      cplx v = 0.0;
      for (; k < buf.size() && buf[k].first == c; ++k) v += buf[k].second;
      if (v != cplx(0.0)) {
        op.cols.push_back(c);
        op.values.push_back(v);
      }
    }
    op.row_start.push_back(static_cast<Index>(op.values.size()));
  }
  return op;
}

namespace {

void fill_residuals(const SparseOperator& op, Eigenpairs& out) {
  Eigen::VectorXcd hv(op.dim);
  out.residuals.clear();
  for (Index c = 0; c < out.vectors.cols(); ++c) {
    op.apply(out.vectors.col(c).data(), hv.data());
    out.residuals.push_back((hv - out.values[static_cast<std::size_t>(c)] * out.vectors.col(c)).norm());
  }
}

Eigenpairs dense_lowest(const SparseOperator& op, int k) {
  Matrix a = op.to_dense();
  const Index n = op.dim;
  std::vector<double> w(static_cast<std::size_t>(n));
  Matrix z(n, k);
  std::vector<lapack_int> support(static_cast<std::size_t>(2 * n));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_zheevr(
      LAPACK_COL_MAJOR, 'V', 'I', 'U', n, reinterpret_cast<lapack_complex_double*>(a.data()), n, 0.0, 0.0, 1, k,
      0.0, &found, w.data(), reinterpret_cast<lapack_complex_double*>(z.data()), n, support.data());
  if (info != 0 || found != k) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(op.to_dense());
    Eigenpairs out;
    out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + k);
    out.vectors = es.eigenvectors().leftCols(k);
    return out;
  }
  Eigenpairs out;
  out.values.assign(w.begin(), w.begin() + k);
  out.vectors = z;
  return out;
}

void random_unit(Eigen::Ref<Eigen::VectorXcd> v, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  for (Index i = 0; i < v.size(); ++i) v(i) = cplx(gauss(rng), gauss(rng));
  v.normalize();
}

// Thick-restart Lanczos with full reorthogonalization (Krylov-Schur form for Hermitian operators).
Eigenpairs lanczos_lowest(const SparseOperator& op, int k, const LanczosOptions& opt) {
  const Index n = op.dim;
  const Index m = std::min<Index>(n, opt.basis_size > 0 ? opt.basis_size : std::max<Index>(2 * k + 20, 40));
  std::mt19937_64 rng(opt.seed);
  Matrix v(n, m + 1);
  Matrix t = Matrix::Zero(m, m);
  random_unit(v.col(0), rng);
  Index cur = 0;
  double hnorm = 0.0, best = std::numeric_limits<double>::infinity();
  Eigen::VectorXcd w(n);
  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    double beta = 0.0;
    for (Index j = cur; j < m; ++j) {
      op.apply(v.col(j).data(), w.data());
      Eigen::VectorXcd h = v.leftCols(j + 1).adjoint() * w;
      w -= v.leftCols(j + 1) * h;
      const Eigen::VectorXcd h2 = v.leftCols(j + 1).adjoint() * w;
      w -= v.leftCols(j + 1) * h2;
      h += h2;
      for (Index i = 0; i <= j; ++i) {
        t(i, j) = h(i);
        t(j, i) = std::conj(h(i));
      }
      t(j, j) = h(j).real();
      beta = w.norm();
      if (beta > 1e-14 * std::max(1.0, hnorm)) {
        v.col(j + 1) = w / beta;
      } else {
        beta = 0.0;
        Eigen::VectorXcd r(n);
        random_unit(r, rng);
        for (int pass = 0; pass < 2; ++pass) r -= v.leftCols(j + 1) * (v.leftCols(j + 1).adjoint() * r);
        v.col(j + 1) = r.normalized();
      }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(t);
    const Eigen::VectorXd& theta = es.eigenvalues();
    const Matrix& y = es.eigenvectors();
    hnorm = std::max({hnorm, std::abs(theta(0)), std::abs(theta(m - 1))});
    double worst = 0.0;
    for (int i = 0; i < k; ++i) worst = std::max(worst, beta * std::abs(y(m - 1, i)));
    best = std::min(best, worst);
    if (worst <= opt.rel_tol * hnorm || m == n) {
      Eigenpairs out;
      out.values.assign(theta.data(), theta.data() + k);
      out.vectors = v.leftCols(m) * y.leftCols(k);
      return out;
    }
    const Index keep = std::min<Index>(m - 1, k + (m - k) / 2);
    const Matrix kept = v.leftCols(m) * y.leftCols(keep);
    v.leftCols(keep) = kept;
    v.col(keep) = v.col(m);
    t.setZero();
    for (Index i = 0; i < keep; ++i) t(i, i) = theta(i);
    cur = keep;
  }
  throw ConvergenceError("lanczos did not converge", best);
}

}  // namespace

Eigenpairs lowest_eigenpairs(const SparseOperator& op, int k, const LanczosOptions& opt) {
  if (k < 1 || k > op.dim) throw ArgumentError("lowest_eigenpairs: k out of range");
  Eigenpairs out = op.dim <= opt.dense_limit ? dense_lowest(op, k) : lanczos_lowest(op, k, opt);
  fill_residuals(op, out);
  return out;
}

namespace {

Tensor slice_last(const Tensor& t, Index alpha) {
  const Index p = t.dim(t.rank() - 1);
  if (alpha < 0 || alpha >= p) throw ArgumentError("block index out of range");
  Shape s(t.shape().begin(), t.shape().end() - 1);
  Tensor out(s);
  for (Index k = 0; k < out.size(); ++k) out[k] = t[k * p + alpha];
  return out;
}

Tensor squeeze_unit(const Tensor& t, std::vector<int>& legs) {
  Shape s;
  std::vector<int> kept;
  for (int a = 0; a < t.rank(); ++a) {
    if (legs[static_cast<std::size_t>(a)] == -1) continue;
    s.push_back(t.dim(a));
    kept.push_back(legs[static_cast<std::size_t>(a)]);
  }
  legs = kept;
  return t.reshaped(s);
}

}  // namespace

std::vector<cplx> contract_to_vector(const BlockMps& m, Index alpha, Index cap) {
  validate(m);
  Index dim = 1;
  for (const Tensor& c : m.cores) {
    if (dim > cap / c.dim(1)) throw CapacityError("dense dimension exceeds the oracle cap");
    dim *= c.dim(1);
  }
  Tensor acc = Tensor::scalar(1.0).reshaped({1, 1});  // (phys so far, bond)
  for (std::size_t i = 0; i < m.length(); ++i) {
    const Tensor core = i == m.center ? slice_last(m.cores[i], alpha) : m.cores[i];
    Tensor next = contract(acc, core, {{1, 0}});
    acc = std::move(next).reshaped({acc.dim(0) * core.dim(1), core.dim(2)});
  }
  return acc.data();
}

std::vector<cplx> contract_to_vector(const BlockIsoPeps& s, Index alpha, Index cap) {
  const int n = s.lx * s.ly;
  checked_dimension(s.d, n, cap);
  // Leg ids: phys of site q -> q, bond below site q -> n + q, bond right of site q -> 2n + q, boundary -> -1.
  Tensor acc;
  std::vector<int> legs;
  for (int i = 0; i < s.lx; ++i)
    for (int j = 0; j < s.ly; ++j) {
      const int q = i * s.ly + j;
      Tensor site = (Site{i, j} == s.center) ? slice_last(s.at(i, j), alpha) : s.at(i, j);
      std::vector<int> site_legs{i > 0 ? -2 : -1, j > 0 ? -2 : -1, i + 1 < s.lx ? n + q : -1,
                                 j + 1 < s.ly ? 2 * n + q : -1, q};
      if (q == 0) {
        acc = squeeze_unit(site, site_legs);
        legs = site_legs;
        continue;
      }
      std::vector<std::pair<int, int>> pairs;
      for (std::size_t a = 0; a < legs.size(); ++a) {
        if (i > 0 && legs[a] == n + q - s.ly) pairs.push_back({static_cast<int>(a), ax::up});
        if (j > 0 && legs[a] == 2 * n + q - 1) pairs.push_back({static_cast<int>(a), ax::left});
      }
      Tensor next = contract(acc, site, pairs);
      std::vector<int> next_legs;
      for (std::size_t a = 0; a < legs.size(); ++a) {
        bool paired = false;
        for (auto [x, y] : pairs) paired |= x == static_cast<int>(a);
        if (!paired) next_legs.push_back(legs[a]);
      }
      for (int a = 0; a < 5; ++a) {
        bool paired = false;
        for (auto [x, y] : pairs) paired |= y == a;
        if (!paired) next_legs.push_back(site_legs[static_cast<std::size_t>(a)]);
      }
      legs = next_legs;
      acc = squeeze_unit(next, legs);
    }
  Axes order(static_cast<std::size_t>(n));
  for (std::size_t a = 0; a < legs.size(); ++a) {
    const int q = legs[a];
    order[static_cast<std::size_t>(s.label[static_cast<std::size_t>(q)])] = static_cast<int>(a);
  }
  return permute(acc, order).data();
}

}  // namespace bpeps
