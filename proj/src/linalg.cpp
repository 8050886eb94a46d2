#include "bpeps/linalg.hpp"

#include <lapacke.h>

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace bpeps {

namespace {

lapack_complex_double* lp(cplx* p) { return reinterpret_cast<lapack_complex_double*>(p); }

bool lapack_svd(RowMatrix work, MatrixSvd& out, bool divide_conquer) {
  const Index m = work.rows(), n = work.cols(), k = std::min(m, n);
  out.u.resize(m, k);
  out.vh.resize(k, n);
  out.s.assign(static_cast<std::size_t>(k), 0.0);
  lapack_int info;
  if (divide_conquer) {
    info = LAPACKE_zgesdd(LAPACK_ROW_MAJOR, 'S', m, n, lp(work.data()), n, out.s.data(),
                          lp(out.u.data()), k, lp(out.vh.data()), n);
  } else {
    std::vector<double> superb(static_cast<std::size_t>(std::max<Index>(k, 1)));
    info = LAPACKE_zgesvd(LAPACK_ROW_MAJOR, 'S', 'S', m, n, lp(work.data()), n, out.s.data(),
                          lp(out.u.data()), k, lp(out.vh.data()), n, superb.data());
  }
  return info == 0;
}

}  // namespace

MatrixSvd thin_svd(const Eigen::Ref<const RowMatrix>& a) {
  MatrixSvd out;
  if (lapack_svd(a, out, true) || lapack_svd(a, out, false)) return out;
  Eigen::JacobiSVD<Matrix> svd(Matrix(a), Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.u = svd.matrixU();
  out.vh = svd.matrixV().adjoint();
  const auto& sv = svd.singularValues();
  out.s.assign(sv.data(), sv.data() + sv.size());
  return out;
}

std::vector<double> singular_values(const Eigen::Ref<const RowMatrix>& a) {
  RowMatrix work = a;
  const Index m = work.rows(), n = work.cols(), k = std::min(m, n);
  std::vector<double> s(static_cast<std::size_t>(k));
  cplx dummy;
  lapack_int info = LAPACKE_zgesdd(LAPACK_ROW_MAJOR, 'N', m, n, lp(work.data()), n, s.data(),
                                   lp(&dummy), 1, lp(&dummy), std::max<Index>(1, n));
  if (info == 0) return s;
  return thin_svd(a).s;
}

MatrixQr thin_qr(const Eigen::Ref<const RowMatrix>& a) {
  const Index m = a.rows(), n = a.cols(), k = std::min(m, n);
  Eigen::HouseholderQR<Matrix> qr{Matrix(a)};
  MatrixQr out;
  out.q = qr.householderQ() * Matrix::Identity(m, k);
  out.r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Index i = 0; i < k; ++i) {
    const double mag = std::abs(out.r(i, i));
    if (mag == 0.0) continue;
    const cplx phase = out.r(i, i) / mag;
    out.q.col(i) *= phase;
    out.r.row(i) *= std::conj(phase);
  }
  return out;
}

RowMatrix orthonormal_complement(const RowMatrix& q, Index count, std::mt19937_64& rng) {
  const Index m = q.rows();
  if (q.cols() + count > m) throw ArgumentError("orthonormal_complement: not enough room");
  std::normal_distribution<double> gauss;
  RowMatrix out(m, count);
  for (Index c = 0; c < count; ++c) {
    Eigen::VectorXcd v(m);
    for (;;) {
      for (Index i = 0; i < m; ++i) v(i) = cplx(gauss(rng), gauss(rng));
      for (int pass = 0; pass < 2; ++pass) {
        v -= q * (q.adjoint() * v);
        if (c > 0) v -= out.leftCols(c) * (out.leftCols(c).adjoint() * v);
      }
      const double nv = v.norm();
      if (nv > 1e-8) {
        out.col(c) = v / nv;
        break;
      }
    }
  }
  return out;
}

}  // namespace bpeps
