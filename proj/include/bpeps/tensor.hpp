#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "bpeps/errors.hpp"

namespace bpeps {

using cplx = std::complex<double>;
using Index = std::ptrdiff_t;
using Shape = std::vector<Index>;
using Axes = std::vector<int>;
using RowMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Index kUnbounded = std::numeric_limits<Index>::max();

// Dense complex tensor, row-major over the axis order.
class Tensor {
 public:
  Tensor();
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<cplx> data);

  static Tensor from_matrix(const RowMatrix& m, Shape shape);
  static Tensor scalar(cplx v);
  static Tensor identity(Index n);
  static Tensor random(Shape shape, std::mt19937_64& rng);

  int rank() const { return static_cast<int>(shape_.size()); }
  const Shape& shape() const { return shape_; }
  Index dim(int axis) const { return shape_.at(static_cast<std::size_t>(axis)); }
  Index size() const { return static_cast<Index>(data_.size()); }

  const std::vector<cplx>& data() const { return data_; }
  cplx* raw() { return data_.data(); }
  const cplx* raw() const { return data_.data(); }

  cplx& operator[](Index k) { return data_[static_cast<std::size_t>(k)]; }
  cplx operator[](Index k) const { return data_[static_cast<std::size_t>(k)]; }
  cplx& at(std::initializer_list<Index> idx);
  cplx at(std::initializer_list<Index> idx) const;

  Tensor reshaped(Shape shape) const&;
  Tensor reshaped(Shape shape) &&;

  // View of the data as a prod(shape[:split]) x prod(shape[split:]) matrix.
  Eigen::Map<const RowMatrix> matrix(int split) const;
  Eigen::Map<RowMatrix> matrix(int split);

  double norm() const;
  Tensor conj() const;
  Tensor& operator*=(cplx s);
  Tensor& operator+=(const Tensor& o);
  Tensor& operator-=(const Tensor& o);

 private:
  struct Unchecked {};
  Tensor(Unchecked, Shape shape, std::vector<cplx> data);
  friend Tensor make_unchecked(Shape shape, std::vector<cplx> data);

  Index offset(std::initializer_list<Index> idx) const;

  Shape shape_;
  std::vector<cplx> data_;
};

Tensor make_unchecked(Shape shape, std::vector<cplx> data);

Tensor operator*(cplx s, Tensor t);
Tensor operator+(Tensor a, const Tensor& b);
Tensor operator-(Tensor a, const Tensor& b);

Index product(const Shape& shape, std::size_t begin = 0, std::size_t end = std::size_t(-1));
bool is_finite(const Tensor& t);

Tensor permute(const Tensor& a, const Axes& order);

// Result axes: unpaired axes of a, then unpaired axes of b, each in original order.
Tensor contract(const Tensor& a, const Tensor& b, const std::vector<std::pair<int, int>>& pairs);

cplx inner(const Tensor& a, const Tensor& b);  // sum conj(a) * b

struct TruncationSpec {
  Index max_rank = kUnbounded;
  double rel_tol = 0.0;
};

struct TruncationReport {
  Index kept_rank = 0;
  double discarded_weight = 0.0;
};

// Kept rank for descending singular values under spec.
TruncationReport choose_rank(const std::vector<double>& s, const TruncationSpec& spec);

struct SvdSplit {
  Tensor u;  // left axes..., bond
  std::vector<double> s;
  Tensor v;  // bond, right axes...
  TruncationReport report;
};

struct QrSplit {
  Tensor q;  // left axes..., bond (isometric)
  Tensor r;  // bond, right axes...
};

struct LqSplit {
  Tensor l;  // left axes..., bond
  Tensor q;  // bond, right axes... (isometric)
};

// Right axes are the complement of left_axes in ascending order.
SvdSplit svd_split(const Tensor& a, const Axes& left_axes, const TruncationSpec& spec = {});
QrSplit qr_split(const Tensor& a, const Axes& left_axes);
LqSplit lq_split(const Tensor& a, const Axes& left_axes);

// Scale the bond axis (axis `axis` of t) by s.
Tensor scale_axis(const Tensor& t, int axis, const std::vector<double>& s);

// ||T^H T - I|| where the contraction runs over in_axes and the identity lives on the rest.
double isometry_deviation(const Tensor& t, const Axes& in_axes);

}  // namespace bpeps
