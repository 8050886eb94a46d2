#include "bpeps/models.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace bpeps {

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

std::vector<std::pair<Site, Site>> lattice_bonds(int lx, int ly) {
  if (lx < 1 || ly < 1 || lx * ly < 2) throw ArgumentError("lattice needs at least one bond");
  std::vector<std::pair<Site, Site>> out;
  for (int j = 0; j < ly; ++j)
    for (int i = 0; i + 1 < lx; ++i) out.push_back({{i, j}, {i + 1, j}});
  for (int i = 0; i < lx; ++i)
    for (int j = 0; j + 1 < ly; ++j) out.push_back({{i, j}, {i, j + 1}});
  return out;
}

int lattice_degree(int lx, int ly, Site s) {
  return (s.i > 0) + (s.i + 1 < lx) + (s.j > 0) + (s.j + 1 < ly);
}

}  // namespace

int ModelSpec::degree(Site s) const { return lattice_degree(lx, ly, s); }

Matrix pauli(char c) {
  Matrix m(2, 2);
  switch (c) {
    case 'x': m << 0, 1, 1, 0; break;
    case 'y': m << 0, cplx(0, -1), cplx(0, 1), 0; break;
    case 'z': m << 1, 0, 0, -1; break;
    case 'i': m = Matrix::Identity(2, 2); break;
    default: throw ArgumentError("unknown Pauli label");
  }
  return m;
}

ModelSpec tfi_model(int lx, int ly, double g) {
  ModelSpec m;
  m.kind = "tfi";
  m.lx = lx;
  m.ly = ly;
  m.g = g;
  const Matrix id = pauli('i');
  for (auto [a, b] : lattice_bonds(lx, ly)) {
    Bond bond{a, b, Matrix(), {1, lattice_degree(lx, ly, a)}, {1, lattice_degree(lx, ly, b)}};
    bond.term = -kron(pauli('z'), pauli('z')) -
                g * (bond.weight_a.value() * kron(pauli('x'), id) + bond.weight_b.value() * kron(id, pauli('x')));
    m.bonds.push_back(std::move(bond));
  }
  return m;
}

ModelSpec heisenberg_model(int lx, int ly) {
  ModelSpec m;
  m.kind = "heisenberg";
  m.lx = lx;
  m.ly = ly;
  const Matrix term = kron(pauli('x'), pauli('x')) + kron(pauli('y'), pauli('y')) + kron(pauli('z'), pauli('z'));
  for (auto [a, b] : lattice_bonds(lx, ly)) m.bonds.push_back({a, b, term, {0, 1}, {0, 1}});
  return m;
}

Tensor Gate::tensor(int d) const {
  const RowMatrix rm = g_matrix;
  return Tensor::from_matrix(rm, {d, d, d, d});
}

Matrix hermitian_exp(const Matrix& h, double tau) {
  const double scale = std::max(1.0, h.norm());
  if ((h - h.adjoint()).norm() > 1e-12 * scale) throw InvariantError("bond term is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()));
  const Eigen::VectorXd w = (-tau * es.eigenvalues().array()).exp();
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix swap_factors(const Matrix& m, int d) {
  const Index n = static_cast<Index>(d) * d;
  if (m.rows() != n || m.cols() != n) throw ArgumentError("swap_factors: not a two-site operator");
  Matrix out(n, n);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) out(b * d + a, e * d + c) = m(a * d + b, c * d + e);
  return out;
}

std::vector<BondGate> make_gates(const ModelSpec& model, double tau) {
  if (!(tau >= 0.0)) throw ArgumentError("tau must be nonnegative");
  std::vector<BondGate> out;
  out.reserve(model.bonds.size());
  for (std::size_t k = 0; k < model.bonds.size(); ++k)
    out.push_back({k, Gate{tau, hermitian_exp(model.bonds[k].term, tau)}});
  return out;
}

}  // namespace bpeps
