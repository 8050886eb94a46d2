#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "bpeps/tensor.hpp"

namespace bpeps {

struct Site {
  int i = 0;
  int j = 0;
  friend bool operator==(const Site&, const Site&) = default;
};

struct Rational {
  long num = 0;
  long den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct Bond {
  Site a, b;
  Matrix term;  // d^2 x d^2 Hermitian, a's factor first
  Rational weight_a, weight_b;  // share of the single-site field carried by this bond
};

struct ModelSpec {
  std::string kind;
  int lx = 0, ly = 0, d = 2;
  double g = 0.0;
  std::vector<Bond> bonds;

  int position(Site s) const { return s.i * ly + s.j; }
  int degree(Site s) const;
};

// Bonds ordered: vertical ones column by column (j outer, i inner), then horizontal ones row by row.
ModelSpec tfi_model(int lx, int ly, double g);
ModelSpec heisenberg_model(int lx, int ly);

struct Gate {
  double tau = 0.0;
  Matrix g_matrix;  // exp(-tau h), rows and columns indexed by (s_a, s_b)
  Tensor tensor(int d) const;  // (out_a, out_b, in_a, in_b)
};

struct BondGate {
  std::size_t bond = 0;
  Gate gate;
};

Matrix pauli(char c);
Matrix hermitian_exp(const Matrix& h, double tau);
// Same two-site operator with the factor order of the pair exchanged.
Matrix swap_factors(const Matrix& m, int d);
std::vector<BondGate> make_gates(const ModelSpec& model, double tau);

}  // namespace bpeps
