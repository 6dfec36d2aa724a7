#pragma once

#include <optional>
#include <string>

#include "bcm/block_toeplitz.hpp"
#include "bcm/control_ops.hpp"

namespace bcm {

enum class SourceShape { constant, hat, bump };

SourceShape parse_shape(const std::string& name);
const char* shape_name(SourceShape shape);

/// Unit profile phi on [0, 1]; the basic source is
/// g(x, t) = amplitude * phi(x / eps) * phi(t / delta) on [0, eps] x [0, delta].
/// The constant profile takes the value 1/2 on the cell edges so that
/// neighbouring translates sum to one on shared nodes.
double shape_profile(SourceShape shape, double s);
/// Integral of shape_profile over [0, 1].
double shape_integral(SourceShape shape);

struct SourceLattice {
  Index M = 1;
  Index N = 1;
  double eps = 1.0;
  double delta = 1.0;
  Interval sigma;
  double T = 1.0;
  SourceShape shape = SourceShape::hat;
  double amplitude = 1.0;

  /// g_j^i(x, t) = g(x - alpha - j eps, t - i delta).
  double value(Index j, Index i, double x, double t) const;
  /// g_j^i on the given boundary lattice.
  ExtendedControl sample(Index j, Index i, const SignalGrid& grid) const;
};

/// Throws EmptySigma for |sigma| <= 0, InvalidArgument for M, N < 1 or T <= 0.
SourceLattice build_lattice(Index M, Index N, const Interval& sigma, double T,
                            SourceShape shape = SourceShape::hat);

struct GramOptions {
  bool full_table = false;        // also simulate every g_j^i independently
  bool require_positive = false;  // throw NonPositiveGram on a negative eigenvalue
  double positivity_tol = 1e-10;  // relative to max |G|
  int threads = 1;
};

struct GramAssembly {
  BlockToeplitz G;
  RowVector B;
  std::optional<Matrix> full_entries;  // rows i*M + j, columns k*M + l
  double block_asymmetry = 0.0;        // max |gamma_m - gamma_m^T| / max |G| before symmetrization
  double min_eigenvalue = 0.0;         // of the expanded matrix
  Index negative_eigenvalues = 0;
  Index simulations = 0;
};

/// Entries ([M + M^*] g_j^0, g_l^m) of the first block row, with the response
/// to g_j^i taken as the i*delta time shift of the response to g_j^0, so only
/// M simulations are run. Blocks are symmetrized afterwards.
GramAssembly assemble_gram(const VelocityField& rho, const SourceLattice& lattice, const SimGrid& grid,
                           const GramOptions& options = {});

/// beta_l^k = 4 int (T - t) g_l^k dx dt, evaluated exactly; ordered k*M + l.
RowVector assemble_rhs(const SourceLattice& lattice, double T);

/// max |G^{ik}_{jl} - G^{(i+1)(k+1)}_{jl}| / max |G| over a full entry table.
double toeplitz_deviation(const Matrix& full_entries, Index M, Index N);

/// Linear combination sum c_j^i g_j^i on the lattice, c ordered i*M + j.
ExtendedControl combine_sources(const SourceLattice& lattice, const RowVector& c, const SignalGrid& grid);

}  // namespace bcm
