#include "bcm/control_ops.hpp"

#include <cmath>

#include "bcm/error.hpp"

namespace bcm {

namespace {

void require_same(const SignalGrid& a, const SignalGrid& b) {
  if (!a.same_as(b)) throw Error(Errc::grid_mismatch, "controls live on different lattices");
}

// Spatial node count on sigma x [0, T] for an extended lattice with 2K + 1 nodes.
Index half_nodes(const SignalGrid& g) {
  if (g.nt < 1 || (g.nt - 1) % 2 != 0) {
    throw Error(Errc::grid_mismatch, "extended control needs an even number of time steps");
  }
  return (g.nt - 1) / 2;
}

}  // namespace

Vector trapezoid_weights(Index n, double d) {
  Vector w = Vector::Constant(n, d);
  if (n == 1) {
    w(0) = 0.0;
  } else if (n > 1) {
    w(0) = w(n - 1) = 0.5 * d;
  }
  return w;
}

double inner_product_outer(const SampledSignal& f, const SampledSignal& g, const Vector& boundary_rho) {
  require_same(f.grid, g.grid);
  if (boundary_rho.size() != f.grid.nx) {
    throw Error(Errc::grid_mismatch, "boundary weight length differs from sigma nodes");
  }
  const Vector wx = trapezoid_weights(f.grid.nx, f.grid.dx).cwiseProduct(boundary_rho);
  const Vector wt = trapezoid_weights(f.grid.nt, f.grid.dt);
  return wx.dot(f.values.cwiseProduct(g.values) * wt);
}

double inner_product_plain(const SampledSignal& f, const SampledSignal& g) {
  return inner_product_outer(f, g, Vector::Ones(f.grid.nx));
}

ExtendedControl odd_extend(const Control& f) {
  const Index k = f.grid.nt - 1;
  SignalGrid g = f.grid;
  g.nt = 2 * k + 1;
  ExtendedControl out(g);
  for (Index n = 0; n < k; ++n) {
    out.values.col(n) = f.values.col(n);
    out.values.col(2 * k - n) = -f.values.col(n);
  }
  out.values.col(k).setZero();
  return out;
}

ExtendedControl time_integrate(const ExtendedControl& f) {
  // Neumaier-compensated running sums: the rounding error does not grow with
  // the step count, and J(1) reproduces the node times n*dt bit for bit.
  ExtendedControl out(f.grid);
  const double half = 0.5 * f.grid.dt;
  for (Index a = 0; a < f.grid.nx; ++a) {
    double sum = 0.0;
    double carry = 0.0;
    for (Index n = 1; n < f.grid.nt; ++n) {
      const double inc = half * (f.values(a, n - 1) + f.values(a, n));
      const double t = sum + inc;
      carry += std::abs(sum) >= std::abs(inc) ? (sum - t) + inc : (inc - t) + sum;
      sum = t;
      out.values(a, n) = sum + carry;
    }
  }
  return out;
}

ExtendedControl odd_part(const ExtendedControl& f) {
  const Index last = f.grid.nt - 1;
  ExtendedControl out(f.grid);
  for (Index n = 0; n <= last; ++n) {
    out.values.col(n) = 0.5 * (f.values.col(n) - f.values.col(last - n));
  }
  return out;
}

Control restrict_to_T(const ExtendedControl& f) {
  const Index k = half_nodes(f.grid);
  SignalGrid g = f.grid;
  g.nt = k + 1;
  return Control(g, f.values.leftCols(k + 1));
}

Control apply_ct(const VelocityField& rho, const Control& f, const SimGrid& grid) {
  require_same(f.grid, grid.control_grid());
  return restrict_to_T(odd_part(apply_m2t(rho, odd_extend(f), grid)));
}

double wave_mass(const VelocityField& rho, const Matrix& frame, const SimGrid& grid) {
  double sum = 0.0;
  for (Index j = 0; j < grid.ny(); ++j) {
    const double wy = j == 0 ? 0.5 : 1.0;
    for (Index i = 0; i < grid.nx(); ++i) {
      if (grid.dist_to_sigma(grid.x(i), grid.y(j)) < grid.T()) sum += wy * rho(i, j) * frame(i, j);
    }
  }
  return sum * grid.h() * grid.h();
}

double ct_form_oracle(const VelocityField& rho, const Control& f, const Control& g, const SimGrid& grid) {
  require_same(f.grid, grid.control_grid());
  require_same(g.grid, grid.control_grid());
  ForwardOptions opt;
  opt.snapshot_times = {grid.T()};
  const Matrix uf = solve_forward(rho, f, grid, grid.T(), opt).frame_at(grid.T());
  const Matrix ug = solve_forward(rho, g, grid, grid.T(), opt).frame_at(grid.T());
  return wave_mass(rho, uf.cwiseProduct(ug), grid);
}

KappaProfile make_kappa(const SimGrid& grid) {
  if (!(grid.T() > 0.0)) throw Error(Errc::invalid_argument, "T must be positive");
  const SignalGrid cg = grid.control_grid();
  const SignalGrid eg = grid.extended_grid();
  KappaProfile k{Control(cg), ExtendedControl(eg)};
  for (Index n = 0; n < cg.nt; ++n) k.kappa.values.col(n).setConstant(grid.T() - cg.t(n));
  for (Index n = 0; n < eg.nt; ++n) k.extended.values.col(n).setConstant(grid.T() - eg.t(n));
  return k;
}

}  // namespace bcm
