#pragma once

#include <cmath>

#include "bcm/block_toeplitz.hpp"

namespace bcm {

/// Sampling lattice of a boundary signal: nodes x_a = x0 + a*dx on sigma and
/// t_n = n*dt, both including their end points.
struct SignalGrid {
  double x0 = 0.0;
  double dx = 1.0;
  Index nx = 0;
  double dt = 1.0;
  Index nt = 0;

  double x(Index a) const { return x0 + static_cast<double>(a) * dx; }
  double t(Index n) const { return static_cast<double>(n) * dt; }
  double t_end() const { return static_cast<double>(nt - 1) * dt; }

  bool same_space(const SignalGrid& o) const {
    return nx == o.nx && std::abs(x0 - o.x0) <= 1e-12 * (1.0 + std::abs(x0)) &&
           std::abs(dx - o.dx) <= 1e-12 * dx;
  }
  bool same_as(const SignalGrid& o) const {
    return same_space(o) && nt == o.nt && std::abs(dt - o.dt) <= 1e-12 * dt;
  }
};

/// Boundary source or trace sampled on sigma x [0, t_end]; values(a, n).
struct SampledSignal {
  SignalGrid grid;
  Matrix values;

  SampledSignal() = default;
  SampledSignal(const SignalGrid& g, Matrix v) : grid(g), values(std::move(v)) {}
  explicit SampledSignal(const SignalGrid& g) : grid(g), values(Matrix::Zero(g.nx, g.nt)) {}

  /// Piecewise-linear in time; zero outside [0, t_end].
  double at(Index a, double t) const;
};

/// Element of the outer space on sigma x [0, T].
struct Control : SampledSignal {
  using SampledSignal::SampledSignal;
};

/// Element of the doubled-horizon space on sigma x [0, 2T].
struct ExtendedControl : SampledSignal {
  using SampledSignal::SampledSignal;
};

}  // namespace bcm
