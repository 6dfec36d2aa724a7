#pragma once

#include <vector>

#include "bcm/signal.hpp"

namespace bcm {

struct Interval {
  double alpha = 0.0;
  double beta = 1.0;
  double length() const { return beta - alpha; }
};

/// User-facing discretization knobs; SimGrid derives the actual lattice.
struct GridSpec {
  Interval sigma;
  double T = 1.0;
  double h = 0.02;
  double cfl_ratio = 0.5;  // dt = cfl_ratio * h / sqrt(2), rounded down so T is a node
  double margin = -1.0;    // extra length beyond 2T; negative selects 10 h
};

/// Truncated half-plane lattice. Nodes (i, j) sit at (x0 + i h, j h); row
/// j = 0 is the boundary y = 0 and sigma occupies i_alpha .. i_alpha + n_sigma.
/// The remaining three edges are held at zero and lie further than 2T from
/// sigma, so they are never reached on [0, 2T].
class SimGrid {
 public:
  /// Throws CflViolation if cfl_ratio > 1, EmptySigma if |sigma| <= 0.
  explicit SimGrid(const GridSpec& spec);

  double h() const { return h_; }
  double dt() const { return dt_; }
  double T() const { return T_; }
  const Interval& sigma() const { return sigma_; }
  Index nx() const { return nx_; }
  Index ny() const { return ny_; }
  Index steps_per_T() const { return steps_T_; }
  Index sigma_offset() const { return i_alpha_; }
  Index sigma_nodes() const { return n_sigma_ + 1; }
  double x(Index i) const { return x0_ + static_cast<double>(i) * h_; }
  double y(Index j) const { return static_cast<double>(j) * h_; }
  double dist_to_sigma(double x, double y) const;

  /// Boundary lattice on sigma x [0, T] and sigma x [0, 2T].
  SignalGrid control_grid() const;
  SignalGrid extended_grid() const;

 private:
  Interval sigma_;
  double T_ = 0.0;
  double h_ = 0.0;
  double dt_ = 0.0;
  double x0_ = 0.0;
  Index steps_T_ = 0;
  Index n_sigma_ = 0;
  Index i_alpha_ = 0;
  Index nx_ = 0;
  Index ny_ = 0;
};

/// Reduced sound velocity rho sampled on the nodes of a SimGrid; values(i, j).
class VelocityField {
 public:
  /// Throws NegativeDensity on non-positive or non-finite samples.
  VelocityField(const SimGrid& grid, Matrix values);

  static VelocityField constant(const SimGrid& grid, double value = 1.0);
  /// Smooth two-layer profile rho_top -> rho_bottom across y = depth.
  static VelocityField layered(const SimGrid& grid, double rho_top, double rho_bottom, double depth,
                               double width);
  /// 1 + amplitude * exp(-|p - c|^2 / radius^2).
  static VelocityField gaussian(const SimGrid& grid, double amplitude, double xc, double yc,
                                double radius);

  const Matrix& values() const { return values_; }
  double operator()(Index i, Index j) const { return values_(i, j); }
  /// rho(x, 0) on the sigma nodes.
  Vector boundary_rho(const SimGrid& grid) const;

 private:
  Matrix values_;
};

struct ForwardOptions {
  std::vector<double> snapshot_times;  // frames kept, rounded to the nearest step
  bool keep_all_frames = false;
};

/// Output of one simulation. The y = 0 row is recorded at every step;
/// full frames only at requested snapshots.
struct WaveHistory {
  double h = 0.0;
  double dt = 0.0;
  Index nx = 0;
  Index ny = 0;
  Index steps = 0;
  Matrix boundary_row;  // (nx, steps + 1)
  std::vector<Index> frame_steps;
  std::vector<Matrix> frames;  // (nx, ny) each
  double peak = 0.0;           // max |u| over all steps and nodes

  /// Throws InvalidArgument if no frame was stored at t.
  const Matrix& frame_at(double t) const;
};

WaveHistory solve_forward(const VelocityField& rho, const SampledSignal& f, const SimGrid& grid,
                          double t_end, const ForwardOptions& options = {});

/// u(x, 0, t) on sigma x [0, t_end].
ExtendedControl boundary_trace(const WaveHistory& history, const SimGrid& grid, double t_end);

/// J R f for a source on sigma x [0, 2T].
ExtendedControl apply_m2t(const VelocityField& rho, const ExtendedControl& f, const SimGrid& grid);

/// max |u(p, t)| over nodes with dist(p, sigma) > t + 3h.
double finite_speed_violation(const WaveHistory& history, const SimGrid& grid, double t);

}  // namespace bcm
