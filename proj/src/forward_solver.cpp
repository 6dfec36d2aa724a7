#include "bcm/forward_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bcm/control_ops.hpp"
#include "bcm/error.hpp"

namespace bcm {

double SampledSignal::at(Index a, double t) const {
  if (t < 0.0 || grid.nt == 0) return 0.0;
  const double s = t / grid.dt;
  const auto n = static_cast<Index>(std::floor(s));
  if (n >= grid.nt - 1) {
    return n == grid.nt - 1 && s - static_cast<double>(n) < 1e-9 ? values(a, n) : 0.0;
  }
  const double w = s - static_cast<double>(n);
  return (1.0 - w) * values(a, n) + w * values(a, n + 1);
}

SimGrid::SimGrid(const GridSpec& spec) : sigma_(spec.sigma), T_(spec.T) {
  if (!(sigma_.length() > 0.0)) {
    throw Error(Errc::empty_sigma, "sigma must have positive length");
  }
  if (!(spec.T > 0.0) || !(spec.h > 0.0)) {
    throw Error(Errc::invalid_argument, "T and h must be positive");
  }
  if (!(spec.cfl_ratio > 0.0) || spec.cfl_ratio > 1.0) {
    throw Error(Errc::cfl_violation,
                "dt = " + std::to_string(spec.cfl_ratio) + " * h/sqrt(2) breaks dt <= h/sqrt(2)");
  }
  n_sigma_ = std::max<Index>(1, static_cast<Index>(std::ceil(sigma_.length() / spec.h - 1e-9)));
  h_ = sigma_.length() / static_cast<double>(n_sigma_);
  const double dt_max = spec.cfl_ratio * h_ / std::sqrt(2.0);
  steps_T_ = static_cast<Index>(std::ceil(T_ / dt_max - 1e-9));
  dt_ = T_ / static_cast<double>(steps_T_);

  const double extra = spec.margin >= 0.0 ? spec.margin : 10.0 * h_;
  const auto margin_cells = static_cast<Index>(std::ceil((2.0 * T_ + extra) / h_)) + 1;
  i_alpha_ = margin_cells;
  x0_ = sigma_.alpha - static_cast<double>(margin_cells) * h_;
  nx_ = n_sigma_ + 1 + 2 * margin_cells;
  ny_ = margin_cells + 1;
}

double SimGrid::dist_to_sigma(double x, double y) const {
  const double dx = std::max({sigma_.alpha - x, 0.0, x - sigma_.beta});
  return std::hypot(dx, y);
}

SignalGrid SimGrid::control_grid() const {
  return SignalGrid{sigma_.alpha, h_, sigma_nodes(), dt_, steps_T_ + 1};
}

SignalGrid SimGrid::extended_grid() const {
  return SignalGrid{sigma_.alpha, h_, sigma_nodes(), dt_, 2 * steps_T_ + 1};
}

VelocityField::VelocityField(const SimGrid& grid, Matrix values) : values_(std::move(values)) {
  if (values_.rows() != grid.nx() || values_.cols() != grid.ny()) {
    throw Error(Errc::grid_mismatch, "velocity samples do not match the simulation grid");
  }
  if (!values_.allFinite() || !(values_.minCoeff() > 0.0)) {
    throw Error(Errc::negative_density, "rho must be positive everywhere");
  }
}

VelocityField VelocityField::constant(const SimGrid& grid, double value) {
  return VelocityField(grid, Matrix::Constant(grid.nx(), grid.ny(), value));
}

VelocityField VelocityField::layered(const SimGrid& grid, double rho_top, double rho_bottom,
                                     double depth, double width) {
  Matrix v(grid.nx(), grid.ny());
  for (Index j = 0; j < grid.ny(); ++j) {
    const double s = 0.5 * (1.0 + std::tanh((grid.y(j) - depth) / width));
    v.col(j).setConstant(rho_top + (rho_bottom - rho_top) * s);
  }
  return VelocityField(grid, std::move(v));
}

VelocityField VelocityField::gaussian(const SimGrid& grid, double amplitude, double xc, double yc,
                                      double radius) {
  Matrix v(grid.nx(), grid.ny());
  for (Index i = 0; i < grid.nx(); ++i) {
    for (Index j = 0; j < grid.ny(); ++j) {
      const double dx = grid.x(i) - xc;
      const double dy = grid.y(j) - yc;
      v(i, j) = 1.0 + amplitude * std::exp(-(dx * dx + dy * dy) / (radius * radius));
    }
  }
  return VelocityField(grid, std::move(v));
}

Vector VelocityField::boundary_rho(const SimGrid& grid) const {
  return values_.col(0).segment(grid.sigma_offset(), grid.sigma_nodes());
}

const Matrix& WaveHistory::frame_at(double t) const {
  const auto step = static_cast<Index>(std::llround(t / dt));
  for (std::size_t k = 0; k < frame_steps.size(); ++k) {
    if (frame_steps[k] == step) return frames[k];
  }
  throw Error(Errc::invalid_argument, "no frame stored at t = " + std::to_string(t));
}

namespace {

// Centered derivatives of ln rho; one-sided second order at the edges.
void log_gradient(const VelocityField& rho, double h, Matrix& ax, Matrix& ay) {
  const Matrix lr = rho.values().array().log().matrix();
  const Index nx = lr.rows();
  const Index ny = lr.cols();
  ax.setZero(nx, ny);
  ay.setZero(nx, ny);
  for (Index j = 0; j < ny; ++j) {
    for (Index i = 1; i + 1 < nx; ++i) ax(i, j) = (lr(i + 1, j) - lr(i - 1, j)) / (2.0 * h);
  }
  for (Index i = 0; i < nx; ++i) {
    ay(i, 0) = (-3.0 * lr(i, 0) + 4.0 * lr(i, 1) - lr(i, 2)) / (2.0 * h);
    for (Index j = 1; j + 1 < ny; ++j) ay(i, j) = (lr(i, j + 1) - lr(i, j - 1)) / (2.0 * h);
  }
}

}  // namespace

WaveHistory solve_forward(const VelocityField& rho, const SampledSignal& f, const SimGrid& grid,
                          double t_end, const ForwardOptions& options) {
  const SignalGrid sg = f.grid;
  const SignalGrid cg = grid.control_grid();
  if (!sg.same_space(cg)) {
    throw Error(Errc::grid_mismatch, "control is not sampled on the sigma nodes of the grid");
  }
  if (sg.dt > grid.h() / std::sqrt(2.0) * (1.0 + 1e-12) || grid.dt() > grid.h() / std::sqrt(2.0) * (1.0 + 1e-12)) {
    throw Error(Errc::cfl_violation, "time step exceeds h/sqrt(2)");
  }
  if (rho.values().rows() != grid.nx() || rho.values().cols() != grid.ny()) {
    throw Error(Errc::grid_mismatch, "velocity field does not match the simulation grid");
  }

  const Index nx = grid.nx();
  const Index ny = grid.ny();
  const double h = grid.h();
  const double dt = grid.dt();
  const auto steps = static_cast<Index>(std::llround(t_end / dt));
  const bool aligned = std::abs(sg.dt - dt) <= 1e-12 * dt;

  Matrix ax, ay;
  log_gradient(rho, h, ax, ay);

  WaveHistory out;
  out.h = h;
  out.dt = dt;
  out.nx = nx;
  out.ny = ny;
  out.steps = steps;
  out.boundary_row = Matrix::Zero(nx, steps + 1);

  std::vector<Index> wanted;
  for (double t : options.snapshot_times) wanted.push_back(static_cast<Index>(std::llround(t / dt)));
  const auto keep = [&](Index n) {
    return options.keep_all_frames || std::find(wanted.begin(), wanted.end(), n) != wanted.end();
  };

  Matrix prev = Matrix::Zero(nx, ny);
  Matrix cur = Matrix::Zero(nx, ny);
  Matrix next = Matrix::Zero(nx, ny);
  Vector flux(nx);
  const Index off = grid.sigma_offset();
  const double inv_h2 = 1.0 / (h * h);
  const double inv_2h = 0.5 / h;
  const double dt2 = dt * dt;

  if (keep(0)) {
    out.frame_steps.push_back(0);
    out.frames.push_back(cur);
  }

  for (Index n = 0; n < steps; ++n) {
    flux.setZero();
    for (Index a = 0; a < sg.nx; ++a) {
      flux(off + a) = aligned ? (n < sg.nt ? f.values(a, n) : 0.0) : f.at(a, static_cast<double>(n) * dt);
    }
    const double c_new = n == 0 ? 0.5 * dt2 : dt2;
    for (Index j = 0; j + 1 < ny; ++j) {
      for (Index i = 1; i + 1 < nx; ++i) {
        const double c = cur(i, j);
        const double up = cur(i, j + 1);
        // ghost row: u(x, -h) = u(x, h) - 2 h f
        const double down = j == 0 ? up - 2.0 * h * flux(i) : cur(i, j - 1);
        const double left = cur(i - 1, j);
        const double right = cur(i + 1, j);
        const double acc = (left + right + up + down - 4.0 * c) * inv_h2 +
                           ax(i, j) * (right - left) * inv_2h + ay(i, j) * (up - down) * inv_2h;
        next(i, j) = n == 0 ? c + c_new * acc : 2.0 * c - prev(i, j) + c_new * acc;
      }
    }
    prev.swap(cur);
    cur.swap(next);
    out.boundary_row.col(n + 1) = cur.col(0);
    out.peak = std::max(out.peak, cur.cwiseAbs().maxCoeff());
    if (keep(n + 1)) {
      out.frame_steps.push_back(n + 1);
      out.frames.push_back(cur);
    }
  }
  return out;
}

ExtendedControl boundary_trace(const WaveHistory& history, const SimGrid& grid, double t_end) {
  const auto steps = static_cast<Index>(std::llround(t_end / grid.dt()));
  if (steps > history.steps) {
    throw Error(Errc::invalid_argument, "history is shorter than the requested trace");
  }
  SignalGrid g{grid.sigma().alpha, grid.h(), grid.sigma_nodes(), grid.dt(), steps + 1};
  return ExtendedControl(
      g, history.boundary_row.block(grid.sigma_offset(), 0, grid.sigma_nodes(), steps + 1));
}

ExtendedControl apply_m2t(const VelocityField& rho, const ExtendedControl& f, const SimGrid& grid) {
  const double t_end = 2.0 * grid.T();
  const WaveHistory history = solve_forward(rho, f, grid, t_end);
  return time_integrate(boundary_trace(history, grid, t_end));
}

double finite_speed_violation(const WaveHistory& history, const SimGrid& grid, double t) {
  const Matrix& frame = history.frame_at(t);
  const double reach = t + 3.0 * grid.h();
  double worst = 0.0;
  for (Index i = 0; i < frame.rows(); ++i) {
    for (Index j = 0; j < frame.cols(); ++j) {
      if (grid.dist_to_sigma(grid.x(i), grid.y(j)) > reach) worst = std::max(worst, std::abs(frame(i, j)));
    }
  }
  return worst;
}

}  // namespace bcm
