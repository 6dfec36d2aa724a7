#include <doctest.h>

#include <cmath>

#include "bcm/error.hpp"
#include "bcm/forward_solver.hpp"

using namespace bcm;

namespace {

GridSpec spec(double h = 0.02) {
  GridSpec s;
  s.sigma = {0.0, 1.0};
  s.T = 1.0;
  s.h = h;
  return s;
}

// Gaussian in t centred at 6w (width w); Gaussian in x of width wx about xc,
// or uniform over sigma when wx <= 0.
Control pulse(const SimGrid& g, double w, double xc = 0.5, double wx = 0.125) {
  Control c(g.control_grid());
  for (Index a = 0; a < c.grid.nx; ++a) {
    const double s = (c.grid.x(a) - xc) / wx;
    const double px = wx > 0 ? std::exp(-s * s) : 1.0;
    for (Index n = 0; n < c.grid.nt; ++n) {
      const double t = (c.grid.t(n) - 6 * w) / w;
      c.values(a, n) = px * std::exp(-t * t);
    }
  }
  return c;
}

}  // namespace

TEST_CASE("grid derivation") {
  const SimGrid g(spec(0.03));
  CHECK(g.h() <= 0.03);
  CHECK(std::abs(g.x(g.sigma_offset())) < 1e-12);
  CHECK(std::abs(g.x(g.sigma_offset() + g.sigma_nodes() - 1) - 1.0) < 1e-12);
  CHECK(g.dt() <= 0.5 * g.h() / std::sqrt(2.0) * (1 + 1e-12));
  CHECK(std::abs(g.dt() * static_cast<double>(g.steps_per_T()) - 1.0) < 1e-12);
  // zero Dirichlet edges sit beyond 2T from sigma
  CHECK(g.dist_to_sigma(g.x(0), 0.0) > 2.0);
  CHECK(g.y(g.ny() - 1) > 2.0);
  CHECK(g.extended_grid().nt == 2 * g.steps_per_T() + 1);
}

TEST_CASE("guards") {
  GridSpec bad = spec();
  bad.cfl_ratio = 1.2;
  CHECK_THROWS_AS(SimGrid{bad}, Error);
  try {
    SimGrid{bad};
  } catch (const Error& e) {
    CHECK(e.code() == Errc::cfl_violation);
  }
  GridSpec empty = spec();
  empty.sigma = {0.5, 0.5};
  try {
    SimGrid{empty};
    FAIL("expected EmptySigma");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_sigma);
  }
  const SimGrid g(spec(0.05));
  Matrix v = Matrix::Ones(g.nx(), g.ny());
  v(3, 4) = -1.0;
  try {
    VelocityField(g, v);
    FAIL("expected NegativeDensity");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::negative_density);
  }
  try {
    VelocityField(g, Matrix::Ones(3, 3));
    FAIL("expected GridMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::grid_mismatch);
  }
}

TEST_CASE("zero control gives the zero history") {
  const SimGrid g(spec(0.05));
  ForwardOptions opts;
  opts.keep_all_frames = true;
  const WaveHistory h = solve_forward(VelocityField::constant(g), Control(g.control_grid()), g, 2.0, opts);
  CHECK(h.peak == 0.0);
  CHECK(h.boundary_row.cwiseAbs().maxCoeff() == 0.0);
  for (const auto& f : h.frames) CHECK(f.cwiseAbs().maxCoeff() == 0.0);
  CHECK(finite_speed_violation(h, g, 1.0) == 0.0);
  CHECK(boundary_trace(h, g, 2.0).values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("finite speed for a short pulse") {
  const SimGrid g(spec());
  ForwardOptions opts;
  opts.snapshot_times = {0.5, 1.0};
  const WaveHistory h = solve_forward(VelocityField::constant(g), pulse(g, 1.0 / 16), g, 1.0, opts);
  REQUIRE(h.peak > 0.0);
  CHECK(finite_speed_violation(h, g, 0.5) <= 1e-6 * h.peak);
  CHECK(finite_speed_violation(h, g, 1.0) <= 1e-6 * h.peak);
  // the wave does reach the shell just inside t
  CHECK(h.frame_at(1.0).cwiseAbs().maxCoeff() > 1e-3 * h.peak);
}

TEST_CASE("leading edge travels at unit speed") {
  const SimGrid g(spec());
  const double w = 0.05;
  const double onset = 6 * w - 2.146 * w;  // pulse reaches 1% of its peak
  const WaveHistory h = solve_forward(VelocityField::constant(g), pulse(g, w, 0.5, -1.0), g, 1.0);
  const Index edge = g.sigma_offset() + g.sigma_nodes() - 1;
  for (Index cells : {12, 25}) {
    const Index i = edge + cells;
    const double d = g.x(i) - 1.0;
    const double top = h.boundary_row.row(i).cwiseAbs().maxCoeff();
    double arrival = -1.0;
    for (Index n = 0; n <= h.steps && arrival < 0; ++n) {
      if (std::abs(h.boundary_row(i, n)) > 0.01 * top) arrival = static_cast<double>(n) * h.dt;
    }
    CAPTURE(d);
    CHECK(std::abs(arrival - onset - d) < 0.05);
    // causality: nothing before the signal can have arrived
    double early = 0.0;
    for (Index n = 0; static_cast<double>(n) * h.dt < d - 3 * g.h(); ++n) {
      early = std::max(early, std::abs(h.boundary_row(i, n)));
    }
    CHECK(early <= 1e-10 * h.peak);
  }
}

TEST_CASE("trace is linear in the control") {
  const SimGrid g(spec(0.04));
  const auto rho = VelocityField::layered(g, 1.0, 1.5, 0.5, 0.1);
  const Control f = pulse(g, 0.06, 0.3);
  const Control q = pulse(g, 0.04, 0.7, 0.2);
  Control sum(f.grid, f.values + 2.5 * q.values);
  const auto tf = boundary_trace(solve_forward(rho, f, g, 1.0), g, 1.0);
  const auto tq = boundary_trace(solve_forward(rho, q, g, 1.0), g, 1.0);
  const auto ts = boundary_trace(solve_forward(rho, sum, g, 1.0), g, 1.0);
  const double scale = ts.values.cwiseAbs().maxCoeff();
  CHECK((ts.values - tf.values - 2.5 * tq.values).cwiseAbs().maxCoeff() <= 1e-10 * scale);
}

TEST_CASE("response kernel is reciprocal at constant density") {
  // The trace at x_b of a source at x_a equals the trace at x_a of the same source at x_b.
  const SimGrid g(spec(0.04));
  const auto rho = VelocityField::constant(g);
  const Index ia = 5, ib = 20;
  Control fa(g.control_grid()), fb(g.control_grid());
  for (Index n = 0; n < fa.grid.nt; ++n) {
    const double t = (fa.grid.t(n) - 0.3) / 0.06;
    fa.values(ia, n) = fb.values(ib, n) = std::exp(-t * t);
  }
  const auto ta = boundary_trace(solve_forward(rho, fa, g, 1.0), g, 1.0);
  const auto tb = boundary_trace(solve_forward(rho, fb, g, 1.0), g, 1.0);
  const double scale = ta.values.row(ib).cwiseAbs().maxCoeff();
  REQUIRE(scale > 0.0);
  CHECK((ta.values.row(ib) - tb.values.row(ia)).cwiseAbs().maxCoeff() <= 1e-12 * scale);
}

TEST_CASE("apply_m2t") {
  const SimGrid g(spec(0.05));
  const auto rho = VelocityField::constant(g);
  CHECK(apply_m2t(rho, ExtendedControl(g.extended_grid()), g).values.cwiseAbs().maxCoeff() == 0.0);
  ExtendedControl f(g.extended_grid());
  for (Index a = 0; a < f.grid.nx; ++a) {
    for (Index n = 0; n < f.grid.nt; ++n) f.values(a, n) = std::sin(3.0 * f.grid.t(n)) * (1.0 + f.grid.x(a));
  }
  const auto m = apply_m2t(rho, f, g);
  CHECK(m.grid.nt == g.extended_grid().nt);
  CHECK(m.values.col(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(m.values.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("grid convergence of the trace") {
  std::vector<ExtendedControl> traces;
  for (double h : {0.04, 0.02, 0.01}) {
    const SimGrid g(spec(h));
    traces.push_back(boundary_trace(solve_forward(VelocityField::constant(g), pulse(g, 1.0 / 16), g, 1.0), g, 1.0));
  }
  // compare on the coarse nodes, interpolating the finer trace in time
  const auto change = [&](const ExtendedControl& a, const ExtendedControl& b) {
    const auto ratio = std::lround(a.grid.dx / b.grid.dx);
    double worst = 0.0;
    for (Index i = 0; i < a.grid.nx; ++i) {
      for (Index n = 0; n < a.grid.nt; ++n) {
        worst = std::max(worst, std::abs(a.values(i, n) - b.at(i * ratio, a.grid.t(n))));
      }
    }
    return worst;
  };
  const double coarse = change(traces[0], traces[1]);
  const double fine = change(traces[1], traces[2]);
  CAPTURE(coarse);
  CAPTURE(fine);
  CHECK(coarse / fine >= 3.0);
}

TEST_CASE("velocity profiles") {
  const SimGrid g(spec(0.05));
  CHECK(VelocityField::constant(g, 2.0).values().minCoeff() == 2.0);
  const auto layered = VelocityField::layered(g, 1.0, 2.0, 0.5, 0.05);
  CHECK(layered(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(layered(0, g.ny() - 1) == doctest::Approx(2.0).epsilon(1e-6));
  const auto bump = VelocityField::gaussian(g, 0.5, 0.5, 0.5, 0.2);
  CHECK(bump.values().maxCoeff() <= 1.5);
  CHECK(bump.values().minCoeff() >= 1.0);
  CHECK(bump.boundary_rho(g).size() == g.sigma_nodes());
}
