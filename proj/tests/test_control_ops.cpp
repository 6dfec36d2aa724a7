#include <doctest.h>

#include <cmath>
#include <random>

#include "bcm/control_ops.hpp"
#include "bcm/error.hpp"

using namespace bcm;

namespace {

SignalGrid lattice(Index nx, Index nt, double dx = 0.25, double dt = 0.125) { return {0.0, dx, nx, dt, nt}; }

GridSpec spec(double h = 0.04) {
  GridSpec s;
  s.sigma = {0.0, 1.0};
  s.T = 1.0;
  s.h = h;
  return s;
}

Control smooth(const SimGrid& g, double a, double b) {
  Control c(g.control_grid());
  for (Index i = 0; i < c.grid.nx; ++i) {
    const double x = c.grid.x(i);
    for (Index n = 0; n < c.grid.nt; ++n) {
      const double t = c.grid.t(n);
      c.values(i, n) = std::sin(M_PI * x) * std::sin(M_PI * t) * (1.0 + a * std::cos(b * M_PI * x) * t);
    }
  }
  return c;
}

void fill_random(SampledSignal& s, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  for (Index k = 0; k < s.values.size(); ++k) s.values.data()[k] = normal(rng);
}

}  // namespace

TEST_CASE("trapezoid weights") {
  CHECK(trapezoid_weights(1, 0.5)(0) == 0.0);
  const Vector w = trapezoid_weights(4, 0.5);
  CHECK(w(0) == 0.25);
  CHECK(w(1) == 0.5);
  CHECK(w(3) == 0.25);
}

TEST_CASE("inner products") {
  // f = g = 1 on [0, 1] x [0, 1]: |sigma| T
  Control one(lattice(5, 9), Matrix::Ones(5, 9));
  CHECK(inner_product_plain(one, one) == doctest::Approx(1.0).epsilon(1e-14));
  // density 1 + x integrates to 1.5 (trapezoid is exact on linear weights)
  Vector rho(5);
  for (Index a = 0; a < 5; ++a) rho(a) = 1.0 + one.grid.x(a);
  CHECK(inner_product_outer(one, one, rho) == doctest::Approx(1.5).epsilon(1e-14));
  // disjoint supports
  Control left(lattice(5, 9)), right(lattice(5, 9));
  left.values.row(0).setOnes();
  right.values.row(4).setOnes();
  CHECK(inner_product_plain(left, right) == 0.0);
  Control other(lattice(5, 8));
  CHECK_THROWS_AS(inner_product_plain(one, other), Error);
  CHECK_THROWS_AS(inner_product_outer(one, one, Vector::Ones(4)), Error);
}

TEST_CASE("odd extension") {
  Control f(lattice(1, 3));
  f.values << 1.0, 2.0, 3.0;
  const ExtendedControl e = odd_extend(f);
  REQUIRE(e.grid.nt == 5);
  Matrix want(1, 5);
  want << 1.0, 2.0, 0.0, -2.0, -1.0;
  CHECK(e.values == want);
  CHECK(odd_part(e).values == e.values);
}

TEST_CASE("odd part and restriction") {
  ExtendedControl g(lattice(1, 5));
  g.values << 1.0, 2.0, 3.0, 4.0, 5.0;
  Matrix want(1, 5);
  want << -2.0, -1.0, 0.0, 1.0, 2.0;
  CHECK(odd_part(g).values == want);
  const Control r = restrict_to_T(g);
  CHECK(r.grid.nt == 3);
  CHECK(r.values(0, 2) == 3.0);
  CHECK_THROWS_AS(restrict_to_T(ExtendedControl(lattice(1, 4))), Error);

  std::mt19937_64 rng(7);
  ExtendedControl h(lattice(3, 11));
  fill_random(h, rng);
  const ExtendedControl p = odd_part(h);
  CHECK((odd_part(p).values - p.values).cwiseAbs().maxCoeff() <= 1e-14 * p.values.cwiseAbs().maxCoeff());
}

TEST_CASE("time integration") {
  const SimGrid g(spec());
  const SignalGrid eg = g.extended_grid();
  const ExtendedControl ones(eg, Matrix::Ones(eg.nx, eg.nt));
  const ExtendedControl j = time_integrate(ones);
  for (Index n = 0; n < eg.nt; ++n) CHECK(j.values(0, n) == eg.t(n));

  // J of the odd extension of 1 is the tent t on [0, T], 2T - t after. Only
  // the midpoint node at T is off, by dt / 2; the next step recovers it.
  const Control one(g.control_grid(), Matrix::Ones(eg.nx, g.control_grid().nt));
  const ExtendedControl tent = time_integrate(odd_extend(one));
  const Index K = g.steps_per_T();
  for (Index n = 0; n < K; ++n) CHECK(tent.values(1, n) == doctest::Approx(eg.t(n)).epsilon(1e-13));
  CHECK(tent.values(1, K) == doctest::Approx(g.T() - 0.5 * eg.dt).epsilon(1e-13));
  for (Index n = K + 1; n <= 2 * K; ++n) CHECK(std::abs(tent.values(1, n) - (2.0 * g.T() - eg.t(n))) <= 1e-13);

  // second order: J(cos) against sin
  ExtendedControl c(eg);
  for (Index n = 0; n < eg.nt; ++n) c.values.col(n).setConstant(std::cos(eg.t(n)));
  const ExtendedControl s = time_integrate(c);
  double err = 0.0;
  for (Index n = 0; n < eg.nt; ++n) err = std::max(err, std::abs(s.values(0, n) - std::sin(eg.t(n))));
  CHECK(err <= eg.dt * eg.dt);
}

TEST_CASE("adjoint of the odd extension") {
  std::mt19937_64 rng(11);
  const SimGrid g(spec());
  for (int trial = 0; trial < 5; ++trial) {
    Control f(g.control_grid());
    ExtendedControl q(g.extended_grid());
    fill_random(f, rng);
    fill_random(q, rng);
    const double lhs = inner_product_plain(odd_extend(f), q);
    const double rhs = 2.0 * inner_product_plain(f, restrict_to_T(odd_part(q)));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::sqrt(inner_product_plain(f, f) * inner_product_plain(q, q)));
  }
}

TEST_CASE("kappa") {
  const SimGrid g(spec());
  const KappaProfile k = make_kappa(g);
  CHECK(k.kappa.values(0, 0) == g.T());
  CHECK(k.kappa.values(0, k.kappa.grid.nt - 1) == 0.0);
  CHECK(k.extended.values(2, k.extended.grid.nt - 1) == doctest::Approx(-g.T()));
  // T - t is odd about T, so the extension and the sampled profile agree
  const ExtendedControl ext = odd_extend(k.kappa);
  CHECK((ext.values - k.extended.values).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("C^T is symmetric and positive") {
  const SimGrid g(spec());
  for (const auto& rho : {VelocityField::constant(g), VelocityField::layered(g, 1.0, 1.4, 0.4, 0.1),
                          VelocityField::gaussian(g, 0.3, 0.5, 0.3, 0.2)}) {
    const Vector w = rho.boundary_rho(g);
    std::vector<Control> fs{smooth(g, 0.0, 1.0), smooth(g, 1.0, 2.0), smooth(g, -0.7, 3.0)};
    std::vector<Control> cs;
    for (const auto& f : fs) cs.push_back(apply_ct(rho, f, g));
    Matrix k(3, 3);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) k(a, b) = inner_product_outer(cs[a], fs[b], w);
    }
    CHECK((k - k.transpose()).cwiseAbs().maxCoeff() <= 1e-2 * k.cwiseAbs().maxCoeff());
    const Vector eig = Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (k + k.transpose())).eigenvalues();
    CHECK(eig.minCoeff() > 0.0);
  }
  CHECK_THROWS_AS(apply_ct(VelocityField::constant(g), Control(lattice(3, 3)), g), Error);
}

TEST_CASE("C^T asymmetry on a laterally varying medium is a discretization error") {
  std::vector<double> asym;
  for (double h : {0.04, 0.02}) {
    const SimGrid g(spec(h));
    const auto rho = VelocityField::gaussian(g, 0.3, 0.5, 0.3, 0.2);
    const Vector w = rho.boundary_rho(g);
    const Control f = smooth(g, 1.0, 2.0);
    const Control q = smooth(g, -0.7, 3.0);
    const double fq = inner_product_outer(apply_ct(rho, f, g), q, w);
    const double qf = inner_product_outer(apply_ct(rho, q, g), f, w);
    asym.push_back(std::abs(fq - qf) / std::max(std::abs(fq), std::abs(qf)));
  }
  CAPTURE(asym[0]);
  CAPTURE(asym[1]);
  CHECK(asym[1] <= 0.5 * asym[0]);
}

TEST_CASE("C^T against the energy form") {
  const SimGrid g(spec(0.02));
  const auto rho = VelocityField::constant(g);
  const Control f = smooth(g, 0.5, 2.0);
  const Control q = smooth(g, -1.0, 1.0);
  const double fq = ct_form_oracle(rho, f, q, g);
  const double ff = ct_form_oracle(rho, f, f, g);
  const double qq = ct_form_oracle(rho, q, q, g);
  CHECK(ff > 0.0);
  CHECK(fq * fq <= ff * qq);
  CHECK(std::abs(fq - inner_product_plain(apply_ct(rho, f, g), q)) <= 5e-2 * std::sqrt(ff * qq));
}

TEST_CASE("wave mass") {
  const SimGrid g(spec(0.1));
  const auto rho = VelocityField::constant(g, 2.0);
  // points within T = 1 of sigma = [0, 1] in the half plane: area 1 + pi / 2
  const double mass = wave_mass(rho, Matrix::Ones(g.nx(), g.ny()), g);
  CHECK(mass == doctest::Approx(2.0 * (1.0 + M_PI / 2)).epsilon(0.05));
}
