#include <doctest.h>

#include <cmath>

#include "bcm/error.hpp"
#include "bcm/gram_system.hpp"
#include "oracles.hpp"

using namespace bcm;

namespace {

GridSpec spec(double h = 0.04) {
  GridSpec s;
  s.sigma = {0.0, 1.0};
  s.T = 1.0;
  s.h = h;
  return s;
}

// Midpoint-rule integral of (T - t) g over the cell, independent of the closed form.
double beta_by_quadrature(const SourceLattice& lat, Index j, Index i, double T) {
  constexpr int n = 400;
  const double x0 = lat.sigma.alpha + static_cast<double>(j) * lat.eps;
  const double t0 = static_cast<double>(i) * lat.delta;
  const double dx = lat.eps / n;
  const double dt = lat.delta / n;
  double sum = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const double x = x0 + (a + 0.5) * dx;
      const double t = t0 + (b + 0.5) * dt;
      sum += (T - t) * lat.value(j, i, x, t);
    }
  }
  return 4.0 * sum * dx * dt;
}

Matrix odd_basis(Index M, Index N) {
  Matrix q = Matrix::Zero(M * N, M * (N / 2));
  for (Index i = 0; i < N / 2; ++i) {
    for (Index j = 0; j < M; ++j) {
      q(i * M + j, i * M + j) = std::sqrt(0.5);
      q((N - 1 - i) * M + j, i * M + j) = -std::sqrt(0.5);
    }
  }
  return q;
}

}  // namespace

TEST_CASE("source lattice") {
  const SourceLattice lat = build_lattice(4, 8, {0.0, 1.0}, 1.0);
  CHECK(lat.eps == 0.25);
  CHECK(lat.delta == 0.25);
  CHECK(lat.value(1, 2, 0.375, 0.625) == 1.0);  // hat peak at the cell centre
  CHECK(lat.value(1, 2, 0.2, 0.625) == 0.0);
  CHECK(lat.value(0, 0, 0.125, -0.1) == 0.0);

  // constant translates partition unity on the nodes of sigma x [0, 2T]
  const SourceLattice unit = build_lattice(4, 8, {0.0, 1.0}, 1.0, SourceShape::constant);
  const SignalGrid grid{0.0, 0.0625, 17, 0.0625, 33};
  const ExtendedControl sum = combine_sources(unit, RowVector::Ones(32), grid);
  for (Index a = 1; a + 1 < grid.nx; ++a) {
    for (Index n = 1; n + 1 < grid.nt; ++n) CHECK(sum.values(a, n) == doctest::Approx(1.0));
  }

  CHECK_THROWS_AS(build_lattice(0, 2, {0.0, 1.0}, 1.0), Error);
  try {
    build_lattice(2, 2, {1.0, 1.0}, 1.0);
    FAIL("expected EmptySigma");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_sigma);
  }
  CHECK_THROWS_AS(combine_sources(lat, RowVector::Ones(3), grid), Error);
}

TEST_CASE("shape profiles") {
  for (auto s : {SourceShape::constant, SourceShape::hat, SourceShape::bump}) {
    CHECK(parse_shape(shape_name(s)) == s);
    CHECK(shape_profile(s, -0.01) == 0.0);
    CHECK(shape_profile(s, 1.01) == 0.0);
    CHECK(shape_profile(s, 0.3) == doctest::Approx(shape_profile(s, 0.7)));
    double sum = 0.0;
    constexpr int n = 20000;
    for (int k = 0; k < n; ++k) sum += shape_profile(s, (k + 0.5) / n);
    CHECK(sum / n == doctest::Approx(shape_integral(s)).epsilon(1e-6));
  }
  CHECK_THROWS_AS(parse_shape("square"), Error);
}

TEST_CASE("right-hand side") {
  const double T = 1.0;
  const SourceLattice lat = build_lattice(2, 4, {0.0, 1.0}, T, SourceShape::constant);
  const RowVector b = assemble_rhs(lat, T);
  REQUIRE(b.size() == 8);
  for (Index k = 0; k < 4; ++k) {
    const double want = 4.0 * lat.eps * lat.delta * (T - lat.delta * (static_cast<double>(k) + 0.5));
    for (Index l = 0; l < 2; ++l) CHECK(std::abs(b(k * 2 + l) - want) <= 1e-12);
  }
  for (auto shape : {SourceShape::hat, SourceShape::bump}) {
    const SourceLattice l2 = build_lattice(2, 4, {0.0, 1.0}, T, shape);
    const RowVector b2 = assemble_rhs(l2, T);
    for (Index k = 0; k < 4; ++k) {
      for (Index l = 0; l < 2; ++l) CHECK(b2(k * 2 + l) == doctest::Approx(beta_by_quadrature(l2, l, k, T)).epsilon(1e-4));
    }
  }
  // the cell centred on T
  const SourceLattice odd = build_lattice(1, 3, {0.0, 1.0}, T, SourceShape::constant);
  CHECK(std::abs(assemble_rhs(odd, T)(1)) <= 1e-15);
}

TEST_CASE("toeplitz deviation") {
  std::mt19937_64 rng(3);
  const Matrix table = oracle::expand(oracle::spectral_spd_blocks(2, 4, rng));
  CHECK(toeplitz_deviation(table, 2, 4) == 0.0);
  Matrix bent = table;
  const double eta = 1e-3;
  bent(2, 3) += eta * table.cwiseAbs().maxCoeff();
  CHECK(toeplitz_deviation(bent, 2, 4) == doctest::Approx(eta / (bent.cwiseAbs().maxCoeff() / table.cwiseAbs().maxCoeff())));
  CHECK_THROWS_AS(toeplitz_deviation(table, 2, 3), Error);
}

TEST_CASE("gram assembly") {
  const SimGrid g(spec());
  const auto rho = VelocityField::constant(g);
  const SourceLattice lat = build_lattice(2, 6, g.sigma(), g.T(), SourceShape::bump);
  GramOptions opts;
  opts.full_table = true;
  const GramAssembly a = assemble_gram(rho, lat, g, opts);
  CHECK(a.simulations == 2 + 12);
  CHECK(a.block_asymmetry <= 1e-10);
  REQUIRE(a.full_entries.has_value());
  const Matrix dense = expand_dense(a.G);
  const double scale = dense.cwiseAbs().maxCoeff();
  // the table is symmetric and agrees with the shifted-response blocks
  CHECK((*a.full_entries - a.full_entries->transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale);
  CHECK((*a.full_entries - dense).cwiseAbs().maxCoeff() <= 5e-2 * scale);
  CHECK(toeplitz_deviation(*a.full_entries, 2, 6) <= 5e-2);
  CHECK(a.B == assemble_rhs(lat, g.T()));

  // positive on the odd subspace, though not on the whole space
  const Matrix q = odd_basis(2, 6);
  const Vector odd = Eigen::SelfAdjointEigenSolver<Matrix>(q.transpose() * dense * q).eigenvalues();
  CHECK(odd.minCoeff() > 0.0);
  CHECK(a.negative_eigenvalues > 0);
  opts.full_table = false;
  opts.require_positive = true;
  try {
    assemble_gram(rho, lat, g, opts);
    FAIL("expected NonPositiveGram");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::non_positive_gram);
  }
}

TEST_CASE("gram odd subspace at M = 1 on a layered medium") {
  const SimGrid g(spec());
  const auto rho = VelocityField::layered(g, 1.0, 1.6, 0.5, 0.1);
  const SourceLattice lat = build_lattice(1, 8, g.sigma(), g.T());
  const Matrix dense = expand_dense(assemble_gram(rho, lat, g).G);
  const Matrix q = odd_basis(1, 8);
  CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(q.transpose() * dense * q).eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("gram is independent of the thread count") {
  const SimGrid g(spec(0.05));
  const auto rho = VelocityField::gaussian(g, 0.3, 0.5, 0.5, 0.2);
  const SourceLattice lat = build_lattice(3, 4, g.sigma(), g.T());
  GramOptions one, two;
  one.full_table = two.full_table = true;
  two.threads = 2;
  const GramAssembly a = assemble_gram(rho, lat, g, one);
  const GramAssembly b = assemble_gram(rho, lat, g, two);
  CHECK(expand_dense(a.G) == expand_dense(b.G));
  CHECK(*a.full_entries == *b.full_entries);
}

TEST_CASE("scalar gram") {
  const SimGrid g(spec(0.05));
  const SourceLattice lat = build_lattice(1, 1, g.sigma(), g.T(), SourceShape::constant);
  const GramAssembly a = assemble_gram(VelocityField::constant(g), lat, g);
  CHECK(a.G.dim() == 1);
  CHECK(a.B(0) == doctest::Approx(0.0));  // the single cell is centred on T
}

TEST_CASE("a source between the nodes is rejected") {
  GridSpec s = spec(0.1);
  s.sigma = {0.0, 0.1};
  const SimGrid g(s);
  // M = 4 cells of width 0.025 on a lattice of spacing 0.1: the interior cells hold no node
  const SourceLattice lat = build_lattice(4, 2, g.sigma(), g.T(), SourceShape::bump);
  try {
    assemble_gram(VelocityField::constant(g), lat, g);
    FAIL("expected EmptySource");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_source);
  }
}
