#include "bcm/gram_system.hpp"

#include <cmath>

#include "bcm/error.hpp"
#include "parallel.hpp"

namespace bcm {

SourceShape parse_shape(const std::string& name) {
  if (name == "constant") return SourceShape::constant;
  if (name == "hat") return SourceShape::hat;
  if (name == "bump") return SourceShape::bump;
  throw Error(Errc::parse, "unknown source shape '" + name + "'");
}

const char* shape_name(SourceShape shape) {
  switch (shape) {
    case SourceShape::constant: return "constant";
    case SourceShape::hat: return "hat";
    case SourceShape::bump: return "bump";
  }
  return "?";
}

double shape_profile(SourceShape shape, double s) {
  if (s < 0.0 || s > 1.0) return 0.0;
  switch (shape) {
    case SourceShape::constant:
      return (s == 0.0 || s == 1.0) ? 0.5 : 1.0;
    case SourceShape::hat:
      return 1.0 - std::abs(2.0 * s - 1.0);
    case SourceShape::bump: {
      const double u = 2.0 * s - 1.0;
      const double q = 1.0 - u * u;
      return q <= 0.0 ? 0.0 : std::exp(1.0 - 1.0 / q);
    }
  }
  return 0.0;
}

double shape_integral(SourceShape shape) {
  switch (shape) {
    case SourceShape::constant: return 1.0;
    case SourceShape::hat: return 0.5;
    case SourceShape::bump: {
      // Flat at both ends to all orders: the trapezoid rule is spectrally accurate.
      static const double value = [] {
        constexpr int n = 4096;
        double sum = 0.0;
        for (int k = 1; k < n; ++k) sum += shape_profile(SourceShape::bump, static_cast<double>(k) / n);
        return sum / n;
      }();
      return value;
    }
  }
  return 0.0;
}

namespace {

// Round-off at cell edges must not move a node out of the closed support.
double snap(double s) {
  const double r = std::round(s);
  return std::abs(s - r) < 1e-10 ? r : s;
}

}  // namespace

double SourceLattice::value(Index j, Index i, double x, double t) const {
  const double sx = (x - sigma.alpha - static_cast<double>(j) * eps) / eps;
  const double st = (t - static_cast<double>(i) * delta) / delta;
  return amplitude * shape_profile(shape, snap(sx)) * shape_profile(shape, snap(st));
}

ExtendedControl SourceLattice::sample(Index j, Index i, const SignalGrid& grid) const {
  ExtendedControl out(grid);
  for (Index a = 0; a < grid.nx; ++a) {
    const double sx = (grid.x(a) - sigma.alpha - static_cast<double>(j) * eps) / eps;
    const double px = amplitude * shape_profile(shape, snap(sx));
    if (px == 0.0) continue;
    for (Index n = 0; n < grid.nt; ++n) {
      const double st = (grid.t(n) - static_cast<double>(i) * delta) / delta;
      out.values(a, n) = px * shape_profile(shape, snap(st));
    }
  }
  return out;
}

SourceLattice build_lattice(Index M, Index N, const Interval& sigma, double T, SourceShape shape) {
  if (!(sigma.length() > 0.0)) throw Error(Errc::empty_sigma, "sigma must have positive length");
  if (M < 1 || N < 1) throw Error(Errc::invalid_argument, "lattice needs M, N >= 1");
  if (!(T > 0.0)) throw Error(Errc::invalid_argument, "T must be positive");
  SourceLattice lat;
  lat.M = M;
  lat.N = N;
  lat.eps = sigma.length() / static_cast<double>(M);
  lat.delta = 2.0 * T / static_cast<double>(N);
  lat.sigma = sigma;
  lat.T = T;
  lat.shape = shape;
  return lat;
}

namespace {

// Response to g_j^0 delayed by `shift`, linear in time between nodes.
ExtendedControl delayed(const ExtendedControl& r, double shift) {
  if (shift == 0.0) return r;
  ExtendedControl out(r.grid);
  for (Index n = 0; n < r.grid.nt; ++n) {
    const double t = r.grid.t(n) - shift;
    if (t < 0.0) continue;
    for (Index a = 0; a < r.grid.nx; ++a) out.values(a, n) = r.at(a, t);
  }
  return out;
}

void check_sources(const std::vector<ExtendedControl>& sources) {
  for (const auto& s : sources) {
    if (s.values.cwiseAbs().maxCoeff() == 0.0) {
      throw Error(Errc::empty_source, "basic source vanishes on every grid node");
    }
  }
}

}  // namespace

GramAssembly assemble_gram(const VelocityField& rho, const SourceLattice& lattice, const SimGrid& grid,
                           const GramOptions& options) {
  const Index M = lattice.M;
  const Index N = lattice.N;
  const SignalGrid eg = grid.extended_grid();

  // sources[i*M + j] = g_j^i
  std::vector<ExtendedControl> sources;
  sources.reserve(static_cast<std::size_t>(M * N));
  for (Index i = 0; i < N; ++i) {
    for (Index j = 0; j < M; ++j) sources.push_back(lattice.sample(j, i, eg));
  }
  check_sources(sources);
  const auto src = [&](Index i, Index j) -> const ExtendedControl& {
    return sources[static_cast<std::size_t>(i * M + j)];
  };

  std::vector<ExtendedControl> base(static_cast<std::size_t>(M));
  detail::parallel_for(static_cast<std::size_t>(M), options.threads, [&](std::size_t j) {
    base[j] = apply_m2t(rho, src(0, static_cast<Index>(j)), grid);
  });

  std::vector<Matrix> gamma(static_cast<std::size_t>(N), Matrix::Zero(M, M));
  for (Index m = 0; m < N; ++m) {
    const double shift = static_cast<double>(m) * lattice.delta;
    std::vector<ExtendedControl> moved;
    moved.reserve(static_cast<std::size_t>(M));
    for (Index l = 0; l < M; ++l) moved.push_back(delayed(base[static_cast<std::size_t>(l)], shift));
    for (Index j = 0; j < M; ++j) {
      for (Index l = 0; l < M; ++l) {
        gamma[static_cast<std::size_t>(m)](j, l) =
            inner_product_plain(base[static_cast<std::size_t>(j)], src(m, l)) +
            inner_product_plain(src(0, j), moved[static_cast<std::size_t>(l)]);
      }
    }
  }

  GramAssembly out{BlockToeplitz(gamma), assemble_rhs(lattice, lattice.T), std::nullopt};
  out.simulations = M;
  double gmax = 0.0;
  for (const auto& g : gamma) gmax = std::max(gmax, g.cwiseAbs().maxCoeff());
  for (auto& g : gamma) {
    out.block_asymmetry = std::max(out.block_asymmetry, (g - g.transpose()).cwiseAbs().maxCoeff() / gmax);
    g = (0.5 * (g + g.transpose())).eval();
  }
  out.G = BlockToeplitz(gamma);

  const Matrix dense = expand_dense(out.G);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(dense, Eigen::EigenvaluesOnly);
  out.min_eigenvalue = eig.eigenvalues().minCoeff();
  const double floor = -options.positivity_tol * dense.cwiseAbs().maxCoeff();
  out.negative_eigenvalues = (eig.eigenvalues().array() < floor).count();
  if (options.require_positive && out.negative_eigenvalues > 0) {
    throw Error(Errc::non_positive_gram, "smallest eigenvalue " + std::to_string(out.min_eigenvalue));
  }

  if (options.full_table) {
    std::vector<ExtendedControl> responses(sources.size());
    detail::parallel_for(sources.size(), options.threads, [&](std::size_t k) {
      responses[k] = apply_m2t(rho, sources[k], grid);
    });
    const Index dim = M * N;
    Matrix full(dim, dim);
    for (Index a = 0; a < dim; ++a) {
      for (Index b = 0; b < dim; ++b) {
        full(a, b) = inner_product_plain(responses[static_cast<std::size_t>(a)], sources[static_cast<std::size_t>(b)]) +
                     inner_product_plain(sources[static_cast<std::size_t>(a)], responses[static_cast<std::size_t>(b)]);
      }
    }
    out.full_entries = std::move(full);
    out.simulations += dim;
  }
  return out;
}

RowVector assemble_rhs(const SourceLattice& lattice, double T) {
  const double i2 = shape_integral(lattice.shape);
  const double cell = lattice.amplitude * lattice.eps * lattice.delta * i2 * i2;
  RowVector b(lattice.M * lattice.N);
  for (Index k = 0; k < lattice.N; ++k) {
    // every profile is symmetric about the cell centre, so (T - t) integrates to its centre value
    const double centre = (static_cast<double>(k) + 0.5) * lattice.delta;
    b.segment(k * lattice.M, lattice.M).setConstant(4.0 * cell * (T - centre));
  }
  return b;
}

double toeplitz_deviation(const Matrix& full_entries, Index M, Index N) {
  if (full_entries.rows() != M * N || full_entries.cols() != M * N) {
    throw Error(Errc::invalid_argument, "entry table does not have M*N rows and columns");
  }
  const double scale = full_entries.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for (Index i = 0; i + 1 < N; ++i) {
    for (Index k = 0; k + 1 < N; ++k) {
      const Matrix d = full_entries.block(i * M, k * M, M, M) - full_entries.block((i + 1) * M, (k + 1) * M, M, M);
      worst = std::max(worst, d.cwiseAbs().maxCoeff());
    }
  }
  return worst / scale;
}

ExtendedControl combine_sources(const SourceLattice& lattice, const RowVector& c, const SignalGrid& grid) {
  if (c.size() != lattice.M * lattice.N) {
    throw Error(Errc::invalid_argument, "coefficient row must have M*N entries");
  }
  ExtendedControl out(grid);
  for (Index i = 0; i < lattice.N; ++i) {
    for (Index j = 0; j < lattice.M; ++j) {
      const double coeff = c(i * lattice.M + j);
      if (coeff != 0.0) out.values += coeff * lattice.sample(j, i, grid).values;
    }
  }
  return out;
}

}  // namespace bcm
