#include "bcm/block_toeplitz.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "bcm/error.hpp"

namespace bcm {

namespace {

Matrix invert_block(const Matrix& a, Errc on_failure, const char* what) {
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) {
    throw Error(on_failure, std::string(what) + " is numerically singular");
  }
  return lu.inverse();
}

// a^{-1} rhs. Singularity is judged from the LU pivots: rcond() would cost
// more than the factorization itself on these small blocks.
Matrix solve_block(const Matrix& a, const Matrix& rhs, Errc on_failure, const char* what) {
  Eigen::PartialPivLU<Matrix> lu(a);
  const double scale = a.cwiseAbs().maxCoeff();
  if (!(lu.matrixLU().diagonal().cwiseAbs().minCoeff() > 1e-14 * scale)) {
    throw Error(on_failure, std::string(what) + " is numerically singular");
  }
  return lu.solve(rhs);
}

}  // namespace

BlockToeplitz::BlockToeplitz(std::vector<Matrix> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) {
    throw Error(Errc::invalid_argument, "block-Toeplitz matrix needs at least one block");
  }
  const Index m = blocks_.front().rows();
  if (m < 1) {
    throw Error(Errc::invalid_argument, "block size must be positive");
  }
  for (const auto& b : blocks_) {
    if (b.rows() != m || b.cols() != m) {
      throw Error(Errc::invalid_argument, "all blocks must be square of equal size");
    }
    if (!b.allFinite()) {
      throw Error(Errc::invalid_argument, "block entries must be finite");
    }
  }
}

BlockToeplitz BlockToeplitz::shifted(double lambda) const {
  auto blocks = blocks_;
  blocks.front() += lambda * Matrix::Identity(block_size(), block_size());
  return BlockToeplitz(std::move(blocks));
}

Matrix BlockColumn::stacked() const {
  const Index m = block_size();
  Matrix out(m * block_count(), m);
  for (Index i = 0; i < block_count(); ++i) {
    out.middleRows(i * m, m) = blocks[static_cast<std::size_t>(i)];
  }
  return out;
}

Matrix expand_dense(const BlockToeplitz& g) {
  const Index m = g.block_size();
  const Index n = g.block_count();
  Matrix out(m * n, m * n);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < n; ++k) {
      out.block(i * m, k * m, m, m) = g.block(std::abs(i - k));
    }
  }
  return out;
}

SpdDiagnostics spd_diagnostics(const BlockToeplitz& g) {
  Matrix a = expand_dense(g);
  SpdDiagnostics d;
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  d.symmetry_deviation = (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
  d.symmetric = d.symmetry_deviation == 0.0;

  // Unpivoted LDL^T on the symmetric part.
  a = 0.5 * (a + a.transpose());
  const Index n = a.rows();
  d.min_pivot = a(0, 0);
  for (Index k = 0; k < n; ++k) {
    const double pivot = a(k, k);
    d.min_pivot = std::min(d.min_pivot, pivot);
    if (!(pivot > 0.0)) break;
    for (Index i = k + 1; i < n; ++i) {
      const double factor = a(i, k) / pivot;
      a.block(i, i, 1, n - i) -= factor * a.block(k, i, 1, n - i);
    }
  }
  return d;
}

SpdDiagnostics validate_spd(const BlockToeplitz& g, double tol) {
  SpdDiagnostics d = spd_diagnostics(g);
  d.symmetric = d.symmetry_deviation <= tol;
  if (!d.symmetric) {
    throw Error(Errc::non_symmetric,
                "expanded matrix asymmetry " + std::to_string(d.symmetry_deviation));
  }
  double diag_scale = 0.0;
  for (Index i = 0; i < g.block_size(); ++i) diag_scale = std::max(diag_scale, std::abs(g.block(0)(i, i)));
  if (!(d.min_pivot > tol * diag_scale)) {
    throw Error(Errc::not_positive, "smallest pivot " + std::to_string(d.min_pivot));
  }
  return d;
}

BlockColumn levinson_y(const BlockToeplitz& g, LevinsonTrace* trace) {
  const Index m = g.block_size();
  const Index n = g.block_count();
  const Matrix eye = Matrix::Identity(m, m);

  // Q_0 = I, so Y~_0^{(0)} = gamma_0^{-1}.
  Matrix q = eye;
  std::vector<Matrix> scaled{invert_block(g.block(0), Errc::singular_intermediate, "gamma_0")};
  if (trace) {
    trace->scaled.assign(1, BlockColumn{scaled});
    trace->factors.assign(1, q);
  }

  std::vector<Matrix> next;
  for (Index k = 1; k < n; ++k) {
    Matrix e = Matrix::Zero(m, m);
    for (Index l = 0; l < k; ++l) {
      e.noalias() += g.block(l + 1) * scaled[static_cast<std::size_t>(l)];
    }
    const Matrix f = -q * e;
    q = solve_block(eye - f * f, q, Errc::singular_intermediate, "I - F_k^2");

    // (Y~_{k-1}, ..., Y~_0, 0)' F_k + (0, Y~_0, ..., Y~_{k-1})'
    next.assign(static_cast<std::size_t>(k + 1), Matrix::Zero(m, m));
    for (Index l = 0; l < k; ++l) {
      next[static_cast<std::size_t>(l)].noalias() = scaled[static_cast<std::size_t>(k - 1 - l)] * f;
    }
    for (Index l = 1; l <= k; ++l) {
      next[static_cast<std::size_t>(l)] += scaled[static_cast<std::size_t>(l - 1)];
    }
    scaled.swap(next);
    if (trace) {
      trace->scaled.push_back(BlockColumn{scaled});
      trace->factors.push_back(q);
    }
  }

  BlockColumn y;
  y.blocks.reserve(scaled.size());
  for (const auto& s : scaled) y.blocks.push_back(s * q);
  return y;
}

Matrix invert_from_y(const BlockColumn& y) {
  const Index m = y.block_size();
  const Index n = y.block_count();
  if (n == 0 || m == 0) {
    throw Error(Errc::invalid_argument, "empty block column");
  }
  const auto yb = [&](Index i) -> const Matrix& { return y.blocks[static_cast<std::size_t>(i)]; };
  const Matrix k = invert_block(yb(n - 1), Errc::singular_corner, "Y_{N-1}");

  // yk[i] = Y_i K; the inverse obeys the displacement recurrence
  // X[p+1][q+1] = X[p][q] + Y_{N-2-p} K Y_{N-2-q}^T - Y_p K Y_q^T.
  std::vector<Matrix> yk;
  yk.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) yk.push_back(yb(i) * k);

  Matrix x(m * n, m * n);
  for (Index q = 0; q < n; ++q) {
    x.block(0, q * m, m, m).noalias() = yk[static_cast<std::size_t>(n - 1)] * yb(n - 1 - q).transpose();
  }
  for (Index p = 1; p < n; ++p) {
    x.block(p * m, 0, m, m).noalias() = yk[static_cast<std::size_t>(n - 1 - p)] * yb(n - 1).transpose();
  }
  for (Index p = 0; p + 1 < n; ++p) {
    for (Index q = 0; q + 1 < n; ++q) {
      auto dst = x.block((p + 1) * m, (q + 1) * m, m, m);
      dst = x.block(p * m, q * m, m, m);
      dst.noalias() += yk[static_cast<std::size_t>(n - 2 - p)] * yb(n - 2 - q).transpose();
      dst.noalias() -= yk[static_cast<std::size_t>(p)] * yb(q).transpose();
    }
  }
  return x;
}

RowVector solve_row(const BlockColumn& y, const RowVector& b) {
  const Index m = y.block_size();
  const Index n = y.block_count();
  if (b.size() != m * n) {
    throw Error(Errc::invalid_argument, "right-hand side length must equal M*N");
  }
  const auto yb = [&](Index i) -> const Matrix& { return y.blocks[static_cast<std::size_t>(i)]; };
  const Matrix k = invert_block(yb(n - 1), Errc::singular_corner, "Y_{N-1}");
  const auto seg = [&](const RowVector& v, Index i) { return v.segment(i * m, m); };

  // r1 = b L1, r2 = b L2 (lower block-triangular Toeplitz factors).
  RowVector r1 = RowVector::Zero(m * n);
  RowVector r2 = RowVector::Zero(m * n);
  for (Index l = 0; l < n; ++l) {
    for (Index p = l; p < n; ++p) {
      r1.segment(l * m, m).noalias() += seg(b, p) * yb(n - 1 - (p - l));
      if (p > l) r2.segment(l * m, m).noalias() += seg(b, p) * yb(p - l - 1);
    }
  }
  for (Index l = 0; l < n; ++l) {
    r1.segment(l * m, m) = (seg(r1, l) * k).eval();
    r2.segment(l * m, m) = (seg(r2, l) * k).eval();
  }

  // c = r1 U1 - r2 U2 (upper factors carry transposed blocks).
  RowVector c = RowVector::Zero(m * n);
  for (Index q = 0; q < n; ++q) {
    for (Index l = 0; l <= q; ++l) {
      c.segment(q * m, m).noalias() += seg(r1, l) * yb(n - 1 - (q - l)).transpose();
      if (l < q) c.segment(q * m, m).noalias() -= seg(r2, l) * yb(q - l - 1).transpose();
    }
  }
  return c;
}

RowVector solve_row(const BlockToeplitz& g, const RowVector& b) {
  if (b.size() != g.dim()) {
    throw Error(Errc::invalid_argument, "right-hand side length must equal M*N");
  }
  return solve_row(levinson_y(g), b);
}

Matrix dense_oracle_solve(const Matrix& a, const Matrix& rhs, double* min_abs_pivot) {
  const Index n = a.rows();
  if (a.cols() != n || rhs.rows() != n) {
    throw Error(Errc::invalid_argument, "dense solve needs a square matrix and matching rhs");
  }
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajor lu = a;
  RowMajor x = rhs;
  double smallest = n > 0 ? std::abs(a(0, 0)) : 0.0;
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);

  for (Index k = 0; k < n; ++k) {
    Index piv = k;
    for (Index i = k + 1; i < n; ++i) {
      if (std::abs(lu(i, k)) > std::abs(lu(piv, k))) piv = i;
    }
    const double p = lu(piv, k);
    if (k == 0) smallest = std::abs(p);
    smallest = std::min(smallest, std::abs(p));
    if (std::abs(p) <= scale * 1e-15 * static_cast<double>(n)) {
      throw Error(Errc::singular, "zero pivot at column " + std::to_string(k));
    }
    if (piv != k) {
      lu.row(piv).swap(lu.row(k));
      x.row(piv).swap(x.row(k));
    }
    for (Index i = k + 1; i < n; ++i) {
      const double factor = lu(i, k) / p;
      if (factor == 0.0) continue;
      lu.row(i).tail(n - k - 1) -= factor * lu.row(k).tail(n - k - 1);
      x.row(i) -= factor * x.row(k);
    }
  }
  for (Index k = n - 1; k >= 0; --k) {
    for (Index j = k + 1; j < n; ++j) x.row(k) -= lu(k, j) * x.row(j);
    x.row(k) /= lu(k, k);
  }
  if (min_abs_pivot) *min_abs_pivot = smallest;
  return x;
}

BlockToeplitz random_spd_block_toeplitz(Index M, Index N, std::uint64_t seed) {
  if (M < 1 || N < 1) throw Error(Errc::invalid_argument, "generator needs M, N >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const auto draw = [&] {
    Matrix a(M, M);
    for (Index i = 0; i < M; ++i) {
      for (Index j = 0; j < M; ++j) a(i, j) = normal(rng);
    }
    return a;
  };
  std::vector<Matrix> blocks(static_cast<std::size_t>(N));
  double off = 0.0;
  for (Index m = 1; m < N; ++m) {
    const Matrix a = draw();
    Matrix g = 0.5 * (a + a.transpose()) / static_cast<double>(m * m);
    off += Eigen::SelfAdjointEigenSolver<Matrix>(g, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().maxCoeff();
    blocks[static_cast<std::size_t>(m)] = std::move(g);
  }
  const Matrix a = draw();
  blocks[0] = a * a.transpose() / static_cast<double>(M) + (1.0 + 2.0 * off) * Matrix::Identity(M, M);
  return BlockToeplitz(std::move(blocks));
}

}  // namespace bcm
