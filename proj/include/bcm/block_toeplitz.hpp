#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace bcm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

/// Symmetric block-Toeplitz matrix stored by its first block row
/// [gamma_0, ..., gamma_{N-1}]; block (i,k) of the expansion is gamma_{|i-k|}.
class BlockToeplitz {
 public:
  /// Throws InvalidArgument on empty input, non-square or mismatched blocks,
  /// and non-finite entries.
  explicit BlockToeplitz(std::vector<Matrix> blocks);

  Index block_size() const { return blocks_.front().rows(); }
  Index block_count() const { return static_cast<Index>(blocks_.size()); }
  Index dim() const { return block_size() * block_count(); }

  const Matrix& block(Index m) const { return blocks_[static_cast<std::size_t>(m)]; }
  const std::vector<Matrix>& blocks() const { return blocks_; }

  /// Tikhonov shift G + lambda I; only gamma_0 changes.
  BlockToeplitz shifted(double lambda) const;

 private:
  std::vector<Matrix> blocks_;
};

/// Stack of M x M blocks [Y_0, ..., Y_k], read top to bottom.
struct BlockColumn {
  std::vector<Matrix> blocks;

  Index block_size() const { return blocks.empty() ? 0 : blocks.front().rows(); }
  Index block_count() const { return static_cast<Index>(blocks.size()); }
  Matrix stacked() const;
};

struct Tolerances {
  double structural = 1e-8;
  double residual = 1e-9;
};

struct SpdDiagnostics {
  bool symmetric = false;
  double symmetry_deviation = 0.0;  // max |A - A^T| / max |A|
  double min_pivot = 0.0;           // smallest pivot of unpivoted LDL^T
};

Matrix expand_dense(const BlockToeplitz& g);

/// Non-throwing variant: measures symmetry and the LDL^T pivots of the
/// expansion. Elimination stops at the first non-positive pivot.
SpdDiagnostics spd_diagnostics(const BlockToeplitz& g);

/// Throws NonSymmetric when the expansion's relative asymmetry exceeds tol,
/// NotPositive when a pivot is <= tol * max|diag|.
SpdDiagnostics validate_spd(const BlockToeplitz& g, double tol = Tolerances{}.structural);

/// Intermediate quantities of the recursion: scaled[k] is Y~^{(k)} and
/// factors[k] is Q_k, so that scaled[k].blocks[l] * factors[k] = Y_l^{(k)}.
struct LevinsonTrace {
  std::vector<BlockColumn> scaled;
  std::vector<Matrix> factors;
};

/// Block column Y with G Y = (O, ..., O, I)'. Only requires the leading block
/// sections of G to be nonsingular; positivity is not checked here.
/// Throws SingularIntermediate when gamma_0 or I - F_k^2 cannot be inverted.
BlockColumn levinson_y(const BlockToeplitz& g, LevinsonTrace* trace = nullptr);

/// Dense inverse of a symmetric block-Toeplitz matrix from its last block
/// column. Throws SingularCorner if Y_{N-1} is singular.
Matrix invert_from_y(const BlockColumn& y);

/// Row system C G = B. Applies the four triangular Toeplitz factors of the
/// inverse to B without forming the inverse.
RowVector solve_row(const BlockColumn& y, const RowVector& b);
RowVector solve_row(const BlockToeplitz& g, const RowVector& b);

/// Random symmetric blocks with decaying off-diagonal norms; gamma_0 is lifted
/// so that the expansion is block diagonally dominant, hence SPD with
/// smallest eigenvalue >= 1. Deterministic in seed.
BlockToeplitz random_spd_block_toeplitz(Index M, Index N, std::uint64_t seed);

/// Reference dense solver: Gaussian elimination with partial pivoting.
/// min_abs_pivot, if given, receives the smallest |pivot| seen.
/// Throws Singular on a zero pivot.
Matrix dense_oracle_solve(const Matrix& a, const Matrix& rhs, double* min_abs_pivot = nullptr);

}  // namespace bcm
