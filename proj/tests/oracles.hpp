#pragma once
// Test-side reference constructions, independent of the library's own
// generators and solvers.

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Matrix = Eigen::MatrixXd;

// gamma_m = sum_r cos(m theta_r) P_r + shift * delta_{m0} I with P_r PSD.
// Each term is Re(v v^*) (x) P_r with v_i = e^{i i theta_r}, hence PSD, so the
// expansion is SPD with smallest eigenvalue >= shift.
inline std::vector<Matrix> spectral_spd_blocks(int M, int N, std::mt19937_64& rng, double shift = 0.5) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> angle(0.0, 3.141592653589793);
  std::vector<Matrix> blocks(N, Matrix::Zero(M, M));
  for (int r = 0; r < 3; ++r) {
    Matrix a(M, M);
    for (int i = 0; i < M; ++i) {
      for (int j = 0; j < M; ++j) a(i, j) = normal(rng);
    }
    const Matrix p = a * a.transpose() / M;
    const double theta = angle(rng);
    for (int m = 0; m < N; ++m) blocks[m] += std::cos(m * theta) * p;
  }
  blocks[0] += shift * Matrix::Identity(M, M);
  return blocks;
}

inline Matrix expand(const std::vector<Matrix>& blocks) {
  const auto M = blocks.front().rows();
  const auto N = static_cast<Eigen::Index>(blocks.size());
  Matrix g(M * N, M * N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index k = 0; k < N; ++k) {
      const Matrix& b = blocks[static_cast<std::size_t>(std::abs(i - k))];
      g.block(i * M, k * M, M, M) = i <= k ? b : Matrix(b.transpose());
    }
  }
  return g;
}

inline Matrix inverse(const Matrix& a) { return a.fullPivLu().inverse(); }

}  // namespace oracle
