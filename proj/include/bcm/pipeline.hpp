#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bcm/gram_system.hpp"

namespace bcm {

struct ProfileSpec {
  std::string kind = "constant";  // constant | layered | gaussian | csv
  double value = 1.0;
  // layered
  double rho_top = 1.0;
  double rho_bottom = 1.5;
  double depth = 0.5;
  double width = 0.1;
  // gaussian
  double amplitude = 0.3;
  double xc = 0.5;
  double yc = 0.5;
  double radius = 0.2;
  // csv
  std::string path;
};

struct ExperimentConfig {
  ProfileSpec profile;
  GridSpec grid;
  Index M = 2;
  Index N = 8;
  SourceShape shape = SourceShape::hat;
  double lambda = 0.0;
  Tolerances tol;
  std::string out_dir = "bcm_out";
  std::uint64_t seed = 1;
  int threads = 1;
  bool dense_oracle = false;  // solve with the dense path instead of Levinson
  bool full_table = false;    // gram: also simulate every source for the Toeplitz check
  std::vector<double> shortened_T;

  Index bench_M = 4;
  std::vector<Index> bench_N{16, 32, 64, 128};
  int bench_repeats = 9;

  Index verify_pairs = 3;
  double inject_perturbation = 0.0;  // relative size of one corrupted Gram entry in verify
};

/// Applies one key = value setting; the same keys are accepted in config
/// files. Lists are comma separated. Throws Parse on unknown keys or values.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
/// YAML mapping of the keys above.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Throws InvalidArgument (or the grid's own errors) on inconsistent settings.
void validate_config(const ExperimentConfig& cfg);

VelocityField make_velocity(const ProfileSpec& profile, const SimGrid& grid);

/// Sum of a few random low modes in x and t, zero at t = 0 and on the ends of sigma.
Control random_smooth_control(const SimGrid& grid, std::mt19937_64& rng);

/// Gaussian pulse centred on sigma (width |sigma|/8) peaking at t = 3T/8
/// (width T/16); below 1e-15 at t = 0. Compactly supported bumps are avoided
/// here: their slowly decaying spectra excite grid-scale precursors ahead of
/// the front at the 1e-5 level.
Control test_pulse(const SimGrid& grid);

struct ForwardReport {
  double peak = 0.0;
  double finite_speed_ratio = 0.0;  // violation / peak at t = T
  Index steps = 0;
};

/// Runs the test pulse to T; writes velocity.csv, pulse_control.csv,
/// pulse_trace.csv and frames at T/2 and T.
ForwardReport run_forward(const ExperimentConfig& cfg);

struct GramReport {
  GramAssembly assembly;
  SourceLattice lattice;
  double toeplitz_deviation = -1.0;  // only with full_table
};

/// Writes G.bin, G.csv, B.csv, manifest.json.
GramReport run_gram(const ExperimentConfig& cfg);

struct SolveReport {
  RowVector C;
  double residual = 0.0;  // ||C G - B|| / ||B||
  double seconds = 0.0;
  bool dense = false;
};

/// Solves C (G + lambda I) = B from G.bin and B.csv in out_dir; writes C.csv.
SolveReport run_solve(const ExperimentConfig& cfg);

struct FlatteningStats {
  double shrink = 0.0;
  Index nodes = 0;
  double rms = 0.0;
  double max_abs = 0.0;
  double mean = 0.0;
};

struct BcpReport {
  Index M = 0;
  Index N = 0;
  double T = 0.0;
  double lambda = 0.0;
  bool dense_path = false;
  double residual_levinson = 0.0;
  double residual_dense = 0.0;
  double path_difference = 0.0;  // ||C_lev - C_dense|| / ||C_dense||
  double min_pivot = 0.0;
  double dense_min_abs_pivot = 0.0;
  double min_eigenvalue = 0.0;
  double max_abs_eigenvalue = 0.0;
  Index negative_eigenvalues = 0;
  double block_asymmetry = 0.0;
  FlatteningStats flattening;
  double seconds_assembly = 0.0;
  double seconds_levinson = 0.0;
  double seconds_dense = 0.0;
  RowVector C;
};

/// Full boundary control problem: assemble, solve both ways, form the control,
/// re-simulate to T and measure |u(T) - 1| on the interior of the ray tube.
/// With write_artifacts, everything needed to recompute the report goes to out_dir.
BcpReport run_bcp(const ExperimentConfig& cfg, bool write_artifacts = true);

/// run_bcp for each T' of the list, without artifacts.
std::vector<BcpReport> run_shortened(const ExperimentConfig& cfg, const std::vector<double>& horizons);

struct BenchRow {
  Index N = 0;
  double levinson_seconds = 0.0;
  double dense_seconds = 0.0;
};

struct BenchReport {
  Index M = 0;
  std::vector<BenchRow> rows;
  double levinson_exponent = 0.0;
  double dense_exponent = 0.0;
};

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Times solve_row and the dense oracle on synthetic SPD matrices.
BenchReport run_bench(const ExperimentConfig& cfg);

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
  std::string detail;
};

/// Cross-module invariant suite. Failures, including errors raised while
/// setting up, are returned as entries rather than thrown.
std::vector<Check> run_verify(const ExperimentConfig& cfg);

/// Writes text to out_dir/name, creating the directory.
void write_report(const ExperimentConfig& cfg, const std::string& name, const std::string& text);

// JSON renderings used for report files and the C API summaries.
std::string to_json(const ExperimentConfig& cfg);
std::string to_json(const ForwardReport& r);
std::string to_json(const GramReport& r, const ExperimentConfig& cfg);
std::string to_json(const SolveReport& r);
std::string to_json(const BcpReport& r);
std::string to_json(const BenchReport& r);
std::string to_json(const std::vector<Check>& checks);

}  // namespace bcm
