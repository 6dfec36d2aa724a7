#include "bcm/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "bcm/error.hpp"
#include "bcm/io.hpp"

namespace bcm {

using json = nlohmann::ordered_json;

namespace {

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw Error(Errc::parse, "'" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error(Errc::parse, "'" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(Errc::parse, "'" + key + "' expects true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t[");
    const auto e = item.find_last_not_of(" \t]");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::filesystem::path prepare_out(const ExperimentConfig& cfg) {
  std::filesystem::path dir(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create '" + cfg.out_dir + "': " + ec.message());
  return dir;
}

std::string file(const std::filesystem::path& dir, const char* name) { return (dir / name).string(); }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double relative_residual(const RowVector& c, const Matrix& dense, const RowVector& b) {
  return (c * dense - b).norm() / b.norm();
}

FlatteningStats flattening_stats(const Matrix& u, const SimGrid& grid, double eps,
                                 Matrix* profile = nullptr) {
  FlatteningStats s;
  s.shrink = std::max(2.0 * grid.h(), 0.5 * eps);
  const Interval& sg = grid.sigma();
  const double tiny = 1e-9 * grid.h();
  double sum = 0.0, sq = 0.0;
  std::vector<double> row_sum(static_cast<std::size_t>(grid.ny()), 0.0);
  std::vector<double> row_sq(static_cast<std::size_t>(grid.ny()), 0.0);
  std::vector<Index> row_n(static_cast<std::size_t>(grid.ny()), 0);
  for (Index j = 0; j < grid.ny(); ++j) {
    const double y = grid.y(j);
    if (y < s.shrink - tiny || y > grid.T() - s.shrink + tiny) continue;
    for (Index i = 0; i < grid.nx(); ++i) {
      const double x = grid.x(i);
      if (x < sg.alpha + s.shrink - tiny || x > sg.beta - s.shrink + tiny) continue;
      const double d = u(i, j) - 1.0;
      sum += u(i, j);
      sq += d * d;
      s.max_abs = std::max(s.max_abs, std::abs(d));
      ++s.nodes;
      const auto k = static_cast<std::size_t>(j);
      row_sum[k] += u(i, j);
      row_sq[k] += d * d;
      ++row_n[k];
    }
  }
  if (s.nodes == 0) throw Error(Errc::invalid_argument, "flattening region is empty; refine h");
  s.mean = sum / static_cast<double>(s.nodes);
  s.rms = std::sqrt(sq / static_cast<double>(s.nodes));
  if (profile) {
    std::vector<Index> rows;
    for (Index j = 0; j < grid.ny(); ++j) {
      if (row_n[static_cast<std::size_t>(j)] > 0) rows.push_back(j);
    }
    profile->resize(static_cast<Index>(rows.size()), 3);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto k = static_cast<std::size_t>(rows[r]);
      const auto n = static_cast<double>(row_n[k]);
      (*profile)(static_cast<Index>(r), 0) = grid.y(rows[r]);
      (*profile)(static_cast<Index>(r), 1) = row_sum[k] / n;
      (*profile)(static_cast<Index>(r), 2) = std::sqrt(row_sq[k] / n);
    }
  }
  return s;
}

json grid_json(const SimGrid& g, const GridSpec& spec) {
  return json{{"sigma", {g.sigma().alpha, g.sigma().beta}},
              {"T", g.T()},
              {"h", g.h()},
              {"dt", g.dt()},
              {"cfl_ratio", spec.cfl_ratio},
              {"nx", g.nx()},
              {"ny", g.ny()},
              {"steps_per_T", g.steps_per_T()}};
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

// ---------------------------------------------------------------- config

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  auto& p = cfg.profile;
  auto& g = cfg.grid;
  if (key == "profile") p.kind = value;
  else if (key == "rho_value") p.value = to_double(key, value);
  else if (key == "rho_top") p.rho_top = to_double(key, value);
  else if (key == "rho_bottom") p.rho_bottom = to_double(key, value);
  else if (key == "layer_depth") p.depth = to_double(key, value);
  else if (key == "layer_width") p.width = to_double(key, value);
  else if (key == "bump_amplitude") p.amplitude = to_double(key, value);
  else if (key == "bump_xc") p.xc = to_double(key, value);
  else if (key == "bump_yc") p.yc = to_double(key, value);
  else if (key == "bump_radius") p.radius = to_double(key, value);
  else if (key == "profile_csv") p.path = value;
  else if (key == "sigma_alpha") g.sigma.alpha = to_double(key, value);
  else if (key == "sigma_beta") g.sigma.beta = to_double(key, value);
  else if (key == "T") g.T = to_double(key, value);
  else if (key == "h") g.h = to_double(key, value);
  else if (key == "cfl_ratio") g.cfl_ratio = to_double(key, value);
  else if (key == "margin") g.margin = to_double(key, value);
  else if (key == "M") cfg.M = to_int(key, value);
  else if (key == "N") cfg.N = to_int(key, value);
  else if (key == "shape") cfg.shape = parse_shape(value);
  else if (key == "lambda") cfg.lambda = to_double(key, value);
  else if (key == "tol_structural") cfg.tol.structural = to_double(key, value);
  else if (key == "tol_residual") cfg.tol.residual = to_double(key, value);
  else if (key == "out") cfg.out_dir = value;
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_int(key, value));
  else if (key == "threads") cfg.threads = static_cast<int>(to_int(key, value));
  else if (key == "dense_oracle") cfg.dense_oracle = to_bool(key, value);
  else if (key == "full_table") cfg.full_table = to_bool(key, value);
  else if (key == "shortened_T") {
    cfg.shortened_T.clear();
    for (const auto& item : split_list(value)) cfg.shortened_T.push_back(to_double(key, item));
  } else if (key == "bench_M") cfg.bench_M = to_int(key, value);
  else if (key == "bench_N") {
    cfg.bench_N.clear();
    for (const auto& item : split_list(value)) cfg.bench_N.push_back(to_int(key, item));
  } else if (key == "bench_repeats") cfg.bench_repeats = static_cast<int>(to_int(key, value));
  else if (key == "verify_pairs") cfg.verify_pairs = to_int(key, value);
  else if (key == "inject_perturbation") cfg.inject_perturbation = to_double(key, value);
  else throw Error(Errc::parse, "unknown config key '" + key + "'");
}

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error(Errc::parse, e.what());
  }
  ExperimentConfig cfg;
  if (root.IsNull()) return cfg;
  if (!root.IsMap()) throw Error(Errc::parse, "config must be a key: value mapping");
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    const YAML::Node& v = kv.second;
    std::string value;
    if (v.IsScalar()) {
      value = v.as<std::string>();
    } else if (v.IsSequence()) {
      for (std::size_t k = 0; k < v.size(); ++k) {
        if (!v[k].IsScalar()) throw Error(Errc::parse, "'" + key + "' must be a flat list");
        value += (k ? "," : "") + v[k].as<std::string>();
      }
    } else {
      throw Error(Errc::parse, "'" + key + "' must be a scalar or a list");
    }
    set_config_value(cfg, key, value);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate_config(const ExperimentConfig& cfg) {
  const auto fail = [](const std::string& what) { throw Error(Errc::invalid_argument, what); };
  if (cfg.M < 1 || cfg.N < 1) fail("M and N must be >= 1");
  if (!(cfg.grid.T > 0.0)) fail("T must be positive");
  if (!(cfg.grid.h > 0.0)) fail("h must be positive");
  if (!(cfg.lambda >= 0.0)) fail("lambda must be >= 0");
  if (cfg.threads < 1) fail("threads must be >= 1");
  if (!(cfg.tol.structural > 0.0) || !(cfg.tol.residual > 0.0)) fail("tolerances must be positive");
  if (cfg.bench_M < 1 || cfg.bench_repeats < 1) fail("bench_M and bench_repeats must be >= 1");
  for (Index n : cfg.bench_N) {
    if (n < 2) fail("bench_N entries must be >= 2");
  }
  if (cfg.verify_pairs < 1) fail("verify_pairs must be >= 1");
  const double shrink = std::max(2.0 * cfg.grid.h, 0.5 * cfg.grid.sigma.length() / static_cast<double>(cfg.M));
  for (double t : cfg.shortened_T) {
    if (!(t > 0.0 && t <= cfg.grid.T)) fail("shortened_T entries must lie in (0, T]");
    if (!(t > 2.0 * shrink)) fail("shortened_T entry " + io::format_double(t) + " leaves no flattening region; need > " + io::format_double(2.0 * shrink));
  }
  const SimGrid grid(cfg.grid);  // CflViolation, EmptySigma
  if (grid.h() > cfg.grid.sigma.length() / static_cast<double>(cfg.M)) {
    fail("h exceeds the source width |sigma| / M");
  }
  if (cfg.profile.kind != "csv") make_velocity(cfg.profile, grid);
}

VelocityField make_velocity(const ProfileSpec& p, const SimGrid& grid) {
  if (p.kind == "constant") return VelocityField::constant(grid, p.value);
  if (p.kind == "layered") return VelocityField::layered(grid, p.rho_top, p.rho_bottom, p.depth, p.width);
  if (p.kind == "gaussian") return VelocityField::gaussian(grid, p.amplitude, p.xc, p.yc, p.radius);
  if (p.kind == "csv") return io::read_velocity_csv(p.path, grid);
  throw Error(Errc::parse, "unknown profile '" + p.kind + "'");
}

Control random_smooth_control(const SimGrid& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  double a[3][3];
  for (auto& row : a) {
    for (auto& v : row) v = normal(rng);
  }
  Control c(grid.control_grid());
  const double pi = std::acos(-1.0);
  for (Index i = 0; i < c.grid.nx; ++i) {
    const double s = (c.grid.x(i) - grid.sigma().alpha) / grid.sigma().length();
    for (Index n = 0; n < c.grid.nt; ++n) {
      const double t = c.grid.t(n) / grid.T();
      double v = 0.0;
      for (int p = 0; p < 3; ++p) {
        for (int q = 0; q < 3; ++q) v += a[p][q] * std::sin((p + 1) * pi * s) * std::sin((q + 1) * pi * t / 2);
      }
      c.values(i, n) = v * std::sin(pi * s);
    }
  }
  return c;
}

Control test_pulse(const SimGrid& grid) {
  Control c(grid.control_grid());
  const double wt = grid.T() / 16.0;
  const double t0 = 6.0 * wt;
  const double wx = grid.sigma().length() / 8.0;
  const double xc = 0.5 * (grid.sigma().alpha + grid.sigma().beta);
  for (Index i = 0; i < c.grid.nx; ++i) {
    const double px = std::exp(-std::pow((c.grid.x(i) - xc) / wx, 2));
    for (Index n = 0; n < c.grid.nt; ++n) c.values(i, n) = px * std::exp(-std::pow((c.grid.t(n) - t0) / wt, 2));
  }
  return c;
}

// ---------------------------------------------------------------- forward

ForwardReport run_forward(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const SimGrid grid(cfg.grid);
  const VelocityField rho = make_velocity(cfg.profile, grid);
  const Control f = test_pulse(grid);
  ForwardOptions opts;
  opts.snapshot_times = {0.5 * grid.T(), grid.T()};
  const WaveHistory h = solve_forward(rho, f, grid, grid.T(), opts);

  ForwardReport r;
  r.peak = h.peak;
  r.steps = h.steps;
  r.finite_speed_ratio = h.peak > 0.0 ? finite_speed_violation(h, grid, grid.T()) / h.peak : 0.0;

  const auto dir = prepare_out(cfg);
  io::write_velocity_csv(file(dir, "velocity.csv"), rho);
  io::write_signal_csv(file(dir, "pulse_control.csv"), f);
  io::write_trace_csv(file(dir, "pulse_trace.csv"), boundary_trace(h, grid, grid.T()));
  io::write_frame_csv(file(dir, "pulse_frame_half_T.csv"), h.frame_at(0.5 * grid.T()), grid);
  io::write_frame_csv(file(dir, "pulse_frame_T.csv"), h.frame_at(grid.T()), grid);
  io::write_text(file(dir, "forward.json"), to_json(r) + "\n");
  return r;
}

// ---------------------------------------------------------------- gram

namespace {

GramReport assemble(const ExperimentConfig& cfg, const SimGrid& grid, const VelocityField& rho, bool full) {
  GramReport r{.assembly = {BlockToeplitz({Matrix::Identity(1, 1)}), RowVector(), std::nullopt},
               .lattice = build_lattice(cfg.M, cfg.N, cfg.grid.sigma, cfg.grid.T, cfg.shape)};
  GramOptions opts;
  opts.full_table = full;
  opts.threads = cfg.threads;
  r.assembly = assemble_gram(rho, r.lattice, grid, opts);
  if (r.assembly.full_entries) r.toeplitz_deviation = toeplitz_deviation(*r.assembly.full_entries, cfg.M, cfg.N);
  return r;
}

void write_gram(const std::filesystem::path& dir, const GramReport& r, const ExperimentConfig& cfg) {
  io::save_toeplitz(file(dir, "G.bin"), r.assembly.G);
  io::save_toeplitz(file(dir, "G.csv"), r.assembly.G);
  io::write_matrix_csv(file(dir, "B.csv"), r.assembly.B);
  if (r.assembly.full_entries) io::write_matrix_csv(file(dir, "G_full.csv"), *r.assembly.full_entries);
  io::write_text(file(dir, "manifest.json"), to_json(r, cfg) + "\n");
}

}  // namespace

GramReport run_gram(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const SimGrid grid(cfg.grid);
  const VelocityField rho = make_velocity(cfg.profile, grid);
  GramReport r = assemble(cfg, grid, rho, cfg.full_table);
  write_gram(prepare_out(cfg), r, cfg);
  return r;
}

// ---------------------------------------------------------------- solve

SolveReport run_solve(const ExperimentConfig& cfg) {
  const auto dir = prepare_out(cfg);
  if (!std::filesystem::exists(dir / "G.bin") || !std::filesystem::exists(dir / "B.csv")) run_gram(cfg);
  const BlockToeplitz g = io::load_toeplitz(file(dir, "G.bin")).shifted(cfg.lambda);
  const Matrix b = io::read_matrix_csv(file(dir, "B.csv"));
  if (b.rows() != 1 || b.cols() != g.dim()) {
    throw Error(Errc::grid_mismatch, "B.csv does not match the dimension of G.bin");
  }
  const RowVector brow = b.row(0);
  const Matrix dense = expand_dense(g);

  SolveReport r;
  r.dense = cfg.dense_oracle;
  const auto start = std::chrono::steady_clock::now();
  if (r.dense) {
    r.C = dense_oracle_solve(dense.transpose(), brow.transpose()).transpose();
  } else {
    r.C = solve_row(g, brow);
  }
  r.seconds = seconds_since(start);
  r.residual = relative_residual(r.C, dense, brow);
  io::write_matrix_csv(file(dir, "C.csv"), r.C);
  io::write_text(file(dir, "solve.json"), to_json(r) + "\n");
  return r;
}

// ---------------------------------------------------------------- bcp

BcpReport run_bcp(const ExperimentConfig& cfg, bool write_artifacts) {
  validate_config(cfg);
  const SimGrid grid(cfg.grid);
  const VelocityField rho = make_velocity(cfg.profile, grid);

  BcpReport r;
  r.M = cfg.M;
  r.N = cfg.N;
  r.T = grid.T();
  r.lambda = cfg.lambda;
  r.dense_path = cfg.dense_oracle;

  auto start = std::chrono::steady_clock::now();
  const GramReport gram = assemble(cfg, grid, rho, cfg.full_table);
  r.seconds_assembly = seconds_since(start);
  r.block_asymmetry = gram.assembly.block_asymmetry;

  const BlockToeplitz g = gram.assembly.G.shifted(cfg.lambda);
  const RowVector& b = gram.assembly.B;
  const Matrix dense = expand_dense(g);

  start = std::chrono::steady_clock::now();
  const RowVector c_lev = solve_row(g, b);
  r.seconds_levinson = seconds_since(start);
  start = std::chrono::steady_clock::now();
  const RowVector c_dense = dense_oracle_solve(dense.transpose(), b.transpose(), &r.dense_min_abs_pivot).transpose();
  r.seconds_dense = seconds_since(start);

  r.residual_levinson = relative_residual(c_lev, dense, b);
  r.residual_dense = relative_residual(c_dense, dense, b);
  r.path_difference = (c_lev - c_dense).norm() / c_dense.norm();
  r.C = r.dense_path ? c_dense : c_lev;

  r.min_pivot = spd_diagnostics(g).min_pivot;
  const Vector eig = Eigen::SelfAdjointEigenSolver<Matrix>(dense, Eigen::EigenvaluesOnly).eigenvalues();
  r.min_eigenvalue = eig.minCoeff();
  r.max_abs_eigenvalue = eig.cwiseAbs().maxCoeff();
  r.negative_eigenvalues = (eig.array() < -cfg.tol.structural * r.max_abs_eigenvalue).count();

  // The Gram pairing uses S S^* = 2P, so the control solving the flattening
  // problem is -1/2 times the restriction of the combined sources.
  const ExtendedControl f_ext = combine_sources(gram.lattice, r.C, grid.extended_grid());
  Control f = restrict_to_T(f_ext);
  f.values *= -0.5;

  ForwardOptions opts;
  opts.snapshot_times = {grid.T()};
  const WaveHistory h = solve_forward(rho, f, grid, grid.T(), opts);
  const Matrix& u = h.frame_at(grid.T());
  Matrix profile;
  r.flattening = flattening_stats(u, grid, gram.lattice.eps, &profile);

  if (write_artifacts) {
    const auto dir = prepare_out(cfg);
    write_gram(dir, gram, cfg);
    io::write_matrix_csv(file(dir, "C.csv"), r.C);
    io::write_matrix_csv(file(dir, "C_levinson.csv"), c_lev);
    io::write_matrix_csv(file(dir, "C_dense.csv"), c_dense);
    io::write_signal_csv(file(dir, "extended_control.csv"), f_ext);
    io::write_signal_csv(file(dir, "control.csv"), f);
    io::write_trace_csv(file(dir, "trace.csv"), boundary_trace(h, grid, grid.T()));
    io::write_frame_csv(file(dir, "frame_T.csv"), u, grid);
    {
      std::ofstream out(file(dir, "flattening_profile.csv"));
      out << "y,mean_u,rms_deviation\n";
      for (Index k = 0; k < profile.rows(); ++k) {
        out << io::format_double(profile(k, 0)) << ',' << io::format_double(profile(k, 1)) << ','
            << io::format_double(profile(k, 2)) << '\n';
      }
    }
    io::write_text(file(dir, "report.json"), to_json(r) + "\n");
    io::write_text(file(dir, "timings.json"),
                   json{{"assembly_seconds", r.seconds_assembly},
                        {"levinson_seconds", r.seconds_levinson},
                        {"dense_seconds", r.seconds_dense}}
                           .dump(2) +
                       "\n");
  }
  return r;
}

std::vector<BcpReport> run_shortened(const ExperimentConfig& cfg, const std::vector<double>& horizons) {
  std::vector<BcpReport> out;
  for (double t : horizons) {
    ExperimentConfig c = cfg;
    c.grid.T = t;
    c.shortened_T.clear();
    out.push_back(run_bcp(c, false));
  }
  return out;
}

// ---------------------------------------------------------------- bench

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(Errc::invalid_argument, "slope needs two or more points");
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double lx = std::log(x[k]);
    const double ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

// Mean per-call time of a batch long enough to rise above clock resolution.
template <class Fn>
double time_batch(Fn&& fn) {
  int calls = 0;
  const auto start = std::chrono::steady_clock::now();
  double elapsed = 0.0;
  do {
    fn();
    ++calls;
    elapsed = seconds_since(start);
  } while (elapsed < 0.01);
  return elapsed / calls;
}

}  // namespace

BenchReport run_bench(const ExperimentConfig& cfg) {
  validate_config(cfg);
  BenchReport r;
  r.M = cfg.bench_M;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal;
  std::vector<BlockToeplitz> mats;
  std::vector<RowVector> rhs;
  for (Index n : cfg.bench_N) {
    mats.push_back(random_spd_block_toeplitz(cfg.bench_M, n, cfg.seed + static_cast<std::uint64_t>(n)));
    RowVector b(mats.back().dim());
    for (Index k = 0; k < b.size(); ++k) b(k) = normal(rng);
    rhs.push_back(std::move(b));
    BenchRow row;
    row.N = n;
    r.rows.push_back(row);
  }
  // Rounds sweep every size in turn, so slow and fast phases of a shared
  // machine hit all sizes alike; the median over rounds is kept.
  volatile double sink = 0.0;
  std::vector<std::vector<double>> lev_runs(mats.size()), dense_runs(mats.size());
  for (int round = 0; round < cfg.bench_repeats; ++round) {
    for (std::size_t k = 0; k < mats.size(); ++k) {
      const auto& g = mats[k];
      const auto& b = rhs[k];
      lev_runs[k].push_back(time_batch([&] { sink = sink + solve_row(g, b)(0); }));
      dense_runs[k].push_back(time_batch([&] {
        sink = sink + dense_oracle_solve(expand_dense(g).transpose(), b.transpose())(0, 0);
      }));
    }
  }
  const auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  };
  for (std::size_t k = 0; k < mats.size(); ++k) {
    r.rows[k].levinson_seconds = median(lev_runs[k]);
    r.rows[k].dense_seconds = median(dense_runs[k]);
  }
  std::vector<double> ns, lev, den;
  for (const auto& row : r.rows) {
    ns.push_back(static_cast<double>(row.N));
    lev.push_back(row.levinson_seconds);
    den.push_back(row.dense_seconds);
  }
  if (r.rows.size() >= 2) {
    r.levinson_exponent = loglog_slope(ns, lev);
    r.dense_exponent = loglog_slope(ns, den);
  }

  const auto dir = prepare_out(cfg);
  std::ofstream out(file(dir, "bench.csv"));
  out << "N,levinson_seconds,dense_seconds\n";
  for (const auto& row : r.rows) {
    out << row.N << ',' << io::format_double(row.levinson_seconds) << ',' << io::format_double(row.dense_seconds)
        << '\n';
  }
  io::write_text(file(dir, "bench.json"), to_json(r) + "\n");
  return r;
}

// ---------------------------------------------------------------- verify

namespace {

template <class Fn>
void guarded(std::vector<Check>& out, const std::string& name, double threshold, Fn&& fn) {
  Check c;
  c.name = name;
  c.threshold = threshold;
  try {
    c.value = fn(c.detail);
    c.passed = c.value <= threshold;
  } catch (const std::exception& e) {
    c.value = std::numeric_limits<double>::quiet_NaN();
    c.passed = false;
    c.detail = e.what();
  }
  out.push_back(std::move(c));
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

}  // namespace

std::vector<Check> run_verify(const ExperimentConfig& cfg) {
  std::vector<Check> checks;
  std::optional<SimGrid> grid_storage;
  std::optional<VelocityField> rho_storage;
  guarded(checks, "config", 0.0, [&](std::string&) {
    validate_config(cfg);
    grid_storage.emplace(cfg.grid);
    rho_storage.emplace(make_velocity(cfg.profile, *grid_storage));
    return 0.0;
  });
  if (!checks.back().passed) return checks;
  const SimGrid& grid = *grid_storage;
  const VelocityField& rho = *rho_storage;
  const Vector boundary_rho = rho.boundary_rho(grid);
  std::mt19937_64 rng(cfg.seed);

  guarded(checks, "finite_speed", 1e-6, [&](std::string& detail) {
    ForwardOptions opts;
    opts.snapshot_times = {0.5 * grid.T(), grid.T()};
    const WaveHistory h = solve_forward(rho, test_pulse(grid), grid, grid.T(), opts);
    detail = "peak " + fmt(h.peak);
    return std::max(finite_speed_violation(h, grid, 0.5 * grid.T()), finite_speed_violation(h, grid, grid.T())) /
           h.peak;
  });

  guarded(checks, "adjoint_identity", 1e-12, [&](std::string&) {
    std::normal_distribution<double> normal;
    Control f(grid.control_grid());
    ExtendedControl g(grid.extended_grid());
    for (Index k = 0; k < f.values.size(); ++k) f.values.data()[k] = normal(rng);
    for (Index k = 0; k < g.values.size(); ++k) g.values.data()[k] = normal(rng);
    const ExtendedControl sf = odd_extend(f);
    const double lhs = inner_product_plain(sf, g);
    const double rhs = 2.0 * inner_product_plain(f, restrict_to_T(odd_part(g)));
    return std::abs(lhs - rhs) / std::sqrt(inner_product_plain(sf, sf) * inner_product_plain(g, g));
  });

  guarded(checks, "projector_idempotent", 1e-14, [&](std::string&) {
    std::normal_distribution<double> normal;
    ExtendedControl g(grid.extended_grid());
    for (Index k = 0; k < g.values.size(); ++k) g.values.data()[k] = normal(rng);
    const ExtendedControl p = odd_part(g);
    return (odd_part(p).values - p.values).cwiseAbs().maxCoeff() / g.values.cwiseAbs().maxCoeff();
  });

  std::vector<Control> family;
  std::vector<Control> images;
  // The centred log-gradient scheme is self-adjoint only up to O(h^2) when
  // rho varies along sigma, so this is a discretization tolerance.
  guarded(checks, "ct_symmetry", 5e-2, [&](std::string&) {
    for (Index k = 0; k <= cfg.verify_pairs; ++k) {
      family.push_back(random_smooth_control(grid, rng));
      images.push_back(apply_ct(rho, family.back(), grid));
    }
    const auto n = static_cast<Index>(family.size());
    Matrix k(n, n);
    for (Index a = 0; a < n; ++a) {
      for (Index b = 0; b < n; ++b) {
        k(a, b) = inner_product_outer(images[static_cast<std::size_t>(a)], family[static_cast<std::size_t>(b)],
                                      boundary_rho);
      }
    }
    return (k - k.transpose()).cwiseAbs().maxCoeff() / k.cwiseAbs().maxCoeff();
  });

  guarded(checks, "ct_positivity", cfg.tol.structural, [&](std::string& detail) {
    if (family.empty()) throw Error(Errc::internal, "no control family");
    const auto n = static_cast<Index>(family.size());
    Matrix k(n, n);
    for (Index a = 0; a < n; ++a) {
      for (Index b = 0; b < n; ++b) {
        k(a, b) = inner_product_outer(images[static_cast<std::size_t>(a)], family[static_cast<std::size_t>(b)],
                                      boundary_rho);
      }
    }
    const Vector eig = Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (k + k.transpose()), Eigen::EigenvaluesOnly)
                           .eigenvalues();
    detail = "eigenvalues in [" + fmt(eig.minCoeff()) + ", " + fmt(eig.maxCoeff()) + "]";
    return std::max(0.0, -eig.minCoeff() / eig.cwiseAbs().maxCoeff());
  });

  guarded(checks, "ct_vs_oracle", 5e-2, [&](std::string&) {
    if (family.size() < 2) throw Error(Errc::internal, "no control family");
    double worst = 0.0;
    for (std::size_t a = 0; a + 1 < family.size(); ++a) {
      const Control& f = family[a];
      const Control& g = family[a + 1];
      const double fg = ct_form_oracle(rho, f, g, grid);
      const double ff = ct_form_oracle(rho, f, f, grid);
      const double gg = ct_form_oracle(rho, g, g, grid);
      worst = std::max(worst, std::abs(fg - inner_product_outer(images[a], g, boundary_rho)) / std::sqrt(ff * gg));
    }
    return worst;
  });

  std::optional<GramReport> gram;
  guarded(checks, "toeplitz_deviation", 5e-2, [&](std::string& detail) {
    gram = assemble(cfg, grid, rho, true);
    Matrix full = *gram->assembly.full_entries;
    if (cfg.inject_perturbation != 0.0) {
      full(0, 0) += cfg.inject_perturbation * full.cwiseAbs().maxCoeff();
      detail = "perturbed entry (0,0) by " + fmt(cfg.inject_perturbation) + " max|G|";
    }
    return toeplitz_deviation(full, cfg.M, cfg.N);
  });

  const auto need_gram = [&] {
    if (!gram) throw Error(Errc::internal, "Gram assembly failed");
    return gram->assembly.G.shifted(cfg.lambda);
  };

  guarded(checks, "levinson_vs_dense", 1e-7, [&](std::string&) {
    const BlockToeplitz g = need_gram();
    const RowVector& b = gram->assembly.B;
    const RowVector c_lev = solve_row(g, b);
    const RowVector c_dense = dense_oracle_solve(expand_dense(g).transpose(), b.transpose()).transpose();
    return (c_lev - c_dense).norm() / c_dense.norm();
  });

  guarded(checks, "linear_residual", 1e-8, [&](std::string&) {
    const BlockToeplitz g = need_gram();
    const RowVector& b = gram->assembly.B;
    return relative_residual(solve_row(g, b), expand_dense(g), b);
  });

  guarded(checks, "gram_odd_positivity", cfg.tol.structural, [&](std::string& detail) {
    const Matrix dense = expand_dense(need_gram());
    const Index M = cfg.M;
    const Index half = cfg.N / 2;
    if (half == 0) {
      detail = "N = 1 has no odd subspace";
      return 0.0;
    }
    Matrix q = Matrix::Zero(dense.rows(), M * half);
    for (Index i = 0; i < half; ++i) {
      for (Index j = 0; j < M; ++j) {
        q(i * M + j, i * M + j) = std::sqrt(0.5);
        q((cfg.N - 1 - i) * M + j, i * M + j) = -std::sqrt(0.5);
      }
    }
    const Vector eig =
        Eigen::SelfAdjointEigenSolver<Matrix>(q.transpose() * dense * q, Eigen::EigenvaluesOnly).eigenvalues();
    detail = "smallest odd-subspace eigenvalue " + fmt(eig.minCoeff());
    return std::max(0.0, -eig.minCoeff() / dense.cwiseAbs().maxCoeff());
  });

  return checks;
}

void write_report(const ExperimentConfig& cfg, const std::string& name, const std::string& text) {
  io::write_text(file(prepare_out(cfg), name.c_str()), text);
}

// ---------------------------------------------------------------- json

std::string to_json(const ExperimentConfig& cfg) {
  const auto& p = cfg.profile;
  json profile{{"kind", p.kind}};
  if (p.kind == "constant") profile["value"] = p.value;
  if (p.kind == "layered") {
    profile.update(json{{"rho_top", p.rho_top}, {"rho_bottom", p.rho_bottom}, {"depth", p.depth}, {"width", p.width}});
  }
  if (p.kind == "gaussian") {
    profile.update(json{{"amplitude", p.amplitude}, {"xc", p.xc}, {"yc", p.yc}, {"radius", p.radius}});
  }
  if (p.kind == "csv") profile["path"] = p.path;
  return json{{"profile", profile},
              {"sigma", {cfg.grid.sigma.alpha, cfg.grid.sigma.beta}},
              {"T", cfg.grid.T},
              {"h", cfg.grid.h},
              {"cfl_ratio", cfg.grid.cfl_ratio},
              {"margin", cfg.grid.margin},
              {"M", cfg.M},
              {"N", cfg.N},
              {"shape", shape_name(cfg.shape)},
              {"lambda", cfg.lambda},
              {"tol_structural", cfg.tol.structural},
              {"tol_residual", cfg.tol.residual},
              {"seed", cfg.seed},
              {"dense_oracle", cfg.dense_oracle}}
      .dump(2);
}

std::string to_json(const ForwardReport& r) {
  return json{{"peak", r.peak}, {"finite_speed_ratio", r.finite_speed_ratio}, {"steps", r.steps}}.dump(2);
}

std::string to_json(const GramReport& r, const ExperimentConfig& cfg) {
  const auto& a = r.assembly;
  const SimGrid grid(cfg.grid);
  json j{{"M", r.lattice.M},
         {"N", r.lattice.N},
         {"eps", r.lattice.eps},
         {"delta", r.lattice.delta},
         {"shape", shape_name(r.lattice.shape)},
         {"amplitude", r.lattice.amplitude},
         {"grid", grid_json(grid, cfg.grid)},
         {"config", json::parse(to_json(cfg))},
         {"block_asymmetry", a.block_asymmetry},
         {"min_eigenvalue", a.min_eigenvalue},
         {"negative_eigenvalues", a.negative_eigenvalues},
         {"simulations", a.simulations},
         {"files", {"G.bin", "G.csv", "B.csv"}}};
  if (a.full_entries) {
    j["toeplitz_deviation"] = r.toeplitz_deviation;
    j["files"].push_back("G_full.csv");
  }
  return j.dump(2);
}

std::string to_json(const SolveReport& r) {
  return json{{"path", r.dense ? "dense" : "levinson"}, {"residual", num(r.residual)}, {"seconds", r.seconds}}.dump(2);
}

std::string to_json(const BcpReport& r) {
  return json{{"M", r.M},
              {"N", r.N},
              {"T", r.T},
              {"lambda", r.lambda},
              {"solution_path", r.dense_path ? "dense" : "levinson"},
              {"residual_levinson", num(r.residual_levinson)},
              {"residual_dense", num(r.residual_dense)},
              {"path_difference", num(r.path_difference)},
              {"conditioning",
               {{"min_ldlt_pivot", num(r.min_pivot)},
                {"dense_min_abs_pivot", num(r.dense_min_abs_pivot)},
                {"min_eigenvalue", num(r.min_eigenvalue)},
                {"max_abs_eigenvalue", num(r.max_abs_eigenvalue)},
                {"negative_eigenvalues", r.negative_eigenvalues},
                {"block_asymmetry", num(r.block_asymmetry)}}},
              {"flattening",
               {{"shrink", r.flattening.shrink},
                {"nodes", r.flattening.nodes},
                {"rms", num(r.flattening.rms)},
                {"max_abs", num(r.flattening.max_abs)},
                {"mean", num(r.flattening.mean)}}},
              {"files",
               {"G.bin", "B.csv", "C.csv", "C_levinson.csv", "C_dense.csv", "control.csv", "extended_control.csv",
                "trace.csv", "frame_T.csv", "flattening_profile.csv", "timings.json"}}}
      .dump(2);
}

std::string to_json(const BenchReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"N", row.N}, {"levinson_seconds", row.levinson_seconds}, {"dense_seconds", row.dense_seconds}});
  }
  return json{{"M", r.M},
              {"rows", rows},
              {"levinson_exponent", r.levinson_exponent},
              {"dense_exponent", r.dense_exponent}}
      .dump(2);
}

std::string to_json(const std::vector<Check>& checks) {
  json list = json::array();
  bool all = true;
  for (const auto& c : checks) {
    all = all && c.passed;
    json j{{"name", c.name}, {"value", num(c.value)}, {"threshold", c.threshold}, {"passed", c.passed}};
    if (!c.detail.empty()) j["detail"] = c.detail;
    list.push_back(j);
  }
  return json{{"passed", all}, {"checks", list}}.dump(2);
}

}  // namespace bcm
