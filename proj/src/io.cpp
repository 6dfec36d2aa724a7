#include "bcm/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string_view>

#include "bcm/error.hpp"

namespace bcm::io {

namespace {

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw Error(Errc::io, "cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw Error(Errc::io, "cannot open '" + path + "'");
  return in;
}

double parse_double(std::string_view s, const std::string& where) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(Errc::parse, "bad number '" + std::string(s) + "' in " + where);
  }
  return v;
}

std::vector<double> split_numbers(const std::string& line, const std::string& where) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    const std::size_t comma = line.find(',', start);
    const std::size_t stop = comma == std::string::npos ? line.size() : comma;
    out.push_back(parse_double(std::string_view(line).substr(start, stop - start), where));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int k = 0; k < 8; ++k) bytes[k] = static_cast<char>((v >> (8 * k)) & 0xffu);
  out.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& in, const std::string& path) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw Error(Errc::parse, "truncated file '" + path + "'");
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error(Errc::internal, "number formatting failed");
  return std::string(buf, ptr);
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  auto out = open_out(path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

Matrix read_matrix_csv(const std::string& path) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (blank(line) || line.front() == '#') continue;
    rows.push_back(split_numbers(line, path));
    if (rows.back().size() != rows.front().size()) throw Error(Errc::parse, "ragged rows in '" + path + "'");
  }
  if (rows.empty()) throw Error(Errc::parse, "no data in '" + path + "'");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

void write_blocks_csv(const std::string& path, const std::vector<Matrix>& blocks) {
  if (blocks.empty()) throw Error(Errc::invalid_argument, "no blocks to write");
  const Index m = blocks.front().rows();
  Matrix stacked(m * static_cast<Index>(blocks.size()), m);
  for (std::size_t k = 0; k < blocks.size(); ++k) stacked.middleRows(static_cast<Index>(k) * m, m) = blocks[k];
  write_matrix_csv(path, stacked);
}

std::vector<Matrix> read_blocks_csv(const std::string& path) {
  const Matrix stacked = read_matrix_csv(path);
  const Index m = stacked.cols();
  if (stacked.rows() % m != 0) throw Error(Errc::parse, "row count of '" + path + "' is not a multiple of M");
  std::vector<Matrix> blocks;
  for (Index k = 0; k < stacked.rows() / m; ++k) blocks.push_back(stacked.middleRows(k * m, m));
  return blocks;
}

void write_blocks_binary(const std::string& path, const std::vector<Matrix>& blocks) {
  if (blocks.empty()) throw Error(Errc::invalid_argument, "no blocks to write");
  const auto m = static_cast<std::uint64_t>(blocks.front().rows());
  auto out = open_out(path, std::ios::out | std::ios::binary);
  put_u64(out, m);
  put_u64(out, blocks.size());
  put_u64(out, blocks.size());
  for (const auto& b : blocks) {
    for (Index i = 0; i < b.rows(); ++i) {
      for (Index j = 0; j < b.cols(); ++j) put_u64(out, std::bit_cast<std::uint64_t>(b(i, j)));
    }
  }
  if (!out) throw Error(Errc::io, "write failed for '" + path + "'");
}

std::vector<Matrix> read_blocks_binary(const std::string& path) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  const auto m = static_cast<Index>(get_u64(in, path));
  const auto n = get_u64(in, path);
  const auto count = get_u64(in, path);
  if (m < 1 || n < 1 || count != n || m > (1 << 20) || n > (1u << 24)) {
    throw Error(Errc::parse, "inconsistent header in '" + path + "'");
  }
  std::vector<Matrix> blocks(count, Matrix(m, m));
  for (auto& b : blocks) {
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < m; ++j) b(i, j) = std::bit_cast<double>(get_u64(in, path));
    }
  }
  return blocks;
}

void save_toeplitz(const std::string& path, const BlockToeplitz& g) {
  if (path.ends_with(".csv")) {
    write_blocks_csv(path, g.blocks());
  } else {
    write_blocks_binary(path, g.blocks());
  }
}

BlockToeplitz load_toeplitz(const std::string& path) {
  return BlockToeplitz(path.ends_with(".csv") ? read_blocks_csv(path) : read_blocks_binary(path));
}

void write_signal_csv(const std::string& path, const SampledSignal& s) {
  auto out = open_out(path);
  const auto& g = s.grid;
  out << "# x0=" << format_double(g.x0) << " dx=" << format_double(g.dx) << " nx=" << g.nx
      << " dt=" << format_double(g.dt) << " nt=" << g.nt << '\n';
  out << "x_index,t_index,value\n";
  for (Index a = 0; a < g.nx; ++a) {
    for (Index n = 0; n < g.nt; ++n) out << a << ',' << n << ',' << format_double(s.values(a, n)) << '\n';
  }
}

SampledSignal read_signal_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("#")) {
    throw Error(Errc::parse, "missing metadata line in '" + path + "'");
  }
  SignalGrid g;
  std::istringstream meta(line.substr(1));
  std::string item;
  int seen = 0;
  while (meta >> item) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = item.substr(0, eq);
    const double v = parse_double(std::string_view(item).substr(eq + 1), path);
    if (key == "x0") g.x0 = v, ++seen;
    else if (key == "dx") g.dx = v, ++seen;
    else if (key == "nx") g.nx = static_cast<Index>(v), ++seen;
    else if (key == "dt") g.dt = v, ++seen;
    else if (key == "nt") g.nt = static_cast<Index>(v), ++seen;
  }
  if (seen != 5 || g.nx < 1 || g.nt < 1) throw Error(Errc::parse, "incomplete metadata in '" + path + "'");
  SampledSignal s(g);
  std::getline(in, line);  // column header
  Index count = 0;
  while (std::getline(in, line)) {
    if (blank(line)) continue;
    const auto v = split_numbers(line, path);
    if (v.size() != 3) throw Error(Errc::parse, "expected 3 columns in '" + path + "'");
    const auto a = static_cast<Index>(v[0]);
    const auto n = static_cast<Index>(v[1]);
    if (a < 0 || a >= g.nx || n < 0 || n >= g.nt) throw Error(Errc::parse, "index out of range in '" + path + "'");
    s.values(a, n) = v[2];
    ++count;
  }
  if (count != g.nx * g.nt) throw Error(Errc::parse, "sample count mismatch in '" + path + "'");
  return s;
}

void write_trace_csv(const std::string& path, const SampledSignal& s) {
  auto out = open_out(path);
  out << "x,t,value\n";
  for (Index a = 0; a < s.grid.nx; ++a) {
    for (Index n = 0; n < s.grid.nt; ++n) {
      out << format_double(s.grid.x(a)) << ',' << format_double(s.grid.t(n)) << ','
          << format_double(s.values(a, n)) << '\n';
    }
  }
}

void write_frame_csv(const std::string& path, const Matrix& frame, const SimGrid& grid) {
  auto out = open_out(path);
  out << "x,y,value\n";
  for (Index j = 0; j < frame.cols(); ++j) {
    for (Index i = 0; i < frame.rows(); ++i) {
      out << format_double(grid.x(i)) << ',' << format_double(grid.y(j)) << ',' << format_double(frame(i, j)) << '\n';
    }
  }
}

void write_velocity_csv(const std::string& path, const VelocityField& rho) {
  write_matrix_csv(path, rho.values().transpose());
}

VelocityField read_velocity_csv(const std::string& path, const SimGrid& grid) {
  const Matrix rows = read_matrix_csv(path);
  if (rows.rows() != grid.ny() || rows.cols() != grid.nx()) {
    throw Error(Errc::grid_mismatch, "velocity grid in '" + path + "' is " + std::to_string(rows.cols()) + "x" +
                                         std::to_string(rows.rows()) + ", simulation grid is " +
                                         std::to_string(grid.nx()) + "x" + std::to_string(grid.ny()));
  }
  return VelocityField(grid, rows.transpose());
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

}  // namespace bcm::io
