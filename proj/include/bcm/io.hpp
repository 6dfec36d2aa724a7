#pragma once

#include <string>

#include "bcm/block_toeplitz.hpp"
#include "bcm/forward_solver.hpp"
#include "bcm/signal.hpp"

namespace bcm::io {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

// Dense matrices: row-major CSV, one line per row, no header.
void write_matrix_csv(const std::string& path, const Matrix& m);
Matrix read_matrix_csv(const std::string& path);

// Block-Toeplitz matrices and block columns.
//   CSV: the N blocks stacked vertically (N*M lines of M values).
//   Binary: uint64 M, uint64 N, uint64 block count, then block-count M x M
//   blocks row-major; everything little-endian, values as IEEE-754 binary64.
void write_blocks_csv(const std::string& path, const std::vector<Matrix>& blocks);
std::vector<Matrix> read_blocks_csv(const std::string& path);
void write_blocks_binary(const std::string& path, const std::vector<Matrix>& blocks);
std::vector<Matrix> read_blocks_binary(const std::string& path);

/// Picks CSV or binary from the extension (.csv, anything else binary).
void save_toeplitz(const std::string& path, const BlockToeplitz& g);
BlockToeplitz load_toeplitz(const std::string& path);

// Control / ExtendedControl: '#'-prefixed metadata line
//   # x0=<..> dx=<..> nx=<..> dt=<..> nt=<..>
// then the header x_index,t_index,value and one line per sample.
void write_signal_csv(const std::string& path, const SampledSignal& s);
SampledSignal read_signal_csv(const std::string& path);

/// Trace export with physical coordinates: x,t,value.
void write_trace_csv(const std::string& path, const SampledSignal& s);

/// Wavefield frame as x,y,value.
void write_frame_csv(const std::string& path, const Matrix& frame, const SimGrid& grid);

/// rho on the simulation grid: ny lines (y = j h) of nx values (x = x0 + i h).
void write_velocity_csv(const std::string& path, const VelocityField& rho);
VelocityField read_velocity_csv(const std::string& path, const SimGrid& grid);

void write_text(const std::string& path, const std::string& text);

}  // namespace bcm::io
