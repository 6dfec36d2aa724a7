#pragma once

#include <stdexcept>
#include <string>

namespace bcm {

// Values mirror bcm_status in bcm.h.
enum class Errc : int {
  ok = 0,
  invalid_argument = 1,
  grid_mismatch = 2,
  non_symmetric = 3,
  not_positive = 4,
  singular = 5,
  singular_intermediate = 6,
  singular_corner = 7,
  cfl_violation = 8,
  negative_density = 9,
  empty_sigma = 10,
  empty_source = 11,
  non_positive_gram = 12,
  io = 13,
  parse = 14,
  internal = 99,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace bcm
