#include "bcm/error.hpp"

namespace bcm {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::ok: return "Ok";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::grid_mismatch: return "GridMismatch";
    case Errc::non_symmetric: return "NonSymmetric";
    case Errc::not_positive: return "NotPositive";
    case Errc::singular: return "Singular";
    case Errc::singular_intermediate: return "SingularIntermediate";
    case Errc::singular_corner: return "SingularCorner";
    case Errc::cfl_violation: return "CflViolation";
    case Errc::negative_density: return "NegativeDensity";
    case Errc::empty_sigma: return "EmptySigma";
    case Errc::empty_source: return "EmptySource";
    case Errc::non_positive_gram: return "NonPositiveGram";
    case Errc::io: return "IoError";
    case Errc::parse: return "ParseError";
    case Errc::internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace bcm
