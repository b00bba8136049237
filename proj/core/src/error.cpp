#include "normot/error.hpp"

#include <algorithm>
#include <iterator>

#include "normot/types.hpp"

namespace normot {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Parse: return "parse-error";
    case ErrorKind::Io: return "io-error";
    case ErrorKind::DegenerateDirection: return "degenerate-direction";
    case ErrorKind::NoCommonFace: return "no-common-face";
    case ErrorKind::EmptyCone: return "empty-cone";
    case ErrorKind::EmptyInterval: return "empty-interval";
    case ErrorKind::EmptyMeasure: return "empty-measure";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::NotOptimal: return "not-optimal";
    case ErrorKind::StalePotential: return "stale-potential";
    case ErrorKind::InternalConsistency: return "internal-consistency";
    case ErrorKind::UncoveredCell: return "uncovered-cell";
    case ErrorKind::DegenerateProjection: return "degenerate-projection";
    case ErrorKind::InsufficientData: return "insufficient-data";
  }
  return "unknown";
}

bool is_validation_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput:
    case ErrorKind::Parse:
    case ErrorKind::Io:
    case ErrorKind::EmptyMeasure:
    case ErrorKind::Infeasible:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what),
      kind_(kind) {}

bool is_subset(const IndexSet& a, const IndexSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

IndexSet set_intersection(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

}  // namespace normot
