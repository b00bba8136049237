#pragma once

#include <optional>
#include <vector>

#include "normot/partition.hpp"

namespace normot {

struct SheafGroup {
  int id = 0;
  int k = 0;
  std::vector<int> cells;
  Mat reference_plane;  // d x k orthonormal frame V
  double r = 0.0;
  // In V coordinates (R^k): base cone C and widened cone C(2r).
  std::optional<ConeDescriptor> base_cone;
  std::optional<ConeDescriptor> widened_cone;
  // Base rectangle: intersection of the members' projected bounding boxes.
  Vec rect_lo;
  Vec rect_hi;
  bool rect_empty = true;
  bool trivial = false;  // k = 0 or coneless cells
};

struct SheafOptions {
  std::vector<double> r_grid{0.01, 0.02, 0.05, 0.1, 0.2};
  double min_projection = 0.70710678118654752;  // 1 - delta
  int combination_samples = 16;
  double tol = 1e-9;
};

// Sheaf conditions for one cell cone against (V, C, r): C(r) ⊂ p_V C',
// p_V C' ⊂ C(2r), |p_V z| >= min_projection on unit vectors of C'.
bool sheaf_accepts(const ExtremalCone& cell_cone, const Mat& v, const ConeDescriptor& base, double r,
                   const SheafOptions& opt = {});

std::vector<SheafGroup> decompose_sheaves(const DirectedPartition& part, const DiscreteMeasure& mu,
                                          const SheafOptions& opt = {});

struct FibrationCell {
  int cell = 0;
  Vec label;        // coordinates of the quotient point in V^perp (R^{d-k})
  Vec quotient;     // quotient point a in R^d
  Mat coords;       // k x members, w = V^T z
  Mat inverse;      // d x k, z = quotient + inverse * w
  std::optional<ConeDescriptor> mapped_cone;  // p_V of the cell cone, in R^k
};

struct Fibration {
  int sheaf = 0;
  int k = 0;
  Mat v;  // d x k
  Mat u;  // d x (d-k), orthonormal complement
  std::vector<FibrationCell> cells;
};

Fibration to_fibration(const SheafGroup& sheaf, const DirectedPartition& part, const DiscreteMeasure& mu);
Vec fibration_inverse(const FibrationCell& c, const Vec& w);

}  // namespace normot
