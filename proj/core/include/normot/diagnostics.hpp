#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "normot/partition.hpp"
#include "normot/sheaves.hpp"

namespace normot {

struct SliceSegment {
  int cell = -1;
  Vec entry;  // on the section at h_lo
  Vec exit;   // on the section at h_hi
};

// Directed segments crossing the sections {z : e.z = t}, t in [h_lo, h_hi].
struct Slice1D {
  int sheaf = -1;
  int dim = 0;  // ambient
  Vec e;        // unit
  double h_lo = 0.0;
  double h_hi = 0.0;
  std::vector<SliceSegment> segments;
  // Optional admissible cone for the atomized assignment; without it only
  // e.(z' - z) > 0 is required.
  std::optional<ConeDescriptor> cone;

  int size() const { return static_cast<int>(segments.size()); }
  Vec direction(int a) const;  // unit
  Vec point_at(int a, double t) const;
  // sigma^{s,t} of the point of segment a on P_s.
  Vec sigma(int a, double /*s*/, double t) const { return point_at(a, t); }
  std::vector<Vec> section(double t) const;
  double default_epsilon() const { return 0.1 * (h_hi - h_lo); }
};

struct SliceOptions {
  int offsets = 48;  // transversal samples per k = 2 cell
};

// Directions are unit vectors in the sheaf's reference coordinates and must
// lie in its base cone. Directions whose slice is empty are skipped with a
// message on std::clog.
std::vector<Slice1D> extract_slices(const DirectedPartition& part, const SheafGroup& sheaf,
                                    const DiscreteMeasure& mu, const std::vector<Vec>& directions,
                                    const SliceOptions& opt = {});

enum class Orientation { Forward, Backward };

struct RatioOptions {
  double epsilon = -1.0;    // < 0: 10% of the range
  double bandwidth = -1.0;  // < 0: Scott rule on P_s
  double cutoff = 3.0;      // kernel support in bandwidths
  Orientation orientation = Orientation::Forward;
};

struct PushforwardReport {
  double s = 0.0;
  double t = 0.0;
  double epsilon = 0.0;
  double bandwidth = 0.0;
  int section_dim = 0;
  double bound = 1.0;
  std::vector<double> ratio;  // per segment
  double max_ratio = 0.0;
  double min_ratio = 0.0;
  double max_violation = 0.0;  // max ratio / bound - 1
};

// Density of sigma^{s,t}_# H on P_t relative to H, per segment, from a
// kernel-weighted local affine fit of sigma^{s,t}. Throws InsufficientData
// below 16 segments.
PushforwardReport pushforward_ratio(const Slice1D& slice, double s, double t, const RatioOptions& opt = {});

double ratio_bound(const Slice1D& slice, double s, double t, double epsilon, int section_dim,
                   Orientation orientation = Orientation::Forward);

struct ConeFieldApprox {
  std::vector<Vec> base;      // P_{h_lo}
  std::vector<Vec> vertices;  // atoms on P_{h_hi + eps}
  std::vector<double> atom_mass;
  std::vector<int> assignment;  // base point -> atom
  double epsilon = 0.0;
  bool feasible = true;
  bool disjoint = true;
  std::optional<std::pair<int, int>> crossing;  // base points of a crossing pair
  double snapping_cost = 0.0;
  double optimal_cost = 0.0;
  bool snapping_optimal = false;
  double max_deviation = 0.0;  // radians
  double mean_deviation = 0.0;
  std::string message;
};

struct ApproxOptions {
  double epsilon = -1.0;
  double tol = 1e-12;
};

ConeFieldApprox build_cone_approximation(const Slice1D& slice, int n_atoms, const ApproxOptions& opt = {});

struct BoundaryMass {
  double initial_h = 0.0;
  double final_h = 0.0;
  double initial_h2 = 0.0;
  double final_h2 = 0.0;
  double fraction_h = 0.0;
  double fraction_h2 = 0.0;
  double ratio = 0.0;  // fraction_h2 / fraction_h, 0 when both vanish
};

// mu-mass in cells flagged initial or final.
double initial_final_fraction(const DirectedPartition& part, const DiscreteMeasure& mu, double* initial = nullptr,
                              double* final_ = nullptr);
BoundaryMass initial_final_mass(const DirectedPartition& part_h, const DiscreteMeasure& mu_h,
                                const DirectedPartition& part_h2, const DiscreteMeasure& mu_h2);

struct DensityOptions {
  int sections = 9;  // including both ends
  double lower = 1e-3;
  double upper = 1e3;
  double bandwidth = -1.0;
};

struct DensityProfile {
  int slice = 0;
  int cell = -1;
  std::vector<double> t;
  std::vector<double> profile;  // Lebesgue mass per unit axis length, relative to mean
  double min_rel = 0.0;
  double max_rel = 0.0;
  bool bounded = false;
};

struct DisintegrationReport {
  std::vector<DensityProfile> cells;
  bool regular_like = true;
};

DisintegrationReport disintegration_density(const std::vector<Slice1D>& slices, const DensityOptions& opt = {});

// Synthetic fields on sections orthogonal to the last axis, base grid of
// n_per_axis^{dim-1} points on [-half_width, half_width]^{dim-1}.
struct FieldSpec {
  int dim = 2;
  double h_lo = 0.0;
  double h_hi = 1.0;
  double epsilon = 0.1;
  int n_per_axis = 24;
  double half_width = 1.0;
};

// All segments aim at one vertex on the section h_hi + epsilon.
Slice1D single_vertex_field(const FieldSpec& spec);
// `vertices` disjoint single-vertex fields on strips of the first section
// coordinate; vertex order follows strip order so swept sets are disjoint.
// Strips are at least two grid columns wide (n_per_axis >= 2 * vertices).
Slice1D disjoint_cone_field(const FieldSpec& spec, int vertices, unsigned seed);
Slice1D translation_field(const FieldSpec& spec, const Vec& section_shift);
// Segments reflected through the middle section; all cross at one point.
Slice1D crossing_field(const FieldSpec& spec);
// Vertex on h_hi itself: every segment ends at one point.
Slice1D leaf_concentrated_field(const FieldSpec& spec);

}  // namespace normot
