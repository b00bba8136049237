#pragma once

#include <optional>
#include <string>
#include <vector>

#include "normot/kantorovich.hpp"
#include "normot/polynorm.hpp"

namespace normot {

// Tight directions at a source point. Points are potential point ids.
struct DirectionSets {
  int point = 0;  // source index
  std::vector<Vec> forward_dirs;
  std::vector<Vec> backward_dirs;
  std::vector<int> forward_points;
  std::vector<int> backward_points;
};

// forward(x) = {z != x : psi(z) - psi(x) >= c(x,z) - tol}, closed under
// z in forward(x) => forward(z) in forward(x); backward is the transpose.
// Throws StalePotential if the duality gap exceeds gap_tol.
std::vector<DirectionSets> superdifferential_graph(const TransportPlan& plan, const Potential& p,
                                                   const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                                   double tol = 1e-9, double gap_tol = 1e-9);

enum class PointClass { Fixed, Regular, Initial, Final, Residual };
const char* to_string(PointClass c);

struct Classification {
  PointClass cls = PointClass::Fixed;
  int k = 0;
  std::optional<ExtremalCone> cone;
  std::optional<IndexSet> forward_face;
  std::optional<IndexSet> backward_face;
  std::string note;  // residual evidence
};

Classification classify_point(const DirectionSets& ds, const NormPtr& norm, double tol = kDefaultFaceTol);

struct CellFlags {
  bool regular = false;
  bool initial = false;
  bool final_ = false;
  bool fixed = false;
  bool residual = false;
};

std::vector<std::string> flag_names(const CellFlags& f);

struct PartitionCell {
  int id = 0;
  int k = 0;
  std::optional<ExtremalCone> cone;
  IndexSet cone_active_set;
  std::vector<int> members;  // source indices, ascending
  Mat basis;                 // d x k orthonormal
  Vec base_point;
  CellFlags flags;
};

struct DirectedPartition {
  int dim = 0;
  std::vector<PartitionCell> cells;
  std::vector<int> cell_of;  // per source index
  int residual_pairs = 0;    // plan pairs outside a residual cell's cone
};

struct PartitionOptions {
  double affine_tol = 1e-8;  // after scaling the sources to the unit box
  double cone_tol = kDefaultFaceTol;
  bool check_consistency = true;
};

// Regular points share a cell iff same face and x' - x in span(face);
// other classes become flagged singletons. With a plan, every plan pair must
// lie in its cell's cone (InternalConsistency otherwise; residual cells are
// only counted).
DirectedPartition build_partition(const std::vector<Classification>& classes, const std::vector<DirectionSets>& ds,
                                  const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  const TransportPlan* plan = nullptr, const PartitionOptions& opt = {});

// True if y - x lies in the cell cone (zero vectors always do).
bool pair_in_cell_cone(const PartitionCell& cell, const Vec& x, const Vec& y, double tol = kDefaultFaceTol);

struct Decomposition {
  std::vector<DirectionSets> directions;
  std::vector<Classification> classes;
  DirectedPartition partition;
};

Decomposition decompose(const TransportPlan& plan, const Potential& p, const DiscreteMeasure& mu,
                        const DiscreteMeasure& nu, const NormPtr& norm, double tol = 1e-9,
                        const PartitionOptions& opt = {});

// Completeness on realized points: for w, w' in a cell with w' - w in its
// cone, every source z in (w + C) ∩ (w' - C) should belong to the cell.
// Returns the number of violating (w, w', z) triples; cells above
// `max_members` are subsampled deterministically.
long completeness_violations(const DirectedPartition& part, const DiscreteMeasure& mu, int max_members = 96);

}  // namespace normot
