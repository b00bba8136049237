#pragma once

#include <string>
#include <vector>

#include "normot/kantorovich.hpp"
#include "normot/partition.hpp"

namespace normot {

struct SecondaryPlan {
  TransportPlan plan;
  double primary_cost = 0.0;
  double primary_optimum = 0.0;
  double secondary_cost_value = 0.0;
  int optimal_face_arcs = 0;
};

// Minimizes the secondary cost over the optimal face of the primary problem.
// The face is the set of plans supported on arcs tight for the primary duals.
SecondaryPlan secondary_select(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostFn& primary,
                               const CostFn& secondary = sq_euclid_cost(), const SolveOptions& opt = {});
SecondaryPlan secondary_select(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostFn& primary,
                               const TransportPlan& primary_plan, const CostFn& secondary = sq_euclid_cost(),
                               const SolveOptions& opt = {});

struct CellPotentialResult {
  bool ok = false;
  std::string report;
  std::vector<int> sources;  // source indices of the cell
  std::vector<int> targets;  // target indices reached from the cell
  std::vector<double> phi;   // per cell source
  std::vector<double> psi;   // per cell target
  double max_support_residual = 0.0;  // |phi + psi - c_m| on pairs
  double max_constraint_excess = 0.0;  // max(phi + psi - c_m) over all finite pairs
};

// Potentials for c_m(x,y) = secondary(x,y) if y - x in the cell cone, +inf
// otherwise, restricted to the cell's pairs. Requires the cell's axial graph
// to be strongly connected.
CellPotentialResult cell_potentials(const PartitionCell& cell, const TransportPlan& plan, const DiscreteMeasure& mu,
                                    const DiscreteMeasure& nu, const CostFn& secondary = sq_euclid_cost());

struct Coupling1D {
  std::vector<PlanEntry> entries;  // indices into the input arrays
  bool is_map = false;             // every source atom goes to one target
};

// Quantile coupling of two weighted point sets on the line.
Coupling1D monotone_map_1d(const std::vector<double>& x, const std::vector<double>& wx,
                           const std::vector<double>& y, const std::vector<double>& wy);

struct MapOptions {
  int surrogate_rounds = 3;
  double cone_tol = kDefaultFaceTol;
};

struct MapResult {
  std::vector<PlanEntry> coupling;  // assembled plan
  std::vector<int> target_of;       // per source, -1 if the atom is split
  std::vector<PlanEntry> residual;  // entries of split atoms
  std::vector<int> split_atoms;
  bool is_map = false;
  int surrogate_rounds_used = 0;
  int unresolved_cells = 0;
};

MapResult assemble_map(const DirectedPartition& part, const TransportPlan& plan, const DiscreteMeasure& mu,
                       const DiscreteMeasure& nu, const MapOptions& opt = {});

struct PushforwardVerdict {
  bool ok = false;
  int first_mismatch = -1;  // target index
  std::string message;
};

PushforwardVerdict verify_pushforward(const std::vector<int>& target_of, const DiscreteMeasure& mu,
                                      const DiscreteMeasure& nu, double tol = 1e-12);

// Dual vertices of a strictly convex surrogate in R^k for round m >= 1:
// regular 2^(m+2)-gon for k = 2, normalized cube-surface grid otherwise.
std::vector<Vec> surrogate_dual_vertices(int k, int round);

}  // namespace normot
