#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "normot/measures.hpp"
#include "normot/polynorm.hpp"
#include "normot/transport_solver.hpp"

namespace normot {

// c(x, y); +inf marks a forbidden pair.
struct CostFn {
  std::function<double(const Vec&, const Vec&)> eval;
  NormPtr norm;  // set for norm costs c(x,y) = |y - x|
  bool may_be_infinite = false;
  std::string name;

  double operator()(const Vec& x, const Vec& y) const { return eval(x, y); }
};

CostFn norm_cost(const NormPtr& norm);
// base(x,y) if y - x lies in `cone`, +inf otherwise. With no base the finite
// value is 0.
CostFn cone_cost_fn(const ExtremalCone& cone, std::optional<CostFn> base = std::nullopt);
CostFn cone_cost_fn(const ConeDescriptor& cone, std::optional<CostFn> base = std::nullopt);
CostFn sq_euclid_cost();

struct PlanEntry {
  int i = 0;
  int j = 0;
  double mass = 0.0;
};

struct DualCertificate {
  std::vector<double> u;  // per source
  std::vector<double> v;  // per target
};

struct TransportPlan {
  std::vector<PlanEntry> entries;
  double cost_value = 0.0;
  std::optional<DualCertificate> duals;
};

using IndexPair = std::pair<int, int>;

struct Carriage {
  std::vector<IndexPair> pairs;
  static Carriage from_plan(const TransportPlan& plan);
};

// Values of psi on the union of the source and target supports.
struct Potential {
  std::vector<Vec> points;
  std::vector<double> psi;
  std::vector<int> source_point;  // source index -> point id
  std::vector<int> target_point;  // target index -> point id
  std::vector<int> component;     // per point, anchor component id
  CostFn cost;

  double psi_source(int i) const { return psi[source_point[i]]; }
  double psi_target(int j) const { return psi[target_point[j]]; }
  double phi_source(int i) const { return -psi_source(i); }
  double phi_target(int j) const { return -psi_target(j); }
};

struct SolveOptions {
  SimplexOptions simplex;
  bool check_feasibility = true;  // max-flow pre-check when costs may be infinite
};

TransportPlan solve_primal(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostFn& cost,
                           const SolveOptions& opt = {});
// Same LP restricted to an explicit arc list.
TransportPlan solve_on_arcs(const std::vector<double>& supply, const std::vector<double>& demand,
                            const std::vector<TransportArc>& arcs, const SolveOptions& opt = {});

double plan_cost(const TransportPlan& plan, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                 const CostFn& cost);
// Largest deviation of the plan marginals from mu and nu.
double marginal_error(const TransportPlan& plan, const DiscreteMeasure& mu, const DiscreteMeasure& nu);

Potential extract_potentials(const TransportPlan& plan, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             const CostFn& cost, int anchor = 0);
// Pairs given explicitly (for carriages that are not plan supports).
Potential extract_potentials(const Carriage& carriage, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             const CostFn& cost, int anchor = 0,
                             const std::optional<DualCertificate>& duals = std::nullopt);

// Midpoint of the smallest and largest potentials tight on the plan support
// with psi(anchor) = 0; has the fewest tight pairs among the two. Falls back
// to the formula potential when the axial graph is not strongly connected.
Potential central_potential(const TransportPlan& plan, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                            const CostFn& cost, int anchor = 0);

// max_z psi(z) - c(x, z).
double extend_potential(const Potential& p, const Vec& x);
// Potential on the stored points plus `extra`, values from extend_potential.
Potential extend_to(const Potential& p, const std::vector<Vec>& extra);

// Largest psi(y) - psi(x) - c(x, y) over stored point pairs (<= 0 when valid).
double lipschitz_violation(const Potential& p);

struct CycleVerdict {
  bool ok = true;
  std::vector<int> witness;  // carriage pair indices, in cycle order
  double violation = 0.0;    // sum c(x_i,y_i) - sum c(x_{i+1},y_i)
  long cycles_checked = 0;
  bool sampled = false;
};

struct CycleCheckOptions {
  double tol = 1e-9;
  long exhaustive_limit = 1000000;
  long samples = 200000;
  unsigned seed = 0;
};

CycleVerdict check_cyclical_monotonicity(const Carriage& carriage, const DiscreteMeasure& mu,
                                         const DiscreteMeasure& nu, const CostFn& cost, int max_len,
                                         const CycleCheckOptions& opt = {});

// cost_value - (sum phi dmu - sum phi dnu).
double duality_gap(const TransportPlan& plan, const Potential& p, const DiscreteMeasure& mu,
                   const DiscreteMeasure& nu);

}  // namespace normot
