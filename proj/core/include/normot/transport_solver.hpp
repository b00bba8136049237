#pragma once

#include <vector>

namespace normot {

struct TransportArc {
  int i = 0;  // source node
  int j = 0;  // target node
  double cost = 0.0;
};

struct TransportProblem {
  std::vector<double> supply;
  std::vector<double> demand;
  std::vector<TransportArc> arcs;
};

struct TransportSolution {
  bool feasible = false;
  double cost = 0.0;
  std::vector<double> flow;  // one entry per arc
  // Dual certificate: u_i + v_j <= cost on every arc, equality on basic arcs.
  std::vector<double> u;
  std::vector<double> v;
  long pivots = 0;
  long degenerate_pivots = 0;
};

struct SimplexOptions {
  // Consecutive degenerate pivots before switching to Bland's rule.
  long bland_after = -1;  // -1: 10 * (#nodes)
  long max_pivots = -1;   // -1: unlimited up to an internal safety cap
};

// Uncapacitated transportation problem by primal network simplex with a
// strongly feasible spanning tree and block-search pricing.
TransportSolution network_simplex(const TransportProblem& p, const SimplexOptions& opt = {});

// Dinic max-flow from supplies to demands through the given arcs (infinite
// capacity). Returns the maximum transportable mass.
double bipartite_max_flow(const TransportProblem& p);

bool transport_feasible(const TransportProblem& p, double tol = 1e-12);

}  // namespace normot
