#pragma once

#include <string>
#include <vector>

#include "normot/kantorovich.hpp"

namespace normot {

// Nodes are source indices; arc u -> v iff some (u, y) in the carriage has
// c(v, y) finite. Self-loops are always present.
struct AxialGraph {
  std::vector<int> nodes;               // node id -> source index
  std::vector<std::vector<int>> adj;    // node id -> successor node ids (sorted)
  std::vector<char> has_pair;           // node is a carriage source
  int size() const { return static_cast<int>(nodes.size()); }
  bool has_arc(int u, int v) const;
};

AxialGraph build_axial_graph(const Carriage& carriage, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             const CostFn& cost, std::vector<int> nodes = {});

// Node ids grouped into classes; classes ordered by smallest member.
struct ClassPartition {
  std::vector<int> class_of;
  std::vector<std::vector<int>> classes;
  static ClassPartition from_labels(const std::vector<int>& labels);
};

// Strongly connected components (iterative Tarjan).
ClassPartition cycle_classes(const AxialGraph& g);

// Reachability closure from each node (row u: nodes reachable from u).
std::vector<std::vector<char>> reachability(const AxialGraph& g);

// H_n = nodes reachable from W[n] (W holds node ids).
std::vector<std::vector<char>> build_H_sets(const AxialGraph& g, const std::vector<int>& w);

struct PreorderSignature {
  std::vector<Vec> labels;               // fiber label per node
  std::vector<std::vector<char>> bits;   // bits[node][n] = node not in H_n
  std::vector<int> order;                // node ids by increasing key
  ClassPartition classes;                // equal keys
  // -1, 0, 1 for key(a) <, =, > key(b).
  int compare(int a, int b) const;
  std::string bit_string(int node) const;
};

PreorderSignature signature_preorder(const std::vector<std::vector<char>>& h, const std::vector<Vec>& labels);

// Pairs (x, x') of graph nodes with c(x, x') finite whose keys decrease.
// Only nodes with a carriage pair constrain their lower neighbours.
long compatibility_violations(const PreorderSignature& sig, const AxialGraph& g, const DiscreteMeasure& mu,
                              const CostFn& cost);

ClassPartition meet_refinement(const std::vector<ClassPartition>& parts);

// Distinct optimal carriages: the given plan, then plans minimizing random
// linear objectives over the optimal face (tight arcs of the plan's duals).
std::vector<TransportPlan> enumerate_optimal_carriages(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                                       const CostFn& cost, const TransportPlan& plan, int budget = 8,
                                                       unsigned seed = 0);

struct ClassDumpEntry {
  int fiber = 0;
  std::string key_bits;
  std::vector<int> members;  // source indices
};

struct CycleAnalysis {
  AxialGraph graph;
  ClassPartition scc;
  PreorderSignature signature;
  bool matches_scc = false;
  long compatibility_violations = 0;
  std::vector<ClassDumpEntry> dump;
};

// Full chain on one fiber: graph, SCC, H sets with W = all nodes, signature.
CycleAnalysis analyze_cycles(const Carriage& carriage, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             const CostFn& cost, const std::vector<int>& nodes = {}, int fiber = 0,
                             const std::vector<Vec>& labels = {});

}  // namespace normot
