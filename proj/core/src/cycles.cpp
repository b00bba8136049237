#include "normot/cycles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <random>
#include <set>

#include "normot/error.hpp"

namespace normot {

bool AxialGraph::has_arc(int u, int v) const { return std::binary_search(adj[u].begin(), adj[u].end(), v); }

AxialGraph build_axial_graph(const Carriage& carriage, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             const CostFn& cost, std::vector<int> nodes) {
  if (nodes.empty()) {
    nodes.resize(mu.size());
    for (int i = 0; i < mu.size(); ++i) nodes[i] = i;
  }
  AxialGraph g;
  g.nodes = nodes;
  std::map<int, int> id;
  for (int t = 0; t < g.size(); ++t) id[nodes[t]] = t;
  std::vector<std::vector<int>> targets(g.size());
  for (const auto& [i, j] : carriage.pairs) {
    auto it = id.find(i);
    if (it != id.end()) targets[it->second].push_back(j);
  }
  g.adj.assign(g.size(), {});
  g.has_pair.assign(g.size(), 0);
  for (int u = 0; u < g.size(); ++u) {
    g.has_pair[u] = !targets[u].empty();
    std::sort(targets[u].begin(), targets[u].end());
    targets[u].erase(std::unique(targets[u].begin(), targets[u].end()), targets[u].end());
    for (int v = 0; v < g.size(); ++v) {
      bool arc = u == v;
      for (size_t t = 0; !arc && t < targets[u].size(); ++t)
        arc = std::isfinite(cost(mu.points[nodes[v]], nu.points[targets[u][t]]));
      if (arc) g.adj[u].push_back(v);
    }
  }
  return g;
}

ClassPartition ClassPartition::from_labels(const std::vector<int>& labels) {
  ClassPartition p;
  std::map<int, int> remap;
  p.class_of.resize(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = remap.emplace(labels[i], static_cast<int>(p.classes.size()));
    if (inserted) p.classes.emplace_back();
    p.class_of[i] = it->second;
    p.classes[it->second].push_back(static_cast<int>(i));
  }
  return p;
}

ClassPartition cycle_classes(const AxialGraph& g) {
  const int n = g.size();
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<char> on_stack(n, 0);
  int counter = 0, ncomp = 0;
  // Explicit DFS frames: (node, next successor position).
  std::vector<std::pair<int, size_t>> frames;
  for (int s = 0; s < n; ++s) {
    if (index[s] >= 0) continue;
    frames.push_back({s, 0});
    index[s] = low[s] = counter++;
    stack.push_back(s);
    on_stack[s] = 1;
    while (!frames.empty()) {
      auto& [u, pos] = frames.back();
      if (pos < g.adj[u].size()) {
        const int v = g.adj[u][pos++];
        if (index[v] < 0) {
          index[v] = low[v] = counter++;
          stack.push_back(v);
          on_stack[v] = 1;
          frames.push_back({v, 0});
        } else if (on_stack[v]) {
          low[u] = std::min(low[u], index[v]);
        }
        continue;
      }
      const int done = u;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().first] = std::min(low[frames.back().first], low[done]);
      if (low[done] == index[done]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = ncomp;
        } while (w != done);
        ++ncomp;
      }
    }
  }
  return ClassPartition::from_labels(comp);
}

std::vector<std::vector<char>> reachability(const AxialGraph& g) {
  const int n = g.size();
  std::vector<std::vector<char>> r(n, std::vector<char>(n, 0));
  for (int s = 0; s < n; ++s) {
    std::deque<int> q{s};
    r[s][s] = 1;
    while (!q.empty()) {
      const int u = q.front();
      q.pop_front();
      for (int v : g.adj[u])
        if (!r[s][v]) {
          r[s][v] = 1;
          q.push_back(v);
        }
    }
  }
  return r;
}

std::vector<std::vector<char>> build_H_sets(const AxialGraph& g, const std::vector<int>& w) {
  if (w.empty()) throw Error(ErrorKind::InvalidInput, "empty sample set W");
  for (int x : w)
    if (x < 0 || x >= g.size()) throw Error(ErrorKind::InvalidInput, "W contains a node outside the graph");
  const auto r = reachability(g);
  std::vector<std::vector<char>> h;
  h.reserve(w.size());
  for (int x : w) h.push_back(r[x]);
  return h;
}

int PreorderSignature::compare(int a, int b) const {
  if (!labels.empty()) {
    const Vec& la = labels[a];
    const Vec& lb = labels[b];
    for (int t = 0; t < la.size(); ++t) {
      const double scale = std::max({1.0, std::abs(la(t)), std::abs(lb(t))});
      if (std::abs(la(t) - lb(t)) > 1e-9 * scale) return la(t) < lb(t) ? -1 : 1;
    }
  }
  const auto& ba = bits[a];
  const auto& bb = bits[b];
  for (size_t t = 0; t < ba.size(); ++t)
    if (ba[t] != bb[t]) return ba[t] < bb[t] ? -1 : 1;
  return 0;
}

std::string PreorderSignature::bit_string(int node) const {
  std::string s;
  for (char c : bits[node]) s.push_back(c ? '1' : '0');
  return s;
}

PreorderSignature signature_preorder(const std::vector<std::vector<char>>& h, const std::vector<Vec>& labels) {
  if (h.empty()) throw Error(ErrorKind::InvalidInput, "no H sets");
  const int n = static_cast<int>(h.front().size());
  if (!labels.empty() && static_cast<int>(labels.size()) != n)
    throw Error(ErrorKind::InvalidInput, "one fiber label per node required");
  PreorderSignature sig;
  sig.labels = labels;
  sig.bits.assign(n, std::vector<char>(h.size(), 0));
  for (int x = 0; x < n; ++x)
    for (size_t t = 0; t < h.size(); ++t) sig.bits[x][t] = h[t][x] ? 0 : 1;
  sig.order.resize(n);
  for (int x = 0; x < n; ++x) sig.order[x] = x;
  std::stable_sort(sig.order.begin(), sig.order.end(), [&](int a, int b) { return sig.compare(a, b) < 0; });
  std::vector<int> label(n, -1);
  int cls = -1;
  for (int t = 0; t < n; ++t) {
    if (t == 0 || sig.compare(sig.order[t - 1], sig.order[t]) != 0) ++cls;
    label[sig.order[t]] = cls;
  }
  // Relabel by smallest member so class ids follow node order.
  sig.classes = ClassPartition::from_labels(label);
  return sig;
}

long compatibility_violations(const PreorderSignature& sig, const AxialGraph& g, const DiscreteMeasure& mu,
                              const CostFn& cost) {
  long bad = 0;
  for (int a = 0; a < g.size(); ++a)
    for (int b = 0; b < g.size(); ++b) {
      if (a == b || !g.has_pair[b]) continue;
      if (!sig.labels.empty() && (sig.labels[a] - sig.labels[b]).norm() > 1e-9 * std::max(1.0, sig.labels[a].norm()))
        continue;
      if (!std::isfinite(cost(mu.points[g.nodes[a]], mu.points[g.nodes[b]]))) continue;
      if (sig.compare(a, b) > 0) ++bad;
    }
  return bad;
}

ClassPartition meet_refinement(const std::vector<ClassPartition>& parts) {
  if (parts.empty()) return {};
  const size_t n = parts.front().class_of.size();
  std::map<std::vector<int>, int> keys;
  std::vector<int> label(n);
  for (size_t x = 0; x < n; ++x) {
    std::vector<int> key;
    for (const auto& p : parts) {
      if (p.class_of.size() != n) throw Error(ErrorKind::InvalidInput, "partitions over different node sets");
      key.push_back(p.class_of[x]);
    }
    auto [it, inserted] = keys.emplace(key, static_cast<int>(keys.size()));
    label[x] = it->second;
  }
  return ClassPartition::from_labels(label);
}

std::vector<TransportPlan> enumerate_optimal_carriages(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                                       const CostFn& cost, const TransportPlan& plan, int budget,
                                                       unsigned seed) {
  std::vector<TransportPlan> out{plan};
  if (budget <= 1 || !plan.duals) return out;
  const auto& u = plan.duals->u;
  const auto& v = plan.duals->v;
  double scale = 1.0;
  std::vector<TransportArc> tight;
  std::vector<double> base;
  for (int i = 0; i < mu.size(); ++i)
    for (int j = 0; j < nu.size(); ++j) {
      const double c = cost(mu.points[i], nu.points[j]);
      if (std::isfinite(c)) scale = std::max(scale, std::abs(c));
    }
  for (int i = 0; i < mu.size(); ++i)
    for (int j = 0; j < nu.size(); ++j) {
      const double c = cost(mu.points[i], nu.points[j]);
      if (std::isfinite(c) && c - u[i] - v[j] <= 1e-10 * scale) {
        tight.push_back({i, j, 0.0});
        base.push_back(c);
      }
    }
  auto support = [](const TransportPlan& p) {
    std::set<std::pair<int, int>> s;
    for (const auto& e : p.entries) s.emplace(e.i, e.j);
    return s;
  };
  std::set<std::set<std::pair<int, int>>> seen{support(plan)};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  SolveOptions opt;
  opt.check_feasibility = false;
  for (int attempt = 0; attempt < 4 * budget && static_cast<int>(out.size()) < budget; ++attempt) {
    for (auto& a : tight) a.cost = unif(rng);
    TransportPlan p = solve_on_arcs(mu.weights, nu.weights, tight, opt);
    if (!seen.insert(support(p)).second) continue;
    p.cost_value = plan_cost(p, mu, nu, cost);
    // Duals of the perturbed problem are not duals of the original one.
    p.duals = plan.duals;
    out.push_back(std::move(p));
  }
  return out;
}

CycleAnalysis analyze_cycles(const Carriage& carriage, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             const CostFn& cost, const std::vector<int>& nodes, int fiber,
                             const std::vector<Vec>& labels) {
  CycleAnalysis a;
  a.graph = build_axial_graph(carriage, mu, nu, cost, nodes);
  a.scc = cycle_classes(a.graph);
  std::vector<int> w(a.graph.size());
  for (int t = 0; t < a.graph.size(); ++t) w[t] = t;
  const auto h = build_H_sets(a.graph, w);
  a.signature = signature_preorder(h, labels);
  a.matches_scc = a.signature.classes.class_of == a.scc.class_of;
  a.compatibility_violations = compatibility_violations(a.signature, a.graph, mu, cost);
  int prev = -1;
  for (int idx : a.signature.order) {
    const int cls = a.signature.classes.class_of[idx];
    if (cls != prev) {
      a.dump.push_back({fiber, a.signature.bit_string(idx), {}});
      prev = cls;
    }
    a.dump.back().members.push_back(a.graph.nodes[idx]);
  }
  for (auto& e : a.dump) std::sort(e.members.begin(), e.members.end());
  return a;
}

}  // namespace normot
