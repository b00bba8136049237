#include "normot/transport_solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "normot/error.hpp"

namespace normot {

namespace {

class NetworkSimplex {
 public:
  NetworkSimplex(const TransportProblem& p, const SimplexOptions& opt) : p_(p), opt_(opt) {
    n_ = static_cast<int>(p.supply.size());
    m_ = static_cast<int>(p.demand.size());
    root_ = n_ + m_;
    nodes_ = n_ + m_ + 1;
    e_real_ = static_cast<int>(p.arcs.size());
    const int e_total = e_real_ + n_ + m_;
    tail_.resize(e_total);
    head_.resize(e_total);
    cost_.resize(e_total);
    flow_.assign(e_total, 0.0);
    in_tree_.assign(e_total, 0);

    double maxc = 0.0;
    for (int a = 0; a < e_real_; ++a) {
      const auto& arc = p.arcs[a];
      if (arc.i < 0 || arc.i >= n_ || arc.j < 0 || arc.j >= m_)
        throw Error(ErrorKind::InvalidInput, "arc endpoint out of range");
      if (!std::isfinite(arc.cost)) throw Error(ErrorKind::InvalidInput, "arc cost must be finite");
      tail_[a] = arc.i;
      head_[a] = n_ + arc.j;
      cost_[a] = arc.cost;
      maxc = std::max(maxc, std::abs(arc.cost));
    }
    // Big-M exceeds the cost of any simple path in the network.
    big_m_ = std::ldexp(1.0, static_cast<int>(std::ceil(std::log2((maxc + 1.0) * (nodes_ + 1)))));
    eps_ = 1e-11 * std::max(1.0, maxc) + 4.0 * std::numeric_limits<double>::epsilon() * big_m_;

    parent_.assign(nodes_, -1);
    parent_arc_.assign(nodes_, -1);
    depth_.assign(nodes_, 0);
    pi_.assign(nodes_, 0.0);
    adj_.assign(nodes_, {});
    for (int i = 0; i < n_; ++i) {
      const int a = e_real_ + i;
      const double s = p.supply[i];
      if (s > 0.0) {
        tail_[a] = i;
        head_[a] = root_;
        pi_[i] = -big_m_;
      } else {
        tail_[a] = root_;
        head_[a] = i;
        pi_[i] = big_m_;
      }
      cost_[a] = big_m_;
      flow_[a] = std::max(0.0, s);
      attach(i, a);
    }
    for (int j = 0; j < m_; ++j) {
      const int a = e_real_ + n_ + j;
      tail_[a] = root_;
      head_[a] = n_ + j;
      cost_[a] = big_m_;
      flow_[a] = std::max(0.0, p.demand[j]);
      pi_[n_ + j] = big_m_;
      attach(n_ + j, a);
    }
  }

  TransportSolution run() {
    const long bland_after = opt_.bland_after >= 0 ? opt_.bland_after : 10L * nodes_;
    const long cap = opt_.max_pivots >= 0 ? opt_.max_pivots
                                          : std::max<long>(1000000L, 50L * static_cast<long>(cost_.size()));
    const int e_total = static_cast<int>(cost_.size());
    block_ = std::max(16, static_cast<int>(std::sqrt(static_cast<double>(e_total))));
    long degenerate_run = 0;
    TransportSolution sol;
    while (true) {
      const int e = degenerate_run > bland_after ? bland_entering() : block_entering();
      if (e < 0) break;
      const bool degenerate = pivot(e);
      ++sol.pivots;
      if (degenerate) {
        ++sol.degenerate_pivots;
        ++degenerate_run;
      } else {
        degenerate_run = 0;
      }
      if (sol.pivots > cap) throw Error(ErrorKind::InternalConsistency, "network simplex pivot cap exceeded");
    }

    double total = 0.0;
    for (double s : p_.supply) total += std::max(0.0, s);
    double artificial = 0.0;
    for (int a = e_real_; a < e_total; ++a) artificial += flow_[a];
    sol.feasible = artificial <= 1e-12 * std::max(1.0, total);
    sol.flow.assign(flow_.begin(), flow_.begin() + e_real_);
    sol.cost = 0.0;
    for (int a = 0; a < e_real_; ++a) sol.cost += flow_[a] * cost_[a];
    sol.u.resize(n_);
    sol.v.resize(m_);
    // Shift so that the duals are centred near zero (the Big-M offset cancels).
    const double shift = n_ > 0 ? pi_[0] : 0.0;
    for (int i = 0; i < n_; ++i) sol.u[i] = -(pi_[i] - shift);
    for (int j = 0; j < m_; ++j) sol.v[j] = pi_[n_ + j] - shift;
    return sol;
  }

 private:
  void attach(int child, int arc) {
    parent_[child] = root_;
    parent_arc_[child] = arc;
    depth_[child] = 1;
    in_tree_[arc] = 1;
    adj_[child].push_back(arc);
    adj_[root_].push_back(arc);
  }

  double reduced_cost(int a) const { return cost_[a] + pi_[tail_[a]] - pi_[head_[a]]; }

  int block_entering() {
    const int e_total = static_cast<int>(cost_.size());
    int scanned = 0;
    int best = -1;
    double best_rc = -eps_;
    int cnt = 0;
    int a = next_arc_;
    while (scanned < e_total) {
      if (!in_tree_[a]) {
        const double rc = reduced_cost(a);
        if (rc < best_rc) {
          best_rc = rc;
          best = a;
        }
      }
      ++scanned;
      ++cnt;
      a = a + 1 == e_total ? 0 : a + 1;
      if (cnt >= block_) {
        if (best >= 0) break;
        cnt = 0;
      }
    }
    next_arc_ = a;
    return best;
  }

  int bland_entering() const {
    const int e_total = static_cast<int>(cost_.size());
    for (int a = 0; a < e_total; ++a)
      if (!in_tree_[a] && reduced_cost(a) < -eps_) return a;
    return -1;
  }

  // Returns true for a degenerate pivot.
  bool pivot(int e) {
    const int u = tail_[e], v = head_[e];
    // Apex of the cycle.
    int x = u, y = v;
    while (x != y) {
      if (depth_[x] >= depth_[y]) x = parent_[x];
      else y = parent_[y];
    }
    const int join = x;

    // Cycle orientation follows e: join -> ... -> u -> v -> ... -> join.
    double delta = std::numeric_limits<double>::infinity();
    int leave = -1;
    bool leave_on_u_side = false;
    for (int w = u; w != join; w = parent_[w]) {
      const int a = parent_arc_[w];
      if (tail_[a] == w) {  // traversed parent -> w, arc points w -> parent
        if (flow_[a] < delta) {
          delta = flow_[a];
          leave = a;
          leave_on_u_side = true;
        }
      }
    }
    for (int w = v; w != join; w = parent_[w]) {
      const int a = parent_arc_[w];
      if (head_[a] == w) {  // traversed w -> parent, arc points parent -> w
        if (flow_[a] <= delta) {
          delta = flow_[a];
          leave = a;
          leave_on_u_side = false;
        }
      }
    }
    if (leave < 0) throw Error(ErrorKind::InternalConsistency, "unbounded transportation cycle");
    delta = std::max(0.0, delta);

    if (delta > 0.0) {
      flow_[e] += delta;
      for (int w = u; w != join; w = parent_[w]) {
        const int a = parent_arc_[w];
        flow_[a] += tail_[a] == w ? -delta : delta;
      }
      for (int w = v; w != join; w = parent_[w]) {
        const int a = parent_arc_[w];
        flow_[a] += head_[a] == w ? -delta : delta;
      }
    }
    flow_[leave] = 0.0;

    // Detach the subtree below the leaving arc and hang it from e.
    const int q = depth_[tail_[leave]] > depth_[head_[leave]] ? tail_[leave] : head_[leave];
    const int qp = parent_[q];
    remove_adj(q, leave);
    remove_adj(qp, leave);
    in_tree_[leave] = 0;
    in_tree_[e] = 1;
    adj_[u].push_back(e);
    adj_[v].push_back(e);
    const int s = leave_on_u_side ? u : v;
    const int t = leave_on_u_side ? v : u;
    parent_[s] = t;
    parent_arc_[s] = e;
    depth_[s] = depth_[t] + 1;
    pi_[s] = tail_[e] == t ? pi_[t] + cost_[e] : pi_[t] - cost_[e];
    queue_.clear();
    queue_.push_back(s);
    while (!queue_.empty()) {
      const int xnode = queue_.front();
      queue_.pop_front();
      for (int a : adj_[xnode]) {
        if (a == parent_arc_[xnode]) continue;
        const int ynode = tail_[a] == xnode ? head_[a] : tail_[a];
        parent_[ynode] = xnode;
        parent_arc_[ynode] = a;
        depth_[ynode] = depth_[xnode] + 1;
        pi_[ynode] = tail_[a] == xnode ? pi_[xnode] + cost_[a] : pi_[xnode] - cost_[a];
        queue_.push_back(ynode);
      }
    }
    return delta == 0.0;
  }

  void remove_adj(int node, int arc) {
    auto& l = adj_[node];
    auto it = std::find(l.begin(), l.end(), arc);
    if (it != l.end()) {
      *it = l.back();
      l.pop_back();
    }
  }

  const TransportProblem& p_;
  SimplexOptions opt_;
  int n_ = 0, m_ = 0, root_ = 0, nodes_ = 0, e_real_ = 0;
  std::vector<int> tail_, head_;
  std::vector<double> cost_, flow_;
  std::vector<char> in_tree_;
  std::vector<int> parent_, parent_arc_, depth_;
  std::vector<double> pi_;
  std::vector<std::vector<int>> adj_;
  std::deque<int> queue_;
  double big_m_ = 1.0, eps_ = 1e-12;
  int block_ = 16;
  int next_arc_ = 0;
};

// Dinic on the bipartite network source -> i -> j -> sink.
class Dinic {
 public:
  explicit Dinic(int n) : g_(n), level_(n), it_(n) {}
  void add_edge(int a, int b, double cap) {
    g_[a].push_back({b, cap, static_cast<int>(g_[b].size())});
    g_[b].push_back({a, 0.0, static_cast<int>(g_[a].size()) - 1});
  }
  double run(int s, int t, double eps) {
    double total = 0.0;
    while (bfs(s, t, eps)) {
      std::fill(it_.begin(), it_.end(), 0);
      while (true) {
        const double f = dfs(s, t, std::numeric_limits<double>::infinity(), eps);
        if (f <= eps) break;
        total += f;
      }
    }
    return total;
  }

 private:
  struct Edge {
    int to;
    double cap;
    int rev;
  };
  bool bfs(int s, int t, double eps) {
    std::fill(level_.begin(), level_.end(), -1);
    std::deque<int> q{s};
    level_[s] = 0;
    while (!q.empty()) {
      const int x = q.front();
      q.pop_front();
      for (const auto& e : g_[x])
        if (e.cap > eps && level_[e.to] < 0) {
          level_[e.to] = level_[x] + 1;
          q.push_back(e.to);
        }
    }
    return level_[t] >= 0;
  }
  double dfs(int x, int t, double f, double eps) {
    if (x == t) return f;
    for (int& i = it_[x]; i < static_cast<int>(g_[x].size()); ++i) {
      Edge& e = g_[x][i];
      if (e.cap > eps && level_[e.to] == level_[x] + 1) {
        const double d = dfs(e.to, t, std::min(f, e.cap), eps);
        if (d > eps) {
          e.cap -= d;
          g_[e.to][e.rev].cap += d;
          return d;
        }
      }
    }
    return 0.0;
  }
  std::vector<std::vector<Edge>> g_;
  std::vector<int> level_, it_;
};

}  // namespace

TransportSolution network_simplex(const TransportProblem& p, const SimplexOptions& opt) {
  double s = 0.0, d = 0.0;
  for (double x : p.supply) {
    if (x < 0.0 || !std::isfinite(x)) throw Error(ErrorKind::InvalidInput, "supplies must be nonnegative");
    s += x;
  }
  for (double x : p.demand) {
    if (x < 0.0 || !std::isfinite(x)) throw Error(ErrorKind::InvalidInput, "demands must be nonnegative");
    d += x;
  }
  if (std::abs(s - d) > 1e-9 * std::max(1.0, s))
    throw Error(ErrorKind::InvalidInput, "unbalanced transportation problem");
  NetworkSimplex ns(p, opt);
  return ns.run();
}

double bipartite_max_flow(const TransportProblem& p) {
  const int n = static_cast<int>(p.supply.size());
  const int m = static_cast<int>(p.demand.size());
  Dinic g(n + m + 2);
  const int src = n + m, snk = n + m + 1;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    g.add_edge(src, i, p.supply[i]);
    total += p.supply[i];
  }
  for (int j = 0; j < m; ++j) g.add_edge(n + j, snk, p.demand[j]);
  for (const auto& a : p.arcs) g.add_edge(a.i, n + a.j, std::numeric_limits<double>::infinity());
  return g.run(src, snk, 1e-15 * std::max(1.0, total));
}

bool transport_feasible(const TransportProblem& p, double tol) {
  double total = 0.0;
  for (double x : p.supply) total += x;
  return bipartite_max_flow(p) >= total - tol * std::max(1.0, total);
}

}  // namespace normot
