#include "normot/kantorovich.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "normot/error.hpp"

namespace normot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> key_of(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

CostFn norm_cost(const NormPtr& norm) {
  CostFn c;
  c.norm = norm;
  c.eval = [norm](const Vec& x, const Vec& y) { return norm->value(y - x); };
  c.name = "norm";
  return c;
}

CostFn cone_cost_fn(const ExtremalCone& cone, std::optional<CostFn> base) {
  CostFn c;
  c.may_be_infinite = true;
  c.name = "cone";
  c.eval = [cone, base](const Vec& x, const Vec& y) {
    const Vec d = y - x;
    if (!cone.contains(d)) return kInf;
    return base ? (*base)(x, y) : 0.0;
  };
  return c;
}

CostFn cone_cost_fn(const ConeDescriptor& cone, std::optional<CostFn> base) {
  CostFn c;
  c.may_be_infinite = true;
  c.name = "cone";
  c.eval = [cone, base](const Vec& x, const Vec& y) {
    const Vec d = y - x;
    if (d.norm() > 0.0 && !cone.contains(d)) return kInf;
    return base ? (*base)(x, y) : 0.0;
  };
  return c;
}

CostFn sq_euclid_cost() {
  CostFn c;
  c.eval = [](const Vec& x, const Vec& y) { return (y - x).squaredNorm(); };
  c.name = "sq_euclid";
  return c;
}

Carriage Carriage::from_plan(const TransportPlan& plan) {
  Carriage c;
  c.pairs.reserve(plan.entries.size());
  for (const auto& e : plan.entries) c.pairs.emplace_back(e.i, e.j);
  return c;
}

TransportPlan solve_on_arcs(const std::vector<double>& supply, const std::vector<double>& demand,
                            const std::vector<TransportArc>& arcs, const SolveOptions& opt) {
  TransportProblem p{supply, demand, arcs};
  if (opt.check_feasibility && !transport_feasible(p))
    throw Error(ErrorKind::Infeasible, "no finite-cost plan exists");
  const TransportSolution s = network_simplex(p, opt.simplex);
  if (!s.feasible) throw Error(ErrorKind::Infeasible, "no finite-cost plan exists");
  TransportPlan plan;
  for (size_t a = 0; a < arcs.size(); ++a)
    if (s.flow[a] > 0.0) plan.entries.push_back({arcs[a].i, arcs[a].j, s.flow[a]});
  std::sort(plan.entries.begin(), plan.entries.end(),
            [](const PlanEntry& a, const PlanEntry& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  plan.cost_value = s.cost;
  plan.duals = DualCertificate{s.u, s.v};
  return plan;
}

TransportPlan solve_primal(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostFn& cost,
                           const SolveOptions& opt) {
  if (mu.dim != nu.dim) throw Error(ErrorKind::InvalidInput, "marginals live in different dimensions");
  if (mu.size() == 0 || nu.size() == 0) throw Error(ErrorKind::EmptyMeasure, "empty marginal");
  if (std::abs(mu.total_mass() - nu.total_mass()) > 1e-9)
    throw Error(ErrorKind::InvalidInput, "marginals have different total mass");
  std::vector<TransportArc> arcs;
  arcs.reserve(static_cast<size_t>(mu.size()) * nu.size());
  bool any_inf = false;
  for (int i = 0; i < mu.size(); ++i)
    for (int j = 0; j < nu.size(); ++j) {
      const double c = cost(mu.points[i], nu.points[j]);
      if (std::isfinite(c)) arcs.push_back({i, j, c});
      else any_inf = true;
    }
  SolveOptions o = opt;
  o.check_feasibility = opt.check_feasibility && any_inf;
  TransportPlan plan = solve_on_arcs(mu.weights, nu.weights, arcs, o);
  plan.cost_value = plan_cost(plan, mu, nu, cost);
  return plan;
}

double plan_cost(const TransportPlan& plan, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                 const CostFn& cost) {
  double s = 0.0;
  for (const auto& e : plan.entries) s += e.mass * cost(mu.points[e.i], nu.points[e.j]);
  return s;
}

double marginal_error(const TransportPlan& plan, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  std::vector<double> r(mu.size(), 0.0), c(nu.size(), 0.0);
  for (const auto& e : plan.entries) {
    r[e.i] += e.mass;
    c[e.j] += e.mass;
  }
  double err = 0.0;
  for (int i = 0; i < mu.size(); ++i) err = std::max(err, std::abs(r[i] - mu.weights[i]));
  for (int j = 0; j < nu.size(); ++j) err = std::max(err, std::abs(c[j] - nu.weights[j]));
  return err;
}

Potential extract_potentials(const TransportPlan& plan, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             const CostFn& cost, int anchor) {
  return extract_potentials(Carriage::from_plan(plan), mu, nu, cost, anchor, plan.duals);
}

namespace {

// Axial graph on the union of supports: for each pair (u, y) of the carriage
// (identity pairs included) an arc u -> v of weight c(v, y) - c(u, y).
struct AxialPaths {
  Potential P;
  int nz = 0;
  std::vector<std::vector<int>> out_pairs;
  std::vector<std::vector<double>> cz;  // cz[y][v] = c(v, y)
  std::vector<double> h;                // feasible reweighting, empty if unknown
  double scale = 1.0;

  AxialPaths(const Carriage& carriage, const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostFn& cost,
             const std::optional<DualCertificate>& duals) {
    P.cost = cost;
    std::map<std::vector<double>, int> ids;
    auto add = [&](const Vec& v) {
      auto [it, inserted] = ids.emplace(key_of(v), static_cast<int>(P.points.size()));
      if (inserted) P.points.push_back(v);
      return it->second;
    };
    for (const auto& x : mu.points) P.source_point.push_back(add(x));
    for (const auto& y : nu.points) P.target_point.push_back(add(y));
    nz = static_cast<int>(P.points.size());

    out_pairs.assign(nz, {});
    for (const auto& [i, j] : carriage.pairs) out_pairs[P.source_point[i]].push_back(P.target_point[j]);
    for (int z = 0; z < nz; ++z) out_pairs[z].push_back(z);
    for (auto& l : out_pairs) {
      std::sort(l.begin(), l.end());
      l.erase(std::unique(l.begin(), l.end()), l.end());
    }

    // Every point heads its identity pair, so cz is dense.
    cz.assign(nz, std::vector<double>(nz));
    for (int y = 0; y < nz; ++y)
      for (int v = 0; v < nz; ++v) {
        cz[y][v] = cost(P.points[v], P.points[y]);
        if (std::isfinite(cz[y][v])) scale = std::max(scale, std::abs(cz[y][v]));
      }
    for (int z = 0; z < nz; ++z)
      if (!std::isfinite(cz[z][z])) throw Error(ErrorKind::InvalidInput, "cost must be finite on the diagonal");

    // h(z) = min_j c(z, y_j) - v_j is feasible when the duals certify optimality
    // and c satisfies the triangle inequality; verified arc by arc.
    if (duals && static_cast<int>(duals->v.size()) == nu.size()) {
      h.assign(nz, kInf);
      for (int z = 0; z < nz; ++z)
        for (int j = 0; j < nu.size(); ++j) h[z] = std::min(h[z], cz[P.target_point[j]][z] - duals->v[j]);
      bool ok = std::all_of(h.begin(), h.end(), [](double x) { return std::isfinite(x); });
      for (int u = 0; ok && u < nz; ++u)
        for (int y : out_pairs[u]) {
          const double cu = cz[y][u];
          if (!std::isfinite(cu)) {
            ok = false;
            break;
          }
          for (int v = 0; v < nz && ok; ++v) {
            const double w = cz[y][v] - cu;
            if (std::isfinite(w) && w + h[u] - h[v] < -1e-9 * scale) ok = false;
          }
          if (!ok) break;
        }
      if (!ok) h.clear();
    }
  }

  // Distances from `a` (reverse: to `a`) over nodes with allowed[z] set.
  // Unreached nodes stay at +inf.
  std::vector<double> run(int a, bool reverse, const std::vector<char>& allowed) const {
    std::vector<double> dist(nz, kInf);
    dist[a] = 0.0;
    auto weight = [&](int u, int y, int v) {
      const double cu = cz[y][u];
      if (!std::isfinite(cu)) return kInf;
      return cz[y][v] - cu;
    };
    if (!h.empty()) {
      // Dijkstra on reweighted arcs, dense selection.
      std::vector<double> rd(nz, kInf);
      std::vector<char> done(nz, 0);
      rd[a] = 0.0;
      while (true) {
        int x = -1;
        for (int z = 0; z < nz; ++z)
          if (!done[z] && allowed[z] && std::isfinite(rd[z]) && (x < 0 || rd[z] < rd[x])) x = z;
        if (x < 0) break;
        done[x] = 1;
        if (!reverse) {
          for (int y : out_pairs[x])
            for (int v = 0; v < nz; ++v) {
              if (!allowed[v] || done[v]) continue;
              const double w = weight(x, y, v);
              if (!std::isfinite(w)) continue;
              const double nd = rd[x] + std::max(0.0, w + h[x] - h[v]);
              if (nd < rd[v]) rd[v] = nd;
            }
        } else {
          for (int u = 0; u < nz; ++u) {
            if (!allowed[u] || done[u]) continue;
            for (int y : out_pairs[u]) {
              const double w = weight(u, y, x);
              if (!std::isfinite(w)) continue;
              const double nd = rd[x] + std::max(0.0, w + h[u] - h[x]);
              if (nd < rd[u]) rd[u] = nd;
            }
          }
        }
      }
      for (int z = 0; z < nz; ++z)
        if (std::isfinite(rd[z])) dist[z] = reverse ? rd[z] - h[z] + h[a] : rd[z] - h[a] + h[z];
      return dist;
    }

    // SPFA with negative-cycle detection.
    const double eps = 1e-12 * scale;
    std::vector<int> count(nz, 0);
    std::vector<char> inq(nz, 0);
    std::deque<int> q{a};
    inq[a] = 1;
    auto relax = [&](int from, int to, double w) {
      if (dist[from] + w < dist[to] - eps) {
        if (to == a) throw Error(ErrorKind::NotOptimal, "negative axial cycle through the anchor");
        dist[to] = dist[from] + w;
        if (++count[to] > nz) throw Error(ErrorKind::NotOptimal, "negative axial cycle: carriage not cyclically monotone");
        if (!inq[to]) {
          inq[to] = 1;
          q.push_back(to);
        }
      }
    };
    while (!q.empty()) {
      const int x = q.front();
      q.pop_front();
      inq[x] = 0;
      if (!reverse) {
        for (int y : out_pairs[x])
          for (int v = 0; v < nz; ++v) {
            if (!allowed[v]) continue;
            const double w = weight(x, y, v);
            if (std::isfinite(w)) relax(x, v, w);
          }
      } else {
        for (int u = 0; u < nz; ++u) {
          if (!allowed[u]) continue;
          for (int y : out_pairs[u]) {
            const double w = weight(u, y, x);
            if (std::isfinite(w)) relax(x, u, w);
          }
        }
      }
    }
    return dist;
  }

  // phi by forward shortest paths, one anchor per reached component.
  Potential formula_potential(int anchor_point) const {
    Potential out = P;
    std::vector<double> phi(nz, kInf);
    out.component.assign(nz, -1);
    int comp = 0;
    int a = anchor_point;
    while (a >= 0) {
      std::vector<char> allowed(nz);
      for (int z = 0; z < nz; ++z) allowed[z] = out.component[z] < 0;
      const auto dist = run(a, false, allowed);
      for (int z = 0; z < nz; ++z)
        if (allowed[z] && std::isfinite(dist[z])) {
          phi[z] = dist[z];
          out.component[z] = comp;
        }
      ++comp;
      a = -1;
      for (int z = 0; z < nz && a < 0; ++z)
        if (out.component[z] < 0) a = z;
    }
    out.psi.resize(nz);
    for (int z = 0; z < nz; ++z) out.psi[z] = phi[z] == 0.0 ? 0.0 : -phi[z];
    return out;
  }
};

}  // namespace

Potential extract_potentials(const Carriage& carriage, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             const CostFn& cost, int anchor, const std::optional<DualCertificate>& duals) {
  if (anchor < 0 || anchor >= mu.size()) throw Error(ErrorKind::InvalidInput, "anchor out of range");
  AxialPaths g(carriage, mu, nu, cost, duals);
  return g.formula_potential(g.P.source_point[anchor]);
}

Potential central_potential(const TransportPlan& plan, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                            const CostFn& cost, int anchor) {
  if (anchor < 0 || anchor >= mu.size()) throw Error(ErrorKind::InvalidInput, "anchor out of range");
  AxialPaths g(Carriage::from_plan(plan), mu, nu, cost, plan.duals);
  const int a = g.P.source_point[anchor];
  Potential lo = g.formula_potential(a);
  const std::vector<char> all(g.nz, 1);
  const auto up = g.run(a, true, all);
  const bool single = std::all_of(lo.component.begin(), lo.component.end(), [](int c) { return c == 0; }) &&
                      std::all_of(up.begin(), up.end(), [](double x) { return std::isfinite(x); });
  if (!single) return lo;
  for (int z = 0; z < g.nz; ++z) lo.psi[z] = 0.5 * (lo.psi[z] + up[z]);
  return lo;
}

double extend_potential(const Potential& p, const Vec& x) {
  double best = -kInf;
  for (size_t z = 0; z < p.points.size(); ++z) {
    const double c = p.cost(x, p.points[z]);
    if (!std::isfinite(c)) continue;
    best = std::max(best, p.psi[z] - c);
  }
  return best;
}

Potential extend_to(const Potential& p, const std::vector<Vec>& extra) {
  Potential q = p;
  for (const auto& x : extra) {
    const double v = extend_potential(p, x);
    q.points.push_back(x);
    q.psi.push_back(v);
    q.component.push_back(-1);
  }
  return q;
}

double lipschitz_violation(const Potential& p) {
  double worst = -kInf;
  for (size_t x = 0; x < p.points.size(); ++x)
    for (size_t y = 0; y < p.points.size(); ++y) {
      if (x == y) continue;
      const double c = p.cost(p.points[x], p.points[y]);
      if (!std::isfinite(c)) continue;
      worst = std::max(worst, p.psi[y] - p.psi[x] - c);
    }
  return worst;
}

CycleVerdict check_cyclical_monotonicity(const Carriage& carriage, const DiscreteMeasure& mu,
                                         const DiscreteMeasure& nu, const CostFn& cost, int max_len,
                                         const CycleCheckOptions& opt) {
  if (max_len < 2) throw Error(ErrorKind::InvalidInput, "max_len must be at least 2");
  const int np = static_cast<int>(carriage.pairs.size());
  CycleVerdict verdict;
  if (np < 2) return verdict;
  // cc[a][b] = c(x_b, y_a): pair b's source sent to pair a's target.
  std::vector<std::vector<double>> cc(np, std::vector<double>(np));
  for (int a = 0; a < np; ++a)
    for (int b = 0; b < np; ++b)
      cc[a][b] = cost(mu.points[carriage.pairs[b].first], nu.points[carriage.pairs[a].second]);
  double scale = 1.0;
  for (int a = 0; a < np; ++a) {
    if (!std::isfinite(cc[a][a])) throw Error(ErrorKind::InvalidInput, "carriage pair with infinite cost");
    scale = std::max(scale, std::abs(cc[a][a]));
  }
  const double tol = opt.tol * scale;

  auto test = [&](const std::vector<int>& cyc) {
    ++verdict.cycles_checked;
    double lhs = 0.0, rhs = 0.0;
    const int L = static_cast<int>(cyc.size());
    for (int t = 0; t < L; ++t) {
      lhs += cc[cyc[t]][cyc[t]];
      rhs += cc[cyc[t]][cyc[(t + 1) % L]];
    }
    const double viol = lhs - rhs;
    if (viol > tol && (verdict.ok || viol > verdict.violation)) {
      if (verdict.ok) {
        verdict.ok = false;
        verdict.witness = cyc;
        verdict.violation = viol;
      }
      return true;
    }
    return false;
  };

  const int L = std::min(max_len, np);
  // Cycles with the smallest index first; count tuples to pick a strategy.
  long double total = 0;
  for (int len = 2; len <= L; ++len) {
    long double c = 1;
    for (int t = 1; t < len; ++t) c *= (np - t);
    total += c;
  }
  if (total <= static_cast<long double>(opt.exhaustive_limit)) {
    std::vector<int> cyc;
    std::vector<char> used(np, 0);
    std::function<bool(int)> rec = [&](int len) -> bool {
      if (static_cast<int>(cyc.size()) == len) return test(cyc);
      for (int b = cyc[0] + 1; b < np; ++b) {
        if (used[b]) continue;
        used[b] = 1;
        cyc.push_back(b);
        const bool found = rec(len);
        cyc.pop_back();
        used[b] = 0;
        if (found) return true;
      }
      return false;
    };
    for (int len = 2; len <= L; ++len)
      for (int first = 0; first < np; ++first) {
        cyc.assign(1, first);
        used.assign(np, 0);
        used[first] = 1;
        if (rec(len)) return verdict;
      }
    return verdict;
  }

  verdict.sampled = true;
  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<int> len_dist(2, L);
  std::vector<int> idx(np);
  std::iota(idx.begin(), idx.end(), 0);
  for (long s = 0; s < opt.samples; ++s) {
    const int len = len_dist(rng);
    for (int t = 0; t < len; ++t) {
      std::uniform_int_distribution<int> pick(t, np - 1);
      std::swap(idx[t], idx[pick(rng)]);
    }
    if (test(std::vector<int>(idx.begin(), idx.begin() + len))) return verdict;
  }
  return verdict;
}

double duality_gap(const TransportPlan& plan, const Potential& p, const DiscreteMeasure& mu,
                   const DiscreteMeasure& nu) {
  double dual = 0.0;
  for (int i = 0; i < mu.size(); ++i) dual += p.phi_source(i) * mu.weights[i];
  for (int j = 0; j < nu.size(); ++j) dual -= p.phi_target(j) * nu.weights[j];
  return plan.cost_value - dual;
}

}  // namespace normot
