#include "normot/monge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

#include "normot/cycles.hpp"
#include "normot/error.hpp"

namespace normot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sub-measure with raw (unnormalized) weights; make() would renormalize.
DiscreteMeasure raw_measure(int dim, std::vector<Vec> points, std::vector<double> weights) {
  DiscreteMeasure m;
  m.dim = dim;
  m.points = std::move(points);
  m.weights = std::move(weights);
  return m;
}

double max_finite_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostFn& c) {
  double s = 1.0;
  for (const auto& x : mu.points)
    for (const auto& y : nu.points) {
      const double v = c(x, y);
      if (std::isfinite(v)) s = std::max(s, std::abs(v));
    }
  return s;
}

}  // namespace

SecondaryPlan secondary_select(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostFn& primary,
                               const CostFn& secondary, const SolveOptions& opt) {
  return secondary_select(mu, nu, primary, solve_primal(mu, nu, primary, opt), secondary, opt);
}

SecondaryPlan secondary_select(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostFn& primary,
                               const TransportPlan& primary_plan, const CostFn& secondary, const SolveOptions& opt) {
  if (!primary_plan.duals) throw Error(ErrorKind::InvalidInput, "primary plan carries no dual certificate");
  const auto& u = primary_plan.duals->u;
  const auto& v = primary_plan.duals->v;
  const double scale = max_finite_cost(mu, nu, primary);
  const double optimum = primary_plan.cost_value;

  for (double tight_tol : {1e-10, 1e-12}) {
    std::vector<TransportArc> arcs;
    for (int i = 0; i < mu.size(); ++i)
      for (int j = 0; j < nu.size(); ++j) {
        const double c = primary(mu.points[i], nu.points[j]);
        if (std::isfinite(c) && c - u[i] - v[j] <= tight_tol * scale)
          arcs.push_back({i, j, secondary(mu.points[i], nu.points[j])});
      }
    SolveOptions o = opt;
    o.check_feasibility = false;
    TransportPlan p;
    try {
      p = solve_on_arcs(mu.weights, nu.weights, arcs, o);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Infeasible) continue;
      throw;
    }
    const double pc = plan_cost(p, mu, nu, primary);
    if (pc > optimum + 1e-9 * std::max(1.0, std::abs(optimum))) continue;
    SecondaryPlan s;
    s.secondary_cost_value = plan_cost(p, mu, nu, secondary);
    s.primary_cost = pc;
    s.primary_optimum = optimum;
    s.optimal_face_arcs = static_cast<int>(arcs.size());
    p.cost_value = pc;
    p.duals = primary_plan.duals;
    s.plan = std::move(p);
    return s;
  }
  throw Error(ErrorKind::NotOptimal, "optimal face restriction lost primary optimality");
}

CellPotentialResult cell_potentials(const PartitionCell& cell, const TransportPlan& plan, const DiscreteMeasure& mu,
                                    const DiscreteMeasure& nu, const CostFn& secondary) {
  CellPotentialResult r;
  std::map<int, int> src, tgt;
  std::vector<double> row, col;
  Carriage local;
  for (const auto& e : plan.entries) {
    if (!std::binary_search(cell.members.begin(), cell.members.end(), e.i)) continue;
    auto [si, s_new] = src.emplace(e.i, static_cast<int>(r.sources.size()));
    if (s_new) {
      r.sources.push_back(e.i);
      row.push_back(0.0);
    }
    auto [tj, t_new] = tgt.emplace(e.j, static_cast<int>(r.targets.size()));
    if (t_new) {
      r.targets.push_back(e.j);
      col.push_back(0.0);
    }
    row[si->second] += e.mass;
    col[tj->second] += e.mass;
    local.pairs.emplace_back(si->second, tj->second);
  }
  if (r.sources.empty()) {
    r.report = "cell carries no plan mass";
    return r;
  }
  std::vector<Vec> xs, ys;
  for (int i : r.sources) xs.push_back(mu.points[i]);
  for (int j : r.targets) ys.push_back(nu.points[j]);
  const DiscreteMeasure mc = raw_measure(mu.dim, xs, row);
  const DiscreteMeasure nc = raw_measure(nu.dim, ys, col);

  CostFn cm;
  if (cell.cone) {
    cm = cone_cost_fn(*cell.cone, secondary);
  } else {
    cm.may_be_infinite = true;
    cm.eval = [secondary](const Vec& x, const Vec& y) {
      return (y - x).norm() <= 1e-14 * std::max(1.0, x.norm()) ? secondary(x, y) : kInf;
    };
  }

  // Cyclic connectedness on the union of cell points, identity pairs added.
  std::vector<Vec> zs = xs;
  std::vector<int> tz(ys.size());
  for (size_t t = 0; t < ys.size(); ++t) {
    auto it = std::find_if(zs.begin(), zs.end(), [&](const Vec& z) { return z == ys[t]; });
    tz[t] = static_cast<int>(it - zs.begin());
    if (it == zs.end()) zs.push_back(ys[t]);
  }
  const DiscreteMeasure zm = raw_measure(mu.dim, zs, std::vector<double>(zs.size(), 1.0));
  Carriage zc;
  for (const auto& [s, t] : local.pairs) zc.pairs.emplace_back(s, tz[t]);
  for (size_t z = 0; z < zs.size(); ++z) zc.pairs.emplace_back(static_cast<int>(z), static_cast<int>(z));
  const AxialGraph g = build_axial_graph(zc, zm, zm, cm);
  const ClassPartition scc = cycle_classes(g);
  if (scc.classes.size() != 1) {
    r.report = "cell is not cyclically connected (" + std::to_string(scc.classes.size()) + " axial classes)";
    return r;
  }

  Potential p;
  try {
    p = extract_potentials(local, mc, nc, cm, 0);
  } catch (const Error& e) {
    r.report = e.what();
    return r;
  }
  double scale = 1.0;
  for (size_t s = 0; s < xs.size(); ++s) {
    r.phi.push_back(-p.psi_source(static_cast<int>(s)));
    scale = std::max(scale, std::abs(r.phi.back()));
  }
  for (size_t t = 0; t < ys.size(); ++t) {
    r.psi.push_back(p.psi_target(static_cast<int>(t)));
    scale = std::max(scale, std::abs(r.psi.back()));
  }
  for (const auto& [s, t] : local.pairs)
    r.max_support_residual =
        std::max(r.max_support_residual, std::abs(r.phi[s] + r.psi[t] - cm(xs[s], ys[t])));
  r.max_constraint_excess = -kInf;
  for (size_t s = 0; s < xs.size(); ++s)
    for (size_t t = 0; t < ys.size(); ++t) {
      const double c = cm(xs[s], ys[t]);
      if (std::isfinite(c)) r.max_constraint_excess = std::max(r.max_constraint_excess, r.phi[s] + r.psi[t] - c);
    }
  r.ok = r.max_support_residual <= 1e-9 * scale && r.max_constraint_excess <= 1e-9 * scale;
  if (!r.ok) r.report = "complementary slackness violated";
  return r;
}

Coupling1D monotone_map_1d(const std::vector<double>& x, const std::vector<double>& wx, const std::vector<double>& y,
                           const std::vector<double>& wy) {
  if (x.size() != wx.size() || y.size() != wy.size()) throw Error(ErrorKind::InvalidInput, "weights do not match points");
  const double sx = std::accumulate(wx.begin(), wx.end(), 0.0);
  const double sy = std::accumulate(wy.begin(), wy.end(), 0.0);
  if (std::abs(sx - sy) > 1e-12 * std::max(1.0, sx)) throw Error(ErrorKind::InvalidInput, "masses differ");
  std::vector<int> ox(x.size()), oy(y.size());
  std::iota(ox.begin(), ox.end(), 0);
  std::iota(oy.begin(), oy.end(), 0);
  std::stable_sort(ox.begin(), ox.end(), [&](int a, int b) { return x[a] < x[b]; });
  std::stable_sort(oy.begin(), oy.end(), [&](int a, int b) { return y[a] < y[b]; });

  Coupling1D c;
  const double eps = 1e-15 * std::max(1.0, sx);
  size_t a = 0, b = 0;
  double ra = ox.empty() ? 0.0 : wx[ox[0]], rb = oy.empty() ? 0.0 : wy[oy[0]];
  while (a < ox.size() && b < oy.size()) {
    if (ra <= eps) {
      if (++a < ox.size()) ra = wx[ox[a]];
      continue;
    }
    if (rb <= eps) {
      if (++b < oy.size()) rb = wy[oy[b]];
      continue;
    }
    const double m = std::min(ra, rb);
    // The last atom of either side absorbs rounding leftovers.
    const bool last_a = a + 1 == ox.size(), last_b = b + 1 == oy.size();
    const double mass = (last_a && last_b) ? std::max(ra, rb) : m;
    c.entries.push_back({ox[a], oy[b], mass});
    ra -= m;
    rb -= m;
    if (last_a && last_b) break;
  }
  std::vector<int> count(x.size(), 0);
  for (const auto& e : c.entries) ++count[e.i];
  c.is_map = true;
  for (size_t i = 0; i < x.size(); ++i)
    if (wx[i] > 0 && count[i] != 1) c.is_map = false;
  return c;
}

std::vector<Vec> surrogate_dual_vertices(int k, int round) {
  std::vector<Vec> out;
  if (k == 1) {
    Vec a(1), b(1);
    a << 1.0;
    b << -1.0;
    return {a, b};
  }
  if (k == 2) {
    const int m = 1 << (round + 2);
    for (int i = 0; i < m; ++i) {
      const double t = 2.0 * std::numbers::pi * (i + 0.5) / m;
      Vec v(2);
      v << std::cos(t), std::sin(t);
      out.push_back(v);
    }
    return out;
  }
  const int res = 1 << round;
  std::vector<int> idx(k, 0);
  while (true) {
    Vec v(k);
    bool face = false;
    for (int t = 0; t < k; ++t) {
      v(t) = -1.0 + 2.0 * idx[t] / res;
      if (idx[t] == 0 || idx[t] == res) face = true;
    }
    if (face) out.push_back(v.normalized());
    int t = 0;
    while (t < k && ++idx[t] > res) idx[t++] = 0;
    if (t == k) break;
  }
  return out;
}

MapResult assemble_map(const DirectedPartition& part, const TransportPlan& plan, const DiscreteMeasure& mu,
                       const DiscreteMeasure& nu, const MapOptions& opt) {
  MapResult res;
  std::vector<std::vector<PlanEntry>> by_cell(part.cells.size());
  for (const auto& e : plan.entries) by_cell[part.cell_of[e.i]].push_back(e);

  for (const auto& cell : part.cells) {
    auto& entries = by_cell[cell.id];
    if (entries.empty()) continue;
    std::map<int, int> si, tj;
    std::vector<int> srcs, tgts;
    std::vector<double> row, col;
    for (const auto& e : entries) {
      if (si.emplace(e.i, static_cast<int>(srcs.size())).second) {
        srcs.push_back(e.i);
        row.push_back(0.0);
      }
      if (tj.emplace(e.j, static_cast<int>(tgts.size())).second) {
        tgts.push_back(e.j);
        col.push_back(0.0);
      }
      row[si[e.i]] += e.mass;
      col[tj[e.j]] += e.mass;
    }
    auto already_map = [&]() {
      std::map<int, int> cnt;
      for (const auto& e : entries) ++cnt[e.i];
      return std::all_of(cnt.begin(), cnt.end(), [](const auto& kv) { return kv.second == 1; });
    };

    if (cell.cone && cell.k == 1) {
      const Vec& g = cell.cone->generators.front();
      std::vector<double> xs, ys;
      for (int i : srcs) xs.push_back(g.dot(mu.points[i]));
      for (int j : tgts) ys.push_back(g.dot(nu.points[j]));
      const Coupling1D c = monotone_map_1d(xs, row, ys, col);
      for (const auto& e : c.entries) res.coupling.push_back({srcs[e.i], tgts[e.j], e.mass});
      continue;
    }
    if (!cell.cone || cell.k < 2 || already_map()) {
      res.coupling.insert(res.coupling.end(), entries.begin(), entries.end());
      continue;
    }

    // Strictly convex surrogates on the cell span, refined each round.
    const Mat& b = cell.basis;
    std::vector<PlanEntry> best = entries;
    bool resolved = false;
    for (int round = 1; round <= opt.surrogate_rounds && !resolved; ++round) {
      res.surrogate_rounds_used = std::max(res.surrogate_rounds_used, round);
      const PolyhedralNorm sur(surrogate_dual_vertices(cell.k, round));
      std::vector<TransportArc> arcs;
      for (size_t s = 0; s < srcs.size(); ++s)
        for (size_t t = 0; t < tgts.size(); ++t) {
          const Vec d = nu.points[tgts[t]] - mu.points[srcs[s]];
          if (d.norm() > 0 && !cell.cone->contains(d, opt.cone_tol)) continue;
          arcs.push_back({static_cast<int>(s), static_cast<int>(t), sur.value(b.transpose() * d)});
        }
      SolveOptions so;
      so.check_feasibility = false;
      TransportPlan p;
      try {
        p = solve_on_arcs(row, col, arcs, so);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::Infeasible) break;
        throw;
      }
      std::vector<PlanEntry> mapped;
      std::map<int, int> cnt;
      for (const auto& e : p.entries) {
        mapped.push_back({srcs[e.i], tgts[e.j], e.mass});
        ++cnt[e.i];
      }
      best = mapped;
      resolved = std::all_of(cnt.begin(), cnt.end(), [](const auto& kv) { return kv.second == 1; });
    }
    if (!resolved) ++res.unresolved_cells;
    res.coupling.insert(res.coupling.end(), best.begin(), best.end());
  }

  std::sort(res.coupling.begin(), res.coupling.end(),
            [](const PlanEntry& a, const PlanEntry& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  res.target_of.assign(mu.size(), -1);
  std::vector<int> count(mu.size(), 0);
  for (const auto& e : res.coupling) {
    ++count[e.i];
    res.target_of[e.i] = e.j;
  }
  for (int i = 0; i < mu.size(); ++i)
    if (count[i] != 1) {
      res.target_of[i] = -1;
      res.split_atoms.push_back(i);
    }
  for (const auto& e : res.coupling)
    if (count[e.i] > 1) res.residual.push_back(e);
  res.is_map = res.split_atoms.empty();
  return res;
}

PushforwardVerdict verify_pushforward(const std::vector<int>& target_of, const DiscreteMeasure& mu,
                                      const DiscreteMeasure& nu, double tol) {
  PushforwardVerdict v;
  if (static_cast<int>(target_of.size()) != mu.size()) {
    v.message = "map size differs from the source measure";
    return v;
  }
  std::vector<double> image(nu.size(), 0.0);
  for (int i = 0; i < mu.size(); ++i) {
    const int j = target_of[i];
    if (j < 0 || j >= nu.size()) {
      v.message = "source " + std::to_string(i) + " has no single target";
      return v;
    }
    image[j] += mu.weights[i];
  }
  for (int j = 0; j < nu.size(); ++j)
    if (std::abs(image[j] - nu.weights[j]) > tol) {
      v.first_mismatch = j;
      v.message = "image mass differs at target " + std::to_string(j);
      return v;
    }
  v.ok = true;
  return v;
}

}  // namespace normot
