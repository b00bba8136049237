// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "normot/cycles.hpp"
#include "normot/diagnostics.hpp"
#include "normot/error.hpp"
#include "normot/instances.hpp"
#include "normot/kantorovich.hpp"
#include "normot/monge.hpp"
#include "normot/partition.hpp"
#include "normot/pipeline.hpp"

using namespace normot;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Decomposition decompose_plan(const Instance& inst, const TransportPlan& plan) {
  const CostFn c = norm_cost(inst.norm);
  return decompose(plan, central_potential(plan, inst.mu, inst.nu, c), inst.mu, inst.nu, inst.norm);
}

// 1. Strong duality on 200 random instances.
Outcome strong_duality() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  int bad = 0;
  for (unsigned seed = 0; seed < 200; ++seed) {
    RandomInstanceSpec spec;
    spec.n = 2 + static_cast<int>((seed * 37) % 49);
    spec.m = 2 + static_cast<int>((seed * 53 + 11) % 49);
    spec.dim = 1 + static_cast<int>(seed % 3);
    spec.max_vertices = 4 + static_cast<int>(seed % 9);
    const Instance inst = random_instance(spec, 10000 + seed);
    const CostFn c = norm_cost(inst.norm);
    const TransportPlan plan = solve_primal(inst.mu, inst.nu, c);
    const Potential p = extract_potentials(plan, inst.mu, inst.nu, c);
    const double gap = std::abs(duality_gap(plan, p, inst.mu, inst.nu));
    worst = std::max(worst, gap);
    if (gap > 1e-9 || lipschitz_violation(p) > 1e-9) ++bad;
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs <= 60.0, fmt("200 instances, max gap %.3g, %d failing, %.2f s", worst, bad, secs)};
}

// 2. Exhaustive cyclical monotonicity up to length 4 on every computed
//    optimal carriage (solver plan plus enumerated alternatives).
Outcome cyclical_monotonicity() {
  int carriages = 0, bad = 0, sampled = 0;
  for (unsigned seed = 0; seed < 100; ++seed) {
    RandomInstanceSpec spec;
    spec.n = 2 + static_cast<int>(seed % 7);
    spec.m = 2 + static_cast<int>((seed * 5) % 7);
    spec.dim = 1 + static_cast<int>(seed % 3);
    spec.uniform_weights = seed % 2 == 0;
    const Instance inst = random_instance(spec, 20000 + seed);
    const CostFn c = norm_cost(inst.norm);
    const TransportPlan plan = solve_primal(inst.mu, inst.nu, c);
    for (const auto& p : enumerate_optimal_carriages(inst.mu, inst.nu, c, plan, 8, seed)) {
      const Carriage car = Carriage::from_plan(p);
      const CycleVerdict v = check_cyclical_monotonicity(car, inst.mu, inst.nu, c, 4);
      ++carriages;
      bad += !v.ok;
      sampled += v.sampled;
    }
  }
  return {bad == 0 && sampled == 0,
          fmt("%d carriages from 100 instances, %d violations, %d sampled", carriages, bad, sampled)};
}

// 3. Every optimal pair lies in its source cell's cone; interior sources of
//    the l1 shift instance are regular with k = 2 and the quadrant cone.
//    Outside pairs are split by whether their source cell is residual.
Outcome partition_soundness() {
  long pairs = 0, outside = 0, outside_residual = 0;
  for (unsigned seed = 0; seed < 50; ++seed) {
    RandomInstanceSpec spec;
    spec.n = 5 + static_cast<int>(seed % 25);
    spec.m = 5 + static_cast<int>((seed * 7) % 25);
    spec.dim = 1 + static_cast<int>(seed % 3);
    const Instance inst = random_instance(spec, 30000 + seed);
    const TransportPlan plan = solve_primal(inst.mu, inst.nu, norm_cost(inst.norm));
    const Decomposition dec = decompose_plan(inst, plan);
    for (const auto& e : plan.entries) {
      ++pairs;
      const PartitionCell& cell = dec.partition.cells[dec.partition.cell_of[e.i]];
      if (pair_in_cell_cone(cell, inst.mu.points[e.i], inst.nu.points[e.j])) continue;
      ++outside;
      outside_residual += cell.flags.residual;
    }
  }
  const Instance sh = shift_instance(8);
  const TransportPlan plan = solve_primal(sh.mu, sh.nu, norm_cost(sh.norm));
  const Decomposition dec = decompose_plan(sh, plan);
  for (const auto& e : plan.entries) {
    ++pairs;
    const PartitionCell& cell = dec.partition.cells[dec.partition.cell_of[e.i]];
    if (pair_in_cell_cone(cell, sh.mu.points[e.i], sh.nu.points[e.j])) continue;
    ++outside;
    outside_residual += cell.flags.residual;
  }
  int interior = 0, good = 0;
  for (int i = 0; i < sh.mu.size(); ++i) {
    const Vec& x = sh.mu.points[i];
    if (x(0) < 0.125 || x(0) > 0.875 || x(1) < 0.125 || x(1) > 0.875) continue;
    ++interior;
    const PartitionCell& cell = dec.partition.cells[dec.partition.cell_of[i]];
    const bool quadrant = cell.cone && cell.cone->contains(v2(1, 0)) && cell.cone->contains(v2(0, 1)) &&
                          !cell.cone->contains(v2(-1e-3, 1)) && !cell.cone->contains(v2(1, -1e-3));
    good += cell.flags.regular && cell.k == 2 && quadrant;
  }
  return {outside == 0 && good == interior,
          fmt("%ld/%ld pairs in cone (%ld outside from residual cells); shift 8x8 interior %d/%d regular "
              "quadrant k=2",
              pairs - outside, pairs, outside_residual, good, interior)};
}

// 4. Regular 64-gon norm, rotated target: mass in cells of dimension <= 1.
Outcome strictly_convex_analog() {
  const int n = 8;
  const DiscreteMeasure mu = grid_sample([](const Vec&) { return 1.0; }, Box::unit(2), n);
  const double th = 0.37;
  Mat r(2, 2);
  r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  std::vector<Vec> ys;
  for (const auto& x : mu.points) ys.push_back(r * (x - v2(0.5, 0.5)) + v2(0.5, 0.5) + v2(1.5, 0.8));
  const Instance inst{"polygon64", mu, DiscreteMeasure::make(ys, mu.weights),
                      make_norm(PolyhedralNorm::regular_polygon(64, 0.05))};
  const TransportPlan plan = solve_primal(inst.mu, inst.nu, norm_cost(inst.norm));
  const Decomposition dec = decompose_plan(inst, plan);
  double low = 0.0;
  int cells2 = 0;
  for (const auto& cell : dec.partition.cells) {
    if (cell.k <= 1)
      for (int m : cell.members) low += inst.mu.weights[m];
    else
      ++cells2;
  }
  return {low >= 0.95, fmt("mass in cells with k<=1: %.4f (need >= 0.95); %d cells with k=2 of %zu", low, cells2,
                           dec.partition.cells.size())};
}

// Floyd-Warshall reachability and mutual-reachability classes over sources.
std::vector<int> brute_force_scc(const Carriage& car, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                 const CostFn& cost) {
  const int n = mu.size();
  std::vector<std::vector<char>> r(n, std::vector<char>(n, 0));
  for (int u = 0; u < n; ++u) {
    r[u][u] = 1;
    for (const auto& [i, j] : car.pairs)
      if (i == u)
        for (int v = 0; v < n; ++v)
          if (std::isfinite(cost(mu.points[v], nu.points[j]))) r[u][v] = 1;
  }
  for (int k = 0; k < n; ++k)
    for (int a = 0; a < n; ++a)
      if (r[a][k])
        for (int b = 0; b < n; ++b)
          if (r[k][b]) r[a][b] = 1;
  std::vector<int> label(n, -1);
  int next = 0;
  for (int a = 0; a < n; ++a) {
    if (label[a] >= 0) continue;
    label[a] = next;
    for (int b = a + 1; b < n; ++b)
      if (label[b] < 0 && r[a][b] && r[b][a]) label[b] = next;
    ++next;
  }
  return label;
}

// 5. Signature classes equal brute-force SCC classes, <= 10 support points.
Outcome cycle_class_oracle() {
  int instances = 0, mismatches = 0;
  for (unsigned seed = 0; seed < 100; ++seed) {
    RandomInstanceSpec spec;
    spec.n = 2 + static_cast<int>(seed % 4);
    spec.m = 2 + static_cast<int>((seed * 3) % 4);
    spec.dim = 1 + static_cast<int>(seed % 3);
    const Instance inst = random_instance(spec, 40000 + seed);
    const CostFn c = norm_cost(inst.norm);
    const TransportPlan plan = solve_primal(inst.mu, inst.nu, c);
    std::vector<CostFn> costs{c};
    for (const auto& e : plan.entries) {
      const Vec d = inst.nu.points[e.j] - inst.mu.points[e.i];
      if (d.norm() > 1e-12) {
        costs.push_back(cone_cost_fn(minimal_extremal_cone(inst.norm, {d})));
        break;
      }
    }
    for (const CostFn& cost : costs) {
      Carriage car;
      for (const auto& e : plan.entries)
        if (std::isfinite(cost(inst.mu.points[e.i], inst.nu.points[e.j]))) car.pairs.emplace_back(e.i, e.j);
      const CycleAnalysis ca = analyze_cycles(car, inst.mu, inst.nu, cost);
      const std::vector<int> oracle = brute_force_scc(car, inst.mu, inst.nu, cost);
      std::vector<int> sig(inst.mu.size());
      for (int node = 0; node < ca.graph.size(); ++node)
        sig[ca.graph.nodes[node]] = ca.signature.classes.class_of[node];
      bool same = true;
      for (int a = 0; a < inst.mu.size(); ++a)
        for (int b = 0; b < inst.mu.size(); ++b) same &= (sig[a] == sig[b]) == (oracle[a] == oracle[b]);
      ++instances;
      mismatches += !same;
    }
  }
  return {mismatches == 0, fmt("%d carriage/cost pairs from 100 seeds, %d mismatches", instances, mismatches)};
}

double brute_force_assignment(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostFn& c) {
  std::vector<int> perm(mu.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (size_t i = 0; i < perm.size(); ++i) s += c(mu.points[i], nu.points[perm[i]]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / mu.size();
}

// 6. assemble_map yields an optimal permutation for uniform marginals.
Outcome monge_map() {
  int runs = 0, not_map = 0, cost_bad = 0, brute_bad = 0, brute_runs = 0;
  double worst = 0.0;
  for (unsigned seed = 0; seed < 60; ++seed) {
    RandomInstanceSpec spec;
    spec.n = spec.m = seed < 30 ? 2 + static_cast<int>(seed % 7) : 9 + static_cast<int>((seed * 13) % 56);
    spec.dim = 2;
    spec.uniform_weights = true;
    Instance inst = random_instance(spec, 50000 + seed);
    if (seed % 3 == 0) inst.norm = make_norm(PolyhedralNorm::l1(2));
    const CostFn c = norm_cost(inst.norm);
    const TransportPlan plan = solve_primal(inst.mu, inst.nu, c);
    const Decomposition dec = decompose_plan(inst, plan);
    const SecondaryPlan sec = secondary_select(inst.mu, inst.nu, c, plan);
    const MapResult mr = assemble_map(dec.partition, sec.plan, inst.mu, inst.nu);
    ++runs;
    if (!mr.is_map || !verify_pushforward(mr.target_of, inst.mu, inst.nu).ok) {
      ++not_map;
      continue;
    }
    double mc = 0.0;
    for (int i = 0; i < inst.mu.size(); ++i) mc += inst.mu.weights[i] * c(inst.mu.points[i], inst.nu.points[mr.target_of[i]]);
    worst = std::max(worst, std::abs(mc - plan.cost_value));
    cost_bad += std::abs(mc - plan.cost_value) > 1e-9;
    if (spec.n <= 8) {
      ++brute_runs;
      brute_bad += std::abs(mc - brute_force_assignment(inst.mu, inst.nu, c)) > 1e-12;
    }
  }
  return {not_map == 0 && cost_bad == 0 && brute_bad == 0,
          fmt("%d instances (n<=64): %d not a permutation, max |map - optimum| %.3g; brute force n<=8: %d/%d exact",
              runs, not_map, worst, brute_runs - brute_bad, brute_runs)};
}

// 7. Two-cell fixture admits several conditional second-marginal splits.
Outcome example_2ndmarg() {
  const Example2ndMargReport r = run_example_2ndmarg(8);
  int finite = 0;
  std::string names;
  for (const auto& s : r.splits)
    if (s.feasible && std::isfinite(s.cost)) {
      ++finite;
      names += (names.empty() ? "" : ",") + s.name;
    }
  return {r.distinct_feasible >= 2 && finite >= 2,
          fmt("%d distinct feasible splits (%s)", r.distinct_feasible, names.c_str())};
}

// 8. Push-forward ratio bound: equality for one vertex, +2% for disjoint fields.
Outcome cone_approximation_bound() {
  double eq_err = 0.0;
  for (int dim : {2, 3}) {
    FieldSpec spec;
    spec.dim = dim;
    spec.n_per_axis = dim == 2 ? 64 : 12;
    const Slice1D f = single_vertex_field(spec);
    for (const auto& [s, t] : {std::pair{0.05, 0.5}, std::pair{0.25, 1.0}, std::pair{0.05, 1.0}}) {
      const PushforwardReport r = pushforward_ratio(f, s, t);
      for (double x : r.ratio) eq_err = std::max(eq_err, std::abs(x - r.bound));
    }
  }
  double worst = -1.0;
  for (unsigned seed = 0; seed < 50; ++seed) {
    FieldSpec spec;
    spec.dim = seed % 5 == 4 ? 3 : 2;
    spec.n_per_axis = spec.dim == 2 ? 96 : 16;
    const Slice1D f = disjoint_cone_field(spec, 2 + static_cast<int>(seed % 4), seed);
    for (const auto& [s, t] : {std::pair{0.05, 0.5}, std::pair{0.3, 0.9}}) {
      const PushforwardReport r = pushforward_ratio(f, s, t);
      worst = std::max(worst, r.max_violation);
    }
  }
  return {eq_err <= 1e-10 && worst <= 0.02,
          fmt("single vertex |ratio - bound| %.3g; disjoint fields max excess %.4f%% over 50 seeds", eq_err,
              100 * std::max(worst, 0.0))};
}

// 9. Initial+final mass fraction decays under grid refinement.
Outcome initial_final_decay() {
  std::vector<double> frac;
  for (int n : {8, 16, 32}) {
    const Instance inst = shift_instance(n);
    const TransportPlan plan = solve_primal(inst.mu, inst.nu, norm_cost(inst.norm));
    frac.push_back(initial_final_fraction(decompose_plan(inst, plan).partition, inst.mu));
  }
  const bool ok = frac[1] <= 0.7 * frac[0] && frac[2] <= 0.7 * frac[1];
  return {ok, fmt("fractions h=1/8: %.4f, 1/16: %.4f, 1/32: %.4f; ratios %.3f, %.3f (need <= 0.7)", frac[0], frac[1],
                  frac[2], frac[1] / frac[0], frac[2] / frac[1])};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 strong duality", strong_duality},
      {"2 cyclical monotonicity", cyclical_monotonicity},
      {"3 partition soundness", partition_soundness},
      {"4 strictly convex analog", strictly_convex_analog},
      {"5 cycle class oracle", cycle_class_oracle},
      {"6 monge map", monge_map},
      {"7 second-marginal splits", example_2ndmarg},
      {"8 cone approximation bound", cone_approximation_bound},
      {"9 initial/final decay", initial_final_decay},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
