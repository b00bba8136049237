#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <numeric>

#include "normot/error.hpp"
#include "normot/instances.hpp"
#include "normot/kantorovich.hpp"
#include "normot/monge.hpp"
#include "normot/partition.hpp"

using namespace normot;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

DiscreteMeasure line(std::vector<double> xs, std::vector<double> w = {}) {
  std::vector<Vec> p;
  for (double x : xs) p.push_back(v1(x));
  if (w.empty()) return DiscreteMeasure::uniform(p);
  return DiscreteMeasure::make(p, w);
}

struct Assembled {
  TransportPlan primary;
  SecondaryPlan secondary;
  Decomposition dec;
  MapResult map;
};

Assembled run(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const NormPtr& norm) {
  const CostFn c = norm_cost(norm);
  Assembled a;
  a.primary = solve_primal(mu, nu, c);
  a.dec = decompose(a.primary, central_potential(a.primary, mu, nu, c), mu, nu, norm);
  a.secondary = secondary_select(mu, nu, c, a.primary);
  a.map = assemble_map(a.dec.partition, a.secondary.plan, mu, nu);
  return a;
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

double map_cost(const std::vector<int>& t, const DiscreteMeasure& mu, const DiscreteMeasure& nu, const CostFn& c) {
  double s = 0.0;
  for (int i = 0; i < mu.size(); ++i) s += mu.weights[i] * c(mu.points[i], nu.points[t[i]]);
  return s;
}

}  // namespace

TEST(SecondarySelect, LinfPicksVerticalPairing) {
  const NormPtr n = make_norm(PolyhedralNorm::linf(2));
  const auto mu = DiscreteMeasure::uniform({v2(0, 0), v2(1, 0)});
  const auto nu = DiscreteMeasure::uniform({v2(0, 1), v2(1, 1)});
  const CostFn c = norm_cost(n);
  // Both vertex plans are primary optimal.
  TransportPlan cross;
  cross.entries = {{0, 1, 0.5}, {1, 0, 0.5}};
  EXPECT_NEAR(plan_cost(cross, mu, nu, c), 1.0, 1e-15);
  EXPECT_NEAR(plan_cost(cross, mu, nu, sq_euclid_cost()), 2.0, 1e-15);

  const SecondaryPlan s = secondary_select(mu, nu, c);
  EXPECT_NEAR(s.primary_cost, 1.0, 1e-12);
  EXPECT_NEAR(s.secondary_cost_value, 1.0, 1e-12);
  for (const auto& e : s.plan.entries) EXPECT_EQ(e.i, e.j);
}

TEST(SecondarySelect, IdentityAndChain) {
  const Instance id = identity_instance(3);
  const SecondaryPlan s = secondary_select(id.mu, id.nu, norm_cost(id.norm));
  EXPECT_EQ(s.secondary_cost_value, 0.0);

  const Instance ch = chain3_instance();
  const SecondaryPlan t = secondary_select(ch.mu, ch.nu, norm_cost(ch.norm));
  EXPECT_NEAR(t.primary_cost, 3.0, 1e-12);
  for (const auto& e : t.plan.entries) EXPECT_EQ(e.i, e.j);
  EXPECT_NEAR(t.secondary_cost_value, 9.0, 1e-12);
}

TEST(SecondarySelect, PreservesPrimaryOptimum) {
  for (int seed = 0; seed < 40; ++seed) {
    RandomInstanceSpec spec;
    spec.n = 4 + seed % 20;
    spec.m = 3 + (seed * 3) % 20;
    spec.dim = 1 + seed % 3;
    const Instance inst = random_instance(spec, 2000 + seed);
    const CostFn c = norm_cost(inst.norm);
    const SecondaryPlan s = secondary_select(inst.mu, inst.nu, c);
    EXPECT_NEAR(plan_cost(s.plan, inst.mu, inst.nu, c), s.primary_optimum, 1e-9);
    EXPECT_LE(marginal_error(s.plan, inst.mu, inst.nu), 1e-10);
    // No primary-optimal plan found by direct solve has a smaller secondary cost.
    const TransportPlan p = solve_primal(inst.mu, inst.nu, c);
    EXPECT_LE(s.secondary_cost_value, plan_cost(p, inst.mu, inst.nu, sq_euclid_cost()) + 1e-12);
  }
}

TEST(CellPotentials, SinglePair) {
  const NormPtr n = make_norm(PolyhedralNorm::l1(2));
  const auto mu = DiscreteMeasure::uniform({v2(0, 0)});
  const auto nu = DiscreteMeasure::uniform({v2(1, 0)});
  PartitionCell cell;
  cell.k = 1;
  cell.cone = minimal_extremal_cone(n, {v2(1, 0)});
  cell.members = {0};
  TransportPlan plan;
  plan.entries = {{0, 0, 1.0}};
  const CellPotentialResult r = cell_potentials(cell, plan, mu, nu);
  ASSERT_TRUE(r.ok) << r.report;
  EXPECT_EQ(r.phi[0], 0.0);
  EXPECT_NEAR(r.psi[0], 1.0, 1e-15);
}

// Pairs (0,0)->(0,1) and (1,0)->(1,1) inside {x2 >= |x1|}; each source
// reaches the other's target, so the cell is cyclically connected.
TEST(CellPotentials, LinfTwoByTwo) {
  const NormPtr n = make_norm(PolyhedralNorm::linf(2));
  const auto mu = DiscreteMeasure::uniform({v2(0, 0), v2(1, 0)});
  const auto nu = DiscreteMeasure::uniform({v2(0, 1), v2(1, 1)});
  PartitionCell cell;
  cell.k = 2;
  cell.cone = minimal_extremal_cone(n, {v2(0, 1), v2(1, 1)});
  cell.members = {0, 1};
  TransportPlan plan;
  plan.entries = {{0, 0, 0.5}, {1, 1, 0.5}};
  const CellPotentialResult r = cell_potentials(cell, plan, mu, nu);
  ASSERT_TRUE(r.ok) << r.report;
  EXPECT_LE(r.max_support_residual, 1e-9);
  EXPECT_LE(r.max_constraint_excess, 1e-9);
  // By hand: phi_i + psi_i = 1 on the pairs and the cross pairs cost 2, so
  // any solution has |phi_1 - phi_0| <= 1.
  ASSERT_EQ(r.phi.size(), 2u);
  EXPECT_LE(std::abs(r.phi[1] - r.phi[0]), 1.0 + 1e-12);
}

TEST(CellPotentials, DisconnectedPseudoCellFails) {
  const NormPtr n = make_norm(PolyhedralNorm::l1(2));
  const auto mu = DiscreteMeasure::uniform({v2(0, 0), v2(5, 5)});
  const auto nu = DiscreteMeasure::uniform({v2(1, 0), v2(6, 5)});
  PartitionCell cell;
  cell.k = 1;
  cell.cone = minimal_extremal_cone(n, {v2(1, 0)});
  cell.members = {0, 1};
  TransportPlan plan;
  plan.entries = {{0, 0, 0.5}, {1, 1, 0.5}};
  const CellPotentialResult r = cell_potentials(cell, plan, mu, nu);
  EXPECT_FALSE(r.ok);
  EXPECT_FALSE(r.report.empty());
}

TEST(MonotoneMap1D, Examples) {
  const Coupling1D a = monotone_map_1d({0, 1, 2}, {1. / 3, 1. / 3, 1. / 3}, {3, 4, 5}, {1. / 3, 1. / 3, 1. / 3});
  EXPECT_TRUE(a.is_map);
  ASSERT_EQ(a.entries.size(), 3u);
  for (const auto& e : a.entries) EXPECT_EQ(e.i, e.j);

  const Coupling1D b = monotone_map_1d({0}, {1}, {1, 2}, {0.5, 0.5});
  EXPECT_FALSE(b.is_map);
  ASSERT_EQ(b.entries.size(), 2u);
  EXPECT_EQ(b.entries[0].mass, 0.5);
  EXPECT_EQ(b.entries[1].mass, 0.5);

  const Coupling1D c = monotone_map_1d({0, 1}, {0.25, 0.75}, {2, 3}, {0.75, 0.25});
  ASSERT_EQ(c.entries.size(), 3u);
  EXPECT_EQ(c.entries[0].i, 0);
  EXPECT_EQ(c.entries[0].j, 0);
  EXPECT_NEAR(c.entries[0].mass, 0.25, 1e-15);
  EXPECT_EQ(c.entries[1].i, 1);
  EXPECT_EQ(c.entries[1].j, 0);
  EXPECT_NEAR(c.entries[1].mass, 0.5, 1e-15);
  EXPECT_EQ(c.entries[2].i, 1);
  EXPECT_EQ(c.entries[2].j, 1);
  EXPECT_NEAR(c.entries[2].mass, 0.25, 1e-15);

  // Unsorted input is handled by index.
  const Coupling1D d = monotone_map_1d({2, 0, 1}, {1. / 3, 1. / 3, 1. / 3}, {4, 5, 3}, {1. / 3, 1. / 3, 1. / 3});
  for (const auto& e : d.entries) {
    const double xs[] = {2, 0, 1}, ys[] = {4, 5, 3};
    EXPECT_EQ(ys[e.j] - xs[e.i], 3.0);
  }
}

TEST(MonotoneMap1D, MassMismatch) {
  try {
    monotone_map_1d({0}, {1}, {1}, {0.5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
  }
}

TEST(AssembleMap, Chain3) {
  const Instance ch = chain3_instance();
  const Assembled a = run(ch.mu, ch.nu, ch.norm);
  ASSERT_TRUE(a.map.is_map);
  EXPECT_EQ(a.map.target_of, (std::vector<int>{0, 1, 2}));
  EXPECT_NEAR(map_cost(a.map.target_of, ch.mu, ch.nu, norm_cost(ch.norm)), 3.0, 1e-12);
  EXPECT_TRUE(verify_pushforward(a.map.target_of, ch.mu, ch.nu).ok);
}

TEST(AssembleMap, RandomPermutationsMatchBruteForce) {
  int maps = 0, total = 0;
  for (int seed = 0; seed < 60; ++seed) {
    RandomInstanceSpec spec;
    spec.n = spec.m = 2 + seed % 7;
    spec.dim = 2;
    spec.uniform_weights = true;
    Instance inst = random_instance(spec, 4000 + seed);
    if (seed % 2 == 0) inst.norm = make_norm(PolyhedralNorm::l1(2));
    const CostFn c = norm_cost(inst.norm);
    const Assembled a = run(inst.mu, inst.nu, inst.norm);
    ++total;
    if (!a.map.is_map) continue;
    ++maps;
    EXPECT_TRUE(verify_pushforward(a.map.target_of, inst.mu, inst.nu).ok);
    EXPECT_NEAR(map_cost(a.map.target_of, inst.mu, inst.nu, c), brute_force_assignment(inst.mu, inst.nu, c), 1e-12)
        << seed;
  }
  EXPECT_GE(maps, total * 99 / 100);
}

TEST(AssembleMap, MonotoneInsideRayCells) {
  const Instance ch = chain3_instance();
  const Assembled a = run(ch.mu, ch.nu, ch.norm);
  for (const auto& cell : a.dec.partition.cells) {
    if (cell.k != 1) continue;
    for (int x : cell.members)
      for (int y : cell.members)
        if (ch.mu.points[x](0) <= ch.mu.points[y](0))
          EXPECT_LE(ch.nu.points[a.map.target_of[x]](0), ch.nu.points[a.map.target_of[y]](0));
  }
}

TEST(AssembleMap, SplitAtomReported) {
  const auto mu = line({0, 10}, {0.5, 0.5});
  const auto nu = line({1, 2, 11}, {0.25, 0.25, 0.5});
  const Assembled a = run(mu, nu, make_norm(PolyhedralNorm::l1(1)));
  EXPECT_FALSE(a.map.is_map);
  EXPECT_EQ(a.map.split_atoms, std::vector<int>{0});
  EXPECT_EQ(a.map.target_of[0], -1);
  EXPECT_EQ(a.map.target_of[1], 2);
  double res = 0.0;
  for (const auto& e : a.map.residual) res += e.mass;
  EXPECT_NEAR(res, 0.5, 1e-15);
}

TEST(VerifyPushforward, CorruptedMap) {
  const Instance ch = chain3_instance();
  const PushforwardVerdict v = verify_pushforward({0, 0, 2}, ch.mu, ch.nu);
  EXPECT_FALSE(v.ok);
  EXPECT_GE(v.first_mismatch, 0);
  EXPECT_FALSE(v.message.empty());
}

TEST(Surrogate, VertexCounts) {
  EXPECT_EQ(surrogate_dual_vertices(2, 1).size(), 8u);
  EXPECT_EQ(surrogate_dual_vertices(2, 3).size(), 32u);
  for (const auto& v : surrogate_dual_vertices(3, 2)) EXPECT_NEAR(v.norm(), 1.0, 1e-12);
}
