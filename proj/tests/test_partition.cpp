#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "normot/error.hpp"
#include "normot/instances.hpp"
#include "normot/kantorovich.hpp"
#include "normot/partition.hpp"
#include "normot/sheaves.hpp"

using namespace normot;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

struct Solved {
  Instance inst;
  TransportPlan plan;
  Potential pot;
  Decomposition dec;
};

Solved solve(const Instance& inst) {
  const CostFn c = norm_cost(inst.norm);
  TransportPlan plan = solve_primal(inst.mu, inst.nu, c);
  Potential pot = central_potential(plan, inst.mu, inst.nu, c);
  Decomposition dec = decompose(plan, pot, inst.mu, inst.nu, inst.norm);
  return {inst, std::move(plan), std::move(pot), std::move(dec)};
}

void check_partition_invariants(const Solved& s) {
  const DirectedPartition& part = s.dec.partition;
  std::vector<int> seen(s.inst.mu.size(), 0);
  for (const auto& cell : part.cells) {
    for (int m : cell.members) {
      ++seen[m];
      EXPECT_EQ(part.cell_of[m], cell.id);
    }
    if (cell.cone) EXPECT_EQ(cell.cone->dim, cell.k);
    EXPECT_LE(int(cell.flags.regular) + int(cell.flags.initial) + int(cell.flags.final_) + int(cell.flags.fixed) +
                  int(cell.flags.residual),
              1);
    // Affine hull within the cell's k-plane.
    for (int m : cell.members) {
      const Vec d = s.inst.mu.points[m] - cell.base_point;
      const Vec off = d - cell.basis * (cell.basis.transpose() * d);
      EXPECT_LE(off.norm(), 1e-8);
    }
  }
  for (int c : seen) EXPECT_EQ(c, 1);
  for (const auto& e : s.plan.entries) {
    const PartitionCell& cell = part.cells[part.cell_of[e.i]];
    if (cell.flags.residual) continue;
    EXPECT_TRUE(pair_in_cell_cone(cell, s.inst.mu.points[e.i], s.inst.nu.points[e.j]));
  }
}

NormPtr l1() { return make_norm(PolyhedralNorm::l1(2)); }

PartitionCell ray_cell(int id, const NormPtr& norm, const Vec& dir, const std::vector<int>& members,
                       const DiscreteMeasure& mu) {
  PartitionCell c;
  c.id = id;
  c.k = 1;
  c.cone = minimal_extremal_cone(norm, {dir});
  c.cone_active_set = c.cone->active_set;
  c.members = members;
  c.basis = dir.normalized();
  c.base_point = mu.points[members.front()];
  c.flags.regular = true;
  return c;
}

}  // namespace

TEST(Superdifferential, IdentityInstanceIsFixed) {
  const Solved s = solve(identity_instance(4));
  for (const auto& ds : s.dec.directions) {
    EXPECT_TRUE(ds.forward_dirs.empty());
    EXPECT_TRUE(ds.backward_dirs.empty());
  }
  for (const auto& cell : s.dec.partition.cells) {
    EXPECT_TRUE(cell.flags.fixed);
    EXPECT_EQ(cell.k, 0);
    EXPECT_EQ(cell.members.size(), 1u);
  }
  check_partition_invariants(s);
}

TEST(Superdifferential, SinglePair) {
  Instance inst{"pair", DiscreteMeasure::uniform({v2(0, 0)}), DiscreteMeasure::uniform({v2(1, 0)}), l1()};
  const Solved s = solve(inst);
  ASSERT_EQ(s.dec.directions.size(), 1u);
  const DirectionSets& ds = s.dec.directions[0];
  ASSERT_EQ(ds.forward_dirs.size(), 1u);
  EXPECT_NEAR((ds.forward_dirs[0] - v2(1, 0)).norm(), 0.0, 1e-12);
  EXPECT_TRUE(ds.backward_dirs.empty());
  EXPECT_EQ(s.dec.classes[0].cls, PointClass::Initial);
}

TEST(Superdifferential, StalePotentialRejected) {
  const Instance inst = chain3_instance();
  const CostFn c = norm_cost(inst.norm);
  const TransportPlan plan = solve_primal(inst.mu, inst.nu, c);
  Potential pot = extract_potentials(plan, inst.mu, inst.nu, c);
  for (int j = 0; j < 3; ++j) pot.psi[pot.target_point[j]] -= 0.5;
  try {
    superdifferential_graph(plan, pot, inst.mu, inst.nu);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::StalePotential);
  }
}

TEST(Superdifferential, ShiftInstanceSpansQuadrant) {
  const Solved s = solve(shift_instance(4));
  const double inv5 = 1.0 / std::sqrt(5.0);
  for (int i = 0; i < s.inst.mu.size(); ++i) {
    const Vec& x = s.inst.mu.points[i];
    const bool interior = x(0) > 0.3 && x(0) < 0.7 && x(1) > 0.3 && x(1) < 0.7;
    if (!interior) continue;
    const auto& fd = s.dec.directions[i].forward_dirs;
    bool has_shift = false;
    for (const auto& d : fd) has_shift |= (d - v2(2 * inv5, inv5)).norm() < 1e-12;
    EXPECT_TRUE(has_shift) << i;
    const ExtremalCone f = minimal_extremal_cone(s.inst.norm, fd);
    EXPECT_EQ(f.dim, 2);
    EXPECT_TRUE(f.contains(v2(1, 0)));
    EXPECT_TRUE(f.contains(v2(0, 1)));
  }
}

TEST(Superdifferential, ClosureIsAFixedPoint) {
  const Solved s = solve(shift_instance(5));
  const auto again = superdifferential_graph(s.plan, s.pot, s.inst.mu, s.inst.nu);
  ASSERT_EQ(again.size(), s.dec.directions.size());
  for (size_t i = 0; i < again.size(); ++i) {
    EXPECT_EQ(again[i].forward_points, s.dec.directions[i].forward_points);
    EXPECT_EQ(again[i].backward_points, s.dec.directions[i].backward_points);
    // Closure: forward(z) ⊆ forward(x) for z in forward(x).
    const std::set<int> fx(again[i].forward_points.begin(), again[i].forward_points.end());
    for (int z : again[i].forward_points) {
      const auto it = std::find(s.pot.source_point.begin(), s.pot.source_point.end(), z);
      if (it == s.pot.source_point.end()) continue;  // pure targets carry no direction sets
      const auto zi = static_cast<size_t>(it - s.pot.source_point.begin());
      for (int w : again[zi].forward_points) EXPECT_TRUE(fx.count(w)) << i << " " << z << " " << w;
    }
  }
}

TEST(ClassifyPoint, Examples) {
  const NormPtr n = l1();
  DirectionSets empty;
  EXPECT_EQ(classify_point(empty, n).cls, PointClass::Fixed);

  DirectionSets ray;
  ray.forward_dirs = {v2(1, 0)};
  ray.backward_dirs = {v2(1, 0)};
  const Classification r = classify_point(ray, n);
  EXPECT_EQ(r.cls, PointClass::Regular);
  EXPECT_EQ(r.k, 1);
  ASSERT_TRUE(r.cone);
  EXPECT_TRUE(r.cone->contains(v2(3, 0)));
  EXPECT_FALSE(r.cone->contains(v2(3, 0.1)));

  DirectionSets init;
  init.forward_dirs = {v2(1, 0), v2(0, 1), v2(1, 1).normalized()};
  init.backward_dirs = {v2(1, 0)};
  const Classification i = classify_point(init, n);
  EXPECT_EQ(i.cls, PointClass::Initial);
  EXPECT_EQ(i.k, 2);

  DirectionSets fin;
  fin.forward_dirs = {v2(0, 1)};
  fin.backward_dirs = {v2(1, 0), v2(0, 1)};
  EXPECT_EQ(classify_point(fin, n).cls, PointClass::Final);

  DirectionSets bad;
  bad.forward_dirs = {v2(1, 0), v2(-1, 0.2)};
  bad.backward_dirs = {v2(1, 0)};
  EXPECT_EQ(classify_point(bad, n).cls, PointClass::Residual);
}

TEST(BuildPartition, IdentityAllFixedSingletons) {
  const Solved s = solve(identity_instance(3));
  EXPECT_EQ(s.dec.partition.cells.size(), 9u);
}

// With psi(x) = x1 + x2, every interior source sees the whole quadrant both
// ways and the interior lies in one 2-dimensional cell.
TEST(BuildPartition, ShiftInstanceQuadrantCells) {
  for (int n : {4, 6, 8}) {
    const Solved s = solve(shift_instance(n));
    check_partition_invariants(s);
    const double h = 1.0 / n;
    for (int i = 0; i < s.inst.mu.size(); ++i) {
      const Vec& x = s.inst.mu.points[i];
      if (x(0) < h || x(0) > 1 - h || x(1) < h || x(1) > 1 - h) continue;
      const PartitionCell& cell = s.dec.partition.cells[s.dec.partition.cell_of[i]];
      EXPECT_TRUE(cell.flags.regular) << n << " " << i;
      EXPECT_EQ(cell.k, 2);
      ASSERT_TRUE(cell.cone);
      EXPECT_TRUE(cell.cone->contains(v2(1, 0)));
      EXPECT_TRUE(cell.cone->contains(v2(0, 1)));
      EXPECT_FALSE(cell.cone->contains(v2(-0.01, 1)));
    }
  }
}

TEST(BuildPartition, Chain3) {
  const Solved s = solve(chain3_instance());
  check_partition_invariants(s);
  const DirectedPartition& p = s.dec.partition;
  EXPECT_EQ(p.cell_of[1], p.cell_of[2]);
  const PartitionCell& cell = p.cells[p.cell_of[1]];
  EXPECT_EQ(cell.k, 1);
  EXPECT_TRUE(cell.flags.regular);
  EXPECT_TRUE(cell.cone->contains(Vec::Ones(1)));
  EXPECT_FALSE(cell.cone->contains(-Vec::Ones(1)));
  EXPECT_TRUE(p.cells[p.cell_of[0]].flags.initial);
}

TEST(BuildPartition, RandomInstancesCoverAndRespectCones) {
  for (int seed = 0; seed < 25; ++seed) {
    RandomInstanceSpec spec;
    spec.n = 6 + seed % 15;
    spec.m = 5 + (seed * 3) % 15;
    spec.dim = 1 + seed % 3;
    const Solved s = solve(random_instance(spec, 300 + seed));
    check_partition_invariants(s);
  }
}

TEST(Completeness, ShiftInstanceHasNoViolations) {
  const Solved s = solve(shift_instance(6));
  EXPECT_EQ(completeness_violations(s.dec.partition, s.inst.mu), 0);
}

TEST(Sheaves, SingleCell) {
  const Solved s = solve(shift_instance(4));
  DirectedPartition part;
  part.dim = 2;
  for (const auto& c : s.dec.partition.cells)
    if (c.flags.regular) {
      part.cells.push_back(c);
      part.cells.back().id = 0;
    }
  ASSERT_EQ(part.cells.size(), 1u);
  const auto sheaves = decompose_sheaves(part, s.inst.mu);
  ASSERT_EQ(sheaves.size(), 1u);
  EXPECT_EQ(sheaves[0].cells, std::vector<int>{0});
  EXPECT_EQ(sheaves[0].k, 2);
}

TEST(Sheaves, OrthogonalRaysSplit) {
  const NormPtr n = l1();
  const auto mu = DiscreteMeasure::uniform({v2(0, 0), v2(1, 0), v2(0, 1), v2(0, 2)});
  DirectedPartition part;
  part.dim = 2;
  part.cells = {ray_cell(0, n, v2(1, 0), {0, 1}, mu), ray_cell(1, n, v2(0, 1), {2, 3}, mu)};
  part.cell_of = {0, 0, 1, 1};
  EXPECT_EQ(decompose_sheaves(part, mu).size(), 2u);
}

// Rays of a 63-gon sit 2 pi / 63 apart, close to the angle of (1, 0.1).
TEST(Sheaves, NearbyRaysShareASheaf) {
  const double step = 2 * std::acos(-1.0) / 63;
  const NormPtr n = make_norm(PolyhedralNorm::regular_polygon(63, -step / 2));
  const Vec a = v2(1, 0), b = v2(std::cos(step), std::sin(step));
  EXPECT_NEAR(std::atan2(b(1), b(0)), std::atan(0.1), 1e-3);
  const auto mu = DiscreteMeasure::uniform({v2(0, 0), v2(1, 0), v2(0, 1), v2(0, 1) + b});
  DirectedPartition part;
  part.dim = 2;
  part.cells = {ray_cell(0, n, a, {0, 1}, mu), ray_cell(1, n, b, {2, 3}, mu)};
  part.cell_of = {0, 0, 1, 1};
  const auto sheaves = decompose_sheaves(part, mu);
  ASSERT_EQ(sheaves.size(), 1u);
  EXPECT_EQ(sheaves[0].cells.size(), 2u);
  EXPECT_LE(sheaves[0].r, 0.1);
  // Sandwich on generators: base cone inside the projected cone inside C(2r).
  for (int id : sheaves[0].cells) {
    const Vec g = sheaves[0].reference_plane.transpose() * part.cells[id].cone->generators[0];
    EXPECT_TRUE(sheaves[0].widened_cone->contains(g));
    EXPECT_GE(g.norm(), std::sqrt(0.5));
  }
}

TEST(Fibration, AxisRay) {
  const NormPtr n = l1();
  const auto mu = DiscreteMeasure::uniform({v2(0.5, 0.25), v2(1.5, 0.25), v2(2.0, 0.25)});
  DirectedPartition part;
  part.dim = 2;
  part.cells = {ray_cell(0, n, v2(1, 0), {0, 1, 2}, mu)};
  part.cell_of = {0, 0, 0};
  const auto sheaves = decompose_sheaves(part, mu);
  ASSERT_EQ(sheaves.size(), 1u);
  const Fibration f = to_fibration(sheaves[0], part, mu);
  ASSERT_EQ(f.cells.size(), 1u);
  EXPECT_NEAR(std::abs(f.cells[0].label(0)), 0.25, 1e-12);
  for (int t = 0; t < 3; ++t) {
    EXPECT_NEAR(std::abs(f.cells[0].coords(0, t)), mu.points[t](0), 1e-12);
    EXPECT_NEAR((fibration_inverse(f.cells[0], f.cells[0].coords.col(t)) - mu.points[t]).norm(), 0.0, 1e-12);
  }
}

// Dual vertices (±1,0), (0,±2): the edge from (1,0) to (0,2) has normal (2,1).
TEST(Fibration, TiltedRayStretch) {
  const NormPtr n = make_norm(PolyhedralNorm({v2(1, 0), v2(0, 2), v2(-1, 0), v2(0, -2)}));
  const Vec dir = v2(2, 1).normalized();
  const auto mu = DiscreteMeasure::uniform({v2(0.1, 0.3), v2(0.1, 0.3) + dir, v2(0.1, 0.3) + 2.5 * dir});
  DirectedPartition part;
  part.dim = 2;
  part.cells = {ray_cell(0, n, dir, {0, 1, 2}, mu)};
  part.cell_of = {0, 0, 0};
  SheafGroup sh;
  sh.k = 1;
  sh.cells = {0};
  sh.reference_plane = v2(1, 0);
  const Fibration f = to_fibration(sh, part, mu);
  const FibrationCell& fc = f.cells[0];
  EXPECT_NEAR(std::abs(fc.coords(0, 1) - fc.coords(0, 0)), 2 / std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(std::abs(fc.coords(0, 2) - fc.coords(0, 0)), 2.5 * 2 / std::sqrt(5.0), 1e-12);
  for (int t = 0; t < 3; ++t)
    EXPECT_NEAR((fibration_inverse(fc, fc.coords.col(t)) - mu.points[t]).norm(), 0.0, 1e-12);
}

TEST(Fibration, RoundTripOnShiftInstance) {
  const Solved s = solve(shift_instance(6));
  for (const auto& sh : decompose_sheaves(s.dec.partition, s.inst.mu)) {
    if (sh.trivial) continue;
    const Fibration f = to_fibration(sh, s.dec.partition, s.inst.mu);
    for (const auto& fc : f.cells) {
      const auto& members = s.dec.partition.cells[fc.cell].members;
      for (size_t t = 0; t < members.size(); ++t)
        EXPECT_NEAR((fibration_inverse(fc, fc.coords.col(t)) - s.inst.mu.points[members[t]]).norm(), 0.0, 1e-12);
    }
  }
}
