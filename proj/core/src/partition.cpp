#include "normot/partition.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>

#include "normot/error.hpp"

namespace normot {

namespace {

using Bits = std::vector<std::uint64_t>;

inline bool test_bit(const Bits& b, int i) { return (b[i >> 6] >> (i & 63)) & 1ULL; }
inline void set_bit(Bits& b, int i) { b[i >> 6] |= 1ULL << (i & 63); }
inline void clear_bit(Bits& b, int i) { b[i >> 6] &= ~(1ULL << (i & 63)); }

template <class F>
void for_each_bit(const Bits& b, F&& f) {
  for (size_t w = 0; w < b.size(); ++w) {
    std::uint64_t x = b[w];
    while (x) {
      const int t = std::countr_zero(x);
      f(static_cast<int>(w * 64 + t));
      x &= x - 1;
    }
  }
}

struct UnionFind {
  std::vector<int> p;
  explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) p[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

const char* to_string(PointClass c) {
  switch (c) {
    case PointClass::Fixed: return "fixed";
    case PointClass::Regular: return "regular";
    case PointClass::Initial: return "initial";
    case PointClass::Final: return "final";
    case PointClass::Residual: return "residual";
  }
  return "?";
}

std::vector<std::string> flag_names(const CellFlags& f) {
  std::vector<std::string> out;
  if (f.regular) out.emplace_back("regular");
  if (f.initial) out.emplace_back("initial");
  if (f.final_) out.emplace_back("final");
  if (f.fixed) out.emplace_back("fixed");
  if (f.residual) out.emplace_back("residual");
  return out;
}

std::vector<DirectionSets> superdifferential_graph(const TransportPlan& plan, const Potential& p,
                                                   const DiscreteMeasure& mu, const DiscreteMeasure& nu, double tol,
                                                   double gap_tol) {
  const double gap = duality_gap(plan, p, mu, nu);
  if (std::abs(gap) > gap_tol * std::max(1.0, std::abs(plan.cost_value)))
    throw Error(ErrorKind::StalePotential, "duality gap " + std::to_string(gap) + " exceeds tolerance");

  const int nz = static_cast<int>(p.points.size());
  double scale = 1.0;
  for (double v : p.psi) scale = std::max(scale, std::abs(v));
  const double t = tol * scale;
  const size_t words = (nz + 63) / 64;
  std::vector<Bits> fwd(nz, Bits(words, 0));
  for (int x = 0; x < nz; ++x)
    for (int z = 0; z < nz; ++z) {
      if (z == x) continue;
      const double c = p.cost(p.points[x], p.points[z]);
      if (std::isfinite(c) && p.psi[z] - p.psi[x] >= c - t) set_bit(fwd[x], z);
    }

  // Transitive closure; decreasing psi order settles most rows in one sweep.
  std::vector<int> order(nz);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return p.psi[a] > p.psi[b]; });
  bool changed = true;
  while (changed) {
    changed = false;
    for (int x : order) {
      Bits acc = fwd[x];
      for_each_bit(fwd[x], [&](int z) {
        for (size_t w = 0; w < words; ++w) acc[w] |= fwd[z][w];
      });
      clear_bit(acc, x);
      if (acc != fwd[x]) {
        fwd[x].swap(acc);
        changed = true;
      }
    }
  }

  std::vector<DirectionSets> out(mu.size());
  for (int i = 0; i < mu.size(); ++i) {
    const int x = p.source_point[i];
    DirectionSets& ds = out[i];
    ds.point = i;
    for_each_bit(fwd[x], [&](int z) {
      ds.forward_points.push_back(z);
      ds.forward_dirs.push_back((p.points[z] - p.points[x]).normalized());
    });
    for (int z = 0; z < nz; ++z)
      if (z != x && test_bit(fwd[z], x)) {
        ds.backward_points.push_back(z);
        ds.backward_dirs.push_back((p.points[x] - p.points[z]).normalized());
      }
  }
  return out;
}

Classification classify_point(const DirectionSets& ds, const NormPtr& norm, double tol) {
  Classification c;
  const bool has_f = !ds.forward_dirs.empty();
  const bool has_b = !ds.backward_dirs.empty();
  if (!has_f && !has_b) return c;

  std::optional<ExtremalCone> fplus, fminus;
  try {
    if (has_f) fplus = minimal_extremal_cone(norm, ds.forward_dirs, tol);
    if (has_b) fminus = minimal_extremal_cone(norm, ds.backward_dirs, tol);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoCommonFace && e.kind() != ErrorKind::DegenerateDirection) throw;
    c.cls = PointClass::Residual;
    c.note = e.what();
    if (fplus) {
      c.forward_face = fplus->active_set;
      c.k = fplus->dim;
      c.cone = fplus;
    }
    return c;
  }
  if (fplus) c.forward_face = fplus->active_set;
  if (fminus) c.backward_face = fminus->active_set;

  auto take = [&](PointClass cls, const ExtremalCone& cone) {
    c.cls = cls;
    c.cone = cone;
    c.k = cone.dim;
    return c;
  };
  if (!has_b) return take(PointClass::Initial, *fplus);
  if (!has_f) return take(PointClass::Final, *fminus);
  const IndexSet& ap = fplus->active_set;
  const IndexSet& am = fminus->active_set;
  if (ap == am) return take(PointClass::Regular, *fplus);
  // Larger active set = smaller face.
  if (is_subset(ap, am)) return take(PointClass::Initial, *fplus);
  if (is_subset(am, ap)) return take(PointClass::Final, *fminus);
  c.note = "forward and backward faces are not comparable";
  return take(PointClass::Residual, *fplus);
}

bool pair_in_cell_cone(const PartitionCell& cell, const Vec& x, const Vec& y, double tol) {
  const Vec d = y - x;
  const double scale = std::max({1.0, x.norm(), y.norm()});
  if (d.norm() <= 1e-14 * scale) return true;
  if (!cell.cone) return false;
  return cell.cone->contains(d, tol);
}

DirectedPartition build_partition(const std::vector<Classification>& classes, const std::vector<DirectionSets>& ds,
                                  const DiscreteMeasure& mu, const DiscreteMeasure& nu, const TransportPlan* plan,
                                  const PartitionOptions& opt) {
  const int n = mu.size();
  if (static_cast<int>(classes.size()) != n || static_cast<int>(ds.size()) != n)
    throw Error(ErrorKind::InvalidInput, "one classification per source point required");

  Vec lo = mu.points.front(), hi = mu.points.front();
  for (const auto& x : mu.points) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  const double extent = std::max((hi - lo).maxCoeff(), 1e-300);

  std::map<IndexSet, std::vector<int>> regular;
  std::vector<std::vector<int>> groups;
  for (int i = 0; i < n; ++i) {
    if (classes[i].cls == PointClass::Regular) regular[classes[i].cone->active_set].push_back(i);
    else groups.push_back({i});
  }
  for (auto& [key, idx] : regular) {
    const Mat& s = classes[idx.front()].cone->span;
    UnionFind uf(static_cast<int>(idx.size()));
    for (size_t a = 0; a < idx.size(); ++a)
      for (size_t b = a + 1; b < idx.size(); ++b) {
        if (uf.find(static_cast<int>(a)) == uf.find(static_cast<int>(b))) continue;
        const Vec diff = (mu.points[idx[b]] - mu.points[idx[a]]) / extent;
        const Vec off = diff - s * (s.transpose() * diff);
        if (off.norm() <= opt.affine_tol) uf.unite(static_cast<int>(a), static_cast<int>(b));
      }
    std::map<int, std::vector<int>> by_root;
    for (size_t a = 0; a < idx.size(); ++a) by_root[uf.find(static_cast<int>(a))].push_back(idx[a]);
    for (auto& [r, members] : by_root) groups.push_back(std::move(members));
  }
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });

  DirectedPartition part;
  part.dim = mu.dim;
  part.cell_of.assign(n, -1);
  for (auto& members : groups) {
    PartitionCell cell;
    cell.id = static_cast<int>(part.cells.size());
    const Classification& c = classes[members.front()];
    cell.members = members;
    cell.k = c.k;
    cell.cone = c.cone;
    if (c.cone) {
      cell.cone_active_set = c.cone->active_set;
      cell.basis = c.cone->span;
    } else {
      cell.basis = Mat(mu.dim, 0);
    }
    cell.base_point = mu.points[members.front()];
    switch (c.cls) {
      case PointClass::Fixed: cell.flags.fixed = true; break;
      case PointClass::Regular: cell.flags.regular = true; break;
      case PointClass::Initial: cell.flags.initial = true; break;
      case PointClass::Final: cell.flags.final_ = true; break;
      case PointClass::Residual: cell.flags.residual = true; break;
    }
    for (int i : members) part.cell_of[i] = cell.id;
    part.cells.push_back(std::move(cell));
  }

  if (plan && opt.check_consistency) {
    for (const auto& e : plan->entries) {
      const PartitionCell& cell = part.cells[part.cell_of[e.i]];
      if (pair_in_cell_cone(cell, mu.points[e.i], nu.points[e.j], opt.cone_tol)) continue;
      if (cell.flags.residual) {
        ++part.residual_pairs;
        continue;
      }
      throw Error(ErrorKind::InternalConsistency,
                  "optimal pair (" + std::to_string(e.i) + "," + std::to_string(e.j) + ") leaves the cone of cell " +
                      std::to_string(cell.id));
    }
  }
  return part;
}

Decomposition decompose(const TransportPlan& plan, const Potential& p, const DiscreteMeasure& mu,
                        const DiscreteMeasure& nu, const NormPtr& norm, double tol, const PartitionOptions& opt) {
  Decomposition d;
  d.directions = superdifferential_graph(plan, p, mu, nu, tol);
  d.classes.reserve(d.directions.size());
  for (const auto& ds : d.directions) d.classes.push_back(classify_point(ds, norm, opt.cone_tol));
  d.partition = build_partition(d.classes, d.directions, mu, nu, &plan, opt);
  return d;
}

long completeness_violations(const DirectedPartition& part, const DiscreteMeasure& mu, int max_members) {
  long bad = 0;
  for (const auto& cell : part.cells) {
    if (!cell.cone || cell.members.size() < 2) continue;
    std::vector<int> sample = cell.members;
    if (static_cast<int>(sample.size()) > max_members) {
      std::vector<int> s;
      const double step = static_cast<double>(sample.size()) / max_members;
      for (int t = 0; t < max_members; ++t) s.push_back(sample[static_cast<size_t>(t * step)]);
      sample = s;
    }
    for (int w : sample)
      for (int wp : sample) {
        if (w == wp || !cell.cone->contains(mu.points[wp] - mu.points[w])) continue;
        for (int z = 0; z < mu.size(); ++z) {
          if (part.cell_of[z] == cell.id) continue;
          if (cell.cone->contains(mu.points[z] - mu.points[w]) && cell.cone->contains(mu.points[wp] - mu.points[z]))
            ++bad;
        }
      }
  }
  return bad;
}

}  // namespace normot
