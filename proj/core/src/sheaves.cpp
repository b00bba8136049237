#include "normot/sheaves.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "normot/error.hpp"
#include "normot/linalg.hpp"

namespace normot {

namespace {

std::vector<Mat> frame_dictionary(const ExtremalCone& seed, int d) {
  const int k = seed.dim;
  std::vector<Mat> frames{seed.span};
  std::vector<int> idx(k);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == k) {
      Mat f = Mat::Zero(d, k);
      for (int t = 0; t < k; ++t) f(idx[t], t) = 1.0;
      frames.push_back(f);
      return;
    }
    for (int i = start; i < d; ++i) {
      idx[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return frames;
}

// Unit test vectors of a cone: generators, pairwise midpoints, random
// convex combinations (fixed seed).
std::vector<Vec> cone_samples(const std::vector<Vec>& gens, int extra) {
  std::vector<Vec> out = gens;
  for (size_t a = 0; a < gens.size(); ++a)
    for (size_t b = a + 1; b < gens.size(); ++b) out.push_back((gens[a] + gens[b]).normalized());
  std::mt19937_64 rng(12345);
  std::exponential_distribution<double> ex(1.0);
  for (int s = 0; s < extra && gens.size() > 2; ++s) {
    Vec z = Vec::Zero(gens.front().size());
    for (const auto& g : gens) z += ex(rng) * g;
    if (z.norm() > 0) out.push_back(z.normalized());
  }
  return out;
}

}  // namespace

bool sheaf_accepts(const ExtremalCone& cell_cone, const Mat& v, const ConeDescriptor& base, double r,
                   const SheafOptions& opt) {
  if (cell_cone.dim != v.cols()) return false;
  for (const auto& z : cone_samples(cell_cone.generators, opt.combination_samples))
    if ((v.transpose() * z).norm() < opt.min_projection - opt.tol) return false;
  std::vector<Vec> proj;
  for (const auto& g : cell_cone.generators) proj.push_back(v.transpose() * g);
  ConeDescriptor pc;
  try {
    pc = ConeDescriptor::from_generators(proj);
  } catch (const Error&) {
    return false;
  }
  if (pc.dim() != v.cols()) return false;
  try {
    const ConeDescriptor inner = base.enlarged(r);
    for (const auto& g : inner.generators())
      if (!pc.contains(g, 1e-7)) return false;
    const ConeDescriptor outer = base.enlarged(2 * r);
    for (const auto& g : proj)
      if (!outer.contains(g, 1e-7)) return false;
  } catch (const Error&) {
    return false;
  }
  return true;
}

std::vector<SheafGroup> decompose_sheaves(const DirectedPartition& part, const DiscreteMeasure& mu,
                                          const SheafOptions& opt) {
  const int d = part.dim;
  std::vector<char> assigned(part.cells.size(), 0);
  std::vector<SheafGroup> out;

  std::vector<double> radii = opt.r_grid;
  std::sort(radii.begin(), radii.end());
  // Fallback radii below the grid, for very narrow cones.
  std::vector<double> fallback;
  for (double r = radii.empty() ? 0.01 : radii.front() / 2; r > 1e-6; r /= 2) fallback.push_back(r);

  for (const auto& seed : part.cells) {
    if (assigned[seed.id] || !seed.cone || seed.k == 0) continue;
    struct Choice {
      Mat v;
      double r = 0;
      ConeDescriptor base;
      std::vector<int> cells;
    };
    std::optional<Choice> best;
    auto try_radii = [&](const std::vector<double>& rs, const std::vector<Mat>& frames) {
      for (const Mat& v : frames) {
        std::vector<Vec> proj;
        for (const auto& g : seed.cone->generators) proj.push_back(v.transpose() * g);
        ConeDescriptor seed_proj;
        try {
          seed_proj = ConeDescriptor::from_generators(proj);
        } catch (const Error&) {
          continue;
        }
        if (seed_proj.dim() != seed.k) continue;
        for (double r : rs) {
          ConeDescriptor base;
          try {
            base = ConeDescriptor::from_generators(seed_proj.enlarged(-r).generators());
            base.enlarged(2 * r);
          } catch (const Error&) {
            continue;
          }
          if (!sheaf_accepts(*seed.cone, v, base, r, opt)) continue;
          Choice c{v, r, base, {}};
          for (const auto& cell : part.cells)
            if (!assigned[cell.id] && cell.cone && cell.k == seed.k && sheaf_accepts(*cell.cone, v, base, r, opt))
              c.cells.push_back(cell.id);
          if (!best || c.cells.size() > best->cells.size()) best = std::move(c);
        }
      }
    };
    try_radii(radii, frame_dictionary(*seed.cone, d));
    if (!best) try_radii(fallback, {seed.cone->span});
    if (!best) throw Error(ErrorKind::UncoveredCell, "cell " + std::to_string(seed.id) + " matches no reference frame");

    SheafGroup g;
    g.id = static_cast<int>(out.size());
    g.k = seed.k;
    g.cells = best->cells;
    g.reference_plane = best->v;
    g.r = best->r;
    g.base_cone = best->base;
    g.widened_cone = best->base.enlarged(2 * best->r);
    bool first = true;
    for (int c : g.cells) {
      assigned[c] = 1;
      Vec lo, hi;
      for (size_t t = 0; t < part.cells[c].members.size(); ++t) {
        const Vec w = best->v.transpose() * mu.points[part.cells[c].members[t]];
        lo = t == 0 ? w : Vec(lo.cwiseMin(w));
        hi = t == 0 ? w : Vec(hi.cwiseMax(w));
      }
      if (first) {
        g.rect_lo = lo;
        g.rect_hi = hi;
        first = false;
      } else {
        g.rect_lo = g.rect_lo.cwiseMax(lo);
        g.rect_hi = g.rect_hi.cwiseMin(hi);
      }
    }
    g.rect_empty = (g.rect_hi - g.rect_lo).minCoeff() <= 0.0;
    out.push_back(std::move(g));
  }

  SheafGroup trivial;
  trivial.trivial = true;
  trivial.reference_plane = Mat(d, 0);
  for (const auto& cell : part.cells)
    if (!assigned[cell.id]) {
      trivial.cells.push_back(cell.id);
      assigned[cell.id] = 1;
    }
  if (!trivial.cells.empty()) {
    trivial.id = static_cast<int>(out.size());
    out.push_back(std::move(trivial));
  }
  return out;
}

Fibration to_fibration(const SheafGroup& sheaf, const DirectedPartition& part, const DiscreteMeasure& mu) {
  Fibration f;
  f.sheaf = sheaf.id;
  f.k = sheaf.k;
  const int d = part.dim;
  f.v = sheaf.k > 0 ? sheaf.reference_plane : Mat(d, 0);
  f.u = sheaf.k > 0 ? linalg::null_space(f.v.transpose(), d) : Mat(Mat::Identity(d, d));
  for (int j = 0; j < f.u.cols(); ++j) {
    Eigen::Index at;
    f.u.col(j).cwiseAbs().maxCoeff(&at);
    if (f.u(at, j) < 0) f.u.col(j) *= -1.0;
  }
  for (int cid : sheaf.cells) {
    const PartitionCell& cell = part.cells[cid];
    FibrationCell fc;
    fc.cell = cid;
    if (sheaf.k == 0 || sheaf.trivial) {
      fc.quotient = cell.base_point;
      fc.label = f.u.transpose() * cell.base_point;
      fc.coords = Mat(0, cell.members.size());
      fc.inverse = Mat(d, 0);
      f.cells.push_back(std::move(fc));
      continue;
    }
    const Mat& b = cell.basis;
    if (b.cols() != sheaf.k) throw Error(ErrorKind::DegenerateProjection, "cell dimension differs from the sheaf");
    const Mat m = f.v.transpose() * b;
    Eigen::JacobiSVD<Mat> svd(m);
    if (svd.singularValues().minCoeff() < 1e-12)
      throw Error(ErrorKind::DegenerateProjection, "reference plane projection is singular on cell " + std::to_string(cid));
    if (cell.cone)
      for (const auto& g : cell.cone->generators)
        if ((f.v.transpose() * g).norm() < 0.70710678118654752 - 1e-9)
          throw Error(ErrorKind::DegenerateProjection, "cone direction nearly orthogonal to the reference plane");
    fc.inverse = b * m.inverse();
    fc.quotient = cell.base_point - fc.inverse * (f.v.transpose() * cell.base_point);
    fc.label = f.u.transpose() * fc.quotient;
    fc.coords.resize(sheaf.k, cell.members.size());
    for (size_t t = 0; t < cell.members.size(); ++t) fc.coords.col(t) = f.v.transpose() * mu.points[cell.members[t]];
    if (cell.cone) {
      std::vector<Vec> gens;
      for (const auto& g : cell.cone->generators) gens.push_back(f.v.transpose() * g);
      fc.mapped_cone = ConeDescriptor::from_generators(gens);
    }
    f.cells.push_back(std::move(fc));
  }
  return f;
}

Vec fibration_inverse(const FibrationCell& c, const Vec& w) { return c.quotient + c.inverse * w; }

}  // namespace normot
