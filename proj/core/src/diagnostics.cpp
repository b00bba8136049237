#include "normot/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "normot/error.hpp"
#include "normot/kantorovich.hpp"
#include "normot/linalg.hpp"

namespace normot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMinSection = 16;

// Principal coordinates of a point cloud.
struct SectionFrame {
  Vec mean;
  Mat basis;  // d x m
};

SectionFrame principal_frame(const std::vector<Vec>& pts, int m) {
  const int n = static_cast<int>(pts.size());
  const int d = static_cast<int>(pts[0].size());
  SectionFrame f;
  f.mean = Vec::Zero(d);
  for (const auto& p : pts) f.mean += p;
  f.mean /= n;
  Mat c(n, d);
  for (int i = 0; i < n; ++i) c.row(i) = (pts[i] - f.mean).transpose();
  Eigen::JacobiSVD<Mat> svd(c, Eigen::ComputeFullV);
  f.basis = svd.matrixV().leftCols(m);
  return f;
}

int cloud_rank(const std::vector<Vec>& pts) {
  const int n = static_cast<int>(pts.size());
  const int d = static_cast<int>(pts[0].size());
  Vec mean = Vec::Zero(d);
  for (const auto& p : pts) mean += p;
  mean /= n;
  Mat c(n, d);
  for (int i = 0; i < n; ++i) c.row(i) = (pts[i] - mean).transpose();
  return linalg::rank(c, 1e-9);
}

Mat coords_in(const SectionFrame& f, const std::vector<Vec>& pts) {
  Mat x(pts.size(), f.basis.cols());
  for (size_t i = 0; i < pts.size(); ++i) x.row(i) = ((pts[i] - f.mean).transpose() * f.basis);
  return x;
}

double scott_bandwidth(const Mat& x) {
  const int n = static_cast<int>(x.rows());
  const int m = static_cast<int>(x.cols());
  double var = 0.0;
  for (int k = 0; k < m; ++k) {
    const double mu = x.col(k).mean();
    var += (x.col(k).array() - mu).square().sum() / std::max(1, n - 1);
  }
  const double sigma = std::sqrt(var / m);
  return sigma * std::pow(static_cast<double>(n), -1.0 / (m + 4));
}

// |det| of the kernel-weighted least squares fit y_j - y_i ~ A (x_j - x_i).
// Neighbours come from the same group (cell) as i, since sigma is only
// smooth inside a cell; a group too small to fit falls back to all points.
std::vector<double> local_jacobians(const Mat& x, const Mat& y, double bw, double cutoff,
                                    const std::vector<int>& group) {
  const int n = static_cast<int>(x.rows());
  const int m = static_cast<int>(x.cols());
  std::vector<double> jac(n, 0.0);
  const int fallback = 2 * (m + 1) + 1;
  std::map<int, std::vector<int>> members;
  for (int i = 0; i < n; ++i) members[group.empty() ? 0 : group[i]].push_back(i);
  auto fits = [&](const std::vector<int>& idx) {
    if (static_cast<int>(idx.size()) < fallback + 1) return false;
    Mat c(idx.size(), m);
    for (size_t q = 0; q < idx.size(); ++q) c.row(q) = x.row(idx[q]) - x.row(idx[0]);
    return linalg::rank(c, 1e-9) == m;
  };
  std::map<int, bool> own;
  for (const auto& [gid, idx] : members) own[gid] = fits(idx);
  for (int i = 0; i < n; ++i) {
    const int gid = group.empty() ? 0 : group[i];
    const bool restrict = own[gid];
    std::vector<std::pair<double, int>> near;
    near.reserve(n);
    for (int j = 0; j < n; ++j)
      if (!restrict || group.empty() || group[j] == gid) near.emplace_back((x.row(j) - x.row(i)).norm(), j);
    const int nn = static_cast<int>(near.size());
    Mat g = Mat::Zero(m, m);
    Mat r = Mat::Zero(m, m);
    int used = 0;
    for (const auto& [dist, j] : near) {
      if (j == i || dist > cutoff * bw) continue;
      const double w = std::exp(-0.5 * (dist / bw) * (dist / bw));
      const Vec dx = (x.row(j) - x.row(i)).transpose();
      const Vec dy = (y.row(j) - y.row(i)).transpose();
      g += w * dx * dx.transpose();
      r += w * dx * dy.transpose();
      ++used;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    const bool weak = used < m + 1 || es.eigenvalues()(0) <= 1e-12 * std::max(1e-300, es.eigenvalues()(m - 1));
    if (weak) {
      std::sort(near.begin(), near.end());
      g.setZero();
      r.setZero();
      for (int q = 1; q < std::min(nn, fallback + 1); ++q) {
        const int j = near[q].second;
        const Vec dx = (x.row(j) - x.row(i)).transpose();
        const Vec dy = (y.row(j) - y.row(i)).transpose();
        g += dx * dx.transpose();
        r += dx * dy.transpose();
      }
    }
    const Mat at = g.fullPivLu().solve(r);  // A^T
    jac[i] = std::abs(at.determinant());
  }
  return jac;
}

std::vector<int> segment_cells(const Slice1D& slice) {
  std::vector<int> out;
  for (const auto& seg : slice.segments) out.push_back(seg.cell);
  return out;
}

struct SectionPair {
  int m = 0;
  Mat xs;
  Mat xt;
  double bw = 0.0;
};

SectionPair section_pair(const Slice1D& slice, double s, double t, double bandwidth) {
  SectionPair sp;
  const auto ps = slice.section(s);
  const auto pt = slice.section(t);
  sp.m = cloud_rank(ps);
  if (sp.m == 0) throw Error(ErrorKind::InsufficientData, "section is a single point");
  sp.xs = coords_in(principal_frame(ps, sp.m), ps);
  sp.xt = coords_in(principal_frame(pt, sp.m), pt);
  sp.bw = bandwidth > 0 ? bandwidth : scott_bandwidth(sp.xs);
  return sp;
}

// Part of {w : n.w = c} inside a convex polygon, as a parameter range along e.
std::optional<std::pair<double, double>> clip_line(const std::vector<Vec>& hull, const Vec& nrm, const Vec& e,
                                                   double c) {
  double lo = kInf, hi = -kInf;
  const int h = static_cast<int>(hull.size());
  auto consider = [&](const Vec& p) {
    const double tau = e.dot(p);
    lo = std::min(lo, tau);
    hi = std::max(hi, tau);
  };
  for (int a = 0; a < h; ++a) {
    const Vec& p = hull[a];
    const Vec& q = hull[(a + 1) % h];
    const double fp = nrm.dot(p) - c;
    const double fq = nrm.dot(q) - c;
    if (std::abs(fp) <= 1e-14) consider(p);
    if ((fp < 0 && fq > 0) || (fp > 0 && fq < 0)) consider(p + (fp / (fp - fq)) * (q - p));
  }
  if (!(lo < hi)) return std::nullopt;
  return std::make_pair(lo, hi);
}

std::vector<Vec> convex_hull_2d(std::vector<Vec> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) {
    return a(0) < b(0) || (a(0) == b(0) && a(1) < b(1));
  });
  if (pts.size() < 3) return pts;
  auto cross = [](const Vec& o, const Vec& a, const Vec& b) {
    return (a(0) - o(0)) * (b(1) - o(1)) - (a(1) - o(1)) * (b(0) - o(0));
  };
  std::vector<Vec> h(2 * pts.size());
  size_t k = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i - 1]) <= 0) --k;
    h[k++] = pts[i - 1];
  }
  h.resize(k - 1);
  return h;
}

struct RawSegment {
  int cell;
  Vec origin;     // point at height 0 along the segment line
  Vec direction;  // e.direction = 1
  double lo;
  double hi;
};

// Range [h-, h+] maximizing length times the number of covering segments.
std::optional<std::pair<double, double>> common_range(const std::vector<RawSegment>& segs) {
  std::vector<double> los;
  for (const auto& s : segs) los.push_back(s.lo);
  std::sort(los.begin(), los.end());
  los.erase(std::unique(los.begin(), los.end()), los.end());
  double best = 0.0;
  std::optional<std::pair<double, double>> out;
  for (double lo : los) {
    std::vector<double> his;
    for (const auto& s : segs)
      if (s.lo <= lo) his.push_back(s.hi);
    std::sort(his.begin(), his.end(), std::greater<>());
    for (size_t c = 0; c < his.size(); ++c) {
      const double len = his[c] - lo;
      if (len <= 0) break;
      const double score = len * static_cast<double>(c + 1);
      if (score > best * (1 + 1e-12)) {
        best = score;
        out = std::make_pair(lo, his[c]);
      }
    }
  }
  return out;
}

Slice1D base_field(const FieldSpec& spec) {
  if (spec.dim < 2 || spec.n_per_axis < 1 || !(spec.h_lo < spec.h_hi))
    throw Error(ErrorKind::InvalidInput, "bad field specification");
  Slice1D s;
  s.dim = spec.dim;
  s.e = Vec::Zero(spec.dim);
  s.e(spec.dim - 1) = 1.0;
  s.h_lo = spec.h_lo;
  s.h_hi = spec.h_hi;
  return s;
}

// Base grid on the section h_lo.
std::vector<Vec> base_grid(const FieldSpec& spec) {
  const int m = spec.dim - 1;
  long total = 1;
  for (int k = 0; k < m; ++k) total *= spec.n_per_axis;
  std::vector<Vec> out;
  out.reserve(total);
  for (long idx = 0; idx < total; ++idx) {
    Vec z = Vec::Zero(spec.dim);
    long r = idx;
    for (int k = 0; k < m; ++k) {
      const int q = static_cast<int>(r % spec.n_per_axis);
      r /= spec.n_per_axis;
      z(k) = -spec.half_width + (q + 0.5) * (2.0 * spec.half_width / spec.n_per_axis);
    }
    z(spec.dim - 1) = spec.h_lo;
    out.push_back(z);
  }
  return out;
}

void aim_segment(Slice1D& s, const Vec& z, const Vec& vertex, double vertex_height, int cell) {
  const double frac = (s.h_hi - s.h_lo) / (vertex_height - s.h_lo);
  s.segments.push_back({cell, z, z + frac * (vertex - z)});
}

}  // namespace

Vec Slice1D::direction(int a) const { return (segments[a].exit - segments[a].entry).normalized(); }

Vec Slice1D::point_at(int a, double t) const {
  const auto& sg = segments[a];
  return sg.entry + ((t - h_lo) / (h_hi - h_lo)) * (sg.exit - sg.entry);
}

std::vector<Vec> Slice1D::section(double t) const {
  std::vector<Vec> out;
  out.reserve(segments.size());
  for (int a = 0; a < size(); ++a) out.push_back(point_at(a, t));
  return out;
}

std::vector<Slice1D> extract_slices(const DirectedPartition& part, const SheafGroup& sheaf, const DiscreteMeasure& mu,
                                    const std::vector<Vec>& directions, const SliceOptions& opt) {
  std::vector<Slice1D> out;
  if (sheaf.trivial || sheaf.k == 0 || !sheaf.base_cone) {
    std::clog << "extract_slices: sheaf " << sheaf.id << " has no directions, skipped\n";
    return out;
  }
  if (sheaf.k > 2) {
    std::clog << "extract_slices: sheaf " << sheaf.id << " has k = " << sheaf.k << ", only k <= 2 is sliced\n";
    return out;
  }
  const Fibration fib = to_fibration(sheaf, part, mu);
  for (const Vec& dir : directions) {
    if (dir.size() != sheaf.k || dir.norm() < 1e-12) throw Error(ErrorKind::InvalidInput, "slice direction has the wrong shape");
    const Vec ek = dir.normalized();
    if (!sheaf.base_cone->contains(ek, 1e-9)) throw Error(ErrorKind::InvalidInput, "slice direction outside the base cone");
    std::vector<RawSegment> raw;
    for (const auto& fc : fib.cells) {
      const Vec da = fc.inverse * ek;  // (V ek).da = 1
      if (sheaf.k == 1) {
        RawSegment r{fc.cell, fc.quotient, da, kInf, -kInf};
        for (int c = 0; c < fc.coords.cols(); ++c) {
          r.lo = std::min(r.lo, fc.coords(0, c) * ek(0));
          r.hi = std::max(r.hi, fc.coords(0, c) * ek(0));
        }
        if (r.lo < r.hi) raw.push_back(r);
        continue;
      }
      std::vector<Vec> w;
      for (int c = 0; c < fc.coords.cols(); ++c) w.push_back(fc.coords.col(c));
      const auto hull = convex_hull_2d(w);
      if (hull.size() < 2) continue;
      Vec nrm(2);
      nrm << -ek(1), ek(0);
      double cmin = kInf, cmax = -kInf;
      for (const auto& p : hull) {
        cmin = std::min(cmin, nrm.dot(p));
        cmax = std::max(cmax, nrm.dot(p));
      }
      if (!(cmin < cmax)) continue;
      for (int o = 0; o < opt.offsets; ++o) {
        const double c = cmin + (o + 0.5) * (cmax - cmin) / opt.offsets;
        const auto range = clip_line(hull, nrm, ek, c);
        if (!range) continue;
        raw.push_back({fc.cell, fc.quotient + fc.inverse * (c * nrm), da, range->first, range->second});
      }
    }
    const auto range = raw.empty() ? std::nullopt : common_range(raw);
    if (!range) {
      std::clog << "extract_slices: no cell of sheaf " << sheaf.id << " crosses a common range, direction skipped\n";
      continue;
    }
    Slice1D s;
    s.sheaf = sheaf.id;
    s.dim = part.dim;
    s.e = sheaf.reference_plane * ek;
    s.h_lo = range->first;
    s.h_hi = range->second;
    for (const auto& r : raw) {
      if (r.lo > s.h_lo || r.hi < s.h_hi) continue;
      s.segments.push_back({r.cell, r.origin + s.h_lo * r.direction, r.origin + s.h_hi * r.direction});
    }
    out.push_back(std::move(s));
  }
  return out;
}

double ratio_bound(const Slice1D& slice, double s, double t, double epsilon, int section_dim, Orientation o) {
  const double base = o == Orientation::Forward ? (slice.h_hi + epsilon - s) / (slice.h_hi + epsilon - t)
                                                : (s - slice.h_lo + epsilon) / (t - slice.h_lo + epsilon);
  return std::pow(base, section_dim);
}

PushforwardReport pushforward_ratio(const Slice1D& slice, double s, double t, const RatioOptions& opt) {
  const bool fwd = opt.orientation == Orientation::Forward;
  const bool ok = fwd ? (slice.h_lo < s && s <= t && t <= slice.h_hi) : (slice.h_lo <= t && t < s && s < slice.h_hi);
  if (!ok) throw Error(ErrorKind::InvalidInput, "section parameters outside the admissible range");
  if (slice.size() < kMinSection)
    throw Error(ErrorKind::InsufficientData, "need at least 16 segments, got " + std::to_string(slice.size()));
  PushforwardReport rep;
  rep.s = s;
  rep.t = t;
  rep.epsilon = opt.epsilon >= 0 ? opt.epsilon : slice.default_epsilon();
  const SectionPair sp = section_pair(slice, s, t, opt.bandwidth);
  rep.section_dim = sp.m;
  rep.bandwidth = sp.bw;
  rep.bound = ratio_bound(slice, s, t, rep.epsilon, sp.m, opt.orientation);
  const auto jac = local_jacobians(sp.xs, sp.xt, sp.bw, opt.cutoff, segment_cells(slice));
  rep.ratio.resize(jac.size());
  rep.max_ratio = -kInf;
  rep.min_ratio = kInf;
  for (size_t i = 0; i < jac.size(); ++i) {
    rep.ratio[i] = jac[i] > 0 ? 1.0 / jac[i] : kInf;
    rep.max_ratio = std::max(rep.max_ratio, rep.ratio[i]);
    rep.min_ratio = std::min(rep.min_ratio, rep.ratio[i]);
  }
  rep.max_violation = rep.max_ratio / rep.bound - 1.0;
  return rep;
}

ConeFieldApprox build_cone_approximation(const Slice1D& slice, int n_atoms, const ApproxOptions& opt) {
  if (slice.size() == 0) throw Error(ErrorKind::InvalidInput, "empty slice");
  if (n_atoms < 1) throw Error(ErrorKind::InvalidInput, "n_atoms must be positive");
  ConeFieldApprox out;
  out.epsilon = opt.epsilon >= 0 ? opt.epsilon : slice.default_epsilon();
  const int n = slice.size();
  const int d = slice.dim;
  const double top = slice.h_hi + out.epsilon;
  out.base = slice.section(slice.h_lo);
  const auto terminal = slice.section(top);

  // Section coordinates orthogonal to e.
  const Mat sec = linalg::null_space(slice.e.transpose(), d);
  Mat tc(n, sec.cols());
  for (int a = 0; a < n; ++a) tc.row(a) = terminal[a].transpose() * sec;
  const Vec lo = tc.colwise().minCoeff().transpose();
  const Vec hi = tc.colwise().maxCoeff().transpose();
  const double scale = std::max(1.0, (hi - lo).cwiseAbs().maxCoeff());
  std::vector<int> live;
  for (int k = 0; k < sec.cols(); ++k)
    if (hi(k) - lo(k) > 1e-12 * scale) live.push_back(k);
  const int m = static_cast<int>(live.size());
  const int q = m == 0 ? 1 : std::max(1, static_cast<int>(std::lround(std::pow(n_atoms, 1.0 / m))));

  // Snapping map to cube centres; atoms in cube index order.
  std::map<long, int> atom_of_cube;
  std::vector<long> cube(n);
  for (int a = 0; a < n; ++a) {
    long idx = 0;
    for (int k : live) {
      const double u = (tc(a, k) - lo(k)) / (hi(k) - lo(k));
      idx = idx * q + std::clamp(static_cast<long>(std::floor(u * q)), 0L, static_cast<long>(q - 1));
    }
    cube[a] = idx;
    atom_of_cube[idx] = 0;
  }
  int next = 0;
  for (auto& [idx, id] : atom_of_cube) {
    id = next++;
    Vec c = (lo + hi) / 2;
    long r = idx;
    for (int p = m - 1; p >= 0; --p) {
      const int k = live[p];
      const long b = r % q;
      r /= q;
      c(k) = lo(k) + (b + 0.5) * (hi(k) - lo(k)) / q;
    }
    out.vertices.push_back(sec * c + top * slice.e);
  }
  out.atom_mass.assign(out.vertices.size(), 0.0);
  out.assignment.resize(n);
  for (int a = 0; a < n; ++a) {
    out.assignment[a] = atom_of_cube[cube[a]];
    out.atom_mass[out.assignment[a]] += 1.0 / n;
  }

  auto allowed = [&](const Vec& z, const Vec& zp) {
    const Vec dz = zp - z;
    if (slice.cone) return slice.cone->contains(dz, 1e-9);
    return dz.dot(slice.e) > 0;
  };

  // Snapping plan, and the optimum of the secondary cost over the same marginals.
  out.snapping_cost = 0.0;
  for (int a = 0; a < n; ++a) {
    const Vec& v = out.vertices[out.assignment[a]];
    if (!allowed(out.base[a], v)) {
      out.feasible = false;
      out.message = "snapped target outside the cone for base point " + std::to_string(a);
    }
    out.snapping_cost += (v - out.base[a]).norm() / n;
  }
  std::vector<TransportArc> arcs;
  for (int a = 0; a < n; ++a)
    for (size_t b = 0; b < out.vertices.size(); ++b)
      if (allowed(out.base[a], out.vertices[b]))
        arcs.push_back({a, static_cast<int>(b), (out.vertices[b] - out.base[a]).norm()});
  SolveOptions so;
  so.check_feasibility = true;
  const std::vector<double> supply(n, 1.0 / n);
  try {
    const TransportPlan best = solve_on_arcs(supply, out.atom_mass, arcs, so);
    out.optimal_cost = best.cost_value;
    out.snapping_optimal = out.feasible && out.snapping_cost <= best.cost_value + 1e-9 * std::max(1.0, best.cost_value);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Infeasible) throw;
    out.feasible = false;
    out.optimal_cost = kInf;
    if (out.message.empty()) out.message = "no admissible assignment to the atoms";
  }

  // Swept segments of different atoms must not meet.
  const double tol = opt.tol * std::max(1.0, scale);
  for (int a = 0; a < n && out.disjoint; ++a)
    for (int b = a + 1; b < n; ++b) {
      if (out.assignment[a] == out.assignment[b]) continue;
      if (linalg::segment_distance(out.base[a], out.vertices[out.assignment[a]], out.base[b],
                                   out.vertices[out.assignment[b]]) <= tol) {
        out.disjoint = false;
        out.crossing = std::make_pair(a, b);
        break;
      }
    }

  double sum = 0.0;
  for (int a = 0; a < n; ++a) {
    const Vec approx = out.vertices[out.assignment[a]] - out.base[a];
    const double dev = approx.norm() > 0 ? linalg::angle_between(slice.direction(a), approx) : M_PI;
    out.max_deviation = std::max(out.max_deviation, dev);
    sum += dev;
  }
  out.mean_deviation = sum / n;
  return out;
}

double initial_final_fraction(const DirectedPartition& part, const DiscreteMeasure& mu, double* initial,
                              double* final_) {
  double ini = 0.0, fin = 0.0, total = 0.0;
  for (const auto& cell : part.cells)
    for (int i : cell.members) {
      total += mu.weights[i];
      if (cell.flags.initial) ini += mu.weights[i];
      else if (cell.flags.final_) fin += mu.weights[i];
    }
  if (initial) *initial = total > 0 ? ini / total : 0.0;
  if (final_) *final_ = total > 0 ? fin / total : 0.0;
  return total > 0 ? (ini + fin) / total : 0.0;
}

BoundaryMass initial_final_mass(const DirectedPartition& part_h, const DiscreteMeasure& mu_h,
                                const DirectedPartition& part_h2, const DiscreteMeasure& mu_h2) {
  BoundaryMass b;
  b.fraction_h = initial_final_fraction(part_h, mu_h, &b.initial_h, &b.final_h);
  b.fraction_h2 = initial_final_fraction(part_h2, mu_h2, &b.initial_h2, &b.final_h2);
  if (b.fraction_h > 0) b.ratio = b.fraction_h2 / b.fraction_h;
  else b.ratio = b.fraction_h2 > 0 ? kInf : 0.0;
  return b;
}

DisintegrationReport disintegration_density(const std::vector<Slice1D>& slices, const DensityOptions& opt) {
  if (opt.sections < 2) throw Error(ErrorKind::InvalidInput, "need at least two sections");
  DisintegrationReport rep;
  for (size_t si = 0; si < slices.size(); ++si) {
    const Slice1D& sl = slices[si];
    if (sl.size() < kMinSection)
      throw Error(ErrorKind::InsufficientData, "need at least 16 segments, got " + std::to_string(sl.size()));
    std::vector<double> ts(opt.sections);
    for (int k = 0; k < opt.sections; ++k) ts[k] = sl.h_lo + (sl.h_hi - sl.h_lo) * k / (opt.sections - 1);
    // Jacobian of sigma^{h-,t} per segment: Lebesgue mass per unit length
    // along the segment, up to a per-segment constant.
    std::vector<std::vector<double>> jac(opt.sections);
    for (int k = 0; k < opt.sections; ++k) {
      if (k == 0) {
        jac[k].assign(sl.size(), 1.0);
        continue;
      }
      const SectionPair sp = section_pair(sl, sl.h_lo, ts[k], opt.bandwidth);
      jac[k] = local_jacobians(sp.xs, sp.xt, sp.bw, 3.0, segment_cells(sl));
    }
    std::map<int, std::vector<int>> by_cell;
    for (int a = 0; a < sl.size(); ++a) by_cell[sl.segments[a].cell].push_back(a);
    for (const auto& [cell, segs] : by_cell) {
      DensityProfile p;
      p.slice = static_cast<int>(si);
      p.cell = cell;
      p.t = ts;
      for (int k = 0; k < opt.sections; ++k) {
        double acc = 0.0;
        for (int a : segs) acc += jac[k][a];
        p.profile.push_back(acc / segs.size());
      }
      const double mean = std::accumulate(p.profile.begin(), p.profile.end(), 0.0) / p.profile.size();
      for (double& v : p.profile) v = mean > 0 ? v / mean : 0.0;
      p.min_rel = *std::min_element(p.profile.begin(), p.profile.end());
      p.max_rel = *std::max_element(p.profile.begin(), p.profile.end());
      p.bounded = std::isfinite(p.max_rel) && p.min_rel >= opt.lower && p.max_rel <= opt.upper;
      rep.regular_like = rep.regular_like && p.bounded;
      rep.cells.push_back(std::move(p));
    }
  }
  return rep;
}

Slice1D single_vertex_field(const FieldSpec& spec) {
  Slice1D s = base_field(spec);
  const double top = spec.h_hi + spec.epsilon;
  Vec v = Vec::Zero(spec.dim);
  v(spec.dim - 1) = top;
  for (const Vec& z : base_grid(spec)) aim_segment(s, z, v, top, 0);
  return s;
}

Slice1D disjoint_cone_field(const FieldSpec& spec, int vertices, unsigned seed) {
  if (vertices < 1) throw Error(ErrorKind::InvalidInput, "need at least one vertex");
  Slice1D s = base_field(spec);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double w = spec.half_width;
  // Cuts fall between grid columns and every strip keeps at least two
  // columns, so each cell spans the section.
  const int extra = spec.n_per_axis - 2 * vertices;
  if (extra < 0) throw Error(ErrorKind::InvalidInput, "need at least two grid columns per vertex");
  std::uniform_int_distribution<int> pick(0, extra);
  std::vector<int> bars;
  for (int i = 0; i + 1 < vertices; ++i) bars.push_back(pick(rng));
  std::sort(bars.begin(), bars.end());
  std::vector<double> cuts;
  for (int i = 0; i + 1 < vertices; ++i)
    cuts.push_back(-w + (2 * (i + 1) + bars[i]) * (2.0 * w / spec.n_per_axis));
  std::vector<double> vx;
  for (int i = 0; i < vertices; ++i) vx.push_back(1.5 * w * unit(rng));
  std::sort(vx.begin(), vx.end());
  const double top = spec.h_hi + spec.epsilon;
  std::vector<Vec> apex;
  for (int i = 0; i < vertices; ++i) {
    Vec v = Vec::Zero(spec.dim);
    v(0) = vx[i];
    for (int k = 1; k + 1 < spec.dim; ++k) v(k) = w * unit(rng);
    v(spec.dim - 1) = top;
    apex.push_back(v);
  }
  for (const Vec& z : base_grid(spec)) {
    const int strip = static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), z(0)) - cuts.begin());
    aim_segment(s, z, apex[strip], top, strip);
  }
  return s;
}

Slice1D translation_field(const FieldSpec& spec, const Vec& section_shift) {
  Slice1D s = base_field(spec);
  if (section_shift.size() != spec.dim - 1) throw Error(ErrorKind::InvalidInput, "shift has the wrong dimension");
  Vec step = Vec::Zero(spec.dim);
  step.head(spec.dim - 1) = section_shift;
  step(spec.dim - 1) = spec.h_hi - spec.h_lo;
  for (const Vec& z : base_grid(spec)) s.segments.push_back({0, z, z + step});
  return s;
}

Slice1D crossing_field(const FieldSpec& spec) {
  Slice1D s = base_field(spec);
  for (const Vec& z : base_grid(spec)) {
    Vec x = z;
    x.head(spec.dim - 1) *= -1.0;
    x(spec.dim - 1) = spec.h_hi;
    s.segments.push_back({0, z, x});
  }
  return s;
}

Slice1D leaf_concentrated_field(const FieldSpec& spec) {
  Slice1D s = base_field(spec);
  Vec v = Vec::Zero(spec.dim);
  v(spec.dim - 1) = spec.h_hi;
  for (const Vec& z : base_grid(spec)) s.segments.push_back({0, z, v});
  return s;
}

}  // namespace normot
