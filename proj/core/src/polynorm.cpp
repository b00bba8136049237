#include "normot/polynorm.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "normot/error.hpp"
#include "normot/linalg.hpp"

namespace normot {

namespace {

constexpr double kGeomTol = 1e-10;

// Calls f on every k-subset of {0..n-1} (lexicographic). Stops if f returns
// false.
void for_each_subset(int n, int k, const std::function<bool(const std::vector<int>&)>& f) {
  if (k < 0 || k > n) return;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    if (!f(idx)) return;
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

bool contains_direction(const std::vector<Vec>& rays, const Vec& r) {
  for (const auto& q : rays)
    if ((q - r).norm() < 1e-9) return true;
  return false;
}

// Extreme rays of the pointed cone {t in R^k : rows(g) . t >= 0}.
std::vector<Vec> extreme_rays(const Mat& g, int k) {
  std::vector<Vec> rays;
  auto feasible = [&](const Vec& t) {
    for (int j = 0; j < g.rows(); ++j) {
      const double gn = g.row(j).norm();
      if (g.row(j).dot(t) < -kGeomTol * std::max(1.0, gn)) return false;
    }
    return true;
  };
  if (k == 0) return rays;
  if (k == 1) {
    for (double s : {1.0, -1.0}) {
      Vec t(1);
      t(0) = s;
      if (feasible(t)) rays.push_back(t);
    }
    return rays;
  }
  const int m = static_cast<int>(g.rows());
  for_each_subset(m, k - 1, [&](const std::vector<int>& rows) {
    Mat sub(k - 1, k);
    for (int i = 0; i < k - 1; ++i) sub.row(i) = g.row(rows[i]);
    Mat ns = linalg::null_space(sub, k);
    if (ns.cols() != 1) return true;
    Vec n = ns.col(0).normalized();
    for (double s : {1.0, -1.0}) {
      Vec t = s * n;
      if (feasible(t) && !contains_direction(rays, t)) rays.push_back(t);
    }
    return true;
  });
  return rays;
}

// Facet normals (unit, inward) of the cone generated by `gens` inside the
// subspace with orthonormal basis `span`. Returned in ambient coordinates.
std::vector<Vec> facet_normals(const Mat& span, const std::vector<Vec>& gens) {
  const int k = static_cast<int>(span.cols());
  std::vector<Vec> normals;
  if (k == 0 || gens.empty()) return normals;
  if (k == 1) {
    Vec s = span.col(0);
    double side = 0.0;
    for (const auto& gv : gens) side += s.dot(gv);
    bool pointed = true;
    for (const auto& gv : gens)
      if (s.dot(gv) * side < -kGeomTol) pointed = false;
    if (pointed) normals.push_back(side >= 0 ? s : Vec(-s));
    return normals;
  }
  std::vector<Vec> coords;
  for (const auto& gv : gens) coords.push_back(span.transpose() * gv);
  for_each_subset(static_cast<int>(coords.size()), k - 1, [&](const std::vector<int>& sub) {
    Mat m(k - 1, k);
    for (int i = 0; i < k - 1; ++i) m.row(i) = coords[sub[i]].transpose();
    Mat ns = linalg::null_space(m, k);
    if (ns.cols() != 1) return true;
    Vec n = ns.col(0).normalized();
    bool pos = true, neg = true;
    for (const auto& c : coords) {
      const double v = n.dot(c);
      if (v < -kGeomTol) pos = false;
      if (v > kGeomTol) neg = false;
    }
    if (pos == neg) return true;  // separates nothing or splits the cone
    Vec amb = span * (pos ? n : Vec(-n));
    if (!contains_direction(normals, amb)) normals.push_back(amb);
    return true;
  });
  return normals;
}

std::vector<Vec> prune_to_extreme(const std::vector<Vec>& gens) {
  std::vector<Vec> uniq;
  for (const auto& g : gens) {
    if (g.norm() < 1e-14) continue;
    Vec u = g.normalized();
    if (!contains_direction(uniq, u)) uniq.push_back(u);
  }
  if (uniq.size() <= 2) return uniq;
  std::vector<Vec> out;
  for (size_t i = 0; i < uniq.size(); ++i) {
    Mat others(uniq[i].size(), uniq.size() - 1);
    for (size_t j = 0, c = 0; j < uniq.size(); ++j)
      if (j != i) others.col(c++) = uniq[j];
    Vec p = linalg::project_onto_cone(others, uniq[i]);
    if ((p - uniq[i]).norm() > 1e-9) out.push_back(uniq[i]);
  }
  return out;
}

Vec rotate_in_plane(const Vec& from, const Vec& toward, double angle) {
  // Rotates unit vector `from` by `angle` towards `toward` (negative: away).
  Vec w = toward - toward.dot(from) * from;
  if (w.norm() < 1e-14) return from;
  w.normalize();
  return (std::cos(angle) * from + std::sin(angle) * w).normalized();
}

}  // namespace

// ---------------------------------------------------------------------------
// PolyhedralNorm

PolyhedralNorm::PolyhedralNorm(std::vector<Vec> dual_vertices)
    : vertices_(std::move(dual_vertices)) {
  if (vertices_.empty()) throw Error(ErrorKind::InvalidInput, "norm has no dual vertices");
  dim_ = static_cast<int>(vertices_.front().size());
  if (dim_ < 1) throw Error(ErrorKind::InvalidInput, "norm dimension must be positive");
  v_.resize(vertices_.size(), dim_);
  for (size_t i = 0; i < vertices_.size(); ++i) {
    if (vertices_[i].size() != dim_)
      throw Error(ErrorKind::InvalidInput, "dual vertices have inconsistent dimension");
    if (!vertices_[i].allFinite())
      throw Error(ErrorKind::InvalidInput, "dual vertex is not finite");
    v_.row(i) = vertices_[i].transpose();
  }
  if (linalg::rank(v_) < dim_)
    throw Error(ErrorKind::InvalidInput, "dual vertices do not span R^d; 0 is not interior");
  // 0 is interior iff {x : Vx <= 0} = {0}; that cone is pointed, so it
  // suffices to test candidate extreme rays.
  const double scale = v_.cwiseAbs().maxCoeff();
  bool bad = false;
  auto test = [&](const Vec& x) {
    if ((v_ * x).maxCoeff() <= kGeomTol * scale * x.norm()) bad = true;
  };
  if (dim_ == 1) {
    test(Vec::Ones(1));
    test(-Vec::Ones(1));
  } else {
    for_each_subset(num_vertices(), dim_ - 1, [&](const std::vector<int>& rows) {
      Mat sub(dim_ - 1, dim_);
      for (int i = 0; i < dim_ - 1; ++i) sub.row(i) = v_.row(rows[i]);
      Mat ns = linalg::null_space(sub, dim_);
      if (ns.cols() == 1) {
        test(ns.col(0));
        test(-ns.col(0));
      }
      return !bad;
    });
  }
  if (bad) throw Error(ErrorKind::InvalidInput, "0 is not in the interior of the dual ball");

  symmetric_ = true;
  for (const auto& v : vertices_) {
    bool found = false;
    for (const auto& w : vertices_)
      if ((v + w).norm() <= 1e-12 * std::max(1.0, v.norm())) found = true;
    if (!found) {
      symmetric_ = false;
      break;
    }
  }
}

PolyhedralNorm PolyhedralNorm::l1(int dim) {
  if (dim < 1) throw Error(ErrorKind::InvalidInput, "dimension must be positive");
  std::vector<Vec> verts;
  for (int mask = 0; mask < (1 << dim); ++mask) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = (mask >> i) & 1 ? -1.0 : 1.0;
    verts.push_back(v);
  }
  return PolyhedralNorm(std::move(verts));
}

PolyhedralNorm PolyhedralNorm::linf(int dim) {
  if (dim < 1) throw Error(ErrorKind::InvalidInput, "dimension must be positive");
  std::vector<Vec> verts;
  for (int i = 0; i < dim; ++i)
    for (double s : {1.0, -1.0}) {
      Vec v = Vec::Zero(dim);
      v(i) = s;
      verts.push_back(v);
    }
  return PolyhedralNorm(std::move(verts));
}

PolyhedralNorm PolyhedralNorm::regular_polygon(int m, double phase) {
  if (m < 3) throw Error(ErrorKind::InvalidInput, "polygon needs at least 3 vertices");
  std::vector<Vec> verts;
  for (int i = 0; i < m; ++i) {
    const double a = phase + 2.0 * std::numbers::pi * i / m;
    Vec v(2);
    v << std::cos(a), std::sin(a);
    verts.push_back(v);
  }
  return PolyhedralNorm(std::move(verts));
}

PolyhedralNorm PolyhedralNorm::from_primal_vertices(const std::vector<Vec>& vertices) {
  if (vertices.empty()) throw Error(ErrorKind::InvalidInput, "no primal vertices");
  const int d = static_cast<int>(vertices.front().size());
  std::vector<Vec> normals;
  for_each_subset(static_cast<int>(vertices.size()), d, [&](const std::vector<int>& sub) {
    Mat p(d, d);
    for (int i = 0; i < d; ++i) p.row(i) = vertices[sub[i]].transpose();
    if (linalg::rank(p) < d) return true;
    Vec n = p.fullPivLu().solve(Vec::Ones(d));
    for (const auto& q : vertices)
      if (n.dot(q) > 1.0 + 1e-9) return true;
    if (!contains_direction(normals, n)) normals.push_back(n);
    return true;
  });
  if (normals.empty()) throw Error(ErrorKind::InvalidInput, "primal ball has no facets");
  return PolyhedralNorm(std::move(normals));
}

double PolyhedralNorm::value(const Vec& x) const {
  if (x.size() != dim_)
    throw Error(ErrorKind::InvalidInput, "dimension mismatch in norm evaluation");
  return (v_ * x).maxCoeff();
}

IndexSet PolyhedralNorm::active_set(const Vec& x, double tol) const {
  if (x.size() != dim_)
    throw Error(ErrorKind::InvalidInput, "dimension mismatch in active set");
  if (x.norm() == 0.0) throw Error(ErrorKind::DegenerateDirection, "active set of the zero vector");
  Vec dots = v_ * x;
  const double nv = dots.maxCoeff();
  IndexSet out;
  for (int i = 0; i < dots.size(); ++i)
    if (dots(i) >= nv - tol * nv) out.push_back(i);
  return out;
}

double norm_value(const PolyhedralNorm& n, const Vec& x) { return n.value(x); }

IndexSet active_set(const PolyhedralNorm& n, const Vec& x, double tol) {
  return n.active_set(x, tol);
}

NormPtr make_norm(PolyhedralNorm n) {
  return std::make_shared<const PolyhedralNorm>(std::move(n));
}

// ---------------------------------------------------------------------------
// Extremal cones

bool ExtremalCone::contains(const Vec& v, double tol) const {
  if (v.norm() == 0.0) return true;
  return is_subset(active_set, norm->active_set(v, tol));
}

Vec ExtremalCone::central_direction() const {
  Vec c = Vec::Zero(norm->dim());
  for (const auto& g : generators) c += g;
  return c.norm() > 0 ? Vec(c.normalized()) : c;
}

ExtremalCone extremal_cone(const NormPtr& norm, const IndexSet& active) {
  if (!norm) throw Error(ErrorKind::InvalidInput, "null norm");
  if (active.empty()) throw Error(ErrorKind::InvalidInput, "empty active set");
  const int d = norm->dim();
  const int m = norm->num_vertices();
  for (size_t i = 0; i < active.size(); ++i) {
    if (active[i] < 0 || active[i] >= m)
      throw Error(ErrorKind::InvalidInput, "active set index out of range");
    if (i > 0 && active[i] <= active[i - 1])
      throw Error(ErrorKind::InvalidInput, "active set must be sorted and unique");
  }
  const Mat& v = norm->dual_matrix();
  const int a0 = active.front();
  Mat eq(active.size() - 1, d);
  for (size_t i = 1; i < active.size(); ++i) eq.row(i - 1) = v.row(active[i]) - v.row(a0);
  Mat s = linalg::null_space(eq, d);
  const int k0 = static_cast<int>(s.cols());
  if (k0 == 0) throw Error(ErrorKind::EmptyCone, "active set pins only the origin");

  std::vector<int> others;
  for (int j = 0; j < m; ++j)
    if (!std::binary_search(active.begin(), active.end(), j)) others.push_back(j);
  Mat g(others.size(), k0);
  for (size_t r = 0; r < others.size(); ++r)
    g.row(r) = (v.row(a0) - v.row(others[r])) * s;

  std::vector<Vec> rays = extreme_rays(g, k0);
  if (rays.empty()) throw Error(ErrorKind::EmptyCone, "active set is not a face of the dual ball");

  ExtremalCone c;
  c.norm = norm;
  for (const auto& t : rays) c.generators.push_back((s * t).normalized());

  // Maximal active set for the cone: indices active at a relative interior
  // direction.
  Vec center = Vec::Zero(d);
  for (const auto& gen : c.generators) center += gen;
  IndexSet maximal = norm->active_set(center, kDefaultFaceTol);
  if (maximal != active && is_subset(active, maximal)) return extremal_cone(norm, maximal);
  c.active_set = active;

  Mat gm(d, c.generators.size());
  for (size_t i = 0; i < c.generators.size(); ++i) gm.col(i) = c.generators[i];
  c.span = linalg::column_span(gm);
  c.dim = static_cast<int>(c.span.cols());
  auto normals = facet_normals(c.span, c.generators);
  c.inequalities.resize(normals.size(), d);
  for (size_t i = 0; i < normals.size(); ++i) c.inequalities.row(i) = normals[i].transpose();
  return c;
}

IndexSet minimal_face(const PolyhedralNorm& n, const std::vector<Vec>& dirs, double tol) {
  if (dirs.empty()) throw Error(ErrorKind::InvalidInput, "no directions");
  Vec sum = Vec::Zero(n.dim());
  for (const auto& dvec : dirs) {
    const double nv = n.value(dvec);
    if (dvec.norm() == 0.0 || nv <= 0.0)
      throw Error(ErrorKind::DegenerateDirection, "zero direction");
    sum += dvec / nv;
  }
  if (n.value(sum) <= 1e-12 * static_cast<double>(dirs.size()))
    throw Error(ErrorKind::NoCommonFace, "directions cancel out");
  IndexSet a = n.active_set(sum, tol);
  for (const auto& dvec : dirs)
    if (!is_subset(a, n.active_set(dvec, tol)))
      throw Error(ErrorKind::NoCommonFace, "directions do not share an extremal cone");
  return a;
}

ExtremalCone minimal_extremal_cone(const NormPtr& norm, const std::vector<Vec>& dirs,
                                   double tol) {
  return extremal_cone(norm, minimal_face(*norm, dirs, tol));
}

double cone_cost(const ExtremalCone& c, const Vec& x, const Vec& y, double tol) {
  Vec d = y - x;
  const double scale = std::max({1.0, x.norm(), y.norm()});
  if (d.norm() <= 1e-14 * scale) return 0.0;
  return c.contains(d, tol) ? 0.0 : std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// ConeDescriptor

ConeDescriptor ConeDescriptor::from_generators(const std::vector<Vec>& generators) {
  ConeDescriptor c;
  c.base_ = prune_to_extreme(generators);
  if (c.base_.empty()) throw Error(ErrorKind::EmptyCone, "cone has no nonzero generator");
  const int d = static_cast<int>(c.base_.front().size());
  Mat gm(d, c.base_.size());
  for (size_t i = 0; i < c.base_.size(); ++i) gm.col(i) = c.base_[i];
  c.span_ = linalg::column_span(gm);
  c.normals_ = facet_normals(c.span_, c.base_);
  return c;
}

ConeDescriptor ConeDescriptor::from_extremal(const ExtremalCone& e) {
  ConeDescriptor c;
  c.base_ = e.generators;
  c.span_ = e.span;
  for (int i = 0; i < e.inequalities.rows(); ++i) c.normals_.push_back(e.inequalities.row(i).transpose());
  return c;
}

ConeDescriptor ConeDescriptor::round(const Vec& axis, double angle) {
  if (axis.norm() == 0.0) throw Error(ErrorKind::DegenerateDirection, "zero cone axis");
  if (angle < 0.0 || angle >= std::numbers::pi / 2)
    throw Error(ErrorKind::InvalidInput, "round cone half-angle must lie in [0, pi/2)");
  ConeDescriptor c;
  c.axis_ = axis.normalized();
  c.base_ = {c.axis_};
  c.span_ = Mat::Identity(axis.size(), axis.size());
  c.round_angle_ = angle;
  return c;
}

double ConeDescriptor::angle_to_base(const Vec& v) const {
  if (v.norm() == 0.0) return 0.0;
  Vec u = v.normalized();
  if (round_angle_ >= 0.0) return std::max(0.0, linalg::angle_between(u, axis_) - round_angle_);
  Mat gm(u.size(), base_.size());
  for (size_t i = 0; i < base_.size(); ++i) gm.col(i) = base_[i];
  Vec p = linalg::project_onto_cone(gm, u);
  if (p.norm() < 1e-15) return std::numbers::pi / 2;
  return linalg::angle_between(u, p);
}

bool ConeDescriptor::contains(const Vec& v, double tol) const {
  const double nv = v.norm();
  if (nv == 0.0) return true;
  if (v.size() != span_.rows()) throw Error(ErrorKind::InvalidInput, "dimension mismatch in cone test");
  Vec off = v - span_ * (span_.transpose() * v);
  if (off.norm() > tol * nv + 1e-12 * nv) return false;
  if (round_angle_ >= 0.0)
    return linalg::angle_between(v, axis_) <= round_angle_ + tol;
  if (radius_ > 0.0) {
    Vec u = v / nv;
    Mat gm(u.size(), base_.size());
    for (size_t i = 0; i < base_.size(); ++i) gm.col(i) = base_[i];
    Vec p = linalg::project_onto_cone(gm, u);
    return (u - p).norm() <= radius_ + tol;
  }
  const double shrink = radius_ < 0.0 ? -radius_ : 0.0;
  if (normals_.empty()) return angle_to_base(v) <= tol;
  for (const auto& n : normals_)
    if (n.dot(v) < (shrink - tol) * nv) return false;
  return true;
}

std::vector<Vec> ConeDescriptor::generators() const {
  if (radius_ == 0.0 || dim() <= 1) {
    if (round_angle_ >= 0.0 && span_.rows() == 2) {
      Vec perp(2);
      perp << -axis_(1), axis_(0);
      return {rotate_in_plane(axis_, perp, round_angle_), rotate_in_plane(axis_, perp, -round_angle_)};
    }
    return base_;
  }
  const double ang = std::asin(std::min(std::abs(radius_), 1.0));
  Vec center = Vec::Zero(span_.rows());
  for (const auto& g : base_) center += g;
  center.normalize();
  std::vector<Vec> out;
  if (dim() == 2 && base_.size() == 2) {
    // Rotate each boundary ray away from (r > 0) or towards (r < 0) the other.
    for (int i = 0; i < 2; ++i) {
      const Vec& g = base_[i];
      const Vec& other = base_[1 - i];
      out.push_back(rotate_in_plane(g, other, radius_ > 0 ? -ang : ang));
    }
    return out;
  }
  for (const auto& g : base_) {
    const double to_center = linalg::angle_between(g, center);
    if (radius_ > 0) out.push_back(rotate_in_plane(g, center, -ang));
    else out.push_back(rotate_in_plane(g, center, std::min(ang, to_center)));
  }
  return out;
}

ConeDescriptor ConeDescriptor::enlarged(double r) const {
  if (radius_ != 0.0) throw Error(ErrorKind::InvalidInput, "cone is already enlarged");
  if (std::abs(r) >= 1.0) throw Error(ErrorKind::InvalidInput, "enlargement radius must lie in (-1, 1)");
  ConeDescriptor c = *this;
  c.radius_ = r;
  if (r == 0.0) return c;
  const double ang = std::asin(std::abs(r));
  if (round_angle_ >= 0.0) {
    if (r < 0.0) {
      if (round_angle_ < ang) throw Error(ErrorKind::EmptyCone, "shrunken round cone is empty");
      c.round_angle_ = round_angle_ - ang;
    } else {
      c.round_angle_ = round_angle_ + ang;
      if (c.round_angle_ >= std::numbers::pi / 2)
        throw Error(ErrorKind::InvalidInput, "widened cone is no longer pointed");
    }
    c.radius_ = 0.0;
    return c;
  }
  if (dim() == 2 && base_.size() == 2) {
    const double theta = linalg::angle_between(base_[0], base_[1]);
    if (r > 0 && theta + 2 * ang >= std::numbers::pi)
      throw Error(ErrorKind::InvalidInput, "widened cone is no longer pointed");
    if (r < 0 && theta - 2 * ang < -1e-12)
      throw Error(ErrorKind::EmptyCone, "shrunken cone is empty");
  } else if (r < 0 && dim() >= 2) {
    Vec center = Vec::Zero(span_.rows());
    for (const auto& g : base_) center += g;
    center.normalize();
    // Conservative: the central direction must survive the shrinkage.
    for (const auto& n : normals_)
      if (n.dot(center) < std::abs(r) - 1e-12)
        throw Error(ErrorKind::EmptyCone, "shrunken cone is empty");
  }
  return c;
}

ConeDescriptor ConeDescriptor::mapped(const Mat& p) const {
  std::vector<Vec> gens;
  for (const auto& g : generators()) {
    Vec q = p * g;
    if (q.norm() > 1e-14) gens.push_back(q);
  }
  return from_generators(gens);
}

ConeDescriptor cone_enlarge(const ExtremalCone& c, double r) {
  return ConeDescriptor::from_extremal(c).enlarged(r);
}

// ---------------------------------------------------------------------------
// Order intervals

bool Polytope::contains(const Vec& x, double tol) const {
  for (int i = 0; i < a.rows(); ++i)
    if (a.row(i).dot(x) > b(i) + tol) return false;
  return true;
}

Polytope order_interval(const ExtremalCone& c, const Vec& w, const Vec& wp, double tol) {
  const int d = static_cast<int>(w.size());
  Vec delta = wp - w;
  if (!c.contains(delta, tol)) throw Error(ErrorKind::EmptyInterval, "w' - w is not in the cone");
  const Mat& s = c.span;
  const int k = static_cast<int>(s.cols());
  const Mat& n = c.inequalities;
  const int m = static_cast<int>(n.rows());
  Mat perp = linalg::null_space(s.transpose(), d);

  Polytope out;
  out.a.resize(2 * m + 2 * perp.cols(), d);
  out.b.resize(out.a.rows());
  for (int j = 0; j < m; ++j) {
    out.a.row(j) = -n.row(j);
    out.b(j) = -n.row(j).dot(w);
    out.a.row(m + j) = n.row(j);
    out.b(m + j) = n.row(j).dot(wp);
  }
  for (int j = 0; j < perp.cols(); ++j) {
    out.a.row(2 * m + 2 * j) = perp.col(j).transpose();
    out.b(2 * m + 2 * j) = perp.col(j).dot(w);
    out.a.row(2 * m + 2 * j + 1) = -perp.col(j).transpose();
    out.b(2 * m + 2 * j + 1) = -perp.col(j).dot(w);
  }

  // Vertices in span coordinates t, x = w + S t.
  Mat ct(2 * m, k);
  Vec bt(2 * m);
  for (int j = 0; j < m; ++j) {
    ct.row(j) = -n.row(j) * s;
    bt(j) = 0.0;
    ct.row(m + j) = n.row(j) * s;
    bt(m + j) = n.row(j).dot(delta);
  }
  const double scale = std::max(1.0, delta.norm());
  for_each_subset(2 * m, k, [&](const std::vector<int>& rows) {
    Mat sub(k, k);
    Vec rhs(k);
    for (int i = 0; i < k; ++i) {
      sub.row(i) = ct.row(rows[i]);
      rhs(i) = bt(rows[i]);
    }
    if (linalg::rank(sub) < k) return true;
    Vec t = sub.fullPivLu().solve(rhs);
    for (int j = 0; j < 2 * m; ++j)
      if (ct.row(j).dot(t) > bt(j) + 1e-9 * scale) return true;
    Vec x = w + s * t;
    for (const auto& q : out.vertices)
      if ((q - x).norm() < 1e-9 * scale) return true;
    out.vertices.push_back(x);
    return true;
  });
  if (out.vertices.empty()) out.vertices.push_back(w);
  return out;
}

}  // namespace normot
