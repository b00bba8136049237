#pragma once

#include <memory>
#include <string>
#include <vector>

#include "normot/types.hpp"

namespace normot {

constexpr double kDefaultFaceTol = 1e-9;

// |x| = max_v v.x over the vertices of the dual ball.
class PolyhedralNorm {
 public:
  explicit PolyhedralNorm(std::vector<Vec> dual_vertices);

  static PolyhedralNorm l1(int dim);
  static PolyhedralNorm linf(int dim);
  // Regular m-gon dual ball in R^2 with the first vertex at angle `phase`.
  static PolyhedralNorm regular_polygon(int m, double phase = 0.0);
  // Unit ball given by its own vertices; converted to dual vertices by facet
  // enumeration.
  static PolyhedralNorm from_primal_vertices(const std::vector<Vec>& vertices);

  int dim() const { return dim_; }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  const std::vector<Vec>& dual_vertices() const { return vertices_; }
  const Mat& dual_matrix() const { return v_; }
  bool symmetric() const { return symmetric_; }
  bool symmetry_checked() const { return true; }

  double value(const Vec& x) const;
  IndexSet active_set(const Vec& x, double tol = kDefaultFaceTol) const;

 private:
  int dim_ = 0;
  std::vector<Vec> vertices_;
  Mat v_;  // one dual vertex per row
  bool symmetric_ = false;
};

using NormPtr = std::shared_ptr<const PolyhedralNorm>;

double norm_value(const PolyhedralNorm& n, const Vec& x);
IndexSet active_set(const PolyhedralNorm& n, const Vec& x,
                    double tol = kDefaultFaceTol);

// Cone {x : A ⊆ active(x)} of the normal fan of the dual ball.
struct ExtremalCone {
  NormPtr norm;
  IndexSet active_set;
  int dim = 0;
  std::vector<Vec> generators;  // unit extreme rays
  Mat span;                     // d x k orthonormal basis of span(C)
  Mat inequalities;             // rows n with n.x >= 0 on C (facet normals)

  bool contains(const Vec& v, double tol = kDefaultFaceTol) const;
  // Normalized sum of generators, a relative interior direction.
  Vec central_direction() const;
};

ExtremalCone extremal_cone(const NormPtr& norm, const IndexSet& active);

IndexSet minimal_face(const PolyhedralNorm& n, const std::vector<Vec>& dirs,
                      double tol = kDefaultFaceTol);
ExtremalCone minimal_extremal_cone(const NormPtr& norm,
                                   const std::vector<Vec>& dirs,
                                   double tol = kDefaultFaceTol);

// 0 if y - x lies in C, +inf otherwise.
double cone_cost(const ExtremalCone& c, const Vec& x, const Vec& y,
                 double tol = kDefaultFaceTol);

// Generic pointed cone inside a linear subspace, optionally widened (r > 0)
// or shrunk (r < 0) by the spherical neighbourhood construction.
class ConeDescriptor {
 public:
  ConeDescriptor() = default;
  // Cone generated by `generators` (columns of nothing else); span inferred.
  static ConeDescriptor from_generators(const std::vector<Vec>& generators);
  static ConeDescriptor from_extremal(const ExtremalCone& c);
  // Round cone of half-angle `angle` about `axis` (full ambient space).
  static ConeDescriptor round(const Vec& axis, double angle);

  int ambient_dim() const { return static_cast<int>(span_.rows()); }
  int dim() const { return static_cast<int>(span_.cols()); }
  double radius() const { return radius_; }
  const Mat& span() const { return span_; }
  const std::vector<Vec>& base_generators() const { return base_; }

  bool contains(const Vec& v, double tol = 1e-9) const;
  // Exact extreme rays for k <= 2; for k >= 3 and r != 0 the base generators
  // rotated about the central axis (an approximation of a round boundary).
  std::vector<Vec> generators() const;
  // Angle from v to the base cone (0 if inside).
  double angle_to_base(const Vec& v) const;
  ConeDescriptor enlarged(double r) const;
  // Image under a linear map (rows of `p` are the new coordinates).
  ConeDescriptor mapped(const Mat& p) const;

 private:
  Mat span_;               // d x k orthonormal
  std::vector<Vec> base_;  // unit generators of the base cone
  std::vector<Vec> normals_;  // unit inward normals inside span
  double radius_ = 0.0;
  double round_angle_ = -1.0;  // >= 0 for round cones
  Vec axis_;
};

ConeDescriptor cone_enlarge(const ExtremalCone& c, double r);

struct Polytope {
  Mat a;  // a x <= b
  Vec b;
  std::vector<Vec> vertices;
  bool contains(const Vec& x, double tol = 1e-9) const;
};

// (w + C) ∩ (w' - C).
Polytope order_interval(const ExtremalCone& c, const Vec& w, const Vec& wp,
                        double tol = kDefaultFaceTol);

NormPtr make_norm(PolyhedralNorm n);

}  // namespace normot
