#include "normot/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace normot::linalg {

int rank(const Mat& m, double rel_tol) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 1e-300) return 0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

Mat null_space(const Mat& m, int cols, double rel_tol) {
  if (m.rows() == 0) return Mat::Identity(cols, cols);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  int r = 0;
  if (s.size() > 0 && s(0) > 1e-300)
    for (int i = 0; i < s.size(); ++i)
      if (s(i) > rel_tol * s(0)) ++r;
  return svd.matrixV().rightCols(cols - r);
}

Mat column_span(const Mat& m, double rel_tol) {
  if (m.cols() == 0) return Mat(m.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  int r = 0;
  if (s.size() > 0 && s(0) > 1e-300)
    for (int i = 0; i < s.size(); ++i)
      if (s(i) > rel_tol * s(0)) ++r;
  return svd.matrixU().leftCols(r);
}

Vec nnls(const Mat& a, const Vec& b, int max_iter) {
  const int n = static_cast<int>(a.cols());
  if (max_iter <= 0) max_iter = 3 * n + 30;
  Vec x = Vec::Zero(n);
  std::vector<bool> passive(n, false);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() *
                     std::max<double>(1.0, a.norm()) * std::max<int>(n, a.rows());
  Vec w = a.transpose() * (b - a * x);

  auto solve_passive = [&](Vec& z) {
    std::vector<int> idx;
    for (int j = 0; j < n; ++j)
      if (passive[j]) idx.push_back(j);
    z = Vec::Zero(n);
    if (idx.empty()) return;
    Mat ap(a.rows(), idx.size());
    for (size_t k = 0; k < idx.size(); ++k) ap.col(k) = a.col(idx[k]);
    Vec zp = ap.colPivHouseholderQr().solve(b);
    for (size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zp(k);
  };

  for (int outer = 0; outer < max_iter; ++outer) {
    int jmax = -1;
    double wmax = tol;
    for (int j = 0; j < n; ++j)
      if (!passive[j] && w(j) > wmax) {
        wmax = w(j);
        jmax = j;
      }
    if (jmax < 0) break;
    passive[jmax] = true;

    Vec z;
    for (int inner = 0; inner < max_iter; ++inner) {
      solve_passive(z);
      double alpha = std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j)
        if (passive[j] && z(j) <= tol) alpha = std::min(alpha, x(j) / (x(j) - z(j)));
      if (!std::isfinite(alpha)) break;
      x += alpha * (z - x);
      for (int j = 0; j < n; ++j)
        if (passive[j] && std::abs(x(j)) <= tol) {
          passive[j] = false;
          x(j) = 0.0;
        }
    }
    x = z;
    for (int j = 0; j < n; ++j)
      if (!passive[j]) x(j) = 0.0;
    w = a.transpose() * (b - a * x);
  }
  return x;
}

Vec project_onto_cone(const Mat& g, const Vec& v) {
  if (g.cols() == 0) return Vec::Zero(v.size());
  return g * nnls(g, v);
}

double angle_between(const Vec& a, const Vec& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  // Half-angle form, accurate near 0 and pi.
  const Vec ua = a / na, ub = b / nb;
  return 2.0 * std::atan2((ua - ub).norm(), (ua + ub).norm());
}

double segment_distance(const Vec& p0, const Vec& p1, const Vec& q0,
                        const Vec& q1) {
  const Vec d1 = p1 - p0, d2 = q1 - q0, r = p0 - q0;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  double s = 0.0, t = 0.0;
  const double eps = 1e-300;
  if (a <= eps && e <= eps) return r.norm();
  if (a <= eps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= eps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > 1e-14 * a * e ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return (p0 + s * d1 - (q0 + t * d2)).norm();
}

}  // namespace normot::linalg
