#include "normot/instances.hpp"

#include <algorithm>
#include <random>

#include "normot/error.hpp"

namespace normot {

Instance shift_instance(int n, const Vec& shift) {
  if (n < 1) throw Error(ErrorKind::InvalidInput, "grid size must be positive");
  if (shift.size() != 2) throw Error(ErrorKind::InvalidInput, "shift must be two-dimensional");
  Instance inst;
  inst.name = "shift";
  inst.mu = grid_sample([](const Vec&) { return 1.0; }, Box::unit(2), n);
  inst.nu = shift_measure(inst.mu, shift);
  inst.norm = make_norm(PolyhedralNorm::l1(2));
  return inst;
}

Instance shift_instance(int n) {
  Vec s(2);
  s << 2.0, 1.0;
  return shift_instance(n, s);
}

Instance identity_instance(int n) {
  Instance inst;
  inst.name = "identity";
  inst.mu = grid_sample([](const Vec&) { return 1.0; }, Box::unit(2), n);
  inst.nu = inst.mu;
  inst.norm = make_norm(PolyhedralNorm::l1(2));
  return inst;
}

Instance chain3_instance() {
  Instance inst;
  inst.name = "chain3";
  std::vector<Vec> xs, ys;
  for (int i = 0; i < 3; ++i) {
    xs.push_back(Vec::Constant(1, i));
    ys.push_back(Vec::Constant(1, i + 3));
  }
  inst.mu = DiscreteMeasure::uniform(xs);
  inst.nu = DiscreteMeasure::uniform(ys);
  inst.norm = make_norm(PolyhedralNorm::l1(1));
  return inst;
}

NormPtr random_norm(int dim, int pairs, unsigned seed) {
  if (dim < 1) throw Error(ErrorKind::InvalidInput, "dimension must be positive");
  if (dim == 1) return make_norm(PolyhedralNorm::l1(1));
  pairs = std::max(pairs, dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<Vec> verts;
    Mat span(pairs, dim);
    for (int p = 0; p < pairs; ++p) {
      Vec v(dim);
      for (int k = 0; k < dim; ++k) v(k) = g(rng);
      v.normalize();
      span.row(p) = v.transpose();
      verts.push_back(v);
      verts.push_back(-v);
    }
    Eigen::JacobiSVD<Mat> svd(span);
    if (svd.singularValues()(dim - 1) < 0.2) continue;  // keep the ball away from flat
    return make_norm(PolyhedralNorm(verts));
  }
  return make_norm(PolyhedralNorm::l1(dim));
}

Instance random_instance(const RandomInstanceSpec& spec, unsigned seed) {
  if (spec.n < 1 || spec.m < 1) throw Error(ErrorKind::InvalidInput, "instance sizes must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto cloud = [&](int count) {
    std::vector<Vec> pts;
    std::vector<double> w;
    for (int i = 0; i < count; ++i) {
      Vec p(spec.dim);
      for (int k = 0; k < spec.dim; ++k) p(k) = unit(rng);
      pts.push_back(p);
      w.push_back(spec.uniform_weights ? 1.0 : 0.2 + unit(rng));
    }
    double total = 0.0;
    for (double x : w) total += x;
    for (double& x : w) x /= total;
    return DiscreteMeasure::make(std::move(pts), std::move(w));
  };
  Instance inst;
  inst.name = "random";
  inst.mu = cloud(spec.n);
  inst.nu = cloud(spec.m);
  std::uniform_int_distribution<int> pick(spec.dim, std::max(spec.dim, spec.max_vertices / 2));
  inst.norm = random_norm(spec.dim, pick(rng), static_cast<unsigned>(rng()));
  return inst;
}

}  // namespace normot
