#pragma once

#include <string>

#include "normot/measures.hpp"
#include "normot/polynorm.hpp"

namespace normot {

struct Instance {
  std::string name;
  DiscreteMeasure mu;
  DiscreteMeasure nu;
  NormPtr norm;
};

// Uniform midpoint grid n x n on [0,1]^2, nu = mu + shift, l1 norm.
Instance shift_instance(int n, const Vec& shift);
Instance shift_instance(int n);  // shift (2, 1)
// nu = mu on an n x n grid.
Instance identity_instance(int n);
// mu = {0,1,2}, nu = {3,4,5} on the line.
Instance chain3_instance();

// Random symmetric norm with at most 2 * pairs dual vertices on the unit sphere.
NormPtr random_norm(int dim, int pairs, unsigned seed);

struct RandomInstanceSpec {
  int n = 10;
  int m = 10;
  int dim = 2;
  int max_vertices = 12;
  bool uniform_weights = false;
};

Instance random_instance(const RandomInstanceSpec& spec, unsigned seed);

}  // namespace normot
