#pragma once

#include "normot/types.hpp"

namespace normot::linalg {

// Numerical rank with relative threshold on singular values.
int rank(const Mat& m, double rel_tol = 1e-10);

// Orthonormal basis (columns) of the null space of `m` (rows are constraints).
Mat null_space(const Mat& m, int cols, double rel_tol = 1e-10);

// Orthonormal basis of the column span of `m`.
Mat column_span(const Mat& m, double rel_tol = 1e-10);

// Lawson-Hanson non-negative least squares: argmin_{x >= 0} |A x - b|.
Vec nnls(const Mat& a, const Vec& b, int max_iter = 0);

// Euclidean projection of v onto the cone generated by the columns of g.
Vec project_onto_cone(const Mat& g, const Vec& v);

double angle_between(const Vec& a, const Vec& b);

// Closest distance between segments [p0,p1] and [q0,q1] in R^d.
double segment_distance(const Vec& p0, const Vec& p1, const Vec& q0,
                        const Vec& q1);

}  // namespace normot::linalg
