#pragma once

#include <functional>
#include <string>
#include <vector>

#include "normot/types.hpp"

namespace normot {

constexpr double kSnapTol = 1e-12;

struct DiscreteMeasure {
  int dim = 0;
  std::vector<Vec> points;
  std::vector<double> weights;

  // Validates, merges points closer than `snap_tol` and renormalizes weights
  // whose sum is within 1e-6 of one. Throws otherwise.
  static DiscreteMeasure make(std::vector<Vec> points, std::vector<double> weights,
                              double snap_tol = kSnapTol);
  static DiscreteMeasure uniform(std::vector<Vec> points);

  int size() const { return static_cast<int>(points.size()); }
  double total_mass() const;
};

enum class MeasureFormat { Csv, Json };

MeasureFormat measure_format_from_path(const std::string& path);
DiscreteMeasure parse_measure_csv(const std::string& text);
DiscreteMeasure parse_measure_json(const std::string& text);
DiscreteMeasure load_measure(const std::string& path, MeasureFormat format);
DiscreteMeasure load_measure(const std::string& path);
std::string measure_to_csv(const DiscreteMeasure& m);
std::string measure_to_json(const DiscreteMeasure& m);
void save_measure(const DiscreteMeasure& m, const std::string& path, MeasureFormat format);

struct Box {
  Vec lo;
  Vec hi;
  static Box unit(int dim);
};

using Density = std::function<double(const Vec&)>;

// Midpoint grid with weights proportional to the density at cell centres.
// The first coordinate varies fastest.
DiscreteMeasure grid_sample(const Density& density, const Box& box, int n_per_axis);
DiscreteMeasure shift_measure(const DiscreteMeasure& m, const Vec& s);

// "uniform" or an arithmetic expression in x1..xd (also x, y, z).
Density parse_density(const std::string& spec, int dim);

}  // namespace normot
