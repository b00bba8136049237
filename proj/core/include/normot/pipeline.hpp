#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "normot/diagnostics.hpp"
#include "normot/error.hpp"
#include "normot/measures.hpp"
#include "normot/polynorm.hpp"

namespace normot {

struct PipelineConfig {
  std::string norm = "l1";
  std::string mu;       // measure file (CSV or JSON)
  std::string nu;
  std::string fixture;  // shift | identity | chain3 | ex_2ndmarg; overrides mu/nu
  int grid = 8;         // fixture resolution
  double face_tol = 1e-9;
  double duality_tol = 1e-9;
  double affine_tol = 1e-8;
  int cycle_budget = 8;
  int surrogate_rounds = 3;
  std::string output_dir = "run";
  unsigned seed = 0;

  static PipelineConfig from_json(const std::string& text);
  std::string to_json() const;
  void validate() const;
};

// Relative output directories are placed under $NORMOT_OUTPUT_ROOT when set.
std::string resolve_output_dir(const std::string& dir);

struct StageRecord {
  std::string name;
  bool ok = true;
  std::string message;
};

struct RunManifest {
  std::string output_dir;
  std::map<std::string, std::string> artifacts;  // name -> file name inside output_dir
  std::vector<StageRecord> stages;
  std::map<std::string, bool> verdicts;
  std::map<std::string, double> summary;
  std::vector<std::string> flags;
  std::optional<ErrorKind> error;
  bool ok() const;
  std::string to_json() const;
};

// Runs solve, decompose, cycles, map and diagnostics, persisting every stage
// and manifest.json. Stage errors end the run and are recorded, not thrown.
RunManifest run_pipeline(const PipelineConfig& cfg);

struct DiagnosticsSummary {
  std::string json;
  double initial_final_fraction = 0.0;
  std::optional<DisintegrationReport> density;
};

// Initial/final mass, sheaves, slices along each base cone axis with their
// push-forward ratios and density profiles.
DiagnosticsSummary diagnostics_report(const DirectedPartition& part, const DiscreteMeasure& mu);

struct SplitResult {
  std::string name;
  std::vector<Vec> targets;  // support of the split
  std::vector<double> nu1;   // mass routed through the first cell
  std::vector<double> nu2;
  bool feasible = false;
  double cost = 0.0;  // cone cost, +inf when infeasible
  std::string reason;
};

struct Example2ndMargReport {
  int n = 0;
  DiscreteMeasure mu;
  DiscreteMeasure nu;
  std::vector<Vec> cone1;  // generators
  std::vector<Vec> cone2;
  std::vector<int> cell_of;  // per source: 0 or 1
  std::vector<SplitResult> splits;
  int distinct_feasible = 0;
  bool multiple_decompositions = false;
  std::string to_json() const;
};

// Two directed 2-cells in R^3 carrying mu = segments at z1 = -1 and z1 = 1 to
// nu on z1 = 0, z3 = 1; n atoms per segment.
Example2ndMargReport run_example_2ndmarg(int n = 8);

struct PlotBundle {
  std::vector<std::string> files;
  std::vector<std::string> warnings;
};

// Tidy CSV series from a finished run: points by cell, rays, density profiles.
PlotBundle emit_plot_data(const std::string& manifest_path, const std::string& out_dir);

}  // namespace normot
