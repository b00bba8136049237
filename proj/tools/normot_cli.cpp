#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "normot/cycles.hpp"
#include "normot/diagnostics.hpp"
#include "normot/error.hpp"
#include "normot/io.hpp"
#include "normot/kantorovich.hpp"
#include "normot/measures.hpp"
#include "normot/monge.hpp"
#include "normot/partition.hpp"
#include "normot/pipeline.hpp"

using namespace normot;

namespace {

struct MeasureArgs {
  std::string mu;
  std::string nu;
  std::string grid;  // dxN
  std::string density = "uniform";
  std::string shift;  // comma separated, nu = mu + shift
};

void add_measure_flags(CLI::App* app, MeasureArgs& m, bool need_nu) {
  app->add_option("--mu", m.mu, "source measure (CSV or JSON)");
  if (need_nu) {
    app->add_option("--nu", m.nu, "target measure (CSV or JSON)");
    app->add_option("--shift", m.shift, "nu = mu shifted by this vector, e.g. 2,1");
  }
  app->add_option("--grid", m.grid, "sample mu on the unit box, e.g. 2x8");
  app->add_option("--density", m.density, "density for --grid: uniform or an expression in x1..xd");
}

Vec parse_vector(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || *end) throw Error(ErrorKind::Parse, "bad number '" + tok + "'");
    vals.push_back(v);
  }
  return Eigen::Map<const Vec>(vals.data(), vals.size());
}

DiscreteMeasure source_measure(const MeasureArgs& m) {
  if (!m.mu.empty()) return load_measure(m.mu);
  if (m.grid.empty()) throw Error(ErrorKind::InvalidInput, "either --mu or --grid is required");
  const auto x = m.grid.find('x');
  if (x == std::string::npos) throw Error(ErrorKind::Parse, "--grid expects dxN");
  const int d = std::stoi(m.grid.substr(0, x));
  const int n = std::stoi(m.grid.substr(x + 1));
  if (d < 1 || n < 1) throw Error(ErrorKind::InvalidInput, "--grid sizes must be positive");
  return grid_sample(parse_density(m.density, d), Box::unit(d), n);
}

DiscreteMeasure target_measure(const MeasureArgs& m, const DiscreteMeasure& mu) {
  if (!m.nu.empty()) return load_measure(m.nu);
  if (!m.shift.empty()) {
    const Vec s = parse_vector(m.shift);
    if (s.size() != mu.dim) throw Error(ErrorKind::InvalidInput, "--shift has the wrong dimension");
    return shift_measure(mu, s);
  }
  throw Error(ErrorKind::InvalidInput, "either --nu or --shift is required");
}

CostFn cost_for(const NormPtr& norm, const std::string& cone) {
  if (cone.empty()) return norm_cost(norm);
  return cone_cost_fn(extremal_cone(norm, io::parse_index_set(cone)), norm_cost(norm));
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") std::cout << text;
  else io::write_file(path, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal transport with polyhedral norm costs"};
  app.require_subcommand(1);

  MeasureArgs ma;
  std::string norm_spec = "l1", cone, out, plan_path, carriage_path, partition_path, report, config, extra, plot_dir;
  int rounds = 3, example_n = 8;

  auto* solve = app.add_subcommand("solve", "optimal plan, cost and potentials");
  add_measure_flags(solve, ma, true);
  solve->add_option("--norm", norm_spec, "l1 | linf | poly:<path> | polygon:<m>");
  solve->add_option("--cone", cone, "restrict to an extremal cone, e.g. 0,1");
  solve->add_option("--out", out, "plan CSV (default stdout)");
  solve->add_option("--potentials", extra, "potentials CSV");

  auto* decomp = app.add_subcommand("decompose", "directed locally affine partition");
  add_measure_flags(decomp, ma, true);
  decomp->add_option("--plan", plan_path, "plan CSV")->required();
  decomp->add_option("--norm", norm_spec);
  decomp->add_option("--out", out, "partition JSON (default stdout)");

  auto* cyc = app.add_subcommand("cycles", "cycle classes and preorder signature");
  add_measure_flags(cyc, ma, true);
  cyc->add_option("--carriage", carriage_path, "carriage CSV (i,j per line)")->required();
  cyc->add_option("--norm", norm_spec);
  cyc->add_option("--cone", cone, "cone active set for the cost (default: the norm cost)");
  cyc->add_option("--out", out, "class dump JSON (default stdout)");

  auto* map = app.add_subcommand("map", "transport map assembled cell by cell");
  add_measure_flags(map, ma, true);
  map->add_option("--norm", norm_spec);
  map->add_option("--rounds", rounds, "surrogate rounds for multi-dimensional cells");
  map->add_option("--out", out, "map CSV (default stdout)");
  map->add_option("--residual", extra, "residual CSV for split atoms");

  auto* diag = app.add_subcommand("diag", "slice, push-forward and boundary mass diagnostics");
  diag->add_option("--partition", partition_path, "partition JSON")->required();
  diag->add_option("--mu", ma.mu, "source measure")->required();
  diag->add_option("--norm", norm_spec);
  diag->add_option("--report", report, "report JSON (default stdout)");
  diag->add_option("--series", extra, "density series CSV");

  auto* pipe = app.add_subcommand("pipeline", "full chain with persisted artifacts");
  pipe->add_option("--config", config, "JSON config")->required();
  pipe->add_option("--plot-data", plot_dir, "also write plot series to this directory");

  auto* ex = app.add_subcommand("example-2ndmarg", "two-cell fixture with several second-marginal splits");
  ex->add_option("--n", example_n, "atoms per segment");
  ex->add_option("--out", out, "report JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*solve) {
      const DiscreteMeasure mu = source_measure(ma);
      const DiscreteMeasure nu = target_measure(ma, mu);
      const NormPtr norm = io::norm_from_spec(norm_spec, mu.dim);
      const CostFn cost = cost_for(norm, cone);
      const TransportPlan plan = solve_primal(mu, nu, cost);
      const Potential pot = extract_potentials(plan, mu, nu, cost);
      write_or_print(out, io::plan_to_csv(plan, mu, nu, cost));
      if (!extra.empty()) io::write_file(extra, io::potentials_to_csv(pot));
      std::cerr << "cost " << plan.cost_value << " duality_gap " << duality_gap(plan, pot, mu, nu) << "\n";
    } else if (*decomp) {
      const DiscreteMeasure mu = source_measure(ma);
      const DiscreteMeasure nu = target_measure(ma, mu);
      const NormPtr norm = io::norm_from_spec(norm_spec, mu.dim);
      const CostFn cost = norm_cost(norm);
      TransportPlan plan = io::parse_plan_csv(io::read_file(plan_path));
      for (const auto& e : plan.entries)
        if (e.i >= mu.size() || e.j >= nu.size()) throw Error(ErrorKind::InvalidInput, "plan index out of range");
      plan.cost_value = plan_cost(plan, mu, nu, cost);
      const Potential pot = central_potential(plan, mu, nu, cost);
      const Decomposition dec = decompose(plan, pot, mu, nu, norm);
      write_or_print(out, io::partition_to_json(dec.partition));
    } else if (*cyc) {
      const DiscreteMeasure mu = source_measure(ma);
      const DiscreteMeasure nu = target_measure(ma, mu);
      const NormPtr norm = io::norm_from_spec(norm_spec, mu.dim);
      const TransportPlan plan = io::parse_plan_csv(io::read_file(carriage_path));
      Carriage car;
      for (const auto& e : plan.entries) {
        if (e.i >= mu.size() || e.j >= nu.size()) throw Error(ErrorKind::InvalidInput, "carriage index out of range");
        car.pairs.emplace_back(e.i, e.j);
      }
      const CycleAnalysis ca = analyze_cycles(car, mu, nu, cost_for(norm, cone));
      write_or_print(out, io::class_dump_to_json(ca.dump));
      std::cerr << "classes " << ca.signature.classes.classes.size() << " matches_scc "
                << (ca.matches_scc ? "yes" : "no") << "\n";
      if (!ca.matches_scc) return 2;
    } else if (*map) {
      const DiscreteMeasure mu = source_measure(ma);
      const DiscreteMeasure nu = target_measure(ma, mu);
      const NormPtr norm = io::norm_from_spec(norm_spec, mu.dim);
      const CostFn cost = norm_cost(norm);
      const TransportPlan plan = solve_primal(mu, nu, cost);
      const Decomposition dec = decompose(plan, central_potential(plan, mu, nu, cost), mu, nu, norm);
      const SecondaryPlan sec = secondary_select(mu, nu, cost, plan);
      MapOptions mo;
      mo.surrogate_rounds = rounds;
      const MapResult mr = assemble_map(dec.partition, sec.plan, mu, nu, mo);
      write_or_print(out, io::map_to_csv(mr.target_of));
      if (!extra.empty()) io::write_file(extra, io::residual_to_csv(mr.residual));
      std::cerr << "is_map " << (mr.is_map ? "yes" : "no") << " split_atoms " << mr.split_atoms.size() << "\n";
    } else if (*diag) {
      const DiscreteMeasure mu = load_measure(ma.mu);
      const NormPtr norm = io::norm_from_spec(norm_spec, mu.dim);
      const DirectedPartition part = io::parse_partition_json(io::read_file(partition_path), mu, norm);
      const DiagnosticsSummary d = diagnostics_report(part, mu);
      write_or_print(report, d.json);
      if (!extra.empty() && d.density) io::write_file(extra, io::density_series_csv(*d.density));
    } else if (*pipe) {
      const PipelineConfig cfg = PipelineConfig::from_json(io::read_file(config));
      const RunManifest man = run_pipeline(cfg);
      std::cout << man.to_json();
      if (!plot_dir.empty() && man.artifacts.count("config")) {
        const PlotBundle b = emit_plot_data(man.output_dir + "/manifest.json", plot_dir);
        for (const auto& w : b.warnings) std::cerr << "warning: " << w << "\n";
      }
      if (man.error) return is_validation_error(*man.error) ? 1 : 2;
      if (!man.ok()) return 2;
    } else if (*ex) {
      const Example2ndMargReport rep = run_example_2ndmarg(example_n);
      write_or_print(out, rep.to_json());
      if (!rep.multiple_decompositions) return 2;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return is_validation_error(e.kind()) ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
