#include "normot/pipeline.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "normot/cycles.hpp"
#include "normot/diagnostics.hpp"
#include "normot/instances.hpp"
#include "normot/io.hpp"
#include "normot/kantorovich.hpp"
#include "normot/monge.hpp"
#include "normot/partition.hpp"
#include "normot/sheaves.hpp"
#include "normot/transport_solver.hpp"

namespace normot {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

json vec_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json finite_or_string(double x) {
  if (std::isfinite(x)) return x;
  return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
}

struct Loaded {
  DiscreteMeasure mu;
  DiscreteMeasure nu;
  NormPtr norm;
};

Loaded load_inputs(const PipelineConfig& cfg) {
  Loaded in;
  if (cfg.fixture == "shift" || cfg.fixture == "identity" || cfg.fixture == "chain3") {
    const Instance inst = cfg.fixture == "shift"      ? shift_instance(cfg.grid)
                          : cfg.fixture == "identity" ? identity_instance(cfg.grid)
                                                      : chain3_instance();
    in.mu = inst.mu;
    in.nu = inst.nu;
  } else if (!cfg.fixture.empty()) {
    throw Error(ErrorKind::InvalidInput, "unknown fixture '" + cfg.fixture + "'");
  } else {
    in.mu = load_measure(cfg.mu);
    in.nu = load_measure(cfg.nu);
  }
  if (in.mu.dim != in.nu.dim) throw Error(ErrorKind::InvalidInput, "mu and nu live in different dimensions");
  in.norm = io::norm_from_spec(cfg.norm, in.mu.dim);
  return in;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const std::string& text) {
  PipelineConfig c;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw Error(ErrorKind::Parse, "config must be a JSON object");
    for (const auto& [key, val] : j.items()) {
      if (key == "norm") c.norm = val.get<std::string>();
      else if (key == "mu") c.mu = val.get<std::string>();
      else if (key == "nu") c.nu = val.get<std::string>();
      else if (key == "fixture") c.fixture = val.get<std::string>();
      else if (key == "grid") c.grid = val.get<int>();
      else if (key == "face_tol") c.face_tol = val.get<double>();
      else if (key == "duality_tol") c.duality_tol = val.get<double>();
      else if (key == "affine_tol") c.affine_tol = val.get<double>();
      else if (key == "cycle_budget") c.cycle_budget = val.get<int>();
      else if (key == "surrogate_rounds") c.surrogate_rounds = val.get<int>();
      else if (key == "output_dir") c.output_dir = val.get<std::string>();
      else if (key == "seed") c.seed = val.get<unsigned>();
      else throw Error(ErrorKind::Parse, "unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
  c.validate();
  return c;
}

std::string PipelineConfig::to_json() const {
  json j;
  j["norm"] = norm;
  j["mu"] = mu;
  j["nu"] = nu;
  j["fixture"] = fixture;
  j["grid"] = grid;
  j["face_tol"] = face_tol;
  j["duality_tol"] = duality_tol;
  j["affine_tol"] = affine_tol;
  j["cycle_budget"] = cycle_budget;
  j["surrogate_rounds"] = surrogate_rounds;
  j["output_dir"] = output_dir;
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

void PipelineConfig::validate() const {
  if (!(face_tol > 0) || !(duality_tol > 0) || !(affine_tol > 0))
    throw Error(ErrorKind::InvalidInput, "tolerances must be positive");
  if (cycle_budget < 1) throw Error(ErrorKind::InvalidInput, "cycle_budget must be positive");
  if (surrogate_rounds < 0) throw Error(ErrorKind::InvalidInput, "surrogate_rounds must be non-negative");
  if (grid < 1) throw Error(ErrorKind::InvalidInput, "grid must be positive");
  if (fixture.empty() && (mu.empty() || nu.empty()))
    throw Error(ErrorKind::InvalidInput, "mu and nu are required without a fixture");
  if (output_dir.empty()) throw Error(ErrorKind::InvalidInput, "output_dir is empty");
}

std::string resolve_output_dir(const std::string& dir) {
  const fs::path p(dir);
  if (p.is_absolute()) return p.string();
  if (const char* root = std::getenv("NORMOT_OUTPUT_ROOT"); root && *root) return (fs::path(root) / p).string();
  return p.string();
}

bool RunManifest::ok() const {
  if (error) return false;
  for (const auto& s : stages)
    if (!s.ok) return false;
  for (const auto& [k, v] : verdicts)
    if (!v) return false;
  return true;
}

std::string RunManifest::to_json() const {
  json j;
  j["output_dir"] = output_dir;
  j["artifacts"] = artifacts;
  json st = json::array();
  for (const auto& s : stages) st.push_back({{"name", s.name}, {"ok", s.ok}, {"message", s.message}});
  j["stages"] = st;
  j["verdicts"] = verdicts;
  json sm = json::object();
  for (const auto& [k, v] : summary) sm[k] = finite_or_string(v);
  j["summary"] = sm;
  j["flags"] = flags;
  j["error"] = error ? json(to_string(*error)) : json(nullptr);
  j["ok"] = ok();
  return j.dump(2) + "\n";
}

RunManifest run_pipeline(const PipelineConfig& cfg) {
  RunManifest man;
  man.output_dir = resolve_output_dir(cfg.output_dir);
  const fs::path out(man.output_dir);
  auto emit = [&](const std::string& name, const std::string& file, const std::string& text) {
    io::write_file((out / file).string(), text);
    man.artifacts[name] = file;
  };
  auto stage = [&](const std::string& name, const std::function<std::string()>& body) {
    if (man.error) return;
    StageRecord rec{name, true, ""};
    try {
      rec.message = body();
    } catch (const Error& e) {
      rec.ok = false;
      rec.message = e.what();
      man.error = e.kind();
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.message = e.what();
      man.error = ErrorKind::InternalConsistency;
    }
    man.stages.push_back(rec);
  };

  stage("config", [&] {
    cfg.validate();
    emit("config", "config.json", cfg.to_json());
    return std::string();
  });

  if (!man.error && cfg.fixture == "ex_2ndmarg") {
    stage("example_2ndmarg", [&] {
      const Example2ndMargReport rep = run_example_2ndmarg(cfg.grid);
      emit("example", "example_2ndmarg.json", rep.to_json());
      man.verdicts["multiple_decompositions"] = rep.multiple_decompositions;
      man.summary["distinct_feasible_splits"] = rep.distinct_feasible;
      if (rep.multiple_decompositions) man.flags.push_back("multiple admissible second-marginal decompositions");
      return std::string();
    });
    io::write_file((out / "manifest.json").string(), man.to_json());
    return man;
  }

  Loaded in;
  CostFn cost;
  TransportPlan plan;
  Decomposition dec;
  SecondaryPlan sec;

  stage("load", [&] {
    in = load_inputs(cfg);
    cost = norm_cost(in.norm);
    emit("mu", "mu.json", measure_to_json(in.mu));
    emit("nu", "nu.json", measure_to_json(in.nu));
    emit("norm", "norm.json", io::norm_to_json(*in.norm));
    man.summary["n_sources"] = in.mu.size();
    man.summary["n_targets"] = in.nu.size();
    return std::string();
  });

  stage("solve", [&] {
    plan = solve_primal(in.mu, in.nu, cost);
    const Potential pot = extract_potentials(plan, in.mu, in.nu, cost);
    const double gap = duality_gap(plan, pot, in.mu, in.nu);
    emit("plan", "plan.csv", io::plan_to_csv(plan, in.mu, in.nu, cost));
    emit("potentials", "potentials.csv", io::potentials_to_csv(pot));
    man.summary["cost"] = plan.cost_value;
    man.summary["duality_gap"] = gap;
    man.verdicts["strong_duality"] = std::abs(gap) <= cfg.duality_tol * std::max(1.0, std::abs(plan.cost_value));
    const Carriage car = Carriage::from_plan(plan);
    CycleCheckOptions co;
    co.seed = cfg.seed;
    const int len = static_cast<int>(car.pairs.size()) <= 8 ? 4 : 3;
    const CycleVerdict cv = check_cyclical_monotonicity(car, in.mu, in.nu, cost, len, co);
    man.verdicts["cyclical_monotonicity"] = cv.ok;
    man.summary["cycles_checked"] = static_cast<double>(cv.cycles_checked);
    return std::string();
  });

  stage("decompose", [&] {
    const Potential central = central_potential(plan, in.mu, in.nu, cost);
    PartitionOptions po;
    po.affine_tol = cfg.affine_tol;
    po.cone_tol = cfg.face_tol;
    dec = decompose(plan, central, in.mu, in.nu, in.norm, cfg.face_tol, po);
    emit("partition", "partition.json", io::partition_to_json(dec.partition));
    man.summary["cells"] = dec.partition.cells.size();
    man.summary["residual_pairs"] = dec.partition.residual_pairs;
    const long viol = completeness_violations(dec.partition, in.mu);
    man.summary["completeness_violations"] = static_cast<double>(viol);
    man.verdicts["partition_consistency"] = true;
    man.verdicts["completeness"] = viol == 0;
    return std::string();
  });

  stage("cycles", [&] {
    std::vector<ClassDumpEntry> dump;
    bool all_match = true;
    long compat = 0;
    for (const auto& cell : dec.partition.cells) {
      if (!cell.cone) continue;
      Carriage car;
      for (const auto& e : plan.entries)
        if (dec.partition.cell_of[e.i] == cell.id) car.pairs.emplace_back(e.i, e.j);
      if (car.pairs.empty()) continue;
      const CycleAnalysis ca = analyze_cycles(car, in.mu, in.nu, cone_cost_fn(*cell.cone), cell.members, cell.id);
      all_match = all_match && ca.matches_scc;
      compat += ca.compatibility_violations;
      dump.insert(dump.end(), ca.dump.begin(), ca.dump.end());
    }
    emit("classes", "classes.json", io::class_dump_to_json(dump));
    man.verdicts["cycle_classes_match_scc"] = all_match;
    man.summary["compatibility_violations"] = static_cast<double>(compat);
    return std::string();
  });

  stage("map", [&] {
    sec = secondary_select(in.mu, in.nu, cost, plan);
    MapOptions mo;
    mo.surrogate_rounds = cfg.surrogate_rounds;
    mo.cone_tol = cfg.face_tol;
    const MapResult mr = assemble_map(dec.partition, sec.plan, in.mu, in.nu, mo);
    emit("map", "map.csv", io::map_to_csv(mr.target_of));
    emit("residual", "residual.csv", io::residual_to_csv(mr.residual));
    double mc = 0.0;
    for (const auto& e : mr.coupling) mc += e.mass * cost(in.mu.points[e.i], in.nu.points[e.j]);
    man.summary["map_cost"] = mc;
    man.summary["split_atoms"] = mr.split_atoms.size();
    man.summary["unresolved_cells"] = mr.unresolved_cells;
    man.verdicts["map_cost_optimal"] = std::abs(mc - plan.cost_value) <= 1e-9 * std::max(1.0, plan.cost_value);
    if (mr.is_map) {
      const PushforwardVerdict pv = verify_pushforward(mr.target_of, in.mu, in.nu);
      man.verdicts["map_pushforward"] = pv.ok;
      man.flags.push_back("monge map");
    }
    return std::string();
  });

  stage("diagnostics", [&] {
    const DiagnosticsSummary d = diagnostics_report(dec.partition, in.mu);
    man.summary["initial_final_fraction"] = d.initial_final_fraction;
    if (d.density) emit("density", "density.csv", io::density_series_csv(*d.density));
    emit("diagnostics", "diagnostics.json", d.json);
    return std::string();
  });

  io::write_file((out / "manifest.json").string(), man.to_json());
  return man;
}

DiagnosticsSummary diagnostics_report(const DirectedPartition& part, const DiscreteMeasure& mu) {
  DiagnosticsSummary out;
  json rep;
  double ini = 0.0, fin = 0.0;
  out.initial_final_fraction = initial_final_fraction(part, mu, &ini, &fin);
  rep["initial_final_fraction"] = out.initial_final_fraction;
  rep["initial_fraction"] = ini;
  rep["final_fraction"] = fin;
  json notes = json::array();
  json ratios = json::array();
  std::vector<Slice1D> usable;
  try {
    const auto sheaves = decompose_sheaves(part, mu);
    rep["sheaves"] = sheaves.size();
    for (const auto& sh : sheaves) {
      if (sh.trivial || !sh.base_cone || sh.k > 2) continue;
      Vec dir = Vec::Zero(sh.k);
      for (const auto& g : sh.base_cone->base_generators()) dir += g;
      for (const auto& s : extract_slices(part, sh, mu, {dir.normalized()})) {
        if (s.size() < 16) {
          notes.push_back("sheaf " + std::to_string(sh.id) + ": slice with fewer than 16 segments");
          continue;
        }
        const double a = s.h_lo + 0.25 * (s.h_hi - s.h_lo);
        const double b = s.h_lo + 0.75 * (s.h_hi - s.h_lo);
        json r = json::parse(io::pushforward_to_json(pushforward_ratio(s, a, b)));
        r["sheaf"] = sh.id;
        ratios.push_back(r);
        usable.push_back(s);
      }
    }
  } catch (const Error& e) {
    notes.push_back(std::string("sheaf diagnostics skipped: ") + e.what());
  }
  rep["pushforward"] = ratios;
  if (!usable.empty()) {
    out.density = disintegration_density(usable);
    rep["regular_like"] = out.density->regular_like;
  }
  rep["notes"] = notes;
  out.json = rep.dump(2) + "\n";
  return out;
}

std::string Example2ndMargReport::to_json() const {
  json j;
  j["n"] = n;
  json c1 = json::array(), c2 = json::array();
  for (const auto& g : cone1) c1.push_back(vec_json(g));
  for (const auto& g : cone2) c2.push_back(vec_json(g));
  j["cone1"] = c1;
  j["cone2"] = c2;
  json sp = json::array();
  for (const auto& s : splits) {
    json t = json::array();
    for (const auto& p : s.targets) t.push_back(vec_json(p));
    sp.push_back({{"name", s.name},
                  {"feasible", s.feasible},
                  {"cost", finite_or_string(s.cost)},
                  {"targets", t},
                  {"nu1", s.nu1},
                  {"nu2", s.nu2},
                  {"reason", s.reason}});
  }
  j["splits"] = sp;
  j["distinct_feasible"] = distinct_feasible;
  j["multiple_decompositions"] = multiple_decompositions;
  return j.dump(2) + "\n";
}

Example2ndMargReport run_example_2ndmarg(int n) {
  if (n < 2) throw Error(ErrorKind::InvalidInput, "need at least two atoms per segment");
  Example2ndMargReport rep;
  rep.n = n;
  std::vector<Vec> xs, ys;
  std::vector<double> wx, wy;
  for (int side = 0; side < 2; ++side)
    for (int i = 0; i < n; ++i) {
      Vec p(3);
      p << (side == 0 ? -1.0 : 1.0), 0.5 * (i + 0.5) / n, 0.0;
      xs.push_back(p);
      wx.push_back(0.5 / n);
      rep.cell_of.push_back(side);
    }
  for (int i = 0; i < n; ++i) {
    Vec p(3);
    p << 0.0, 0.5 * (i + 0.5) / n, 1.0;
    ys.push_back(p);
    wy.push_back(1.0 / n);
  }
  rep.mu = DiscreteMeasure::make(xs, wx);
  rep.nu = DiscreteMeasure::make(ys, wy);
  auto gen = [](double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
  };
  rep.cone1 = {gen(1, 1, 1), gen(1, -1, 1)};
  rep.cone2 = {gen(-1, 1, 1), gen(-1, -1, 1)};
  const ConeDescriptor k1 = ConeDescriptor::from_generators(rep.cone1);
  const ConeDescriptor k2 = ConeDescriptor::from_generators(rep.cone2);

  // One cell's sources against a target measure, cone cost only.
  auto cell_feasible = [&](int side, const ConeDescriptor& cone, const std::vector<Vec>& tg,
                           const std::vector<double>& mass) {
    TransportProblem p;
    std::vector<int> src;
    for (int i = 0; i < rep.mu.size(); ++i)
      if (rep.cell_of[i] == side) {
        src.push_back(i);
        p.supply.push_back(rep.mu.weights[i]);
      }
    p.demand = mass;
    double s = 0.0, d = 0.0;
    for (double v : p.supply) s += v;
    for (double v : p.demand) d += v;
    if (std::abs(s - d) > 1e-12) return false;
    for (size_t a = 0; a < src.size(); ++a)
      for (size_t b = 0; b < tg.size(); ++b)
        if (mass[b] > 0 && cone.contains(tg[b] - rep.mu.points[src[a]], 1e-12))
          p.arcs.push_back({static_cast<int>(a), static_cast<int>(b), 0.0});
    return transport_feasible(p);
  };

  auto run_split = [&](const std::string& name, std::vector<Vec> tg, std::vector<double> nu1,
                       std::vector<double> nu2) {
    SplitResult r;
    r.name = name;
    r.targets = std::move(tg);
    r.nu1 = std::move(nu1);
    r.nu2 = std::move(nu2);
    double m1 = 0.0, m2 = 0.0;
    for (double v : r.nu1) m1 += v;
    for (double v : r.nu2) m2 += v;
    const bool f1 = cell_feasible(0, k1, r.targets, r.nu1);
    const bool f2 = cell_feasible(1, k2, r.targets, r.nu2);
    r.feasible = f1 && f2;
    r.cost = r.feasible ? 0.0 : kInf;
    if (!r.feasible) {
      if (std::abs(m1 - 0.5) > 1e-12 || std::abs(m2 - 0.5) > 1e-12) r.reason = "cell masses differ from the split";
      else r.reason = "target outside the reachable cone shadow";
    }
    rep.splits.push_back(std::move(r));
  };

  std::vector<double> half(n), lower(n, 0.0), upper(n, 0.0), zero(n, 0.0);
  for (int j = 0; j < n; ++j) {
    half[j] = 0.5 * rep.nu.weights[j];
    (2 * j < n ? lower : upper)[j] = rep.nu.weights[j];
  }
  if (n % 2 == 1) {  // split the middle atom evenly
    lower[n / 2] = upper[n / 2] = 0.5 * rep.nu.weights[n / 2];
  }
  run_split("equal", ys, half, half);
  run_split("lower_upper", ys, lower, upper);
  run_split("upper_lower", ys, upper, lower);
  run_split("all_first_cell", ys, rep.nu.weights, zero);
  // Half of the first cell's mass sent to a point no source of that cell reaches.
  std::vector<Vec> far = ys;
  far.push_back(gen(0.0, 2.0, 1.0));
  std::vector<double> f1(n + 1, 0.0), f2(n + 1, 0.0);
  for (int j = 0; j < n; ++j) {
    f1[j] = 0.5 * half[j];
    f2[j] = half[j];
  }
  f1[n] = 0.25;
  run_split("outside_cone_shadow", far, f1, f2);

  std::vector<const SplitResult*> feas;
  for (const auto& s : rep.splits)
    if (s.feasible) {
      bool fresh = true;
      for (const auto* o : feas) {
        double diff = 0.0;
        for (size_t j = 0; j < s.nu1.size() && j < o->nu1.size(); ++j) diff += std::abs(s.nu1[j] - o->nu1[j]);
        if (s.targets.size() == o->targets.size() && diff < 1e-12) fresh = false;
      }
      if (fresh) feas.push_back(&s);
    }
  rep.distinct_feasible = static_cast<int>(feas.size());
  rep.multiple_decompositions = rep.distinct_feasible >= 2;
  return rep;
}

PlotBundle emit_plot_data(const std::string& manifest_path, const std::string& out_dir) {
  PlotBundle b;
  const json man = [&] {
    try {
      return json::parse(io::read_file(manifest_path));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Parse, e.what());
    }
  }();
  const fs::path run = man.value("output_dir", fs::path(manifest_path).parent_path().string());
  const json arts = man.value("artifacts", json::object());
  auto artifact = [&](const std::string& key) -> std::optional<std::string> {
    if (!arts.contains(key)) {
      b.warnings.push_back("missing artifact: " + key);
      return std::nullopt;
    }
    const fs::path p = run / arts[key].get<std::string>();
    if (!fs::exists(p)) {
      b.warnings.push_back("artifact file not found: " + p.string());
      return std::nullopt;
    }
    return p.string();
  };
  auto write = [&](const std::string& name, const std::string& text) {
    const std::string path = (fs::path(out_dir) / name).string();
    io::write_file(path, text);
    b.files.push_back(path);
  };

  std::optional<DiscreteMeasure> mu, nu;
  if (auto p = artifact("mu")) mu = load_measure(*p);
  if (auto p = artifact("nu")) nu = load_measure(*p);

  if (auto p = artifact("partition"); p && mu) {
    const DirectedPartition part = io::parse_partition_json(io::read_file(*p), *mu, nullptr);
    std::ostringstream s;
    s << "point";
    for (int k = 0; k < mu->dim; ++k) s << ",x" << k + 1;
    s << ",cell,k,flags\n";
    for (int i = 0; i < mu->size(); ++i) {
      s << i;
      for (int k = 0; k < mu->dim; ++k) s << "," << mu->points[i](k);
      const int c = part.cell_of[i];
      std::string flags;
      if (c >= 0)
        for (const auto& f : flag_names(part.cells[c].flags)) flags += (flags.empty() ? "" : "|") + f;
      s << "," << c << "," << (c >= 0 ? part.cells[c].k : -1) << "," << flags << "\n";
    }
    write("partition_points.csv", s.str());
  }
  if (auto p = artifact("plan"); p && mu && nu) {
    const TransportPlan plan = io::parse_plan_csv(io::read_file(*p));
    std::ostringstream s;
    s << "i,j,mass";
    for (int k = 0; k < mu->dim; ++k) s << ",x" << k + 1;
    for (int k = 0; k < nu->dim; ++k) s << ",y" << k + 1;
    s << "\n";
    for (const auto& e : plan.entries) {
      if (e.i >= mu->size() || e.j >= nu->size()) {
        b.warnings.push_back("plan entry out of range");
        continue;
      }
      s << e.i << "," << e.j << "," << e.mass;
      for (int k = 0; k < mu->dim; ++k) s << "," << mu->points[e.i](k);
      for (int k = 0; k < nu->dim; ++k) s << "," << nu->points[e.j](k);
      s << "\n";
    }
    write("rays.csv", s.str());
  }
  if (arts.contains("density")) {
    if (auto p = artifact("density")) write("density_profiles.csv", io::read_file(*p));
  }
  return b;
}

}  // namespace normot
