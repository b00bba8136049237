#include "normot/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "normot/error.hpp"

namespace normot::io {

using nlohmann::json;

namespace {

std::string num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(trim(cur));
  return out;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

template <class F>
auto json_guard(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << text;
}

NormPtr parse_norm_json(const std::string& text) {
  return json_guard([&] {
    const json j = json::parse(text);
    const int dim = j.at("dim").get<int>();
    std::vector<Vec> verts;
    for (const auto& row : j.at("dual_vertices")) {
      const auto vals = row.get<std::vector<double>>();
      if (static_cast<int>(vals.size()) != dim) throw Error(ErrorKind::Parse, "dual vertex has the wrong dimension");
      verts.push_back(Eigen::Map<const Vec>(vals.data(), dim));
    }
    return make_norm(PolyhedralNorm(std::move(verts)));
  });
}

std::string norm_to_json(const PolyhedralNorm& n) {
  json j;
  j["dim"] = n.dim();
  j["dual_vertices"] = json::array();
  for (const auto& v : n.dual_vertices()) j["dual_vertices"].push_back(vec_json(v));
  return j.dump(2) + "\n";
}

NormPtr norm_from_spec(const std::string& spec, int dim) {
  if (spec == "l1") return make_norm(PolyhedralNorm::l1(dim));
  if (spec == "linf") return make_norm(PolyhedralNorm::linf(dim));
  if (spec.rfind("poly:", 0) == 0) {
    NormPtr n = parse_norm_json(read_file(spec.substr(5)));
    if (n->dim() != dim) throw Error(ErrorKind::InvalidInput, "norm dimension differs from the measures");
    return n;
  }
  if (spec.rfind("polygon:", 0) == 0) {
    if (dim != 2) throw Error(ErrorKind::InvalidInput, "polygon norms are two-dimensional");
    int m = 0;
    const std::string tail = spec.substr(8);
    const auto res = std::from_chars(tail.data(), tail.data() + tail.size(), m);
    if (res.ec != std::errc() || res.ptr != tail.data() + tail.size())
      throw Error(ErrorKind::Parse, "bad polygon size: " + tail);
    return make_norm(PolyhedralNorm::regular_polygon(m));
  }
  throw Error(ErrorKind::InvalidInput, "unknown norm spec '" + spec + "'");
}

IndexSet parse_index_set(const std::string& text) {
  IndexSet out;
  for (const auto& tok : split(text, ',')) {
    if (tok.empty()) continue;
    int v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || v < 0)
      throw Error(ErrorKind::Parse, "bad index '" + tok + "'");
    out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string plan_to_csv(const TransportPlan& plan, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                        const CostFn& cost) {
  std::string out = "i,j,mass,cost\n";
  for (const auto& e : plan.entries)
    out += std::to_string(e.i) + "," + std::to_string(e.j) + "," + num(e.mass) + "," +
           num(cost(mu.points[e.i], nu.points[e.j])) + "\n";
  return out;
}

TransportPlan parse_plan_csv(const std::string& text) {
  TransportPlan plan;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto f = split(line, ',');
    if (lineno == 1 && !f.empty() && f[0] == "i") continue;
    if (f.size() < 2) throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": expected i,j[,mass[,cost]]");
    PlanEntry e;
    char* end = nullptr;
    e.i = static_cast<int>(std::strtol(f[0].c_str(), &end, 10));
    if (*end || e.i < 0) throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": bad source index");
    e.j = static_cast<int>(std::strtol(f[1].c_str(), &end, 10));
    if (*end || e.j < 0) throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": bad target index");
    if (f.size() >= 3) {
      e.mass = std::strtod(f[2].c_str(), &end);
      if (*end || !(e.mass >= 0)) throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": bad mass");
    }
    if (f.size() >= 4) {
      const double c = std::strtod(f[3].c_str(), &end);
      if (*end) throw Error(ErrorKind::Parse, "line " + std::to_string(lineno) + ": bad cost");
      plan.cost_value += e.mass * c;
    }
    plan.entries.push_back(e);
  }
  return plan;
}

std::string potentials_to_csv(const Potential& p) {
  std::string out = "point_id,psi\n";
  for (size_t z = 0; z < p.psi.size(); ++z) out += std::to_string(z) + "," + num(p.psi[z]) + "\n";
  return out;
}

std::string partition_to_json(const DirectedPartition& part) {
  json a = json::array();
  for (const auto& c : part.cells) {
    json j;
    j["id"] = c.id;
    j["k"] = c.k;
    j["cone_active_set"] = c.cone_active_set;
    j["members"] = c.members;
    j["flags"] = flag_names(c.flags);
    json basis = json::array();
    for (int col = 0; col < c.basis.cols(); ++col) basis.push_back(vec_json(c.basis.col(col)));
    j["basis"] = basis;
    a.push_back(j);
  }
  return a.dump(2) + "\n";
}

DirectedPartition parse_partition_json(const std::string& text, const DiscreteMeasure& mu, const NormPtr& norm) {
  return json_guard([&] {
    const json a = json::parse(text);
    if (!a.is_array()) throw Error(ErrorKind::Parse, "partition JSON must be an array");
    DirectedPartition part;
    part.dim = mu.dim;
    part.cell_of.assign(mu.size(), -1);
    for (const auto& j : a) {
      PartitionCell c;
      c.id = j.at("id").get<int>();
      c.k = j.at("k").get<int>();
      c.cone_active_set = j.at("cone_active_set").get<IndexSet>();
      c.members = j.at("members").get<std::vector<int>>();
      for (const auto& f : j.at("flags").get<std::vector<std::string>>()) {
        if (f == "regular") c.flags.regular = true;
        else if (f == "initial") c.flags.initial = true;
        else if (f == "final") c.flags.final_ = true;
        else if (f == "fixed") c.flags.fixed = true;
        else if (f == "residual") c.flags.residual = true;
        else throw Error(ErrorKind::Parse, "unknown flag " + f);
      }
      const auto cols = j.at("basis");
      c.basis = Mat::Zero(mu.dim, cols.size());
      for (size_t col = 0; col < cols.size(); ++col) {
        const auto vals = cols[col].get<std::vector<double>>();
        if (static_cast<int>(vals.size()) != mu.dim) throw Error(ErrorKind::Parse, "basis vector has the wrong dimension");
        c.basis.col(col) = Eigen::Map<const Vec>(vals.data(), mu.dim);
      }
      if (c.members.empty()) throw Error(ErrorKind::Parse, "cell without members");
      for (int m : c.members) {
        if (m < 0 || m >= mu.size()) throw Error(ErrorKind::Parse, "member index out of range");
        part.cell_of[m] = static_cast<int>(part.cells.size());
      }
      c.base_point = mu.points[c.members.front()];
      if (norm && c.k > 0 && !c.cone_active_set.empty()) c.cone = extremal_cone(norm, c.cone_active_set);
      if (c.id != static_cast<int>(part.cells.size())) throw Error(ErrorKind::Parse, "cell ids must be 0..n-1 in order");
      part.cells.push_back(std::move(c));
    }
    return part;
  });
}

std::string class_dump_to_json(const std::vector<ClassDumpEntry>& dump) {
  json a = json::array();
  for (const auto& e : dump) {
    json j;
    j["fiber"] = e.fiber;
    j["class_key_bits"] = e.key_bits;
    j["members"] = e.members;
    a.push_back(j);
  }
  return a.dump(2) + "\n";
}

std::string map_to_csv(const std::vector<int>& target_of) {
  std::string out = "source_id,target_id\n";
  for (size_t i = 0; i < target_of.size(); ++i) out += std::to_string(i) + "," + std::to_string(target_of[i]) + "\n";
  return out;
}

std::string residual_to_csv(const std::vector<PlanEntry>& residual) {
  std::string out = "i,j,mass\n";
  for (const auto& e : residual) out += std::to_string(e.i) + "," + std::to_string(e.j) + "," + num(e.mass) + "\n";
  return out;
}

std::string pushforward_to_json(const PushforwardReport& r) {
  json j;
  j["s"] = r.s;
  j["t"] = r.t;
  j["epsilon"] = r.epsilon;
  j["bandwidth"] = r.bandwidth;
  j["section_dim"] = r.section_dim;
  j["bound"] = r.bound;
  j["max_ratio"] = r.max_ratio;
  j["min_ratio"] = r.min_ratio;
  j["max_violation"] = r.max_violation;
  return j.dump(2) + "\n";
}

std::string density_series_csv(const DisintegrationReport& r) {
  std::string out = "slice,cell,t,density\n";
  for (const auto& p : r.cells)
    for (size_t k = 0; k < p.t.size(); ++k)
      out += std::to_string(p.slice) + "," + std::to_string(p.cell) + "," + num(p.t[k]) + "," + num(p.profile[k]) + "\n";
  return out;
}

}  // namespace normot::io
