#include "normot/measures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "normot/error.hpp"

namespace normot {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << text;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& tok, double& out) {
  const std::string t = trim(tok);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

}  // namespace

DiscreteMeasure DiscreteMeasure::make(std::vector<Vec> points, std::vector<double> weights,
                                      double snap_tol) {
  if (points.size() != weights.size())
    throw Error(ErrorKind::InvalidInput, "points and weights differ in length");
  if (points.empty()) throw Error(ErrorKind::EmptyMeasure, "measure has no atoms");
  const int dim = static_cast<int>(points.front().size());
  if (dim < 1) throw Error(ErrorKind::InvalidInput, "points must have positive dimension");
  double sum = 0.0;
  for (size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != dim) throw Error(ErrorKind::InvalidInput, "inconsistent point dimension");
    if (!points[i].allFinite()) throw Error(ErrorKind::InvalidInput, "non-finite coordinate");
    if (!std::isfinite(weights[i])) throw Error(ErrorKind::InvalidInput, "non-finite weight");
    if (weights[i] < 0.0) throw Error(ErrorKind::InvalidInput, "negative weight");
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    std::ostringstream msg;
    msg << "weights sum to " << std::setprecision(12) << sum << ", expected 1";
    throw Error(ErrorKind::InvalidInput, msg.str());
  }

  // Merge near-duplicates: sweep in order of the first coordinate.
  std::vector<int> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return points[a](0) < points[b](0); });
  std::vector<int> rep(points.size(), -1);
  for (size_t a = 0; a < order.size(); ++a) {
    const int i = order[a];
    if (rep[i] >= 0) continue;
    rep[i] = i;
    for (size_t b = a + 1; b < order.size(); ++b) {
      const int j = order[b];
      if (points[j](0) - points[i](0) > snap_tol) break;
      if (rep[j] < 0 && (points[j] - points[i]).norm() <= snap_tol) rep[j] = i;
    }
  }
  DiscreteMeasure m;
  m.dim = dim;
  std::vector<int> slot(points.size(), -1);
  for (size_t i = 0; i < points.size(); ++i) {
    const int root = rep[i];
    if (slot[root] < 0) {
      slot[root] = m.size();
      m.points.push_back(points[root]);
      m.weights.push_back(0.0);
    }
    m.weights[slot[root]] += weights[i];
  }
  // Leave already-normalized input bit-identical so save/load round-trips.
  if (std::abs(sum - 1.0) > 1e-14)
    for (auto& w : m.weights) w /= sum;
  return m;
}

DiscreteMeasure DiscreteMeasure::uniform(std::vector<Vec> points) {
  const size_t n = points.size();
  if (n == 0) throw Error(ErrorKind::EmptyMeasure, "measure has no atoms");
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  return make(std::move(points), std::move(w));
}

double DiscreteMeasure::total_mass() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

MeasureFormat measure_format_from_path(const std::string& path) {
  const auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  if (ext == "json") return MeasureFormat::Json;
  return MeasureFormat::Csv;
}

DiscreteMeasure parse_measure_csv(const std::string& text) {
  std::vector<Vec> pts;
  std::vector<double> w;
  int cols = -1;
  int line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto toks = split(line, ',');
    std::vector<double> vals;
    bool numeric = true;
    for (const auto& t : toks) {
      double v;
      if (!parse_double(t, v)) {
        numeric = false;
        break;
      }
      vals.push_back(v);
    }
    if (!numeric) {
      if (pts.empty() && cols < 0) {
        cols = static_cast<int>(toks.size());  // header row
        continue;
      }
      throw Error(ErrorKind::Parse, "non-numeric value on line " + std::to_string(line_no));
    }
    if (cols < 0) cols = static_cast<int>(vals.size());
    if (static_cast<int>(vals.size()) != cols)
      throw Error(ErrorKind::Parse, "wrong column count on line " + std::to_string(line_no));
    if (cols < 2) throw Error(ErrorKind::Parse, "need at least one coordinate and a weight");
    Vec p(cols - 1);
    for (int i = 0; i < cols - 1; ++i) p(i) = vals[i];
    pts.push_back(p);
    w.push_back(vals.back());
  }
  if (pts.empty()) throw Error(ErrorKind::Parse, "no atoms in CSV");
  return DiscreteMeasure::make(std::move(pts), std::move(w));
}

DiscreteMeasure parse_measure_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorKind::Parse, std::string("measure JSON: ") + e.what());
  }
  try {
    const int dim = j.at("dim").get<int>();
    const auto& jp = j.at("points");
    const auto& jw = j.at("weights");
    std::vector<Vec> pts;
    std::vector<double> w;
    for (const auto& p : jp) {
      auto v = p.get<std::vector<double>>();
      if (static_cast<int>(v.size()) != dim)
        throw Error(ErrorKind::Parse, "point dimension does not match dim");
      pts.push_back(Eigen::Map<Vec>(v.data(), v.size()));
    }
    for (const auto& x : jw) w.push_back(x.get<double>());
    return DiscreteMeasure::make(std::move(pts), std::move(w));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("measure JSON: ") + e.what());
  }
}

DiscreteMeasure load_measure(const std::string& path, MeasureFormat format) {
  const std::string text = read_file(path);
  return format == MeasureFormat::Json ? parse_measure_json(text) : parse_measure_csv(text);
}

DiscreteMeasure load_measure(const std::string& path) {
  return load_measure(path, measure_format_from_path(path));
}

std::string measure_to_csv(const DiscreteMeasure& m) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (int i = 0; i < m.size(); ++i) {
    for (int k = 0; k < m.dim; ++k) out << m.points[i](k) << ",";
    out << m.weights[i] << "\n";
  }
  return out.str();
}

std::string measure_to_json(const DiscreteMeasure& m) {
  nlohmann::json j;
  j["dim"] = m.dim;
  j["points"] = nlohmann::json::array();
  for (const auto& p : m.points) j["points"].push_back(std::vector<double>(p.data(), p.data() + p.size()));
  j["weights"] = m.weights;
  return j.dump(1);
}

void save_measure(const DiscreteMeasure& m, const std::string& path, MeasureFormat format) {
  write_file(path, format == MeasureFormat::Json ? measure_to_json(m) : measure_to_csv(m));
}

Box Box::unit(int dim) { return Box{Vec::Zero(dim), Vec::Ones(dim)}; }

DiscreteMeasure grid_sample(const Density& density, const Box& box, int n_per_axis) {
  if (n_per_axis < 1) throw Error(ErrorKind::InvalidInput, "n_per_axis must be >= 1");
  const int d = static_cast<int>(box.lo.size());
  if (d < 1 || box.hi.size() != d) throw Error(ErrorKind::InvalidInput, "bad box");
  for (int k = 0; k < d; ++k)
    if (!(box.hi(k) > box.lo(k))) throw Error(ErrorKind::InvalidInput, "box has empty extent");
  long total = 1;
  for (int k = 0; k < d; ++k) total *= n_per_axis;
  std::vector<Vec> pts;
  std::vector<double> w;
  pts.reserve(total);
  w.reserve(total);
  std::vector<int> idx(d, 0);
  double sum = 0.0;
  for (long c = 0; c < total; ++c) {
    Vec p(d);
    for (int k = 0; k < d; ++k)
      p(k) = box.lo(k) + (idx[k] + 0.5) * (box.hi(k) - box.lo(k)) / n_per_axis;
    const double v = density(p);
    if (!std::isfinite(v) || v < 0.0) throw Error(ErrorKind::InvalidInput, "density must be finite and nonnegative");
    pts.push_back(p);
    w.push_back(v);
    sum += v;
    for (int k = 0; k < d; ++k) {
      if (++idx[k] < n_per_axis) break;
      idx[k] = 0;
    }
  }
  if (sum <= 0.0) throw Error(ErrorKind::EmptyMeasure, "density vanishes on the grid");
  for (auto& x : w) x /= sum;
  return DiscreteMeasure::make(std::move(pts), std::move(w));
}

DiscreteMeasure shift_measure(const DiscreteMeasure& m, const Vec& s) {
  if (s.size() != m.dim) throw Error(ErrorKind::InvalidInput, "shift dimension mismatch");
  DiscreteMeasure out = m;
  for (auto& p : out.points) p += s;
  return out;
}

}  // namespace normot
