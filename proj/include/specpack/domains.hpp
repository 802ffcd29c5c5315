#pragma once

// Test-space generators and the file formats spaces are read from and written to.
//
// Conventions: spacing h, dimension n, conductance h^(n-2) per edge and mass h^n
// per point. With MassRule::Fem, points on a rectangle side get half the mass and
// corners a quarter, which makes grid spectra converge to Neumann spectra.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "specpack/errors.hpp"
#include "specpack/mmspace.hpp"

namespace specpack::domains {

using json = nlohmann::json;

enum class MassRule { Uniform, Fem };

inline const char* to_string(MassRule m) { return m == MassRule::Uniform ? "uniform" : "fem"; }

namespace detail {

inline void stamp(MetricMeasureSpace& s, const std::string& kind, double h, MassRule mass) {
  auto& meta = s.metadata();
  meta["kind"] = kind;
  meta["n"] = std::to_string(s.dimension());
  std::ostringstream hs;
  hs.precision(17);
  hs << h;
  meta["h"] = hs.str();
  meta["a"] = "0";
  meta["mass"] = to_string(mass);
}

inline void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw DomainError("invalid parameter '" + field + "': " + what);
}

}  // namespace detail

/// Path 0 - 1 - ... - (points-1) with spacing h (dimension 1).
inline MetricMeasureSpace path(std::size_t points, double h = 1.0, MassRule mass = MassRule::Uniform) {
  detail::require(points >= 1, "points", "must be >= 1");
  detail::require(h > 0.0, "h", "must be positive");
  std::vector<double> mu(points, h);
  if (mass == MassRule::Fem && points > 1) mu.front() = mu.back() = 0.5 * h;
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < points; ++i) edges.push_back({i, i + 1, h, 1.0 / h});
  auto s = points == 1 ? MetricMeasureSpace::from_distance_matrix({{0.0}}, mu, 1)
                       : MetricMeasureSpace::from_graph(points, std::move(edges), std::move(mu), 1);
  detail::stamp(s, "path", h, mass);
  return s;
}

inline MetricMeasureSpace cycle(std::size_t points, double h = 1.0) {
  detail::require(points >= 3, "points", "a cycle needs at least 3 points");
  detail::require(h > 0.0, "h", "must be positive");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < points; ++i) edges.push_back({i, (i + 1) % points, h, 1.0 / h});
  auto s = MetricMeasureSpace::from_graph(points, std::move(edges), std::vector<double>(points, h), 1);
  detail::stamp(s, "cycle", h, MassRule::Uniform);
  return s;
}

/// nx by ny vertex grid with spacing h, 4-neighbour edges, graph metric.
/// Fem: boundary masses and boundary-parallel weights halved (corners quartered).
inline MetricMeasureSpace grid(std::size_t nx, std::size_t ny, double h = 1.0, MassRule mass = MassRule::Fem) {
  detail::require(nx >= 1 && ny >= 1 && nx * ny >= 2, "nx/ny", "grid needs at least 2 points");
  detail::require(h > 0.0, "h", "must be positive");
  std::vector<double> mu(nx * ny);
  std::vector<Edge> edges;
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t id = j * nx + i;
      double m = h * h;
      if (mass == MassRule::Fem) {
        if (nx > 1 && (i == 0 || i + 1 == nx)) m *= 0.5;
        if (ny > 1 && (j == 0 || j + 1 == ny)) m *= 0.5;
      }
      mu[id] = m;
      // FEM lumping halves boundary-parallel edges too, so separable Neumann
      // modes cos(p pi x) cos(q pi y) stay exact eigenvectors.
      const bool fem = mass == MassRule::Fem;
      const double wx = fem && ny > 1 && (j == 0 || j + 1 == ny) ? 0.5 : 1.0;
      const double wy = fem && nx > 1 && (i == 0 || i + 1 == nx) ? 0.5 : 1.0;
      if (i + 1 < nx) edges.push_back({id, id + 1, h, wx});
      if (j + 1 < ny) edges.push_back({id, id + nx, h, wy});
    }
  auto s = MetricMeasureSpace::from_graph(nx * ny, std::move(edges), std::move(mu), 2);
  detail::stamp(s, "grid", h, mass);
  s.metadata()["nx"] = std::to_string(nx);
  s.metadata()["ny"] = std::to_string(ny);
  return s;
}

/// Grid on [0, lx] x [0, ly] with spacing h dividing both sides, FEM mass.
inline MetricMeasureSpace rectangle(double lx, double ly, double h) {
  if (!(lx > 0.0) || !(ly > 0.0) || !(h > 0.0)) throw DomainError("rectangle: sides and spacing must be positive");
  const double fx = lx / h, fy = ly / h;
  const auto nx = static_cast<std::size_t>(std::llround(fx));
  const auto ny = static_cast<std::size_t>(std::llround(fy));
  if (nx < 1 || ny < 1 || std::abs(fx - static_cast<double>(nx)) > 1e-9 * fx ||
      std::abs(fy - static_cast<double>(ny)) > 1e-9 * fy)
    throw DomainError("rectangle: spacing must divide both sides");
  return grid(nx + 1, ny + 1, h, MassRule::Fem);
}

/// Periodic nx by ny grid (flat torus), all points equivalent.
inline MetricMeasureSpace torus_grid(std::size_t nx, std::size_t ny, double h = 1.0) {
  detail::require(nx >= 3 && ny >= 3, "nx/ny", "torus needs at least 3 points per side");
  detail::require(h > 0.0, "h", "must be positive");
  std::vector<Edge> edges;
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t id = j * nx + i;
      edges.push_back({id, j * nx + (i + 1) % nx, h, 1.0});
      edges.push_back({id, ((j + 1) % ny) * nx + i, h, 1.0});
    }
  auto s = MetricMeasureSpace::from_graph(nx * ny, std::move(edges), std::vector<double>(nx * ny, h * h), 2);
  detail::stamp(s, "torus_grid", h, MassRule::Uniform);
  s.metadata()["nx"] = std::to_string(nx);
  s.metadata()["ny"] = std::to_string(ny);
  return s;
}

/// Lattice points of spacing h inside the disk of the given radius, 4-neighbour edges, mass h^2.
inline MetricMeasureSpace disk_grid(double radius, double h) {
  detail::require(radius > 0.0, "radius", "must be positive");
  detail::require(h > 0.0 && h <= radius, "h", "must be positive and at most the radius");
  const auto reach = static_cast<long>(std::floor(radius / h + 1e-12));
  std::map<std::pair<long, long>, std::size_t> index;
  for (long j = -reach; j <= reach; ++j)
    for (long i = -reach; i <= reach; ++i)
      if (static_cast<double>(i * i + j * j) * h * h <= radius * radius * (1.0 + 1e-12)) {
        std::size_t id = index.size();
        index[{j, i}] = id;
      }
  std::vector<Edge> edges;
  for (const auto& [key, id] : index) {
    auto [j, i] = key;
    if (auto it = index.find({j, i + 1}); it != index.end()) edges.push_back({id, it->second, h, 1.0});
    if (auto it = index.find({j + 1, i}); it != index.end()) edges.push_back({id, it->second, h, 1.0});
  }
  auto s = MetricMeasureSpace::from_graph(index.size(), std::move(edges), std::vector<double>(index.size(), h * h), 2);
  detail::stamp(s, "disk_grid", h, MassRule::Uniform);
  return s;
}

/// Uniform random points in [0, side]^2, Euclidean metric, epsilon-graph edges
/// (length = distance, unit weight), mass side^2 / points. Fails if the
/// epsilon-graph is disconnected.
inline MetricMeasureSpace point_cloud(std::size_t points, std::uint64_t seed, double eps, double side = 1.0) {
  detail::require(points >= 2, "points", "must be >= 2");
  detail::require(eps > 0.0, "eps", "must be positive");
  detail::require(side > 0.0, "side", "must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, side);
  std::vector<std::vector<double>> coords(points);
  for (auto& c : coords) {
    double x = unif(rng);
    double y = unif(rng);
    c = {x, y};
  }
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < points; ++i)
    for (std::size_t j = i + 1; j < points; ++j) {
      double dx = coords[i][0] - coords[j][0], dy = coords[i][1] - coords[j][1];
      double d = std::sqrt(dx * dx + dy * dy);
      if (d <= eps && d > 0.0) edges.push_back({i, j, d, 1.0});
    }
  auto s = MetricMeasureSpace::from_coordinates(std::move(coords),
                                                std::vector<double>(points, side * side / points), std::move(edges));
  if (!s.edges_connected())
    throw ValidationError("point_cloud: epsilon-graph with eps=" + std::to_string(eps) + " is disconnected");
  detail::stamp(s, "point_cloud", eps, MassRule::Uniform);
  s.metadata()["seed"] = std::to_string(seed);
  return s;
}

// ---------------------------------------------------------------------------
// Parameterised generation (CLI form: kind plus key=value strings)

using Params = std::map<std::string, std::string>;

namespace detail {

inline double get_double(const Params& p, const std::string& key, std::optional<double> fallback = std::nullopt) {
  auto it = p.find(key);
  if (it == p.end()) {
    if (fallback) return *fallback;
    throw DomainError("missing parameter '" + key + "'");
  }
  try {
    std::size_t used = 0;
    double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw DomainError("invalid parameter '" + key + "': not a number: " + it->second);
  }
}

inline std::size_t get_count(const Params& p, const std::string& key, std::optional<std::size_t> fallback = std::nullopt) {
  auto it = p.find(key);
  if (it == p.end()) {
    if (fallback) return *fallback;
    throw DomainError("missing parameter '" + key + "'");
  }
  try {
    std::size_t used = 0;
    long long v = std::stoll(it->second, &used);
    if (used != it->second.size() || v < 0) throw std::invalid_argument("bad");
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw DomainError("invalid parameter '" + key + "': not a nonnegative integer: " + it->second);
  }
}

inline MassRule get_mass(const Params& p, MassRule fallback) {
  auto it = p.find("mass");
  if (it == p.end()) return fallback;
  if (it->second == "uniform") return MassRule::Uniform;
  if (it->second == "fem") return MassRule::Fem;
  throw DomainError("invalid parameter 'mass': expected uniform or fem, got " + it->second);
}

inline void reject_unknown(const Params& p, std::initializer_list<const char*> known) {
  for (const auto& [k, v] : p)
    if (std::none_of(known.begin(), known.end(), [&](const char* s) { return k == s; }))
      throw DomainError("invalid parameter '" + k + "': not accepted by this kind");
}

}  // namespace detail

/// kind in {path, cycle, grid, torus_grid, disk_grid, point_cloud}.
inline MetricMeasureSpace generate(const std::string& kind, const Params& p) {
  using namespace detail;
  if (kind == "path") {
    reject_unknown(p, {"points", "h", "mass"});
    return path(get_count(p, "points"), get_double(p, "h", 1.0), get_mass(p, MassRule::Uniform));
  }
  if (kind == "cycle") {
    reject_unknown(p, {"points", "h"});
    return cycle(get_count(p, "points"), get_double(p, "h", 1.0));
  }
  if (kind == "grid") {
    reject_unknown(p, {"nx", "ny", "h", "mass"});
    std::size_t nx = get_count(p, "nx");
    return grid(nx, get_count(p, "ny", nx), get_double(p, "h", 1.0), get_mass(p, MassRule::Fem));
  }
  if (kind == "torus_grid") {
    reject_unknown(p, {"nx", "ny", "h"});
    std::size_t nx = get_count(p, "nx");
    return torus_grid(nx, get_count(p, "ny", nx), get_double(p, "h", 1.0));
  }
  if (kind == "disk_grid") {
    reject_unknown(p, {"radius", "h"});
    return disk_grid(get_double(p, "radius", 1.0), get_double(p, "h"));
  }
  if (kind == "point_cloud") {
    reject_unknown(p, {"points", "seed", "eps", "side"});
    return point_cloud(get_count(p, "points"), get_count(p, "seed", 0), get_double(p, "eps"),
                       get_double(p, "side", 1.0));
  }
  throw DomainError("invalid parameter 'kind': unknown kind " + kind);
}

// ---------------------------------------------------------------------------
// Serialization

inline constexpr const char* kSpaceSchema = "specpack-space/1";

inline json to_json(const MetricMeasureSpace& s) {
  json j;
  j["schema"] = kSpaceSchema;
  j["points"] = s.size();
  j["dimension"] = s.dimension();
  j["metric"] = to_string(s.metric_kind());
  j["measure"] = std::vector<double>(s.measures().begin(), s.measures().end());
  json edges = json::array();
  for (const auto& e : s.edges()) edges.push_back({e.u, e.v, e.length, e.weight});
  j["edges"] = edges;
  if (s.metric_kind() == MetricKind::Matrix) j["distance_matrix"] = s.distance_matrix();
  if (s.metric_kind() == MetricKind::Euclidean) j["coordinates"] = s.coordinates();
  if (!s.metadata().empty()) j["meta"] = s.metadata();
  return j;
}

inline MetricMeasureSpace from_json(const json& j) {
  try {
    if (!j.is_object()) throw ParseError("space JSON must be an object");
    std::vector<Edge> edges;
    if (j.contains("edges")) {
      std::size_t idx = 0;
      for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() < 3 || e.size() > 4)
          throw ParseError("edges[" + std::to_string(idx) + "]: expected [u, v, length] or [u, v, length, weight]");
        Edge edge{e[0].get<std::size_t>(), e[1].get<std::size_t>(), e[2].get<double>(),
                  e.size() == 4 ? e[3].get<double>() : 1.0};
        edges.push_back(edge);
        ++idx;
      }
    }
    const int dim = j.value("dimension", 1);
    std::optional<MetricMeasureSpace> space;
    if (j.contains("distance_matrix")) {
      auto m = j.at("distance_matrix").get<std::vector<std::vector<double>>>();
      std::vector<double> mu = j.contains("measure") ? j.at("measure").get<std::vector<double>>()
                                                     : std::vector<double>(m.size(), 1.0);
      space = MetricMeasureSpace::from_distance_matrix(m, std::move(mu), dim, std::move(edges));
    } else if (j.contains("coordinates")) {
      auto c = j.at("coordinates").get<std::vector<std::vector<double>>>();
      std::vector<double> mu = j.contains("measure") ? j.at("measure").get<std::vector<double>>()
                                                     : std::vector<double>(c.size(), 1.0);
      space = MetricMeasureSpace::from_coordinates(std::move(c), std::move(mu), std::move(edges));
      if (space->dimension() != dim && j.contains("dimension"))
        throw ValidationError("coordinates have width " + std::to_string(space->dimension()) +
                              " but dimension is " + std::to_string(dim));
    } else {
      if (!j.contains("points")) throw ParseError("space JSON needs 'points' with 'edges', or 'distance_matrix'");
      auto p = j.at("points").get<std::size_t>();
      std::vector<double> mu = j.contains("measure") ? j.at("measure").get<std::vector<double>>()
                                                     : std::vector<double>(p, 1.0);
      space = MetricMeasureSpace::from_graph(p, std::move(edges), std::move(mu), dim);
    }
    if (j.contains("points") && j.at("points").get<std::size_t>() != space->size())
      throw ValidationError("'points' is " + std::to_string(j.at("points").get<std::size_t>()) + " but data has " +
                            std::to_string(space->size()) + " points");
    if (j.contains("meta")) space->metadata() = j.at("meta").get<MetricMeasureSpace::Metadata>();
    return *space;
  } catch (const json::exception& e) {
    throw ParseError(std::string("space JSON: ") + e.what());
  }
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  const char sep = line.find(',') != std::string::npos ? ',' : ' ';
  if (sep == ',') {
    while (std::getline(is, cur, ',')) out.push_back(cur);
  } else {
    while (is >> cur) out.push_back(cur);
  }
  for (auto& f : out) {
    auto b = f.find_first_not_of(" \t\r");
    auto e = f.find_last_not_of(" \t\r");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

inline bool parse_number(const std::string& s, double& v) {
  try {
    std::size_t used = 0;
    v = std::stod(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace detail

struct CsvOptions {
  int dimension = 2;
  double eps = 0.0;  ///< > 0 builds epsilon-graph edges
};

/// Columns x_1..x_n, optionally followed by a column whose header is `mass`.
inline MetricMeasureSpace load_csv_points(std::istream& in, const CsvOptions& opt) {
  if (opt.dimension < 1) throw DomainError("csv: dimension must be >= 1");
  std::string line;
  std::size_t lineno = 0;
  bool has_mass = false;
  bool first = true;
  std::vector<std::vector<double>> coords;
  std::vector<double> mass;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    auto fields = detail::split_fields(line);
    double v = 0.0;
    if (first && !detail::parse_number(fields.front(), v)) {
      first = false;
      has_mass = !fields.empty() && fields.back() == "mass";
      std::size_t expect = static_cast<std::size_t>(opt.dimension) + (has_mass ? 1 : 0);
      if (fields.size() != expect)
        throw ParseError("csv line " + std::to_string(lineno) + ": header has " + std::to_string(fields.size()) +
                         " columns, expected " + std::to_string(expect));
      continue;
    }
    first = false;
    std::size_t expect = static_cast<std::size_t>(opt.dimension) + (has_mass ? 1 : 0);
    if (fields.size() != expect)
      throw ParseError("csv line " + std::to_string(lineno) + ": " + std::to_string(fields.size()) +
                       " columns, expected " + std::to_string(expect) + " for dimension " +
                       std::to_string(opt.dimension) + (has_mass ? " plus mass" : ""));
    std::vector<double> row;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (!detail::parse_number(fields[c], v))
        throw ParseError("csv line " + std::to_string(lineno) + ", column " + std::to_string(c + 1) +
                         ": not a number: '" + fields[c] + "'");
      row.push_back(v);
    }
    if (has_mass) {
      mass.push_back(row.back());
      row.pop_back();
    } else {
      mass.push_back(1.0);
    }
    coords.push_back(std::move(row));
  }
  if (coords.empty()) throw ParseError("csv: no points");
  std::vector<Edge> edges;
  if (opt.eps > 0.0) {
    for (std::size_t i = 0; i < coords.size(); ++i)
      for (std::size_t j = i + 1; j < coords.size(); ++j) {
        double s = 0.0;
        for (int k = 0; k < opt.dimension; ++k) {
          double d = coords[i][k] - coords[j][k];
          s += d * d;
        }
        double d = std::sqrt(s);
        if (d <= opt.eps && d > 0.0) edges.push_back({i, j, d, 1.0});
      }
  }
  auto space = MetricMeasureSpace::from_coordinates(std::move(coords), std::move(mass), std::move(edges));
  space.metadata()["kind"] = "csv";
  return space;
}

/// Lines "u v length [weight]"; '#' starts a comment; unit mass per point.
inline MetricMeasureSpace load_edge_list(std::istream& in, int dimension) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<Edge> edges;
  std::size_t points = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto f = detail::split_fields(line);
    if (f.size() < 3 || f.size() > 4)
      throw ParseError("edge list line " + std::to_string(lineno) + ": expected 'u v length [weight]'");
    double vals[4] = {0, 0, 0, 1.0};
    for (std::size_t c = 0; c < f.size(); ++c)
      if (!detail::parse_number(f[c], vals[c]))
        throw ParseError("edge list line " + std::to_string(lineno) + ", field " + std::to_string(c + 1) +
                         ": not a number");
    if (vals[0] < 0 || vals[1] < 0 || vals[0] != std::floor(vals[0]) || vals[1] != std::floor(vals[1]))
      throw ParseError("edge list line " + std::to_string(lineno) + ": point ids must be nonnegative integers");
    Edge e{static_cast<PointId>(vals[0]), static_cast<PointId>(vals[1]), vals[2], vals[3]};
    points = std::max({points, e.u + 1, e.v + 1});
    edges.push_back(e);
  }
  if (edges.empty()) throw ParseError("edge list: no edges");
  auto space = MetricMeasureSpace::from_graph(points, std::move(edges), std::vector<double>(points, 1.0), dimension);
  space.metadata()["kind"] = "edge_list";
  return space;
}

enum class Format { SpaceJson, CsvPoints, EdgeList };

inline Format parse_format(const std::string& s) {
  if (s == "space-json" || s == "json") return Format::SpaceJson;
  if (s == "csv-points" || s == "csv") return Format::CsvPoints;
  if (s == "edge-list") return Format::EdgeList;
  throw DomainError("unknown format " + s);
}

inline MetricMeasureSpace load(std::istream& in, Format format, const CsvOptions& opt = {}) {
  switch (format) {
    case Format::SpaceJson: {
      json j;
      try {
        j = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ParseError(std::string("space JSON: ") + e.what());
      }
      return from_json(j);
    }
    case Format::CsvPoints: return load_csv_points(in, opt);
    case Format::EdgeList: return load_edge_list(in, opt.dimension);
  }
  throw DomainError("unknown format");
}

inline MetricMeasureSpace load_file(const std::string& path, Format format, const CsvOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return load(in, format, opt);
}

inline void save_file(const MetricMeasureSpace& space, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << to_json(space).dump() << '\n';
}

}  // namespace specpack::domains
