#pragma once

// Finite metric measure spaces: points with a distance, a per-point measure and
// (optionally) a weighted edge set for the Dirichlet form.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <queue>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "specpack/errors.hpp"
#include "specpack/parallel.hpp"

namespace specpack {

using PointId = std::size_t;

/// Distance to the empty set.
inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

/// Above this many points graph distances are recomputed per query instead of cached.
inline constexpr std::size_t kDenseCacheLimit = 5000;

/// Exhaustive triangle-inequality validation up to this many points, sampled above.
inline constexpr std::size_t kExhaustiveTriangleLimit = 200;

struct Edge {
  PointId u = 0;
  PointId v = 0;
  double length = 1.0;  ///< metric length, used for graph distances
  double weight = 1.0;  ///< conductance in the Dirichlet form
};

enum class MetricKind { Matrix, Graph, Euclidean };

inline const char* to_string(MetricKind k) {
  switch (k) {
    case MetricKind::Matrix: return "matrix";
    case MetricKind::Graph: return "graph";
    case MetricKind::Euclidean: return "euclidean";
  }
  return "unknown";
}

class MetricMeasureSpace;

/// Sorted set of point ids with its measure cached. Only a space creates these.
class PointSet {
 public:
  PointSet() = default;

  const std::vector<PointId>& ids() const noexcept { return ids_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  double measure() const noexcept { return measure_; }
  bool contains(PointId p) const { return std::binary_search(ids_.begin(), ids_.end(), p); }

  auto begin() const noexcept { return ids_.begin(); }
  auto end() const noexcept { return ids_.end(); }

  friend bool operator==(const PointSet& a, const PointSet& b) { return a.ids_ == b.ids_; }

 private:
  friend class MetricMeasureSpace;
  std::vector<PointId> ids_;
  double measure_ = 0.0;
};

class MetricMeasureSpace {
 public:
  using Metadata = std::map<std::string, std::string>;

  /// Explicit symmetric distance matrix. `edges` only feed the Dirichlet form.
  static MetricMeasureSpace from_distance_matrix(const std::vector<std::vector<double>>& matrix,
                                                 std::vector<double> measure, int dimension,
                                                 std::vector<Edge> edges = {}) {
    const std::size_t n = matrix.size();
    MetricMeasureSpace s(MetricKind::Matrix, n, std::move(measure), dimension, std::move(edges));
    s.matrix_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (matrix[i].size() != n)
        throw ValidationError("distance matrix row " + std::to_string(i) + " has " +
                              std::to_string(matrix[i].size()) + " entries, expected " + std::to_string(n));
      for (std::size_t j = 0; j < n; ++j) s.matrix_[i * n + j] = matrix[i][j];
    }
    s.validate();
    return s;
  }

  /// Shortest-path metric of a connected weighted graph.
  static MetricMeasureSpace from_graph(std::size_t points, std::vector<Edge> edges, std::vector<double> measure,
                                       int dimension) {
    MetricMeasureSpace s(MetricKind::Graph, points, std::move(measure), dimension, std::move(edges));
    s.validate();
    return s;
  }

  /// Euclidean metric on coordinates; dimension is the coordinate width.
  static MetricMeasureSpace from_coordinates(std::vector<std::vector<double>> coords, std::vector<double> measure,
                                             std::vector<Edge> edges = {}) {
    const std::size_t n = coords.size();
    int dim = n == 0 ? 1 : static_cast<int>(coords.front().size());
    MetricMeasureSpace s(MetricKind::Euclidean, n, std::move(measure), dim, std::move(edges));
    for (std::size_t i = 0; i < n; ++i)
      if (coords[i].size() != static_cast<std::size_t>(dim))
        throw ValidationError("point " + std::to_string(i) + " has " + std::to_string(coords[i].size()) +
                              " coordinates, expected " + std::to_string(dim));
    s.coords_ = std::move(coords);
    s.validate();
    return s;
  }

  std::size_t size() const noexcept { return points_; }
  int dimension() const noexcept { return dimension_; }
  MetricKind metric_kind() const noexcept { return kind_; }
  double measure(PointId p) const { return measure_.at(p); }
  std::span<const double> measures() const noexcept { return measure_; }
  double total_measure() const noexcept { return total_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  const std::vector<std::vector<double>>& coordinates() const noexcept { return coords_; }
  const Metadata& metadata() const noexcept { return meta_; }
  Metadata& metadata() noexcept { return meta_; }

  /// Dense row-major distance matrix (materialised for graph metrics on demand).
  std::vector<std::vector<double>> distance_matrix() const {
    std::vector<std::vector<double>> out(points_);
    for (PointId i = 0; i < points_; ++i) out[i] = distances_from(i);
    return out;
  }

  double distance(PointId a, PointId b) const {
    check_point(a);
    check_point(b);
    switch (kind_) {
      case MetricKind::Matrix: return matrix_[a * points_ + b];
      case MetricKind::Euclidean: return euclidean(a, b);
      case MetricKind::Graph:
        if (const auto* d = dense_graph()) return (*d)[a * points_ + b];
        return dijkstra({a})[b];
    }
    return kInfiniteDistance;
  }

  std::vector<double> distances_from(PointId a) const {
    check_point(a);
    std::vector<double> row(points_);
    switch (kind_) {
      case MetricKind::Matrix:
        std::copy_n(matrix_.begin() + static_cast<std::ptrdiff_t>(a * points_), points_, row.begin());
        break;
      case MetricKind::Euclidean:
        for (PointId b = 0; b < points_; ++b) row[b] = euclidean(a, b);
        break;
      case MetricKind::Graph:
        if (const auto* d = dense_graph())
          std::copy_n(d->begin() + static_cast<std::ptrdiff_t>(a * points_), points_, row.begin());
        else
          row = dijkstra({a});
        break;
    }
    return row;
  }

  /// d(p, S) for every p; all +inf when S is empty.
  /// True when single distance() queries are O(1): matrix, Euclidean or cached graph.
  bool has_fast_pair_distance() const {
    return kind_ != MetricKind::Graph || dense_graph() != nullptr;
  }

  std::vector<double> distances_to(const PointSet& s) const {
    std::vector<double> out(points_, kInfiniteDistance);
    if (s.empty()) return out;
    if (kind_ == MetricKind::Graph && dense_graph() == nullptr) return dijkstra(s.ids());
    for (PointId q : s) {
      for (PointId p = 0; p < points_; ++p) out[p] = std::min(out[p], distance(q, p));
    }
    return out;
  }

  PointSet make_set(std::vector<PointId> ids) const {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (!ids.empty() && ids.back() >= points_)
      throw DomainError("point id " + std::to_string(ids.back()) + " out of range (size " +
                        std::to_string(points_) + ")");
    PointSet s;
    s.ids_ = std::move(ids);
    for (PointId p : s.ids_) s.measure_ += measure_[p];
    return s;
  }

  PointSet all_points() const {
    std::vector<PointId> ids(points_);
    std::iota(ids.begin(), ids.end(), PointId{0});
    return make_set(std::move(ids));
  }

  PointSet empty_set() const { return PointSet{}; }

  bool edges_connected() const {
    if (points_ == 0) return false;
    std::vector<std::vector<PointId>> adj(points_);
    for (const auto& e : edges_) {
      adj[e.u].push_back(e.v);
      adj[e.v].push_back(e.u);
    }
    std::vector<char> seen(points_, 0);
    std::vector<PointId> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      PointId u = stack.back();
      stack.pop_back();
      for (PointId v : adj[u])
        if (!seen[v]) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
    }
    return count == points_;
  }

  double max_edge_length() const {
    double h = 0.0;
    for (const auto& e : edges_) h = std::max(h, e.length);
    return h;
  }

  /// Checks every space invariant; throws ValidationError naming the offender.
  void validate() const {
    if (points_ == 0) throw ValidationError("space has no points");
    if (dimension_ < 1) throw ValidationError("dimension must be >= 1");
    if (measure_.size() != points_)
      throw ValidationError("measure has " + std::to_string(measure_.size()) + " entries, expected " +
                            std::to_string(points_));
    for (PointId p = 0; p < points_; ++p)
      if (!(measure_[p] >= 0.0) || !std::isfinite(measure_[p]))
        throw ValidationError("measure of point " + std::to_string(p) + " is not a finite nonnegative number");
    if (!(total_ > 0.0) || !std::isfinite(total_)) throw ValidationError("total measure must be positive and finite");
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const auto& e = edges_[i];
      if (e.u >= points_ || e.v >= points_)
        throw ValidationError("edge " + std::to_string(i) + " references a point out of range");
      if (e.u == e.v) throw ValidationError("edge " + std::to_string(i) + " is a self-loop");
      if (!(e.length > 0.0) || !std::isfinite(e.length))
        throw ValidationError("edge " + std::to_string(i) + " has nonpositive length");
      if (!(e.weight >= 0.0) || !std::isfinite(e.weight))
        throw ValidationError("edge " + std::to_string(i) + " has negative weight");
    }
    if (kind_ == MetricKind::Graph && !edges_connected())
      throw ValidationError("graph metric requires a connected edge set");
    if (kind_ == MetricKind::Matrix) validate_matrix();
  }

  friend MetricMeasureSpace scale_space(const MetricMeasureSpace& space, double t);

 private:
  MetricMeasureSpace(MetricKind kind, std::size_t points, std::vector<double> measure, int dimension,
                     std::vector<Edge> edges)
      : kind_(kind),
        points_(points),
        dimension_(dimension),
        measure_(std::move(measure)),
        edges_(std::move(edges)),
        cache_(std::make_shared<GraphCache>()) {
    total_ = 0.0;
    for (double m : measure_) total_ += m;
    if (kind_ == MetricKind::Graph) {
      adjacency_.assign(points_, {});
      for (const auto& e : edges_)
        if (e.u < points_ && e.v < points_) {
          adjacency_[e.u].push_back({e.v, e.length});
          adjacency_[e.v].push_back({e.u, e.length});
        }
    }
  }

  struct GraphCache {
    std::once_flag once;
    std::vector<double> dense;
  };

  void check_point(PointId p) const {
    if (p >= points_) throw DomainError("invalid point " + std::to_string(p));
  }

  double euclidean(PointId a, PointId b) const {
    double s = 0.0;
    const auto& x = coords_[a];
    const auto& y = coords_[b];
    for (std::size_t i = 0; i < x.size(); ++i) {
      double d = x[i] - y[i];
      s += d * d;
    }
    return std::sqrt(s);
  }

  // Multi-source Dijkstra over the edge lengths.
  std::vector<double> dijkstra(const std::vector<PointId>& sources) const {
    std::vector<double> dist(points_, kInfiniteDistance);
    using Item = std::pair<double, PointId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (PointId s : sources) {
      dist[s] = 0.0;
      heap.push({0.0, s});
    }
    while (!heap.empty()) {
      auto [d, u] = heap.top();
      heap.pop();
      if (d > dist[u]) continue;
      for (const auto& [v, len] : adjacency_[u]) {
        double nd = d + len;
        if (nd < dist[v]) {
          dist[v] = nd;
          heap.push({nd, v});
        }
      }
    }
    return dist;
  }

  const std::vector<double>* dense_graph() const {
    if (points_ > kDenseCacheLimit) return nullptr;
    std::call_once(cache_->once, [this] {
      std::vector<double> d(points_ * points_);
      parallel_for(points_, [&](std::size_t s) {
        auto row = dijkstra({s});
        std::copy(row.begin(), row.end(), d.begin() + static_cast<std::ptrdiff_t>(s * points_));
      });
      // Exact symmetry: both triangles take the smaller rounding.
      for (std::size_t i = 0; i < points_; ++i)
        for (std::size_t j = i + 1; j < points_; ++j) {
          double m = std::min(d[i * points_ + j], d[j * points_ + i]);
          d[i * points_ + j] = d[j * points_ + i] = m;
        }
      cache_->dense = std::move(d);
    });
    return &cache_->dense;
  }

  void validate_matrix() const {
    const std::size_t n = points_;
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double d = matrix_[i * n + j];
        if (!(d >= 0.0) || !std::isfinite(d))
          throw ValidationError("distance (" + std::to_string(i) + "," + std::to_string(j) +
                                ") is not a finite nonnegative number");
        scale = std::max(scale, d);
      }
    const double tol = 1e-12 * scale;
    for (std::size_t i = 0; i < n; ++i) {
      if (matrix_[i * n + i] != 0.0) throw ValidationError("distance (" + std::to_string(i) + "," +
                                                           std::to_string(i) + ") on the diagonal is nonzero");
      for (std::size_t j = i + 1; j < n; ++j)
        if (std::abs(matrix_[i * n + j] - matrix_[j * n + i]) > tol)
          throw ValidationError("distance matrix is not symmetric at (" + std::to_string(i) + "," +
                                std::to_string(j) + ")");
    }
    auto check = [&](std::size_t i, std::size_t j, std::size_t k) {
      if (matrix_[i * n + k] > matrix_[i * n + j] + matrix_[j * n + k] + tol)
        throw ValidationError("triangle inequality violated for triple (" + std::to_string(i) + "," +
                              std::to_string(j) + "," + std::to_string(k) + "): d(" + std::to_string(i) + "," +
                              std::to_string(k) + ") > d(" + std::to_string(i) + "," + std::to_string(j) +
                              ") + d(" + std::to_string(j) + "," + std::to_string(k) + ")");
    };
    if (n <= kExhaustiveTriangleLimit) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t k = 0; k < n; ++k) check(i, j, k);
    } else {
      std::mt19937_64 rng(0x5eed);
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (int s = 0; s < 200000; ++s) check(pick(rng), pick(rng), pick(rng));
    }
  }

  MetricKind kind_;
  std::size_t points_;
  int dimension_;
  std::vector<double> measure_;
  double total_ = 0.0;
  std::vector<Edge> edges_;
  std::vector<double> matrix_;
  std::vector<std::vector<double>> coords_;
  std::vector<std::vector<std::pair<PointId, double>>> adjacency_;
  std::shared_ptr<GraphCache> cache_;
  Metadata meta_;
};

// ---------------------------------------------------------------------------
// Set algebra

inline PointSet set_union(const MetricMeasureSpace& space, const PointSet& a, const PointSet& b) {
  std::vector<PointId> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return space.make_set(std::move(out));
}

inline PointSet set_intersection(const MetricMeasureSpace& space, const PointSet& a, const PointSet& b) {
  std::vector<PointId> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return space.make_set(std::move(out));
}

inline PointSet set_difference(const MetricMeasureSpace& space, const PointSet& a, const PointSet& b) {
  std::vector<PointId> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return space.make_set(std::move(out));
}

inline bool is_subset(const PointSet& a, const PointSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline bool are_disjoint(const PointSet& a, const PointSet& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return false;
    if (*i < *j)
      ++i;
    else
      ++j;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Balls and distances

/// Closed ball {p : d(center, p) <= r}.
inline PointSet ball(const MetricMeasureSpace& space, PointId center, double r) {
  if (center >= space.size()) throw DomainError("ball: invalid center " + std::to_string(center));
  if (!(r >= 0.0)) throw DomainError("ball: radius must be nonnegative");
  auto row = space.distances_from(center);
  std::vector<PointId> ids;
  for (PointId p = 0; p < space.size(); ++p)
    if (row[p] <= r) ids.push_back(p);
  return space.make_set(std::move(ids));
}

/// Closed r-enlargement {p : d(p, S) <= r}.
inline PointSet enlarge(const MetricMeasureSpace& space, const PointSet& s, double r) {
  if (s.empty()) throw DomainError("enlarge: set is empty");
  if (!(r >= 0.0)) throw DomainError("enlarge: radius must be nonnegative");
  auto d = space.distances_to(s);
  std::vector<PointId> ids;
  for (PointId p = 0; p < space.size(); ++p)
    if (d[p] <= r) ids.push_back(p);
  return space.make_set(std::move(ids));
}

/// min over pairs; kInfiniteDistance when either set is empty.
inline double set_distance(const MetricMeasureSpace& space, const PointSet& s, const PointSet& t) {
  if (s.empty() || t.empty()) return kInfiniteDistance;
  const PointSet& src = s.size() <= t.size() ? s : t;
  const PointSet& dst = s.size() <= t.size() ? t : s;
  if (space.has_fast_pair_distance()) {
    double best = kInfiniteDistance;
    for (PointId a : src)
      for (PointId b : dst) best = std::min(best, space.distance(a, b));
    return best;
  }
  auto d = space.distances_to(src);
  double best = kInfiniteDistance;
  for (PointId p : dst) best = std::min(best, d[p]);
  return best;
}

/// All closed r-balls, indexed by center.
inline std::vector<std::vector<PointId>> all_balls(const MetricMeasureSpace& space, double r) {
  std::vector<std::vector<PointId>> balls(space.size());
  parallel_for(space.size(), [&](std::size_t c) {
    auto row = space.distances_from(c);
    for (PointId p = 0; p < space.size(); ++p)
      if (row[p] <= r) balls[c].push_back(p);
  });
  return balls;
}

inline double max_ball_measure(const MetricMeasureSpace& space, double r) {
  if (!(r >= 0.0)) throw DomainError("max_ball_measure: radius must be nonnegative");
  std::vector<double> mass(space.size(), 0.0);
  parallel_for(space.size(), [&](std::size_t c) {
    auto row = space.distances_from(c);
    double m = 0.0;
    for (PointId p = 0; p < space.size(); ++p)
      if (row[p] <= r) m += space.measures()[p];
    mass[c] = m;
  });
  return *std::max_element(mass.begin(), mass.end());
}

/// Greedy set cover of ball(x, 4r) by r-balls centred at space points. Picks the
/// ball covering the most uncovered points, lowest center index on ties.
inline std::vector<PointId> greedy_ball_cover(const MetricMeasureSpace& space, PointId x, double r) {
  if (!(r > 0.0)) throw DomainError("greedy_ball_cover: radius must be positive");
  auto row = space.distances_from(x);
  const std::size_t n = space.size();
  std::vector<char> target(n, 0);
  std::size_t remaining = 0;
  std::vector<PointId> candidates;
  for (PointId p = 0; p < n; ++p) {
    if (row[p] <= 4.0 * r) {
      target[p] = 1;
      ++remaining;
    }
    // An r-ball meeting ball(x, 4r) has its center within 5r of x.
    if (row[p] <= 5.0 * r) candidates.push_back(p);
  }
  std::vector<std::vector<PointId>> reach(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto crow = space.distances_from(candidates[i]);
    for (PointId p = 0; p < n; ++p)
      if (target[p] && crow[p] <= r) reach[i].push_back(p);
  }
  std::vector<PointId> chosen;
  while (remaining > 0) {
    std::size_t best = 0, best_gain = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      std::size_t gain = 0;
      for (PointId p : reach[i]) gain += target[p];
      if (gain > best_gain) {
        best_gain = gain;
        best = i;
      }
    }
    if (best_gain == 0) throw InvariantError("greedy_ball_cover: uncovered point with no candidate");
    chosen.push_back(candidates[best]);
    for (PointId p : reach[best])
      if (target[p]) {
        target[p] = 0;
        --remaining;
      }
  }
  return chosen;
}

/// Discrete covering constant: max over centers of the greedy cover size.
inline std::size_t estimate_covering_constant(const MetricMeasureSpace& space, double r) {
  if (!(r > 0.0)) throw DomainError("estimate_covering_constant: radius must be positive");
  std::vector<std::size_t> sizes(space.size(), 0);
  parallel_for(space.size(), [&](std::size_t x) { sizes[x] = greedy_ball_cover(space, x, r).size(); });
  return *std::max_element(sizes.begin(), sizes.end());
}

/// True iff every r-ball has measure at most `threshold`.
inline bool check_h2(const MetricMeasureSpace& space, double r, double threshold) {
  if (!(r > 0.0)) throw DomainError("check_h2: radius must be positive");
  if (!(threshold > 0.0)) throw DomainError("check_h2: threshold must be positive");
  return max_ball_measure(space, r) <= threshold;
}

/// Distances times t, measures times t^n, conductances times t^(n-2); discrete
/// eigenvalues then scale exactly by t^-2.
inline MetricMeasureSpace scale_space(const MetricMeasureSpace& space, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("scale_space: factor must be positive");
  const int n = space.dimension();
  const double mass_factor = std::pow(t, n);
  const double weight_factor = std::pow(t, n - 2);
  MetricMeasureSpace out = space;
  out.cache_ = std::make_shared<MetricMeasureSpace::GraphCache>();
  out.total_ = 0.0;
  for (double& m : out.measure_) {
    m *= mass_factor;
    out.total_ += m;
  }
  for (auto& e : out.edges_) {
    e.length *= t;
    e.weight *= weight_factor;
  }
  for (auto& adj : out.adjacency_)
    for (auto& [v, len] : adj) len *= t;
  for (double& d : out.matrix_) d *= t;
  for (auto& c : out.coords_)
    for (double& x : c) x *= t;
  return out;
}

}  // namespace specpack
