#pragma once

// Plateau test functions, the discrete Dirichlet form, and min-max eigenvalue
// upper bounds from families of test functions with disjoint supports.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "specpack/errors.hpp"
#include "specpack/mmspace.hpp"
#include "specpack/packing.hpp"
#include "specpack/parallel.hpp"

namespace specpack::rayleigh {

/// Energy E(f) = sum_edges w (f_u - f_v)^2 with
/// c_geom = max_p (1/mu(p)) * 1/2 * sum_{e at p} w_e l_e^2.
struct DirichletForm {
  std::vector<Edge> edges;
  double c_geom = 0.0;
  double max_edge_length = 0.0;

  static DirichletForm from_space(const MetricMeasureSpace& space) {
    DirichletForm form;
    form.edges.assign(space.edges().begin(), space.edges().end());
    form.max_edge_length = space.max_edge_length();
    std::vector<double> load(space.size(), 0.0);
    for (const auto& e : form.edges) {
      if (!(e.weight >= 0.0)) throw DomainError("Dirichlet form: negative edge weight");
      const double c = 0.5 * e.weight * e.length * e.length;
      load[e.u] += c;
      load[e.v] += c;
    }
    for (PointId p = 0; p < space.size(); ++p) {
      if (load[p] == 0.0) continue;
      const double mu = space.measure(p);
      form.c_geom = mu > 0.0 ? std::max(form.c_geom, load[p] / mu) : kInfiniteDistance;
    }
    return form;
  }

  double energy(const std::vector<double>& f) const {
    double e = 0.0;
    for (const auto& edge : edges) {
      const double d = f[edge.u] - f[edge.v];
      e += edge.weight * d * d;
    }
    return e;
  }

  /// E(f, g) = sum_edges w (f_u - f_v)(g_u - g_v).
  double cross_energy(const std::vector<double>& f, const std::vector<double>& g) const {
    double e = 0.0;
    for (const auto& edge : edges) e += edge.weight * (f[edge.u] - f[edge.v]) * (g[edge.u] - g[edge.v]);
    return e;
  }
};

/// f = 1 on A, 1 - d(p, A)/r on the collar, 0 outside A^r.
struct PlateauFunction {
  std::vector<double> values;
  PointSet core;
  double radius = 0.0;
  PointSet support;  ///< A^r (closed; f vanishes on its outer rim)
  double energy = 0.0;
  double mass = 0.0;
  double rayleigh = 0.0;
};

inline double weighted_mass(const MetricMeasureSpace& space, const std::vector<double>& f) {
  double m = 0.0;
  for (PointId p = 0; p < space.size(); ++p) m += space.measure(p) * f[p] * f[p];
  return m;
}

inline PlateauFunction plateau(const MetricMeasureSpace& space, const DirichletForm& form, const PointSet& core,
                               double r) {
  if (core.empty()) throw DomainError("plateau: core set is empty");
  if (!(r > 0.0)) throw DomainError("plateau: radius must be positive");
  if (!(core.measure() > 0.0)) throw DomainError("plateau: core set has zero measure");
  PlateauFunction f;
  f.core = core;
  f.radius = r;
  const auto dist = space.distances_to(core);
  f.values.resize(space.size());
  std::vector<PointId> support;
  for (PointId p = 0; p < space.size(); ++p) {
    f.values[p] = core.contains(p) ? 1.0 : std::clamp(1.0 - dist[p] / r, 0.0, 1.0);
    if (dist[p] <= r) support.push_back(p);
  }
  f.support = space.make_set(std::move(support));
  f.energy = form.energy(f.values);
  f.mass = weighted_mass(space, f.values);
  f.rayleigh = f.energy / f.mass;
  return f;
}

inline PlateauFunction plateau(const MetricMeasureSpace& space, const PointSet& core, double r) {
  return plateau(space, DirichletForm::from_space(space), core, r);
}

/// c_geom / r^2 * mu(A^{r+h} \ A) / mu(A), h = max edge length.
inline double rayleigh_bound_lemma2(const MetricMeasureSpace& space, const DirichletForm& form, const PointSet& core,
                                    double r) {
  if (core.empty()) throw DomainError("rayleigh bound: core set is empty");
  if (!(r > 0.0)) throw DomainError("rayleigh bound: radius must be positive");
  if (!(core.measure() > 0.0)) throw DomainError("rayleigh bound: core set has zero measure");
  const PointSet grown = enlarge(space, core, r + form.max_edge_length);
  const double collar = set_difference(space, grown, core).measure();
  if (collar == 0.0) return 0.0;
  return form.c_geom / (r * r) * collar / core.measure();
}

inline double rayleigh_bound_lemma2(const MetricMeasureSpace& space, const PointSet& core, double r) {
  return rayleigh_bound_lemma2(space, DirichletForm::from_space(space), core, r);
}

/// Largest value of |f_u - f_v| - l_uv / r over edges; <= 0 means f is 1/r-Lipschitz along edges.
inline double lipschitz_excess(const DirichletForm& form, const PlateauFunction& f) {
  double worst = -kInfiniteDistance;
  for (const auto& e : form.edges)
    worst = std::max(worst, std::abs(f.values[e.u] - f.values[e.v]) - e.length / f.radius);
  return form.edges.empty() ? 0.0 : worst;
}

/// Slack for lipschitz_excess: f in [0,1] is computed as 1 - d/r, so a few ulp of 1.
inline constexpr double kLipschitzSlack = 1e-14;

struct QFilterResult {
  std::vector<std::size_t> selected;     ///< k indices, ascending
  std::vector<double> enlarged_measure;  ///< mu(A_i^r) for every set
  double threshold = 0.0;                ///< V / k
  std::size_t q_count = 0;               ///< #{i : mu(A_i^r) >= V/k}
  std::size_t qualifying = 0;            ///< #{i : mu(A_i^r) <= V/k}
};

/// Keeps the k sets of smallest mu(A_i^r) (ties by index) out of 2k; all kept sets
/// satisfy mu(A_i^r) <= V/k.
inline QFilterResult q_filter(const MetricMeasureSpace& space, const packing::PackingFamily& family, double volume,
                              std::size_t k) {
  if (k < 1) throw DomainError("q_filter: k must be >= 1");
  if (family.A.size() != 2 * k)
    throw DomainError("q_filter: family has " + std::to_string(family.A.size()) + " sets, expected 2k = " +
                      std::to_string(2 * k));
  if (!(std::abs(volume - space.total_measure()) <= 1e-12 * space.total_measure()))
    throw DomainError("q_filter: V must equal the total measure of the space");
  QFilterResult q;
  q.threshold = volume / static_cast<double>(k);
  for (const auto& a : family.A) q.enlarged_measure.push_back(enlarge(space, a, family.r).measure());
  std::vector<std::size_t> order(family.A.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return q.enlarged_measure[x] < q.enlarged_measure[y]; });
  for (double m : q.enlarged_measure) {
    if (m >= q.threshold) ++q.q_count;
    if (m <= q.threshold) ++q.qualifying;
  }
  if (q.qualifying < k)
    throw InvariantError("q_filter: only " + std::to_string(q.qualifying) + " of " + std::to_string(2 * k) +
                         " enlargements have measure <= V/k; the enlargements cannot be disjoint");
  q.selected.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(q.selected.begin(), q.selected.end());
  return q;
}

struct MinMaxBounds {
  std::vector<std::size_t> order;     ///< function indices sorted by quotient ascending (ties by index)
  std::vector<double> quotients;      ///< sorted quotients
  std::vector<double> bounds;         ///< bounds[m-1] >= lambda_m
  std::vector<double> max_quotient;   ///< max_{i<=m} sorted quotient
  bool energy_orthogonal = true;      ///< no edge joins the positive sets of two functions
};

/// For functions with pairwise disjoint supports: lambda_m <= bound_m. When some
/// edge joins the positive sets of two functions the energy cross terms are
/// nonzero and bound_m is the top Ritz value of the span of the first m sorted
/// functions, which is >= the max quotient. Otherwise both coincide.
inline MinMaxBounds eigen_upper_bounds(const MetricMeasureSpace& space, const DirichletForm& form,
                                       const std::vector<PlateauFunction>& fs) {
  const std::size_t count = fs.size();
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = i + 1; j < count; ++j)
      if (!are_disjoint(fs[i].support, fs[j].support))
        throw DomainError("eigen_upper_bounds: supports of functions " + std::to_string(i) + " and " +
                          std::to_string(j) + " overlap");
  MinMaxBounds out;
  out.order.resize(count);
  std::iota(out.order.begin(), out.order.end(), 0);
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](std::size_t x, std::size_t y) { return fs[x].rayleigh < fs[y].rayleigh; });

  // owner[p] = index of the function positive at p.
  std::vector<std::ptrdiff_t> owner(space.size(), -1);
  for (std::size_t i = 0; i < count; ++i)
    for (PointId p : fs[i].support)
      if (fs[i].values[p] > 0.0) owner[p] = static_cast<std::ptrdiff_t>(i);
  for (const auto& e : form.edges)
    if (owner[e.u] >= 0 && owner[e.v] >= 0 && owner[e.u] != owner[e.v]) out.energy_orthogonal = false;

  Eigen::MatrixXd energy = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(count));
  Eigen::VectorXd mass(static_cast<Eigen::Index>(count));
  for (std::size_t a = 0; a < count; ++a) {
    const auto& fa = fs[out.order[a]];
    out.quotients.push_back(fa.rayleigh);
    mass[static_cast<Eigen::Index>(a)] = fa.mass;
    energy(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) = fa.energy;
    if (!out.energy_orthogonal)
      for (std::size_t b = 0; b < a; ++b) {
        const double c = form.cross_energy(fa.values, fs[out.order[b]].values);
        energy(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = c;
        energy(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = c;
      }
  }
  double running = 0.0;
  for (std::size_t m = 1; m <= count; ++m) {
    running = std::max(running, out.quotients[m - 1]);
    out.max_quotient.push_back(running);
    if (out.energy_orthogonal) {
      out.bounds.push_back(running);
      continue;
    }
    // Supports are disjoint, so the mass matrix of the span is diagonal.
    const auto mm = static_cast<Eigen::Index>(m);
    Eigen::VectorXd s = mass.head(mm).cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd h = s.asDiagonal() * energy.topLeftCorner(mm, mm) * s.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    out.bounds.push_back(std::max(running, es.eigenvalues()[mm - 1]));
  }
  return out;
}

inline MinMaxBounds eigen_upper_bounds(const MetricMeasureSpace& space, const std::vector<PlateauFunction>& fs) {
  return eigen_upper_bounds(space, DirichletForm::from_space(space), fs);
}

/// Plateaus over a list of core sets, built concurrently.
inline std::vector<PlateauFunction> plateaus(const MetricMeasureSpace& space, const DirichletForm& form,
                                             const std::vector<PointSet>& cores, double r) {
  std::vector<PlateauFunction> out(cores.size());
  parallel_for(cores.size(), [&](std::size_t i) { out[i] = plateau(space, form, cores[i], r); });
  return out;
}

}  // namespace specpack::rayleigh
