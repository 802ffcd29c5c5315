#pragma once

// Weighted graph Laplacian with mass matrix, L x = lambda M x, M = diag(mu).
// The problem is solved in the symmetric form S = M^-1/2 L M^-1/2.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "specpack/domains.hpp"
#include "specpack/errors.hpp"
#include "specpack/mmspace.hpp"

namespace specpack::spectrum {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Dense solver is used up to this many points when the method is Auto.
inline constexpr std::size_t kDenseLimit = 600;

struct DiscreteLaplacian {
  SparseMatrix L;        ///< L_uv = -w_uv, L_uu = sum_v w_uv
  Eigen::VectorXd mass;  ///< diagonal of M

  std::size_t size() const { return static_cast<std::size_t>(mass.size()); }
};

inline DiscreteLaplacian assemble(const MetricMeasureSpace& space) {
  if (space.edges().empty()) throw DomainError("assemble: space has no edges");
  const auto n = static_cast<Eigen::Index>(space.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(space.edges().size() * 4);
  for (const auto& e : space.edges()) {
    const auto u = static_cast<Eigen::Index>(e.u);
    const auto v = static_cast<Eigen::Index>(e.v);
    trip.emplace_back(u, v, -e.weight);
    trip.emplace_back(v, u, -e.weight);
    trip.emplace_back(u, u, e.weight);
    trip.emplace_back(v, v, e.weight);
  }
  DiscreteLaplacian lap;
  lap.L.resize(n, n);
  lap.L.setFromTriplets(trip.begin(), trip.end());
  lap.L.makeCompressed();
  lap.mass.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) lap.mass[i] = space.measure(static_cast<PointId>(i));
  return lap;
}

enum class Method { Auto, Dense, Krylov };

struct SpectrumResult {
  std::vector<double> eigenvalues;  ///< ascending
  std::vector<double> residuals;    ///< ||L x - lambda M x|| / ||x||
  Eigen::MatrixXd eigenvectors;     ///< M-orthonormal columns
  std::string method;
  std::size_t iterations = 0;
  std::size_t subspace_dimension = 0;
};

namespace detail {

inline Eigen::VectorXd inv_sqrt_mass(const DiscreteLaplacian& lap) {
  Eigen::VectorXd d(lap.mass.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (!(lap.mass[i] > 0.0))
      throw DomainError("eigenvalues: point " + std::to_string(i) + " has zero mass; the mass matrix must be positive");
    d[i] = 1.0 / std::sqrt(lap.mass[i]);
  }
  return d;
}

inline SparseMatrix symmetric_form(const DiscreteLaplacian& lap, const Eigen::VectorXd& d) {
  SparseMatrix s = d.asDiagonal() * lap.L * d.asDiagonal();
  s.makeCompressed();
  return s;
}

inline double gershgorin_norm(const SparseMatrix& s) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(s.rows());
  for (Eigen::Index k = 0; k < s.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(s, k); it; ++it) rows[it.row()] += std::abs(it.value());
  return std::max(rows.maxCoeff(), 1e-300);
}

inline void finish(const DiscreteLaplacian& lap, const Eigen::VectorXd& d, const Eigen::MatrixXd& y,
                   const Eigen::VectorXd& values, std::size_t m, SpectrumResult& out) {
  out.eigenvalues.resize(m);
  out.residuals.resize(m);
  out.eigenvectors = d.asDiagonal() * y.leftCols(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    out.eigenvalues[i] = values[c];
    Eigen::VectorXd x = out.eigenvectors.col(c);
    Eigen::VectorXd r = lap.L * x - values[c] * lap.mass.cwiseProduct(x);
    out.residuals[i] = r.norm() / x.norm();
  }
}

/// Orthonormalises block w against q[:, :dim] and itself; returns the number of
/// columns kept. Projection against the existing basis is done blockwise, twice.
/// Columns that vanish are replaced with fresh random directions.
inline Eigen::Index append_block(Eigen::MatrixXd& q, Eigen::Index dim, Eigen::MatrixXd w, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  const Eigen::Index n = q.rows();
  std::vector<double> before(static_cast<std::size_t>(w.cols()));
  for (Eigen::Index j = 0; j < w.cols(); ++j) before[static_cast<std::size_t>(j)] = w.col(j).norm();
  if (dim > 0)
    for (int pass = 0; pass < 2; ++pass) w -= q.leftCols(dim) * (q.leftCols(dim).transpose() * w);
  Eigen::Index added = 0;
  for (Eigen::Index j = 0; j < w.cols() && dim + added < n; ++j) {
    Eigen::VectorXd v = w.col(j);
    double scale = before[static_cast<std::size_t>(j)];
    for (int attempt = 0; attempt < 4; ++attempt) {
      for (int pass = 0; pass < 2; ++pass) {
        if (added > 0) v -= q.middleCols(dim, added) * (q.middleCols(dim, added).transpose() * v);
        if (attempt > 0 && dim > 0) v -= q.leftCols(dim) * (q.leftCols(dim).transpose() * v);
      }
      if (v.norm() > 1e-10 * std::max(scale, 1e-300)) break;
      for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
      scale = v.norm();
    }
    // A column that only lost accuracy to cancellation gets one more full pass.
    if (dim > 0) v -= q.leftCols(dim) * (q.leftCols(dim).transpose() * v);
    if (added > 0) v -= q.middleCols(dim, added) * (q.middleCols(dim, added).transpose() * v);
    const double nv = v.norm();
    if (!(nv > 1e-12 * std::max(scale, 1e-300))) continue;
    q.col(dim + added) = v / nv;
    ++added;
  }
  return added;
}

inline SpectrumResult solve_dense(const DiscreteLaplacian& lap, std::size_t m) {
  const Eigen::VectorXd d = inv_sqrt_mass(lap);
  Eigen::MatrixXd s = Eigen::MatrixXd(symmetric_form(lap, d));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed");
  SpectrumResult out;
  out.method = "dense";
  out.subspace_dimension = lap.size();
  finish(lap, d, es.eigenvectors(), es.eigenvalues(), m, out);
  return out;
}

/// Block shift-invert Krylov with Rayleigh-Ritz on S over the whole basis.
inline SpectrumResult solve_krylov(const DiscreteLaplacian& lap, std::size_t m, double tol, std::uint64_t seed) {
  const Eigen::VectorXd d = inv_sqrt_mass(lap);
  const SparseMatrix s = symmetric_form(lap, d);
  const auto n = static_cast<Eigen::Index>(lap.size());
  const double norm = gershgorin_norm(s);
  double max_diag = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) max_diag = std::max(max_diag, s.coeff(i, i));
  const double shift = 1e-3 * std::max(max_diag, 1e-300);

  SparseMatrix k = s;
  for (Eigen::Index i = 0; i < n; ++i) k.coeffRef(i, i) += shift;
  Eigen::SimplicialLDLT<SparseMatrix> factor(k);
  if (factor.info() != Eigen::Success) throw ConvergenceError("shift-invert factorisation failed");

  const Eigen::Index want = static_cast<Eigen::Index>(m);
  const Eigen::Index block = std::min<Eigen::Index>(n, std::max<Eigen::Index>(8, (want + 3) / 4));
  const Eigen::Index max_dim = std::min<Eigen::Index>(n, std::max<Eigen::Index>(10 * want + 4 * block, 400));
  // Rayleigh-Ritz runs at geometrically spaced basis sizes.
  Eigen::Index next_check = std::min<Eigen::Index>(n, 2 * want + block);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd q(n, max_dim);
  Eigen::MatrixXd start(n, block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < n; ++i) start(i, j) = normal(rng);
  Eigen::Index dim = append_block(q, 0, start, rng);
  Eigen::Index last_begin = 0, last_count = dim;

  SpectrumResult out;
  out.method = "krylov";
  std::size_t iter = 0;
  double worst = 0.0;
  while (true) {
    ++iter;
    if (dim < max_dim) {
      Eigen::MatrixXd w = factor.solve(q.middleCols(last_begin, last_count));
      Eigen::Index added = append_block(q, dim, w, rng);
      last_begin = dim;
      last_count = added;
      dim += added;
    }
    if (dim < next_check && dim < max_dim && last_count > 0) continue;
    next_check = std::min<Eigen::Index>(max_dim, dim + std::max<Eigen::Index>(block, dim / 2));

    Eigen::MatrixXd basis = q.leftCols(dim);
    Eigen::MatrixXd sq = s * basis;
    Eigen::MatrixXd h = basis.transpose() * sq;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success) throw ConvergenceError("Rayleigh-Ritz eigensolver failed");
    const Eigen::Index take = std::min(want, dim);
    Eigen::MatrixXd y = basis * es.eigenvectors().leftCols(take);
    Eigen::MatrixXd r = sq * es.eigenvectors().leftCols(take) - y * es.eigenvalues().head(take).asDiagonal();
    worst = 0.0;
    for (Eigen::Index i = 0; i < take; ++i) worst = std::max(worst, r.col(i).norm());
    const bool converged = take == want && worst <= tol * norm;
    if (converged || dim >= n) {
      out.iterations = iter;
      out.subspace_dimension = static_cast<std::size_t>(dim);
      finish(lap, d, y, es.eigenvalues(), m, out);
      return out;
    }
    if (dim >= max_dim || last_count == 0) {
      std::ostringstream os;
      os << "Krylov eigensolver did not converge: subspace " << dim << ", block " << block << ", iterations "
         << iter << ", worst residual " << worst / norm << " (relative), tolerance " << tol;
      throw ConvergenceError(os.str());
    }
  }
}

}  // namespace detail

/// Lowest m eigenpairs of L x = lambda M x. Dense below kDenseLimit points for
/// Method::Auto, block shift-invert Krylov above.
inline SpectrumResult eigenvalues(const DiscreteLaplacian& lap, std::size_t m, double tol = 1e-9,
                                  Method method = Method::Auto, std::uint64_t seed = 0) {
  if (m < 1 || m > lap.size()) throw DomainError("eigenvalues: need 1 <= m <= number of points");
  if (!(tol > 0.0)) throw DomainError("eigenvalues: tolerance must be positive");
  if (method == Method::Auto) method = lap.size() <= kDenseLimit ? Method::Dense : Method::Krylov;
  if (method == Method::Dense) return detail::solve_dense(lap, m);
  return detail::solve_krylov(lap, m, tol, seed);
}

inline SpectrumResult eigenvalues(const MetricMeasureSpace& space, std::size_t m, double tol = 1e-9,
                                  Method method = Method::Auto) {
  return eigenvalues(assemble(space), m, tol, method);
}

struct ContinuumRow {
  std::size_t index = 0;  ///< 1-based eigenvalue index
  double discrete = 0.0;
  double continuum = 0.0;
  double relative_error = 0.0;  ///< |discrete - continuum| / continuum, 0 for the zero mode
};

/// Sorted Neumann eigenvalues pi^2 (p^2/Lx^2 + q^2/Ly^2) of the rectangle.
inline std::vector<double> rectangle_neumann_values(double lx, double ly, std::size_t count) {
  const int reach = static_cast<int>(count) + 1;
  std::vector<double> vals;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  for (int p = 0; p <= reach; ++p)
    for (int q = 0; q <= reach; ++q) vals.push_back(pi2 * (p * p / (lx * lx) + q * q / (ly * ly)));
  std::sort(vals.begin(), vals.end());
  vals.resize(std::min(count, vals.size()));
  return vals;
}

/// Discrete versus continuum Neumann spectrum of a rectangle for the first `count` eigenvalues.
inline std::vector<ContinuumRow> continuum_check(double lx, double ly, double h, std::size_t count,
                                                 double tol = 1e-9) {
  auto space = domains::rectangle(lx, ly, h);
  auto res = eigenvalues(space, std::min(count, space.size()), tol);
  auto exact = rectangle_neumann_values(lx, ly, res.eigenvalues.size());
  std::vector<ContinuumRow> rows;
  for (std::size_t i = 0; i < res.eigenvalues.size(); ++i) {
    ContinuumRow row{i + 1, res.eigenvalues[i], exact[i], 0.0};
    if (exact[i] > 0.0) row.relative_error = std::abs(row.discrete - row.continuum) / row.continuum;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace specpack::spectrum
