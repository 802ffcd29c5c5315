#pragma once

// End-to-end eigenvalue bound: packing family of 2k sets, Q-filter, plateau test
// functions, min-max bounds, and comparison with the computed spectrum.
//
// The space is first rescaled by t so that the curvature bound becomes -1
// (t = a for a > 0). For a = 0 any t is admissible and t is chosen so that
// k_0 = 1, which removes the A_n term. Everything is computed at the scaled
// size and eigenvalues and bounds are reported at the original scale (times t^2).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "specpack/errors.hpp"
#include "specpack/geometry.hpp"
#include "specpack/mmspace.hpp"
#include "specpack/packing.hpp"
#include "specpack/rayleigh.hpp"
#include "specpack/spectrum.hpp"

namespace specpack::pipeline {

using packing::Check;

struct PipelineOptions {
  packing::CoverageMaximizer maximizer{};
  double tol = 1e-9;
  spectrum::Method method = spectrum::Method::Auto;
  std::size_t kmax = 0;  ///< also check lambda_j <= bound_theorem2(j) for j <= kmax
};

/// Relative slack for min-max checks: lambda_m - bound_m <= 1e-10 max(1, bound_m).
inline constexpr double kMinMaxSlack = 1e-10;

struct SweepRow {
  std::size_t k = 0;
  double lambda = 0.0;
  double bound = 0.0;
};

struct PipelineReport {
  geometry::GeometryConstants constants;
  double a = 0.0;
  double t = 1.0;            ///< scale factor applied to the space
  std::size_t k = 1;
  double volume = 0.0;       ///< V at the original scale
  double scaled_volume = 0.0;
  std::uint64_t k0 = 1;
  std::size_t k_eff = 1;     ///< max(k, k_0)
  double r = 0.0;            ///< r_{k_eff} at the scaled size
  std::size_t N = 2;
  packing::PackingFamily family;
  rayleigh::QFilterResult q;
  double c_geom = 0.0;
  double max_edge_length = 0.0;
  double quotient_cap = 0.0;                 ///< 4 C^(r) c_geom / r^2
  std::vector<double> quotients;             ///< R(f_i), all 2k_eff sets, scaled size
  std::vector<double> lemma_bounds;          ///< discrete Lemma bound per set
  std::vector<double> lipschitz_excess;
  rayleigh::MinMaxBounds minmax_selected;
  rayleigh::MinMaxBounds minmax_all;
  std::vector<double> eigenvalues;           ///< original scale
  std::vector<double> residuals;
  std::string spectrum_method;
  double lambda_k = 0.0;                     ///< original scale
  double theorem_bound = 0.0;                ///< A_n a^2 + B_n (k/V)^(2/n)
  double proof_bound = 0.0;                  ///< bound actually produced by the case split
  double constructed_bound = 0.0;            ///< t^2 * bound_{k_eff} from the selected plateaus
  double certified_bound = 0.0;              ///< min(constructed, theorem)
  std::vector<SweepRow> sweep;
  std::vector<Check> checks;

  bool pass() const { return packing::all_pass(checks); }
};

/// Scale factor used by the pipeline.
inline double pipeline_scale(const geometry::GeometryConstants& c, double a, double volume) {
  if (a > 0.0) return a;
  const double denom = 8.0 * c.C1 * c.C1 * c.omega_prime_n;
  if (volume < 0.5 * denom) return 1.0;
  return std::pow(0.5 * denom / volume, 1.0 / c.n);
}

inline void push_upper(std::vector<Check>& checks, const std::string& name, double value, double bound) {
  const double slack = kMinMaxSlack * std::max(1.0, std::abs(bound));
  checks.push_back({name, value - bound <= slack, bound - value});
}

inline PipelineReport theorem2_pipeline(const MetricMeasureSpace& space, const geometry::GeometryConstants& consts,
                                        double a, std::size_t k, const PipelineOptions& options = {}) {
  if (k < 1) throw DomainError("pipeline: k must be >= 1");
  if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("pipeline: curvature parameter a must be >= 0");
  if (consts.variant == geometry::ConstantsVariant::Euclidean && a > 0.0)
    throw DomainError("pipeline: euclidean constants require a = 0");
  if (consts.n != space.dimension())
    throw DomainError("pipeline: constants are for n=" + std::to_string(consts.n) + " but the space has dimension " +
                      std::to_string(space.dimension()));
  if (!(space.total_measure() > 0.0)) throw DomainError("pipeline: space measure must be positive");

  PipelineReport rep;
  rep.constants = consts;
  rep.a = a;
  rep.k = k;
  rep.volume = space.total_measure();
  rep.t = pipeline_scale(consts, a, rep.volume);
  const MetricMeasureSpace scaled = rep.t == 1.0 ? space : scale_space(space, rep.t);
  rep.scaled_volume = scaled.total_measure();
  const double t2 = rep.t * rep.t;

  const auto sched = geometry::schedule_radius(consts, rep.scaled_volume, k);
  rep.k0 = sched.k_0;
  rep.k_eff = std::max<std::size_t>(k, static_cast<std::size_t>(sched.k_0));
  rep.r = geometry::schedule_radius(consts, rep.scaled_volume, rep.k_eff).r_k;
  rep.N = 2 * rep.k_eff;

  rep.family = packing::corollary1_family(scaled, options.maximizer, rep.N, rep.r,
                                          packing::FamilyOptions{packing::HypothesisPolicy::Enforce});
  rep.checks.insert(rep.checks.end(), rep.family.checks.begin(), rep.family.checks.end());
  rep.q = rayleigh::q_filter(scaled, rep.family, rep.scaled_volume, rep.k_eff);
  rep.checks.push_back({"Q <= k", rep.q.q_count <= rep.k_eff,
                        static_cast<double>(rep.k_eff) - static_cast<double>(rep.q.q_count)});

  const auto form = rayleigh::DirichletForm::from_space(scaled);
  rep.c_geom = form.c_geom;
  rep.max_edge_length = form.max_edge_length;
  const double c_hat = static_cast<double>(rep.family.covering_constant);
  rep.quotient_cap = 4.0 * c_hat * form.c_geom / (rep.r * rep.r);

  const auto fs = rayleigh::plateaus(scaled, form, rep.family.A, rep.r);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const std::string tag = "[" + std::to_string(i + 1) + "]";
    rep.quotients.push_back(fs[i].rayleigh);
    rep.lemma_bounds.push_back(rayleigh::rayleigh_bound_lemma2(scaled, form, rep.family.A[i], rep.r));
    rep.lipschitz_excess.push_back(rayleigh::lipschitz_excess(form, fs[i]));
    rep.checks.push_back({"R(f" + tag + ") <= lemma bound", fs[i].rayleigh <= rep.lemma_bounds.back(),
                          rep.lemma_bounds.back() - fs[i].rayleigh});
    rep.checks.push_back({"f" + tag + " edge Lipschitz", rep.lipschitz_excess.back() <= rayleigh::kLipschitzSlack,
                          -rep.lipschitz_excess.back()});
  }
  std::vector<rayleigh::PlateauFunction> selected;
  for (std::size_t i : rep.q.selected) {
    selected.push_back(fs[i]);
    rep.checks.push_back({"R(f[" + std::to_string(i + 1) + "]) <= 4C(r)c_geom/r^2",
                          fs[i].rayleigh <= rep.quotient_cap, rep.quotient_cap - fs[i].rayleigh});
  }
  rep.minmax_selected = rayleigh::eigen_upper_bounds(scaled, form, selected);
  rep.minmax_all = rayleigh::eigen_upper_bounds(scaled, form, fs);

  const std::size_t want = std::min(scaled.size(), std::max({rep.N, k, options.kmax}));
  const auto spec = spectrum::eigenvalues(spectrum::assemble(scaled), want, options.tol, options.method);
  rep.spectrum_method = spec.method;
  for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i) {
    rep.eigenvalues.push_back(t2 * spec.eigenvalues[i]);
    rep.residuals.push_back(spec.residuals[i]);
  }
  const auto& lam = spec.eigenvalues;
  for (std::size_t m = 1; m <= rep.minmax_selected.bounds.size() && m <= lam.size(); ++m)
    push_upper(rep.checks, "min-max selected: lambda_" + std::to_string(m) + " <= bound", lam[m - 1],
               rep.minmax_selected.bounds[m - 1]);
  for (std::size_t m = 1; m <= rep.minmax_all.bounds.size() && m <= lam.size(); ++m)
    push_upper(rep.checks, "min-max all: lambda_" + std::to_string(m) + " <= bound", lam[m - 1],
               rep.minmax_all.bounds[m - 1]);

  if (k > scaled.size())
    throw DomainError("pipeline: k=" + std::to_string(k) + " exceeds the number of points");
  rep.lambda_k = rep.eigenvalues[k - 1];
  rep.theorem_bound = geometry::bound_theorem2(consts, a, rep.volume, k);
  const double scaled_a_term = k < rep.k0 ? consts.A_n : 0.0;
  rep.proof_bound =
      t2 * (scaled_a_term + consts.B_n * std::pow(static_cast<double>(k) / rep.scaled_volume, 2.0 / consts.n));
  rep.constructed_bound = t2 * rep.minmax_selected.bounds[rep.k_eff - 1];
  rep.certified_bound = std::min(rep.constructed_bound, rep.theorem_bound);

  push_upper(rep.checks, "proof bound <= theorem bound", rep.proof_bound, rep.theorem_bound);
  push_upper(rep.checks, "lambda_k <= theorem bound", rep.lambda_k, rep.theorem_bound);
  push_upper(rep.checks, "lambda_k <= constructed bound", rep.lambda_k, rep.constructed_bound);
  const double weyl = std::pow(static_cast<double>(k) / rep.volume, 2.0 / consts.n);
  const double shape_cap = consts.B_n + consts.A_n * a * a / weyl;
  push_upper(rep.checks, "certified / (k/V)^(2/n) <= B_n + A_n a^2 (V/k)^(2/n)", rep.certified_bound / weyl,
             shape_cap);

  for (std::size_t j = 1; j <= options.kmax && j <= rep.eigenvalues.size(); ++j) {
    SweepRow row{j, rep.eigenvalues[j - 1], geometry::bound_theorem2(consts, a, rep.volume, j)};
    rep.sweep.push_back(row);
    push_upper(rep.checks, "sweep: lambda_" + std::to_string(j) + " <= theorem bound", row.lambda, row.bound);
  }
  return rep;
}

}  // namespace specpack::pipeline
