#pragma once

// Max-coverage ball placement and the disjoint packing family built from it.
//
// xi(m) is the largest restricted measure covered by m closed r-balls centred at
// space points. The (A, D) construction takes the smallest k with xi(k) >= alpha,
// A = Y n U_k and D = Y n V_k where V_k uses radius 4r around the same centers.
// Iterating on Y minus the previous D's yields N sets pairwise >= 3r apart.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "specpack/errors.hpp"
#include "specpack/geometry.hpp"
#include "specpack/mmspace.hpp"

namespace specpack::packing {

enum class Strategy { Exhaustive, Greedy };

inline const char* to_string(Strategy s) { return s == Strategy::Exhaustive ? "exhaustive" : "greedy"; }

/// What to do when the construction's hypothesis fails for the given radius.
enum class HypothesisPolicy {
  Enforce,  ///< throw HypothesisError
  Verify,   ///< proceed; postconditions are verified on the output instead
};

inline const char* to_string(HypothesisPolicy p) { return p == HypothesisPolicy::Enforce ? "enforce" : "verify"; }

struct CoverageMaximizer {
  Strategy strategy = Strategy::Greedy;
  std::uint64_t seed = 0;  ///< shuffles the candidate order of the swap search
};

/// Exhaustive search is offered for small spaces or at most two centers.
inline bool exhaustive_feasible(std::size_t points, std::size_t m) { return points <= 12 || m <= 2; }

struct CoverageResult {
  double value = 0.0;
  std::vector<PointId> centers;
};

/// One named postcondition with its signed slack (>= 0 means satisfied).
struct Check {
  std::string name;
  bool pass = true;
  double margin = 0.0;
};

inline bool all_pass(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

/// r-balls of every point, shareable across restrictions of the same space.
using BallTable = std::shared_ptr<const std::vector<std::vector<PointId>>>;

inline BallTable make_ball_table(const MetricMeasureSpace& space, double r) {
  return std::make_shared<const std::vector<std::vector<PointId>>>(all_balls(space, r));
}

/// Restricted measure and precomputed r-balls shared by the maximizers.
class CoverageProblem {
 public:
  CoverageProblem(const MetricMeasureSpace& space, double r, const PointSet& restriction)
      : CoverageProblem(space, r, restriction, make_ball_table(space, r)) {}

  /// `balls` must hold the r-balls of `space`.
  CoverageProblem(const MetricMeasureSpace& space, double r, const PointSet& restriction, BallTable balls)
      : space_(&space), r_(r), balls_(std::move(balls)), weight_(space.size(), 0.0) {
    if (!(r > 0.0)) throw DomainError("coverage: radius must be positive");
    for (PointId p : restriction) weight_[p] = space.measure(p);
    for (PointId p : restriction) total_ += weight_[p];
  }

  std::size_t size() const noexcept { return weight_.size(); }
  double radius() const noexcept { return r_; }
  double restricted_total() const noexcept { return total_; }
  const std::vector<PointId>& ball_of(PointId c) const { return (*balls_)[c]; }
  double weight(PointId p) const { return weight_[p]; }
  const MetricMeasureSpace& space() const noexcept { return *space_; }

  /// Restricted measure of the union of the balls, summed in point order.
  double value_of(const std::vector<PointId>& centers) const {
    std::vector<char> covered(size(), 0);
    for (PointId c : centers)
      for (PointId p : (*balls_)[c]) covered[p] = 1;
    double v = 0.0;
    for (PointId p = 0; p < size(); ++p)
      if (covered[p]) v += weight_[p];
    return v;
  }

  double ball_value(PointId c) const {
    double v = 0.0;
    for (PointId p : (*balls_)[c]) v += weight_[p];
    return v;
  }

  /// True maximum over center m-subsets; first lexicographic maximizer wins.
  CoverageResult exhaustive(std::size_t m) const {
    m = std::min(m, size());
    if (m == 0) throw DomainError("xi: m must be >= 1");
    if (!exhaustive_feasible(size(), m))
      throw DomainError("exhaustive coverage infeasible for " + std::to_string(size()) + " points and m=" +
                        std::to_string(m));
    CoverageResult best;
    best.value = -1.0;
    const double slack = 1e-9 * std::max(total_, 1e-300);
    std::vector<int> count(size(), 0);
    std::vector<PointId> combo;
    double running = 0.0;
    auto recurse = [&](auto&& self, PointId start) -> void {
      if (combo.size() == m) {
        if (running >= best.value - slack) {
          double exact = value_of(combo);
          if (exact > best.value) {
            best.value = exact;
            best.centers = combo;
          }
        }
        return;
      }
      const std::size_t need = m - combo.size();
      for (PointId c = start; c + need <= size(); ++c) {
        for (PointId p : (*balls_)[c])
          if (count[p]++ == 0) running += weight_[p];
        combo.push_back(c);
        self(self, c + 1);
        combo.pop_back();
        for (PointId p : (*balls_)[c])
          if (--count[p] == 0) running -= weight_[p];
      }
    };
    recurse(recurse, 0);
    return best;
  }

 private:
  const MetricMeasureSpace* space_;
  double r_;
  BallTable balls_;
  std::vector<double> weight_;
  double total_ = 0.0;
};

/// Incremental greedy: each extend() adds the best center (lowest index on
/// ties) and then runs single-center swaps until no swap gains.
class GreedyCoverage {
 public:
  GreedyCoverage(const CoverageProblem& problem, std::uint64_t seed)
      : problem_(&problem),
        count_(problem.size(), 0),
        order_(problem.size()),
        in_ball_(problem.size(), 0),
        chosen_(problem.size(), 0) {
    std::iota(order_.begin(), order_.end(), PointId{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order_.begin(), order_.end(), rng);
    tol_ = 1e-12 * std::max(problem.restricted_total(), 1e-300);
  }

  void extend() {
    const auto& pb = *problem_;
    if (centers_.size() >= pb.size()) return;
    PointId best = pb.size();
    double best_gain = -1.0;
    for (PointId c = 0; c < pb.size(); ++c) {
      if (chosen_[c]) continue;
      double gain = 0.0;
      for (PointId p : pb.ball_of(c))
        if (count_[p] == 0) gain += pb.weight(p);
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    add(best);
    chosen_[best] = 1;
    centers_.push_back(best);
    swap_to_local_optimum();
    value_ = pb.value_of(centers_);
  }

  double value() const noexcept { return value_; }
  const std::vector<PointId>& centers() const noexcept { return centers_; }

 private:
  void add(PointId c) {
    for (PointId p : problem_->ball_of(c)) ++count_[p];
  }
  void remove(PointId c) {
    for (PointId p : problem_->ball_of(c)) --count_[p];
  }

  void swap_to_local_optimum() {
    const auto& pb = *problem_;
    bool improved = true;
    std::size_t guard = 0;
    while (improved && guard++ < 100000) {
      improved = false;
      for (std::size_t i = 0; i < centers_.size(); ++i) {
        const PointId out = centers_[i];
        double loss = 0.0;
        for (PointId p : pb.ball_of(out)) {
          in_ball_[p] = 1;
          if (count_[p] == 1) loss += pb.weight(p);
        }
        PointId swap_in = pb.size();
        for (PointId c : order_) {
          if (chosen_[c]) continue;
          double gain = 0.0;
          for (PointId p : pb.ball_of(c))
            if (count_[p] == 0 || (count_[p] == 1 && in_ball_[p])) gain += pb.weight(p);
          if (gain - loss > tol_) {
            swap_in = c;
            break;
          }
        }
        for (PointId p : pb.ball_of(out)) in_ball_[p] = 0;
        if (swap_in != pb.size()) {
          remove(out);
          add(swap_in);
          chosen_[out] = 0;
          chosen_[swap_in] = 1;
          centers_[i] = swap_in;
          improved = true;
        }
      }
    }
  }

  const CoverageProblem* problem_;
  std::vector<int> count_;
  std::vector<PointId> order_;
  std::vector<char> in_ball_;
  std::vector<char> chosen_;
  std::vector<PointId> centers_;
  double value_ = 0.0;
  double tol_ = 0.0;
};

/// xi(m) restricted to `restriction`; m is clamped to the point count.
inline CoverageResult xi(const MetricMeasureSpace& space, const CoverageMaximizer& maximizer, std::size_t m, double r,
                         const PointSet& restriction) {
  if (m < 1) throw DomainError("xi: m must be >= 1");
  if (!(r > 0.0)) throw DomainError("xi: radius must be positive");
  m = std::min(m, space.size());
  CoverageProblem problem(space, r, restriction);
  if (maximizer.strategy == Strategy::Exhaustive) return problem.exhaustive(m);
  GreedyCoverage greedy(problem, maximizer.seed);
  for (std::size_t j = 0; j < m; ++j) greedy.extend();
  return {greedy.value(), greedy.centers()};
}

struct Lemma1Options {
  HypothesisPolicy policy = HypothesisPolicy::Enforce;
  std::optional<std::size_t> covering_constant;  ///< reuse a known C^(r)
  BallTable balls;                               ///< reuse the r-balls of the space
};

struct Lemma1Result {
  PointSet A;
  PointSet D;
  std::vector<PointId> centers;
  std::size_t k = 0;
  double xi_k = 0.0;
  double xi_prev = 0.0;  ///< xi(k-1), 0 when k = 1
  double xi_one = 0.0;
  double separation = kInfiniteDistance;  ///< d(A, Y n D^c)
  std::size_t covering_constant = 1;
  bool hypothesis_satisfied = true;
  Strategy strategy_used = Strategy::Greedy;
  std::vector<Check> checks;
};

namespace detail {

struct ScanOutcome {
  std::vector<PointId> centers;
  std::size_t k = 0;
  double xi_k = 0.0, xi_prev = 0.0, xi_one = 0.0;
};

inline ScanOutcome smallest_k_scan(const CoverageProblem& problem, const CoverageMaximizer& maximizer, double alpha) {
  ScanOutcome out;
  const std::size_t limit = problem.size();
  if (maximizer.strategy == Strategy::Greedy) {
    GreedyCoverage greedy(problem, maximizer.seed);
    double prev = 0.0;
    for (std::size_t k = 1; k <= limit; ++k) {
      greedy.extend();
      if (k == 1) out.xi_one = greedy.value();
      if (greedy.value() >= alpha) {
        out.k = k;
        out.xi_k = greedy.value();
        out.xi_prev = prev;
        out.centers = greedy.centers();
        return out;
      }
      prev = greedy.value();
    }
  } else {
    double prev = 0.0;
    for (std::size_t k = 1; k <= limit; ++k) {
      auto res = problem.exhaustive(k);
      if (k == 1) out.xi_one = res.value;
      if (res.value >= alpha) {
        out.k = k;
        out.xi_k = res.value;
        out.xi_prev = prev;
        out.centers = res.centers;
        return out;
      }
      prev = res.value;
    }
  }
  throw ConstructionError("no number of r-balls reaches alpha = " + std::to_string(alpha) +
                          " (restricted measure " + std::to_string(problem.restricted_total()) + ")");
}

inline std::string describe_failures(const std::vector<Check>& checks) {
  std::ostringstream os;
  bool first = true;
  for (const auto& c : checks)
    if (!c.pass) {
      os << (first ? "" : "; ") << c.name << " (margin " << c.margin << ")";
      first = false;
    }
  return os.str();
}

inline double max_restricted_ball_measure(const CoverageProblem& problem) {
  double best = 0.0;
  for (PointId c = 0; c < problem.size(); ++c) best = std::max(best, problem.ball_value(c));
  return best;
}

}  // namespace detail

/// Builds (A, D) with mu(A) >= alpha, mu(D) <= 2 C^(r) alpha and d(A, Y n D^c) >= 3r,
/// where Y is `restriction`. Greedy output failing a postcondition is retried
/// exhaustively when feasible.
inline Lemma1Result lemma1_construct(const MetricMeasureSpace& space, const CoverageMaximizer& maximizer, double alpha,
                                     double r, const PointSet& restriction, const Lemma1Options& options = {}) {
  if (!(r > 0.0)) throw DomainError("lemma1_construct: radius must be positive");
  if (!(alpha > 0.0)) throw DomainError("lemma1_construct: alpha must be positive");
  const std::size_t c_hat = options.covering_constant ? *options.covering_constant
                                                      : estimate_covering_constant(space, r);
  CoverageProblem problem(space, r, restriction, options.balls ? options.balls : make_ball_table(space, r));
  const double omega_r = restriction.measure();
  const double max_ball = detail::max_restricted_ball_measure(problem);
  const bool hyp_alpha = alpha <= omega_r / 2.0;
  const bool hyp_balls = 2.0 * static_cast<double>(c_hat) * max_ball <= alpha;
  if (options.policy == HypothesisPolicy::Enforce && !(hyp_alpha && hyp_balls)) {
    std::ostringstream os;
    os << "lemma hypothesis fails: ";
    if (!hyp_alpha) os << "alpha " << alpha << " > omega/2 = " << omega_r / 2.0 << "; ";
    if (!hyp_balls) os << "2*C(r)*max mu(B(x,r)) = " << 2.0 * c_hat * max_ball << " > alpha " << alpha;
    throw HypothesisError(os.str());
  }

  auto attempt = [&](const CoverageMaximizer& mx) {
    Lemma1Result res;
    res.covering_constant = c_hat;
    res.hypothesis_satisfied = hyp_alpha && hyp_balls;
    res.strategy_used = mx.strategy;
    auto scan = detail::smallest_k_scan(problem, mx, alpha);
    res.k = scan.k;
    res.xi_k = scan.xi_k;
    res.xi_prev = scan.xi_prev;
    res.xi_one = scan.xi_one;
    res.centers = scan.centers;
    std::vector<PointId> u_ids, v_ids;
    std::vector<char> in_u(space.size(), 0), in_v(space.size(), 0);
    for (PointId c : res.centers) {
      for (PointId p : problem.ball_of(c)) in_u[p] = 1;
      for (PointId p : ball(space, c, 4.0 * r)) in_v[p] = 1;
    }
    for (PointId p : restriction) {
      if (in_u[p]) u_ids.push_back(p);
      if (in_v[p]) v_ids.push_back(p);
    }
    res.A = space.make_set(std::move(u_ids));
    res.D = space.make_set(std::move(v_ids));
    res.separation = set_distance(space, res.A, set_difference(space, restriction, res.D));
    const double d_cap = 2.0 * static_cast<double>(c_hat) * alpha;
    res.checks.push_back({"mu(A) >= alpha", res.A.measure() >= alpha, res.A.measure() - alpha});
    res.checks.push_back({"mu(D) <= 2C(r)alpha", res.D.measure() <= d_cap, d_cap - res.D.measure()});
    res.checks.push_back({"d(A, Y\\D) >= 3r", res.separation >= 3.0 * r, res.separation - 3.0 * r});
    res.checks.push_back({"A subset D", is_subset(res.A, res.D), 0.0});
    if (mx.strategy == Strategy::Exhaustive && res.k >= 2) {
      double cap = res.xi_prev + res.xi_one;
      res.checks.push_back({"mu(A) <= xi(k-1) + xi(1)", res.A.measure() <= cap, cap - res.A.measure()});
      if (res.hypothesis_satisfied)
        res.checks.push_back({"mu(A) <= 1.5 alpha", res.A.measure() <= 1.5 * alpha, 1.5 * alpha - res.A.measure()});
    }
    return res;
  };

  Lemma1Result res = attempt(maximizer);
  if (all_pass(res.checks)) return res;
  std::string failure = detail::describe_failures(res.checks);
  if (maximizer.strategy == Strategy::Greedy && exhaustive_feasible(space.size(), res.k)) {
    CoverageMaximizer exact{Strategy::Exhaustive, maximizer.seed};
    try {
      Lemma1Result retry = attempt(exact);
      if (all_pass(retry.checks)) return retry;
      failure = detail::describe_failures(retry.checks);
    } catch (const DomainError&) {
      // scan went past the exhaustive limit; report the greedy failure
    }
  }
  throw ConstructionError("lemma construction failed: " + failure);
}

struct FamilyOptions {
  HypothesisPolicy policy = HypothesisPolicy::Enforce;
};

/// N sets with mu(A_i) >= alpha and d(A_i, A_j) >= 3r, plus their enlargements D_i.
struct PackingFamily {
  double r = 0.0;
  double alpha = 0.0;
  std::size_t N = 0;
  std::size_t covering_constant = 1;     ///< discrete C^(r) used in alpha
  double continuum_covering = 0.0;       ///< C(0, r) = 1 + 9^n, reported for comparison
  double total_measure = 0.0;
  double max_ball_measure = 0.0;
  double hypothesis_margin = 0.0;        ///< omega/N - 4 C^2 max mu(B(x,r))
  bool hypothesis_satisfied = true;
  HypothesisPolicy policy = HypothesisPolicy::Enforce;
  Strategy strategy = Strategy::Greedy;
  std::uint64_t seed = 0;
  std::vector<PointSet> A;
  std::vector<PointSet> D;
  std::vector<std::vector<PointId>> centers;
  std::vector<std::size_t> balls_used;   ///< k of each step
  std::vector<Strategy> strategy_used;
  std::vector<double> enlarged_measure;  ///< mu(A_i^r)
  std::vector<Check> checks;

  bool pass() const { return all_pass(checks); }
};

inline double corollary_hypothesis_margin(const MetricMeasureSpace& space, std::size_t N, double r,
                                          std::size_t* c_hat_out = nullptr, double* max_ball_out = nullptr) {
  std::size_t c_hat = estimate_covering_constant(space, r);
  double max_ball = max_ball_measure(space, r);
  if (c_hat_out) *c_hat_out = c_hat;
  if (max_ball_out) *max_ball_out = max_ball;
  double c = static_cast<double>(c_hat);
  return space.total_measure() / static_cast<double>(N) - 4.0 * c * c * max_ball;
}

/// Largest r in {r/2, r/4, ...} (up to 40 halvings) satisfying the family hypothesis, if any.
inline std::optional<double> suggest_admissible_radius(const MetricMeasureSpace& space, std::size_t N, double r) {
  double trial = r;
  for (int i = 0; i < 40; ++i) {
    trial *= 0.5;
    if (corollary_hypothesis_margin(space, N, trial) >= 0.0) return trial;
  }
  return std::nullopt;
}

/// Verifies every family invariant and appends the results to family.checks.
inline void verify_family(const MetricMeasureSpace& space, PackingFamily& f) {
  const double omega = space.total_measure();
  const double d_cap = 2.0 * static_cast<double>(f.covering_constant) * f.alpha;
  const std::size_t n = f.A.size();
  std::vector<PointSet> enlarged;
  f.enlarged_measure.clear();
  for (std::size_t i = 0; i < n; ++i) {
    const std::string tag = "[" + std::to_string(i + 1) + "]";
    f.checks.push_back({"mu(A" + tag + ") >= alpha", f.A[i].measure() >= f.alpha, f.A[i].measure() - f.alpha});
    f.checks.push_back({"A" + tag + " subset D" + tag, is_subset(f.A[i], f.D[i]), 0.0});
    f.checks.push_back({"mu(D" + tag + ") <= 2C(r)alpha", f.D[i].measure() <= d_cap, d_cap - f.D[i].measure()});
    enlarged.push_back(enlarge(space, f.A[i], f.r));
    f.enlarged_measure.push_back(enlarged.back().measure());
  }
  double used = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    used += f.D[i].measure();
    double budget = omega * static_cast<double>(i + 1) / static_cast<double>(f.N);
    // Summation order differs from omega's; allow rounding-level slack only.
    bool ok = used <= budget * (1.0 + 1e-12);
    f.checks.push_back({"sum mu(D[1.." + std::to_string(i + 1) + "]) <= omega*" + std::to_string(i + 1) + "/N", ok,
                        budget - used});
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const std::string tag = "[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]";
      double d = set_distance(space, f.A[i], f.A[j]);
      f.checks.push_back({"d(A" + tag + ") >= 3r", d >= 3.0 * f.r, d - 3.0 * f.r});
      f.checks.push_back({"D" + tag + " disjoint", are_disjoint(f.D[i], f.D[j]), 0.0});
      f.checks.push_back({"A^r" + tag + " disjoint", are_disjoint(enlarged[i], enlarged[j]), 0.0});
    }
}

/// Finite induction: step j runs the lemma on Y_j = Y minus (D_1 u ... u D_{j-1})
/// with alpha = omega / (2 C^(r) N).
inline PackingFamily corollary1_family(const MetricMeasureSpace& space, const CoverageMaximizer& maximizer,
                                       std::size_t N, double r, const FamilyOptions& options = {}) {
  if (N < 1) throw DomainError("corollary1_family: N must be >= 1");
  if (!(r > 0.0)) throw DomainError("corollary1_family: radius must be positive");
  PackingFamily f;
  f.r = r;
  f.N = N;
  f.policy = options.policy;
  f.strategy = maximizer.strategy;
  f.seed = maximizer.seed;
  f.total_measure = space.total_measure();
  f.hypothesis_margin = corollary_hypothesis_margin(space, N, r, &f.covering_constant, &f.max_ball_measure);
  f.hypothesis_satisfied = f.hypothesis_margin >= 0.0;
  f.continuum_covering = geometry::covering_constant(space.dimension(), 0.0, r);
  if (!f.hypothesis_satisfied && options.policy == HypothesisPolicy::Enforce) {
    std::ostringstream os;
    const double c = static_cast<double>(f.covering_constant);
    os << "packing hypothesis fails at r=" << r << ": 4*C(r)^2*max mu(B(x,r)) = " << 4.0 * c * c * f.max_ball_measure
       << " > omega/N = " << f.total_measure / static_cast<double>(N) << "; ";
    if (auto s = suggest_admissible_radius(space, N, r))
      os << "try r <= " << *s;
    else
      os << "no admissible radius found: the space is too coarse for N=" << N;
    throw HypothesisError(os.str());
  }
  const double omega = f.total_measure;
  f.alpha = omega / (2.0 * static_cast<double>(f.covering_constant) * static_cast<double>(N));

  PointSet remaining = space.all_points();
  Lemma1Options lemma_opts{options.policy, f.covering_constant, make_ball_table(space, r)};
  for (std::size_t j = 1; j <= N; ++j) {
    const double budget = omega * static_cast<double>(N + 1 - j) / static_cast<double>(N);
    const bool budget_ok = remaining.measure() >= budget * (1.0 - 1e-12);
    f.checks.push_back({"mu(Y[" + std::to_string(j) + "]) >= omega(N+1-j)/N", budget_ok,
                        remaining.measure() - budget});
    if (remaining.measure() < f.alpha)
      throw ConstructionError("step " + std::to_string(j) + ": remaining measure " +
                              std::to_string(remaining.measure()) + " is below alpha " + std::to_string(f.alpha));
    Lemma1Result step;
    try {
      step = lemma1_construct(space, maximizer, f.alpha, r, remaining, lemma_opts);
    } catch (const ConstructionError& e) {
      throw ConstructionError("step " + std::to_string(j) + ": " + e.what());
    } catch (const HypothesisError& e) {
      throw HypothesisError("step " + std::to_string(j) + ": " + e.what());
    }
    f.A.push_back(step.A);
    f.D.push_back(step.D);
    f.centers.push_back(step.centers);
    f.balls_used.push_back(step.k);
    f.strategy_used.push_back(step.strategy_used);
    remaining = set_difference(space, remaining, step.D);
  }
  verify_family(space, f);
  if (!f.pass()) throw ConstructionError("packing family failed verification: " + detail::describe_failures(f.checks));
  return f;
}

}  // namespace specpack::packing
