#pragma once

// JSON views of library results and the schema-versioned run report envelope.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "specpack/geometry.hpp"
#include "specpack/mmspace.hpp"
#include "specpack/packing.hpp"
#include "specpack/pipeline.hpp"
#include "specpack/rayleigh.hpp"
#include "specpack/spectrum.hpp"

namespace specpack::report {

using json = nlohmann::json;

inline constexpr const char* kReportSchema = "specpack-report/1";

/// Non-finite doubles become null (JSON has no infinity); the key is kept.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

/// 64-bit FNV-1a.
class Digest {
 public:
  void add(std::string_view bytes) {
    for (unsigned char c : bytes) {
      hash_ ^= c;
      hash_ *= 0x100000001b3ULL;
    }
  }
  std::string hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    std::uint64_t h = hash_;
    for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    return out;
  }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

inline json to_json(const std::vector<packing::Check>& checks) {
  json arr = json::array();
  for (const auto& c : checks) arr.push_back({{"name", c.name}, {"pass", c.pass}, {"margin", number(c.margin)}});
  return arr;
}

inline json to_json(const geometry::GeometryConstants& c) {
  return {{"n", c.n},
          {"variant", geometry::to_string(c.variant)},
          {"model_a", c.a},
          {"C1", c.C1},
          {"omega_prime_n", c.omega_prime_n},
          {"A_n", c.A_n},
          {"B_n", c.B_n}};
}

inline json ids(const PointSet& s) { return s.ids(); }

inline json to_json(const packing::PackingFamily& f) {
  json A = json::array(), D = json::array(), sets = json::array();
  for (std::size_t i = 0; i < f.A.size(); ++i) {
    A.push_back(ids(f.A[i]));
    D.push_back(ids(f.D[i]));
    sets.push_back({{"index", i + 1},
                    {"mu_A", f.A[i].measure()},
                    {"mu_D", f.D[i].measure()},
                    {"mu_A_r", i < f.enlarged_measure.size() ? number(f.enlarged_measure[i]) : json(nullptr)},
                    {"balls", f.balls_used[i]},
                    {"centers", f.centers[i]},
                    {"strategy", packing::to_string(f.strategy_used[i])}});
  }
  return {{"r", f.r},
          {"alpha", f.alpha},
          {"N", f.N},
          {"covering_constant", f.covering_constant},
          {"continuum_covering_constant", f.continuum_covering},
          {"total_measure", f.total_measure},
          {"max_ball_measure", f.max_ball_measure},
          {"hypothesis_margin", f.hypothesis_margin},
          {"hypothesis_satisfied", f.hypothesis_satisfied},
          {"policy", packing::to_string(f.policy)},
          {"strategy", packing::to_string(f.strategy)},
          {"seed", f.seed},
          {"sets", sets},
          {"A", A},
          {"D", D},
          {"checks", to_json(f.checks)},
          {"pass", f.pass()}};
}

/// Core sets from a pack output: either the run report, the bare family, or an
/// array of id arrays.
inline std::vector<std::vector<PointId>> family_sets_from_json(const json& j) {
  try {
    const json* node = &j;
    if (node->is_object() && node->contains("result")) node = &node->at("result");
    if (node->is_object()) {
      if (!node->contains("A")) throw ParseError("sets JSON has no 'A' field");
      node = &node->at("A");
    }
    if (!node->is_array()) throw ParseError("sets JSON: expected an array of point-id arrays");
    return node->get<std::vector<std::vector<PointId>>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("sets JSON: ") + e.what());
  }
}

inline json to_json(const rayleigh::MinMaxBounds& b) {
  return {{"order", b.order},
          {"quotients", b.quotients},
          {"max_quotient", b.max_quotient},
          {"bounds", b.bounds},
          {"energy_orthogonal", b.energy_orthogonal}};
}

inline json to_json(const spectrum::SpectrumResult& s) {
  return {{"method", s.method},
          {"eigenvalues", s.eigenvalues},
          {"residuals", s.residuals},
          {"iterations", s.iterations},
          {"subspace_dimension", s.subspace_dimension}};
}

inline json to_json(const pipeline::PipelineReport& r) {
  json sweep = json::array();
  for (const auto& row : r.sweep) sweep.push_back({{"k", row.k}, {"lambda", row.lambda}, {"bound", row.bound}});
  json fam = to_json(r.family);
  fam.erase("checks");
  return {{"constants", to_json(r.constants)},
          {"a", r.a},
          {"k", r.k},
          {"scale", r.t},
          {"volume", r.volume},
          {"scaled_volume", r.scaled_volume},
          {"k0", r.k0},
          {"k_eff", r.k_eff},
          {"r", r.r},
          {"N", r.N},
          {"family", fam},
          {"q_filter",
           {{"threshold", r.q.threshold},
            {"q_count", r.q.q_count},
            {"enlarged_measure", r.q.enlarged_measure},
            {"selected", r.q.selected}}},
          {"c_geom", number(r.c_geom)},
          {"max_edge_length", r.max_edge_length},
          {"quotient_cap", number(r.quotient_cap)},
          {"quotients", r.quotients},
          {"lemma_bounds", r.lemma_bounds},
          {"minmax_selected", to_json(r.minmax_selected)},
          {"minmax_all", to_json(r.minmax_all)},
          {"spectrum", {{"method", r.spectrum_method}, {"eigenvalues", r.eigenvalues}, {"residuals", r.residuals}}},
          {"lambda_k", r.lambda_k},
          {"bound",
           {{"theorem", r.theorem_bound},
            {"proof", r.proof_bound},
            {"constructed", r.constructed_bound},
            {"certified", r.certified_bound}}},
          {"sweep", sweep},
          {"pass", r.pass()}};
}

/// Envelope shared by every subcommand.
struct RunReport {
  std::string command;
  std::string input_digest;
  json result = json::object();
  std::vector<packing::Check> checks;
  double wall_time = 0.0;

  bool pass() const { return packing::all_pass(checks); }

  json to_json() const {
    return {{"schema", kReportSchema},
            {"command", command},
            {"input_digest", input_digest},
            {"result", result},
            {"checks", report::to_json(checks)},
            {"pass", pass()},
            {"wall_time", wall_time}};
  }
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace specpack::report
