// specpack command-line front end. Every subcommand writes one JSON document to
// --out (or stdout). Exit codes: 0 all checks pass, 1 failed check or internal
// error, 2 precondition/hypothesis/validation/parse error, 64 usage error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "specpack/specpack.hpp"

namespace {

using namespace specpack;
using report::json;

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitPrecondition = 2;
constexpr int kExitUsage = 64;

struct SpaceInput {
  std::string path;
  std::string format = "space-json";
  int dimension = 2;
  double eps = 0.0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--space", path, "space file")->required();
    cmd->add_option("--format", format, "space-json | csv-points | edge-list")
        ->check(CLI::IsMember({"space-json", "json", "csv-points", "csv", "edge-list"}));
    cmd->add_option("--dimension", dimension, "dimension for csv-points and edge-list input")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--eps", eps, "epsilon-graph radius for csv-points input")->check(CLI::NonNegativeNumber);
  }

  MetricMeasureSpace load(report::Digest& digest) const {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    digest.add(text);
    std::istringstream is(text);
    auto space = domains::load(is, domains::parse_format(format), domains::CsvOptions{dimension, eps});
    space.validate();
    return space;
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void emit(const json& doc, const std::string& out) {
  const std::string text = doc.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw ParseError("cannot write " + out);
  f << text;
}

/// Parses "2", "2..4" or "2,3".
std::vector<int> parse_dimensions(const std::string& s) {
  std::vector<int> out;
  auto to_int = [&](const std::string& t) {
    try {
      std::size_t used = 0;
      int v = std::stoi(t, &used);
      if (used != t.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw DomainError("invalid parameter 'n': " + s);
    }
  };
  if (auto dots = s.find(".."); dots != std::string::npos) {
    int lo = to_int(s.substr(0, dots)), hi = to_int(s.substr(dots + 2));
    if (lo > hi) throw DomainError("invalid parameter 'n': empty range " + s);
    for (int n = lo; n <= hi; ++n) out.push_back(n);
  } else {
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) out.push_back(to_int(part));
  }
  for (int n : out)
    if (n < 1 || n > 16) throw DomainError("invalid parameter 'n': dimension must be in 1..16");
  return out;
}

std::vector<geometry::ConstantsVariant> parse_variants(const std::string& s) {
  if (s == "hyperbolic") return {geometry::ConstantsVariant::Hyperbolic};
  if (s == "euclidean") return {geometry::ConstantsVariant::Euclidean};
  return {geometry::ConstantsVariant::Hyperbolic, geometry::ConstantsVariant::Euclidean};
}

packing::Strategy parse_strategy(const std::string& s) {
  return s == "exhaustive" ? packing::Strategy::Exhaustive : packing::Strategy::Greedy;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metric packings, plateau test functions and Neumann eigenvalue bounds on finite spaces"};
  app.require_subcommand(1);
  std::string out;

  // generate
  auto* gen = app.add_subcommand("generate", "generate a test space");
  std::string kind;
  std::vector<std::string> params;
  gen->add_option("--kind", kind, "path | cycle | grid | torus_grid | disk_grid | point_cloud")->required();
  gen->add_option("--params", params, "key=value parameters");
  gen->add_option("--out", out, "output file");

  // constants
  auto* cst = app.add_subcommand("constants", "covering constants, omega'_n, A_n and B_n");
  std::string dims = "2";
  std::string variant = "both";
  cst->add_option("--n", dims, "dimension, range a..b or list a,b");
  cst->add_option("--variant", variant, "hyperbolic | euclidean | both")
      ->check(CLI::IsMember({"hyperbolic", "euclidean", "both"}));
  cst->add_option("--out", out, "output file");

  // pack
  auto* pk = app.add_subcommand("pack", "packing family of N sets");
  SpaceInput pack_in;
  pack_in.add_to(pk);
  std::size_t big_n = 1;
  double radius = 1.0;
  std::string strategy = "greedy";
  std::uint64_t seed = 0;
  std::string hypothesis = "verify";
  pk->add_option("--N", big_n, "number of sets")->required()->check(CLI::PositiveNumber);
  pk->add_option("--r", radius, "radius")->required()->check(CLI::PositiveNumber);
  pk->add_option("--strategy", strategy, "greedy | exhaustive")->check(CLI::IsMember({"greedy", "exhaustive"}));
  pk->add_option("--seed", seed, "swap-order seed");
  pk->add_option("--hypothesis", hypothesis, "enforce | verify")->check(CLI::IsMember({"enforce", "verify"}));
  pk->add_option("--out", out, "output file");

  // rayleigh
  auto* ry = app.add_subcommand("rayleigh", "plateau functions and min-max bounds for given sets");
  SpaceInput ray_in;
  ray_in.add_to(ry);
  std::string sets_path;
  double ray_r = 1.0;
  ry->add_option("--sets", sets_path, "pack output or JSON array of point-id arrays")->required();
  ry->add_option("--r", ray_r, "plateau radius")->required()->check(CLI::PositiveNumber);
  ry->add_option("--out", out, "output file");

  // spectrum
  auto* sp = app.add_subcommand("spectrum", "lowest eigenvalues of the weighted graph Laplacian");
  SpaceInput spec_in;
  spec_in.add_to(sp);
  std::size_t m = 10;
  double tol = 1e-9;
  std::string method = "auto";
  sp->add_option("--m", m, "number of eigenvalues")->check(CLI::PositiveNumber);
  sp->add_option("--tol", tol, "relative residual tolerance")->check(CLI::PositiveNumber);
  sp->add_option("--method", method, "auto | dense | krylov")->check(CLI::IsMember({"auto", "dense", "krylov"}));
  sp->add_option("--out", out, "output file");

  // verify
  auto* vf = app.add_subcommand("verify", "end-to-end eigenvalue bound");
  SpaceInput ver_in;
  ver_in.add_to(vf);
  double a = 0.0;
  std::size_t k = 1;
  std::size_t kmax = 0;
  std::string csv_path;
  std::string ver_variant = "hyperbolic";
  std::string ver_strategy = "greedy";
  std::uint64_t ver_seed = 0;
  vf->add_option("--a", a, "curvature parameter (Ric >= -(n-1) a^2)")->required()->check(CLI::NonNegativeNumber);
  vf->add_option("--k", k, "eigenvalue index")->required()->check(CLI::PositiveNumber);
  vf->add_option("--kmax", kmax, "also check lambda_j <= bound for j <= kmax");
  vf->add_option("--csv", csv_path, "write k, lambda_k, bound_k rows");
  vf->add_option("--variant", ver_variant, "hyperbolic | euclidean")
      ->check(CLI::IsMember({"hyperbolic", "euclidean"}));
  vf->add_option("--strategy", ver_strategy, "greedy | exhaustive")->check(CLI::IsMember({"greedy", "exhaustive"}));
  vf->add_option("--seed", ver_seed, "swap-order seed");
  vf->add_option("--tol", tol, "eigensolver tolerance")->check(CLI::PositiveNumber);
  vf->add_option("--out", out, "output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  report::Stopwatch clock;
  report::Digest digest;
  for (int i = 1; i < argc; ++i) {
    digest.add(argv[i]);
    digest.add(std::string_view("\0", 1));
  }
  report::RunReport rep;

  try {
    if (*gen) {
      domains::Params p;
      for (const auto& kv : params) {
        auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw DomainError("invalid parameter '" + kv + "': expected key=value");
        p[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
      auto space = domains::generate(kind, p);
      space.validate();
      emit(domains::to_json(space), out);
      return kExitOk;
    }

    if (*cst) {
      rep.command = "constants";
      json table = json::array();
      for (int n : parse_dimensions(dims))
        for (auto v : parse_variants(variant)) {
          auto c = geometry::theorem2_constants(n, v);
          json row = report::to_json(c);
          row["unit_ball_volume"] = geometry::unit_ball_volume(n);
          table.push_back(row);
          rep.checks.push_back({"A_n = 4 C1 2^(2/n) [n=" + std::to_string(n) + "," + to_string(v) + "]",
                                c.A_n == geometry::constant_A(n, c.C1), 0.0});
          rep.checks.push_back({"B_n = 4 C1 (8 C1^2 w)^(2/n) [n=" + std::to_string(n) + "," + to_string(v) + "]",
                                c.B_n == geometry::constant_B(n, c.C1, c.omega_prime_n), 0.0});
        }
      rep.result = {{"constants", table}};
    }

    if (*pk) {
      rep.command = "pack";
      auto space = pack_in.load(digest);
      packing::CoverageMaximizer mx{parse_strategy(strategy), seed};
      packing::FamilyOptions opts{hypothesis == "enforce" ? packing::HypothesisPolicy::Enforce
                                                          : packing::HypothesisPolicy::Verify};
      auto family = packing::corollary1_family(space, mx, big_n, radius, opts);
      rep.result = report::to_json(family);
      rep.checks = family.checks;
    }

    if (*ry) {
      rep.command = "rayleigh";
      auto space = ray_in.load(digest);
      const std::string sets_text = read_file(sets_path);
      digest.add(sets_text);
      json sets_json;
      try {
        sets_json = json::parse(sets_text);
      } catch (const json::parse_error& e) {
        throw ParseError(std::string("sets JSON: ") + e.what());
      }
      std::vector<PointSet> cores;
      for (auto& ids : report::family_sets_from_json(sets_json)) {
        for (PointId p : ids)
          if (p >= space.size()) throw DomainError("sets: point " + std::to_string(p) + " is not in the space");
        cores.push_back(space.make_set(ids));
      }
      auto form = rayleigh::DirichletForm::from_space(space);
      auto fs = rayleigh::plateaus(space, form, cores, ray_r);
      json rows = json::array();
      for (std::size_t i = 0; i < fs.size(); ++i) {
        const double lemma = rayleigh::rayleigh_bound_lemma2(space, form, cores[i], ray_r);
        const double lip = rayleigh::lipschitz_excess(form, fs[i]);
        const std::string tag = "[" + std::to_string(i + 1) + "]";
        rows.push_back({{"index", i + 1},
                        {"mu_A", cores[i].measure()},
                        {"mu_support", fs[i].support.measure()},
                        {"energy", fs[i].energy},
                        {"mass", fs[i].mass},
                        {"rayleigh", fs[i].rayleigh},
                        {"lemma_bound", report::number(lemma)},
                        {"lipschitz_excess", lip}});
        rep.checks.push_back({"R(f" + tag + ") <= lemma bound", fs[i].rayleigh <= lemma, lemma - fs[i].rayleigh});
        rep.checks.push_back({"f" + tag + " edge Lipschitz", lip <= rayleigh::kLipschitzSlack, -lip});
      }
      auto mm = rayleigh::eigen_upper_bounds(space, form, fs);
      json result = {{"r", ray_r}, {"c_geom", report::number(form.c_geom)}, {"functions", rows},
                     {"minmax", report::to_json(mm)}};
      if (!fs.empty() && !space.edges().empty()) {
        auto spec = spectrum::eigenvalues(space, std::min(fs.size(), space.size()));
        result["eigenvalues"] = spec.eigenvalues;
        for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i)
          pipeline::push_upper(rep.checks, "lambda_" + std::to_string(i + 1) + " <= bound", spec.eigenvalues[i],
                               mm.bounds[i]);
      }
      rep.result = result;
    }

    if (*sp) {
      rep.command = "spectrum";
      auto space = spec_in.load(digest);
      const auto meth = method == "dense"    ? spectrum::Method::Dense
                        : method == "krylov" ? spectrum::Method::Krylov
                                             : spectrum::Method::Auto;
      auto res = spectrum::eigenvalues(spectrum::assemble(space), m, tol, meth);
      rep.result = report::to_json(res);
      bool ascending = std::is_sorted(res.eigenvalues.begin(), res.eigenvalues.end());
      rep.checks.push_back({"eigenvalues ascending", ascending, 0.0});
      if (space.edges_connected())
        rep.checks.push_back({"lambda_1 ~ 0 on a connected space", std::abs(res.eigenvalues[0]) <= 1e-10,
                              1e-10 - std::abs(res.eigenvalues[0])});
    }

    if (*vf) {
      rep.command = "verify";
      auto space = ver_in.load(digest);
      auto v = ver_variant == "euclidean" ? geometry::ConstantsVariant::Euclidean
                                          : geometry::ConstantsVariant::Hyperbolic;
      auto consts = geometry::theorem2_constants(space.dimension(), v);
      pipeline::PipelineOptions opts;
      opts.maximizer = {parse_strategy(ver_strategy), ver_seed};
      opts.kmax = kmax;
      opts.tol = tol;
      auto res = pipeline::theorem2_pipeline(space, consts, a, k, opts);
      rep.result = report::to_json(res);
      rep.checks = res.checks;
      if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        if (!csv) throw ParseError("cannot write " + csv_path);
        csv.precision(17);
        csv << "k,lambda_k,bound_k\n";
        const std::size_t rows = std::max(kmax, k);
        for (std::size_t j = 1; j <= rows && j <= res.eigenvalues.size(); ++j)
          csv << j << ',' << res.eigenvalues[j - 1] << ',' << geometry::bound_theorem2(consts, a, res.volume, j)
              << '\n';
      }
    }
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const HypothesisError& e) {
    std::cerr << "hypothesis error: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitFailed;
  }

  rep.input_digest = digest.hex();
  rep.wall_time = clock.seconds();
  try {
    emit(rep.to_json(), out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPrecondition;
  }
  return rep.pass() ? kExitOk : kExitFailed;
}
