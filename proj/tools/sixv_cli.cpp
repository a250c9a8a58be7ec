// Command-line driver: identity suites, boundary checks, constants,
// convergence tables, samplers and the GUE comparison.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "sixv/asymptotics.hpp"
#include "sixv/boundary.hpp"
#include "sixv/gue.hpp"
#include "sixv/io.hpp"
#include "sixv/measure.hpp"
#include "sixv/paths.hpp"
#include "sixv/symfunc.hpp"

namespace fs = std::filesystem;
using namespace sixv;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Config {
  double q = 0.5, u = 2.0, v = 0.25;
  int k = 2;
  int M = 20;
  std::vector<int> M_grid{100, 400, 1600};
  double tol = 1e-8;
  std::uint64_t seed = 1;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::string out = "sixv_out";
  std::size_t samples = 10000;
  int cap = 5;

  json to_json() const {
    return json{{"q", q},     {"u", u},         {"v", v},       {"k", k},           {"M", M},
                {"M_grid", M_grid}, {"tol", tol}, {"seed", seed}, {"threads", threads}, {"out", out},
                {"samples", samples}, {"cap", cap}};
  }

  void merge(const json& j) {
    auto take = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    take("q", q);
    take("u", u);
    take("v", v);
    take("k", k);
    take("M", M);
    take("M_grid", M_grid);
    take("tol", tol);
    take("seed", seed);
    take("threads", threads);
    take("out", out);
    take("samples", samples);
    take("cap", cap);
  }
};

struct Check {
  std::string invariant;
  double value;
  double tolerance;
  bool pass;
};

class Run {
 public:
  Run(std::string name, const Config& cfg) : name_(std::move(name)), cfg_(cfg) { fs::create_directories(cfg.out); }

  fs::path csv_path() const { return fs::path(cfg_.out) / (name_ + ".csv"); }

  // Records value <= tolerance.
  void check_le(const std::string& invariant, double value, double tolerance) {
    checks_.push_back({invariant, value, tolerance, value <= tolerance});
  }
  void check_true(const std::string& invariant, bool ok) { checks_.push_back({invariant, ok ? 1.0 : 0.0, 1.0, ok}); }
  json& extra() { return extra_; }

  int finish() {
    json cj = json::array();
    json failures = json::array();
    for (const auto& c : checks_) {
      const json e{{"invariant", c.invariant}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}};
      cj.push_back(e);
      if (!c.pass) failures.push_back(e);
    }
    const bool ok = failures.empty();
    json side{{"command", name_},
              {"version", kVersion},
              {"config", cfg_.to_json()},
              {"wall_clock_seconds", clock_.seconds()},
              {"checks", cj},
              {"status", ok ? "pass" : "fail"},
              {"results", extra_}};
    write_json(fs::path(cfg_.out) / (name_ + ".json"), side);
    if (!ok) {
      std::cout << json{{"status", "fail"}, {"command", name_}, {"failures", failures}}.dump() << '\n';
      return 1;
    }
    std::cout << json{{"status", "pass"}, {"command", name_}, {"checks", checks_.size()}}.dump() << '\n';
    return 0;
  }

 private:
  std::string name_;
  Config cfg_;
  std::vector<Check> checks_;
  json extra_ = json::object();
  Stopwatch clock_;
};

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::vector<Signature> strict_signatures(int k, int cap) {
  std::vector<Signature> out;
  std::vector<int> parts(k);
  auto rec = [&](auto&& self, int i, int hi) -> void {
    if (i == k) {
      out.emplace_back(parts);
      return;
    }
    for (int x = hi; x >= k - 1 - i; --x) {
      parts[i] = x;
      self(self, i + 1, x - 1);
    }
  };
  rec(rec, 0, cap);
  return out;
}

std::string join(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? " " : "") + fmt(xs[i]);
  return s;
}

int cmd_identities(const Config& cfg, const ModelParams& p) {
  Run run("identities", cfg);
  CsvWriter csv(run.csv_path(), {"suite", "case", "value", "reference", "rel_error", "tolerance"});
  const SpinParams spin = p.spin();
  auto record = [&](const std::string& suite, const std::string& name, cplx val, cplx ref, double tol) {
    const double e = rel(val, ref);
    csv.row({suite, name, fmt(val.real()), fmt(ref.real()), fmt(e), fmt(tol)});
    run.check_le(suite + ":" + name, e, tol);
  };
  const double u = p.u();
  const std::vector<cplx> us{u, 1.1 * u, 1.25 * u};
  // Transfer DP vs path enumeration vs symmetrization.
  for (int k = 1; k <= 3; ++k) {
    const std::vector<cplx> uk(us.begin(), us.begin() + k);
    for (const auto& lam : strict_signatures(k, cfg.cap)) {
      const cplx dp = F_eval(lam, Signature(), uk, spin);
      cplx paths = 0.0;
      for (const auto& pc : enumerate_F_collections(Signature(), lam, k)) paths += collection_weight(pc, uk, false, spin);
      record("routes", lam.str() + ":enumeration", paths, dp, 1e-10);
      record("routes", lam.str() + ":symmetrization", F_symmetrization(lam, uk, spin), dp, 1e-10);
    }
  }
  // Cauchy identity with certified tail.
  const std::vector<cplx> vs{p.v(), 0.8 * p.v()};
  for (int N = 1; N <= 2; ++N) {
    for (int K = 1; K <= 2; ++K) {
      const CauchyReport rep = verify_cauchy({us.begin(), us.begin() + N}, {vs.begin(), vs.begin() + K}, spin, cfg.tol);
      const std::string name = "N" + std::to_string(N) + "K" + std::to_string(K);
      record("cauchy", name, rep.lhs, rep.rhs, cfg.tol);
      run.check_true("cauchy:" + name + ":tail_certified", rep.converged);
    }
  }
  // Branching over one intermediate row.
  for (const auto& lam : strict_signatures(2, cfg.cap)) {
    cplx mid = 0.0;
    for (int n = 0; n <= lam[0]; ++n) {
      mid += F_eval(lam, Signature{n}, {us[1]}, spin) * F_eval(Signature{n}, Signature(), {us[0]}, spin);
    }
    record("branching", lam.str(), mid, F_eval(lam, Signature(), {us[0], us[1]}, spin), 1e-10);
  }
  // Conjugated vs plain dual weights.
  const std::vector<cplx> vv{p.v(), 0.5 * p.v()};
  for (const auto& lam : strict_signatures(2, cfg.cap)) {
    const Signature mu{1, 0};
    const cplx lhs = Gc_eval(lam, mu, vv, spin) * conjugation_factor(mu, spin);
    const cplx rhs = conjugation_factor(lam, spin) * G_eval(lam, mu, vv, spin);
    if (std::abs(rhs) == 0.0) continue;
    record("conjugation", lam.str(), lhs, rhs, 1e-10);
  }
  // Collection counts, exactly.
  for (int k = 1; k <= 3; ++k) {
    for (const auto& lam : strict_signatures(k, cfg.cap)) {
      const auto brute = static_cast<double>(enumerate_F_collections(Signature(), lam, k).size());
      const auto formula = count_collections_formula(lam).convert_to<double>();
      record("counting", lam.str(), brute, formula, 0.0);
    }
  }
  return run.finish();
}

int cmd_boundary(const Config& cfg, const ModelParams& p) {
  Run run("boundary", cfg);
  CsvWriter csv(run.csv_path(), {"k", "M", "lambda", "f_direct", "f_contour", "f_contour_alt", "rel_error",
                                 "radius_rel_error"});
  const double tol = std::max(cfg.tol, 1e-7);
  std::vector<int> Ms{1, 5, cfg.M};
  std::sort(Ms.begin(), Ms.end());
  Ms.erase(std::unique(Ms.begin(), Ms.end()), Ms.end());
  for (int k = 1; k <= std::min(cfg.k, 2); ++k) {
    for (int M : Ms) {
      const CircleContour c1 = default_contour(p, M);
      const CircleContour c2{(p.s() + c1.radius) / 2.0, 64};
      for (const auto& lam : strict_signatures(k, cfg.cap + 1)) {
        if (lam.smallest() < 1) continue;
        const double direct = f_direct(lam, p, M);
        const double a = f_contour(lam, p, M, c1, 1e-10);
        const double b = f_contour(lam, p, M, c2, 1e-10);
        const double e1 = rel(a, direct), e2 = rel(a, b);
        csv.row({std::to_string(k), std::to_string(M), lam.str(), fmt(direct), fmt(a), fmt(b), fmt(e1), fmt(e2)});
        run.check_le("contour_vs_direct:" + lam.str() + ":M" + std::to_string(M), e1, tol);
        run.check_le("radius_independence:" + lam.str() + ":M" + std::to_string(M), e2, tol);
      }
    }
  }
  return run.finish();
}

int cmd_constants(const Config& cfg, const ModelParams& p) {
  Run run("constants", cfg);
  CsvWriter csv(run.csv_path(), {"name", "value"});
  const AsymptoticConstants ac = constants(p);
  for (const auto& [name, val] : {std::pair{"a", ac.a}, {"b", ac.b}, {"c", ac.c}, {"d", ac.d}}) csv.row({name, fmt(val)});
  run.check_true("signs(+,-,+,+)", ac.signs_ok());
  const CriticalPointReport cp = critical_point_suite(p);
  csv.row({"G_prime_at_u", fmt(cp.dG)});
  csv.row({"G_second_at_u", fmt(cp.d2G)});
  csv.row({"g_prime_at_u", fmt(cp.dg)});
  run.check_le("G(u)", cp.G_u, 1e-6);
  run.check_le("g(u)", cp.g_u, 1e-6);
  run.check_le("G'(u)", std::abs(cp.dG), 1e-6);
  run.check_le("G''(u)-2c", std::abs(cp.d2G - 2 * ac.c), 1e-4 * 2 * ac.c);
  run.check_le("g'(u)-b", std::abs(cp.dg - ac.b), 1e-6);
  const DescentReport dr = descent_report(p);
  csv.row({"max_re_G", fmt(dr.max_re_G)});
  csv.row({"delta_outside_0.1", fmt(dr.delta)});
  csv.row({"C1", fmt(dr.C1)});
  csv.row({"eps1", fmt(dr.eps1)});
  run.check_le("descent:max_re_G", dr.max_re_G, 1e-12);
  run.check_true("descent:argmax_at_u", dr.argmax == cplx(p.u(), 0.0));
  run.check_true("descent:delta_positive", dr.delta > 0.0);
  run.check_true("descent:branch_continuity", dr.max_imag_jump < std::numbers::pi);
  run.check_true("descent:quadratic_window", dr.quadratic_feasible);
  run.extra() = json{{"constants", ac.to_json()}, {"critical_point", cp.to_json()}, {"descent", dr.to_json()}};
  std::cout << ac.to_json().dump() << '\n';
  return run.finish();
}

int cmd_bm_converge(const Config& cfg, const ModelParams& p) {
  Run run("bm-converge", cfg);
  CsvWriter csv(run.csv_path(), {"quantity", "M", "k", "x", "computed", "limit", "abs_error"});
  const AsymptoticConstants ac = constants(p);
  const std::vector<std::vector<double>> xs{{0.0}, {1.0}, {-1.0, 1.0}};
  for (const auto& x : xs) {
    std::vector<double> errs;
    for (int M : cfg.M_grid) {
      const BMEstimate est = B_M_contour(x, M, p, std::min(cfg.tol, 1e-9));
      csv.row({"B", std::to_string(M), std::to_string(x.size()), join(x), fmt(est.value), fmt(est.limit),
               fmt(est.abs_error())});
      errs.push_back(est.abs_error());
    }
    for (std::size_t i = 1; i < errs.size(); ++i) {
      run.check_le("B:" + join(x) + ":error_decreasing@" + std::to_string(cfg.M_grid[i]), errs[i], errs[i - 1]);
    }
  }
  const std::vector<double> x2{-1.0, 1.0};
  std::vector<double> aerr;
  for (int M : cfg.M_grid) {
    const double val = A_M(lambda_of_x(x2, M, ac.a, 1.0), M, p);
    const double lim = A_M_limit(x2);
    csv.row({"A", std::to_string(M), "2", join(x2), fmt(val), fmt(lim), fmt(std::abs(val - lim))});
    aerr.push_back(std::abs(val - lim));
  }
  for (std::size_t i = 1; i < aerr.size(); ++i) {
    run.check_le("A:error_decreasing@" + std::to_string(cfg.M_grid[i]), aerr[i], aerr[i - 1]);
  }
  return run.finish();
}

int cmd_sample(const Config& cfg, const ModelParams& p) {
  Run run("sample", cfg);
  const TopRowPmf pmf = top_row_pmf(cfg.k, cfg.M, p, std::min(cfg.tol, 1e-9));
  const auto pats = sample_patterns(pmf, p, cfg.seed, cfg.samples);
  CsvWriter csv(run.csv_path(), {"sample", "row", "index", "value"});
  std::size_t bad = 0;
  for (std::size_t n = 0; n < pats.size(); ++n) {
    bad += !pats[n].valid();
    for (std::size_t j = 0; j < pats[n].rows.size(); ++j) {
      for (std::size_t i = 0; i < pats[n].rows[j].size(); ++i) {
        csv.row({std::to_string(n), std::to_string(j + 1), std::to_string(i + 1), std::to_string(pats[n].rows[j][i])});
      }
    }
  }
  run.check_le("interlacing_violations", static_cast<double>(bad), 0.0);
  run.check_le("truncated_mass_deficit", std::abs(pmf.total_mass - 1.0), 1e-6);
  // Vertex grids of the first few samples (bottom rows of a k-row strip).
  json grids = json::array();
  for (std::size_t n = 0; n < std::min<std::size_t>(3, pats.size()); ++n) {
    const auto secs = pats[n].cross_sections();
    grids.push_back(PathCollection(Family::F, secs, secs.back().largest() + 1).to_json());
  }
  write_json(fs::path(cfg.out) / "sample_grids.json", grids);
  run.extra() = json{{"pmf", pmf.report()}, {"grids_file", "sample_grids.json"}};
  return run.finish();
}

int cmd_gue_compare(const Config& cfg, const ModelParams& p) {
  Run run("gue-compare", cfg);
  const TheoremReport rep = compare_theorem_main(cfg.k, cfg.M_grid, p, cfg.samples, cfg.seed);
  CsvWriter csv(run.csv_path(), {"M", "coordinate", "reference", "KS", "n_samples", "seed"});
  for (const auto& r : rep.rows) {
    csv.row({std::to_string(r.M), r.coordinate, r.reference, fmt(r.ks), std::to_string(r.n_samples),
             std::to_string(r.seed)});
  }
  run.check_le("interlacing_violations", static_cast<double>(rep.interlacing_violations), 0.0);
  run.check_le("gue_interlacing_violations", static_cast<double>(rep.gue_interlacing_violations), 0.0);
  if (cfg.k == 1) {
    run.check_true("ks_decreasing_in_M", rep.monotone("Y1_1", "normal_exact", 0.0));
  } else {
    const double slack = 3.0 * 1.36 * std::sqrt(2.0 / static_cast<double>(cfg.samples));
    for (int j = 1; j <= cfg.k; ++j) {
      for (int i = 1; i <= j; ++i) {
        const std::string c = coordinate_name(j, i);
        run.check_true("ks_non_increasing:" + c, rep.monotone(c, "gue_sampled", slack));
      }
    }
  }
  run.extra() = rep.to_json();
  return run.finish();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Six-vertex model with spin Hall-Littlewood boundary: identities, exact laws and GUE asymptotics"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::optional<double> q, u, v, tol;
  std::optional<int> k, M, cap;
  std::optional<std::vector<int>> grid;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> out;
  std::optional<std::size_t> samples;
  app.add_option("--config", config_path, "JSON config file; flags override it")->check(CLI::ExistingFile);
  app.add_option("--q", q, "quantization parameter in (0,1)");
  app.add_option("--u", u, "row spectral parameter");
  app.add_option("--v", v, "column spectral parameter");
  app.add_option("--k", k, "number of rows");
  app.add_option("--M", M, "number of columns");
  app.add_option("--M-grid", grid, "grid of column counts");
  app.add_option("--tol", tol, "tolerance");
  app.add_option("--seed", seed, "RNG seed");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--out", out, "output directory");
  app.add_option("--samples", samples, "number of samples");
  app.add_option("--cap", cap, "largest part in the enumeration suites");
  for (const char* name : {"identities", "boundary", "constants", "bm-converge", "sample", "gue-compare"}) {
    app.add_subcommand(name);
  }
  CLI11_PARSE(app, argc, argv);

  Config cfg;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      cfg.merge(json::parse(in));
    }
  } catch (const std::exception& e) {
    std::cout << json{{"status", "invalid"}, {"constraint", "config-parse"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  }
  if (q) cfg.q = *q;
  if (u) cfg.u = *u;
  if (v) cfg.v = *v;
  if (k) cfg.k = *k;
  if (M) cfg.M = *M;
  if (grid) cfg.M_grid = *grid;
  if (tol) cfg.tol = *tol;
  if (seed) cfg.seed = *seed;
  if (threads) cfg.threads = *threads;
  if (out) cfg.out = *out;
  if (samples) cfg.samples = *samples;
  if (cap) cfg.cap = *cap;
  set_threads(cfg.threads);

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    if (cfg.k < 1 || cfg.k > 3) throw DomainError("rows-range", "k must lie in 1..3");
    if (cfg.M < 1) throw DomainError("columns-positive", "M must be positive");
    const ModelParams p = ModelParams::make(cfg.q, cfg.u, cfg.v);
    if (sub == "identities") return cmd_identities(cfg, p);
    if (sub == "boundary") return cmd_boundary(cfg, p);
    if (sub == "constants") return cmd_constants(cfg, p);
    if (sub == "bm-converge") return cmd_bm_converge(cfg, p);
    if (sub == "sample") return cmd_sample(cfg, p);
    return cmd_gue_compare(cfg, p);
  } catch (const DomainError& e) {
    std::cout << json{{"status", "invalid"}, {"command", sub}, {"constraint", e.constraint()}, {"message", e.what()}}
                     .dump()
              << '\n';
    return 2;
  } catch (const ConvergenceError& e) {
    std::cout << json{{"status", "fail"},
                      {"command", sub},
                      {"failures", {{{"invariant", "convergence"}, {"message", e.what()}, {"diagnostics", e.diagnostics()}}}}}
                     .dump()
              << '\n';
    return 1;
  }
}
