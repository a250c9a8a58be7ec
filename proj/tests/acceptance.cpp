// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sixv/asymptotics.hpp"
#include "sixv/boundary.hpp"
#include "sixv/gue.hpp"
#include "sixv/io.hpp"
#include "sixv/measure.hpp"
#include "sixv/paths.hpp"
#include "sixv/symfunc.hpp"

using namespace sixv;
namespace fs = std::filesystem;

namespace {

const ModelParams kP = ModelParams::make(0.5, 2.0, 0.25);

int failures = 0;

std::string num(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

void report(int id, const std::string& name, bool ok, const std::string& detail, double seconds) {
  failures += !ok;
  std::cout << (ok ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << detail << " (" << num(seconds) << " s)"
            << std::endl;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Strict signatures with k parts, largest part <= cap, smallest part >= lo.
std::vector<Signature> strict(int k, int cap, int lo = 0) {
  std::vector<Signature> out;
  std::vector<int> parts(k);
  auto rec = [&](auto&& self, int i, int hi) -> void {
    if (i == k) {
      out.emplace_back(parts);
      return;
    }
    for (int x = lo + k - 1 - i; x <= hi; ++x) {
      parts[i] = x;
      self(self, i + 1, x - 1);
    }
  };
  rec(rec, 0, cap);
  return out;
}

std::vector<Signature> weak(int n, int cap) {
  std::vector<Signature> out;
  std::vector<int> parts(n);
  auto rec = [&](auto&& self, int i, int hi) -> void {
    if (i == n) {
      out.emplace_back(parts);
      return;
    }
    for (int x = 0; x <= hi; ++x) {
      parts[i] = x;
      self(self, i + 1, x);
    }
  };
  rec(rec, 0, cap);
  return out;
}

void route_agreement() {
  Stopwatch sw;
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 0.0;
  std::size_t cases = 0;
  for (int draw = 0; draw < 50; ++draw) {
    const double q = 0.1 + 0.8 * U(rng);
    const SpinParams spin = SpinParams::from_q(q);
    std::vector<cplx> us;
    for (int i = 0; i < 3; ++i) us.push_back(spin.s * (1.05 + 1.5 * U(rng)));
    for (int k = 1; k <= 3; ++k) {
      const std::vector<cplx> uk(us.begin(), us.begin() + k);
      for (const auto& lam : strict(k, 6)) {
        const cplx dp = F_eval(lam, Signature(), uk, spin);
        cplx paths = 0.0;
        for (const auto& pc : enumerate_F_collections(Signature(), lam, k)) paths += collection_weight(pc, uk, false, spin);
        worst = std::max({worst, rel(paths, dp), rel(F_symmetrization(lam, uk, spin), dp)});
        ++cases;
      }
    }
  }
  const double t = sw.seconds();
  report(1, "route agreement", worst < 1e-10 && t < 60.0,
         std::to_string(cases) + " cases, max rel error " + num(worst) + " (tol 1e-10)", t);
}

void cauchy() {
  Stopwatch sw;
  const SpinParams spin = kP.spin();
  const std::vector<std::vector<cplx>> u_sets{{2.0, 2.2}, {1.6, 2.9}};
  const std::vector<std::vector<cplx>> v_sets{{0.25, 0.2}, {0.3, 0.1}};
  double worst = 0.0;
  bool certified = true;
  int cases = 0;
  for (std::size_t d = 0; d < u_sets.size(); ++d) {
    for (int N = 1; N <= 2; ++N) {
      for (int K = 1; K <= 2; ++K) {
        const auto rep = verify_cauchy({u_sets[d].begin(), u_sets[d].begin() + N},
                                       {v_sets[d].begin(), v_sets[d].begin() + K}, spin, 1e-9);
        worst = std::max(worst, rep.rel_error);
        certified = certified && rep.converged && rep.tail_bound <= 1e-9 * std::abs(rep.rhs);
        ++cases;
      }
    }
  }
  const double t = sw.seconds();
  report(2, "Cauchy identity", worst < 1e-8 && certified && t < 60.0,
         std::to_string(cases) + " cases, max rel error " + num(worst) + " (tol 1e-8), tails certified: " +
             (certified ? "yes" : "no"),
         t);
}

void geometric() {
  Stopwatch sw;
  double worst = 0.0;
  int cases = 0;
  for (const SpinParams& spin : {SpinParams::from_q(0.5), SpinParams::make(0.4, 1.7)}) {
    for (int N = 1; N <= 3; ++N) {
      std::vector<cplx> xs, ys;
      for (int i = 0; i < N; ++i) {
        xs.push_back(std::pow(spin.q, i) * 2.3);
        ys.push_back(std::pow(spin.q, i) * 0.3);
      }
      for (const auto& mu : weak(N, 4)) {
        worst = std::max(worst, rel(F_geometric(mu, 2.3, spin), F_eval(mu, Signature(), xs, spin)));
        ++cases;
      }
      for (int n = 1; n <= 3; ++n) {
        for (const auto& nu : weak(n, 3)) {
          const cplx dp = Gc_eval(nu, Signature(std::vector<int>(n, 0)), ys, spin);
          const cplx closed = Gc_geometric(nu, N, 0.3, spin);
          worst = std::max(worst, std::abs(dp - closed) / std::max(1e-3, std::abs(dp)));
          ++cases;
        }
      }
    }
  }
  report(3, "geometric specialization", worst < 1e-10,
         std::to_string(cases) + " cases, max rel error " + num(worst) + " (tol 1e-10)", sw.seconds());
}

void counting() {
  Stopwatch sw;
  bool exact = true, bound_ok = true;
  int cases = 0;
  for (int k = 1; k <= 4; ++k) {
    for (const auto& lam : strict(k, 8)) {
      const auto pcs = enumerate_F_collections(Signature(), lam, k);
      exact = exact && BigInt(pcs.size()) == count_collections_formula(lam);
      long long typical = 0;
      for (const auto& pc : pcs) typical += is_typical(pc);
      bound_ok = bound_ok && BigRational(typical) >= typical_count_bound(lam);
      ++cases;
    }
  }
  report(4, "collection counting", exact && bound_ok,
         std::to_string(cases) + " signatures, counts exact: " + (exact ? "yes" : "no") +
             ", typical lower bound holds: " + (bound_ok ? "yes" : "no"),
         sw.seconds());
}

void typical_weights() {
  Stopwatch sw;
  const SpinParams spin = kP.spin();
  const double u = kP.u();
  double worst = 0.0;
  long long cases = 0;
  for (int k = 1; k <= 3; ++k) {
    for (const auto& lam : strict(k, 8)) {
      const cplx closed = typical_weight(lam, u, spin);
      for (const auto& pc : enumerate_F_collections(Signature(), lam, k)) {
        if (!is_typical(pc)) continue;
        worst = std::max(worst, rel(collection_weight(pc, std::vector<cplx>(k, u), false, spin), closed));
        ++cases;
      }
    }
  }
  report(5, "typical weight", worst < 1e-12 && cases > 0,
         std::to_string(cases) + " typical collections, max rel error " + num(worst) + " (tol 1e-12)", sw.seconds());
}

void boundary() {
  Stopwatch sw;
  double worst = 0.0, radius = 0.0;
  int cases = 0;
  for (int k = 1; k <= 2; ++k) {
    for (int M = 1; M <= 20; ++M) {
      const CircleContour c1 = default_contour(kP, M);
      const CircleContour c2{(kP.s() + c1.radius) / 2.0, 64};
      for (const auto& lam : strict(k, 6, 1)) {
        const double direct = f_direct(lam, kP, M);
        const double a = f_contour(lam, kP, M, c1, 1e-10);
        const double b = f_contour(lam, kP, M, c2, 1e-10);
        worst = std::max(worst, rel(a, direct));
        radius = std::max(radius, rel(a, b));
        ++cases;
      }
    }
  }
  report(6, "boundary function", worst < 1e-7 && radius < 1e-7,
         std::to_string(cases) + " cases, contour vs direct " + num(worst) + ", radius independence " + num(radius) +
             " (tol 1e-7)",
         sw.seconds());
}

void partition_function() {
  Stopwatch sw;
  double worst = 0.0;
  for (int k = 1; k <= 2; ++k) {
    for (int M = 1; M <= 4; ++M) {
      const int cap = 70;
      const auto f = f_direct_all(k, kP, M, cap);
      const StateVector F = F_all(Signature(), std::vector<cplx>(k, kP.u()), kP.spin(), cap);
      double total = 0.0;
      for (const auto& [lam, val] : f) total += lookup(F, lam).real() * val.real();
      worst = std::max(worst, std::abs(total / partition_Z(k, M, kP) - 1.0));
    }
  }
  double mass = 0.0;
  for (int k = 1; k <= 2; ++k) {
    for (int M = 1; M <= 50; ++M) mass = std::max(mass, std::abs(top_row_pmf(k, M, kP, 1e-9).total_mass - 1.0));
  }
  report(7, "partition function", worst < 1e-8 && mass < 1e-6,
         "truncated sum vs product max rel error " + num(worst) + " (tol 1e-8), pmf mass deviation " + num(mass) +
             " over k<=2, M<=50 (tol 1e-6)",
         sw.seconds());
}

void constants_check() {
  Stopwatch sw;
  int points = 0, signs = 0;
  for (double q : {0.2, 0.35, 0.5, 0.65, 0.8}) {
    const double s = 1 / std::sqrt(q);
    for (double ur : {1.01, 1.5, 2.5, 4.0, 6.0}) {
      for (double vr : {0.05, 0.9}) {
        const double u = s * ur;
        signs += constants(ModelParams::make(q, u, vr / u)).signs_ok();
        ++points;
      }
    }
  }
  const AsymptoticConstants ac = constants(kP);
  const CriticalPointReport cp = critical_point_suite(kP);
  const bool suite = cp.G_u < 1e-6 && cp.g_u < 1e-6 && std::abs(cp.dG) < 1e-6 &&
                     std::abs(cp.d2G - 2 * ac.c) < 1e-4 * std::abs(2 * ac.c) && std::abs(cp.dg - ac.b) < 1e-6;
  report(8, "asymptotic constants", signs == points && points == 50 && suite,
         std::to_string(signs) + "/" + std::to_string(points) + " grid points with signs (+,-,+,+); |G'(u)| " +
             num(std::abs(cp.dG)) + ", |G''(u)-2c| " + num(std::abs(cp.d2G - 2 * ac.c)) + ", |g'(u)-b| " +
             num(std::abs(cp.dg - ac.b)),
         sw.seconds());
}

void descent() {
  Stopwatch sw;
  const DescentReport r = descent_report(kP, 1000, 0.1);
  const bool ok = r.samples == 1000 && r.max_re_G <= 1e-12 && r.argmax == cplx(kP.u(), 0.0) && r.delta > 0.0;
  report(9, "steepest descent", ok,
         std::to_string(r.samples) + " samples, max Re G " + num(r.max_re_G) + " at z=" + num(r.argmax.real()) +
             ", Re G <= -" + num(r.delta) + " outside the 0.1-window",
         sw.seconds());
}

void boundary_convergence() {
  Stopwatch sw;
  const double target = 1 / std::sqrt(2 * std::numbers::pi);
  std::vector<double> errs;
  for (int M : {100, 400, 1600}) errs.push_back(std::abs(B_M_contour({0.0}, M, kP).value - target));
  const bool decreasing = errs[1] < errs[0] && errs[2] < errs[1];
  const double final_rel = errs[2] / target;
  const BMEstimate two = B_M_contour({-1.0, 1.0}, 1600, kP);
  const double two_rel = std::abs(two.value / two.limit - 1.0);
  const double t = sw.seconds();
  report(10, "boundary factor convergence", decreasing && final_rel < 0.05 && two_rel < 0.1 && t < 600.0,
         "k=1 x=0 errors " + num(errs[0]) + ", " + num(errs[1]) + ", " + num(errs[2]) + " (final " +
             num(100 * final_rel) + "% < 5%); k=2 x=(-1,1) at M=1600 off by " + num(100 * two_rel) + "% (< 10%)",
         t);
}

void path_convergence() {
  Stopwatch sw;
  const double a = constants(kP).a;
  const std::vector<int> grid{100, 400, 1600};
  const std::vector<double> x{-1.0, 1.0};
  std::vector<double> errs;
  for (int M : grid) errs.push_back(std::abs(A_M(lambda_of_x(x, M, a, 1.0), M, kP) - A_M_limit(x)));
  const bool decreasing = errs[1] < errs[0] && errs[2] < errs[1];
  // Uniform bound over a window of x and the M grid, against twice the
  // largest limit value on the same window.
  double sup = 0.0, lim_sup = 0.0;
  for (double x1 = -2.0; x1 <= 2.0; x1 += 1.0) {
    for (double x2 = x1 + 1.0; x2 <= 2.0; x2 += 1.0) {
      lim_sup = std::max(lim_sup, std::abs(A_M_limit({x1, x2})));
      for (int M : grid) sup = std::max(sup, std::abs(A_M(lambda_of_x({x1, x2}, M, a, 1.0), M, kP)));
    }
  }
  const double C = 2.0 * lim_sup;
  report(11, "path factor convergence", decreasing && std::isfinite(sup) && sup <= C,
         "x=(-1,1) errors " + num(errs[0]) + ", " + num(errs[1]) + ", " + num(errs[2]) + "; sup |A_M| " + num(sup) +
             " <= C=" + num(C),
         sw.seconds());
}

void theorem() {
  Stopwatch sw;
  const TheoremReport one = compare_theorem_main(1, {50, 100, 200, 400}, kP, 0, 2024);
  const auto ks1 = one.series("Y1_1", "normal_exact");
  const bool one_ok = one.monotone("Y1_1", "normal_exact", 0.0) && ks1.back() < 0.05;
  const TheoremReport two = compare_theorem_main(2, {400}, kP, 100000, 2024);
  const double lo = two.ks_at(400, "Y2_1", "gue_sampled"), hi = two.ks_at(400, "Y2_2", "gue_sampled");
  const double lo_x = two.ks_at(400, "Y2_1", "gue2_exact"), hi_x = two.ks_at(400, "Y2_2", "gue2_exact");
  const bool two_ok = lo < 0.08 && hi < 0.08;
  const bool interlace = two.interlacing_violations == 0 && two.gue_interlacing_violations == 0;
  const double t = sw.seconds();
  std::string s1;
  for (double k : ks1) s1 += (s1.empty() ? "" : ", ") + num(k);
  report(12, "GUE-corners limit at desk scale", one_ok && two_ok && interlace && t < 1800.0,
         "k=1 KS " + s1 + " (< 0.05 at M=400); k=2 M=400 KS lower " + num(lo) + ", upper " + num(hi) +
             " (< 0.08; exact-marginal KS " + num(lo_x) + ", " + num(hi_x) + "); interlacing violations " +
             std::to_string(two.interlacing_violations + two.gue_interlacing_violations),
         t);
}

void gibbs() {
  Stopwatch sw;
  const std::size_t n = 100000;
  int cells = 0, outside = 0;
  for (const Signature& top : {Signature{4}, Signature{2, 1}, Signature{5, 2}, Signature{6, 3, 1}}) {
    const int k = static_cast<int>(top.size());
    // Oracle: raw path weights of every pattern, normalized.
    const auto patterns = enumerate_gt_patterns(top);
    std::map<std::vector<std::vector<int>>, std::size_t> index;
    std::vector<double> oracle;
    double total = 0.0;
    for (const auto& pat : patterns) {
      const PathCollection pc(Family::F, pat.cross_sections(), top.largest() + 1);
      const double w = collection_weight(pc, std::vector<cplx>(k, kP.u()), false, kP.spin()).real();
      index[pat.rows] = oracle.size();
      oracle.push_back(w);
      total += w;
    }
    const GibbsTable table = gibbs_table(top, kP);
    Rng rng(stream_seed(77, static_cast<std::uint64_t>(top.weight())));
    std::vector<double> counts(oracle.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) counts[index.at(table.draw(rng).rows)] += 1.0;
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      const double p = oracle[i] / total;
      const double sd = std::sqrt(n * p * (1 - p));
      outside += std::abs(counts[i] - n * p) > 3 * sd + 1e-9;
      ++cells;
    }
  }
  report(13, "Gibbs conditional sampler", outside == 0,
         std::to_string(cells) + " pattern cells over k<=3 at 1e5 draws, " + std::to_string(outside) +
             " outside 3 sigma",
         sw.seconds());
}

void gue_reference() {
  Stopwatch sw;
  std::size_t bad = 0;
  for (const auto& c : sample_gue_corners(4, 31, 100000)) bad += !c.interlaces();
  std::vector<double> xs;
  for (const auto& c : sample_gue_corners(1, 32, 100000)) xs.push_back(c.rows[0][0]);
  const double var = EmpiricalDistribution(xs).variance();
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double one = GK::integrate([](double x) { return hermite_density({x}); }, -40.0, 40.0, 15, 1e-14);
  const double two = GK::integrate(
      [](double x1) {
        return GK::integrate([x1](double x2) { return hermite_density({x1, x2}); }, x1, 40.0, 15, 1e-14);
      },
      -40.0, 40.0, 15, 1e-14);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> N;
  double det = 0.0;
  for (int i = 0; i < 20; ++i) {
    const std::vector<double> x{N(rng), N(rng), N(rng)};
    const double vdm = (x[0] - x[1]) * (x[0] - x[2]) * (x[1] - x[2]);
    det = std::max(det, std::abs(hermite_determinant(x) - vdm) / std::max(1.0, std::abs(vdm)));
  }
  const bool ok = bad == 0 && std::abs(var - 1.0) < 0.02 && std::abs(one - 1.0) < 1e-6 && std::abs(two - 1.0) < 1e-6 &&
                  det < 1e-10;
  report(14, "GUE reference", ok,
         "interlacing violations " + std::to_string(bad) + ", k=1 variance " + num(var) + ", density mass " +
             num(one) + " / " + num(two) + ", determinant error " + num(det),
         sw.seconds());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes sampled patterns and GUE corners to CSV under the given thread count.
std::string sample_csv(unsigned nthreads, const fs::path& dir) {
  set_threads(nthreads);
  fs::create_directories(dir);
  const TopRowPmf pmf = top_row_pmf(2, 30, kP, 1e-9);
  {
    CsvWriter csv(dir / "patterns.csv", {"sample", "row", "index", "value"});
    const auto pats = sample_patterns(pmf, kP, 5, 20000);
    for (std::size_t n = 0; n < pats.size(); ++n) {
      for (std::size_t j = 0; j < pats[n].rows.size(); ++j) {
        for (std::size_t i = 0; i < pats[n].rows[j].size(); ++i) {
          csv.row({std::to_string(n), std::to_string(j + 1), std::to_string(i + 1),
                   std::to_string(pats[n].rows[j][i])});
        }
      }
    }
    CsvWriter gue(dir / "corners.csv", {"sample", "row", "index", "value"});
    const auto corners = sample_gue_corners(3, 5, 20000);
    for (std::size_t n = 0; n < corners.size(); ++n) {
      for (std::size_t j = 0; j < corners[n].rows.size(); ++j) {
        for (std::size_t i = 0; i < corners[n].rows[j].size(); ++i) {
          gue.row({std::to_string(n), std::to_string(j + 1), std::to_string(i + 1), fmt(corners[n].rows[j][i])});
        }
      }
    }
  }
  return slurp(dir / "patterns.csv") + slurp(dir / "corners.csv");
}

void reproducibility() {
  Stopwatch sw;
  const unsigned saved = threads();
  const fs::path root = fs::temp_directory_path() / "sixv_acceptance_repro";
  fs::remove_all(root);
  const std::string a = sample_csv(1, root / "t1");
  const std::string b = sample_csv(4, root / "t4");
  const std::string c = sample_csv(4, root / "t4_again");
  set_threads(saved);
  fs::remove_all(root);
  report(15, "reproducibility", !a.empty() && a == b && b == c,
         std::to_string(a.size()) + " CSV bytes, threads 1 vs 4 identical: " + (a == b ? "yes" : "no") +
             ", repeat identical: " + (b == c ? "yes" : "no"),
         sw.seconds());
}

}  // namespace

int main() {
  const std::vector<void (*)()> criteria{route_agreement, cauchy,           geometric,         counting,
                                         typical_weights, boundary,         partition_function, constants_check,
                                         descent,         boundary_convergence, path_convergence, theorem,
                                         gibbs,           gue_reference,    reproducibility};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), "criterion", false, std::string("threw: ") + e.what(), 0.0);
    }
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
