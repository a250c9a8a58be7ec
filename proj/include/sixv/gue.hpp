#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "constants.hpp"
#include "core.hpp"
#include "measure.hpp"
#include "parallel.hpp"

namespace sixv {

// Eigenvalues of the leading r x r minors, r = 1..k, each ascending.
struct CornersSample {
  std::vector<std::vector<double>> rows;

  int depth() const { return static_cast<int>(rows.size()); }

  bool interlaces() const {
    for (std::size_t r = 0; r + 1 < rows.size(); ++r) {
      for (std::size_t i = 0; i < rows[r].size(); ++i) {
        if (!(rows[r + 1][i] <= rows[r][i] && rows[r][i] <= rows[r + 1][i + 1])) return false;
      }
    }
    return true;
  }
};

// Hermitian matrix with density ∝ exp(-Tr X²/2): real N(0,1) diagonal,
// off-diagonal real and imaginary parts N(0,1/2).
inline Eigen::MatrixXcd gue_matrix(int k, Rng& rng) {
  Eigen::MatrixXcd X(k, k);
  const double off = std::sqrt(0.5);
  for (int i = 0; i < k; ++i) {
    X(i, i) = rng.normal();
    for (int j = i + 1; j < k; ++j) {
      const double re = off * rng.normal();
      const double im = off * rng.normal();
      X(i, j) = cplx(re, im);
      X(j, i) = cplx(re, -im);
    }
  }
  return X;
}

inline CornersSample corners_of(const Eigen::MatrixXcd& X) {
  CornersSample out;
  const int k = static_cast<int>(X.rows());
  for (int r = 1; r <= k; ++r) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(X.topLeftCorner(r, r), Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = solver.eigenvalues();
    out.rows.emplace_back(ev.data(), ev.data() + r);
  }
  return out;
}

inline CornersSample sample_gue_corners(int k, std::uint64_t seed) {
  if (k < 1) throw DomainError("rows-positive", "GUE corners need k >= 1");
  Rng rng(seed);
  return corners_of(gue_matrix(k, rng));
}

inline std::vector<CornersSample> sample_gue_corners(int k, std::uint64_t seed, std::size_t count) {
  if (k < 1) throw DomainError("rows-positive", "GUE corners need k >= 1");
  std::vector<CornersSample> out(count);
  const std::size_t chunks = (count + kSampleChunk - 1) / kSampleChunk;
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng(stream_seed(seed, c));
    const std::size_t end = std::min(count, (c + 1) * kSampleChunk);
    for (std::size_t i = c * kSampleChunk; i < end; ++i) out[i] = corners_of(gue_matrix(k, rng));
  });
  return out;
}

// Joint density of the ascending GUE eigenvalues x_1 < ... < x_k.
inline double hermite_density(const std::vector<double>& x) {
  const int k = static_cast<int>(x.size());
  double norm = std::pow(2.0 * std::numbers::pi, -0.5 * k);
  for (int i = 1; i < k; ++i) norm /= std::tgamma(i + 1.0);
  double out = norm;
  for (int i = 0; i < k; ++i) {
    out *= std::exp(-x[i] * x[i] / 2.0);
    for (int j = i + 1; j < k; ++j) {
      if (!(x[j] > x[i])) return 0.0;
      out *= (x[j] - x[i]) * (x[j] - x[i]);
    }
  }
  return out;
}

inline double normal_cdf(double x) { return boost::math::cdf(boost::math::normal_distribution<double>(), x); }
inline double normal_pdf(double x) { return std::exp(-x * x / 2.0) / std::sqrt(2.0 * std::numbers::pi); }

// Densities of the smaller and larger eigenvalue of the 2 x 2 ensemble.
inline double gue2_lower_pdf(double a) {
  return normal_pdf(a) * ((1.0 + a * a) * (1.0 - normal_cdf(a)) - a * normal_pdf(a));
}
inline double gue2_upper_pdf(double b) { return normal_pdf(b) * ((1.0 + b * b) * normal_cdf(b) + b * normal_pdf(b)); }

// CDF of the i-th (1-based, ascending) eigenvalue of the 2 x 2 ensemble.
inline double gue2_marginal_cdf(int i, double y) {
  if (i != 1 && i != 2) throw DomainError("coordinate-range", "2 x 2 marginals have i in {1, 2}");
  if (y < -12.0) return 0.0;
  const double hi = std::min(y, 12.0);
  auto pdf = [i](double t) { return i == 1 ? gue2_lower_pdf(t) : gue2_upper_pdf(t); };
  const double mass = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(pdf, -12.0, hi, 10, 1e-13);
  return std::min(1.0, mass);
}

// Weighted or unweighted sample of real values, sorted ascending.
class EmpiricalDistribution {
 public:
  EmpiricalDistribution() = default;
  explicit EmpiricalDistribution(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    values_ = std::move(values);
    weights_.assign(values_.size(), values_.empty() ? 0.0 : 1.0 / static_cast<double>(values_.size()));
    count_ = values_.size();
  }
  // Atoms with probabilities, e.g. an exact lattice law.
  static EmpiricalDistribution weighted(std::vector<std::pair<double, double>> atoms) {
    std::sort(atoms.begin(), atoms.end());
    EmpiricalDistribution e;
    double total = 0.0;
    for (const auto& a : atoms) total += a.second;
    for (const auto& [x, w] : atoms) {
      e.values_.push_back(x);
      e.weights_.push_back(w / total);
    }
    e.count_ = 0;
    return e;
  }

  bool empty() const { return values_.empty(); }
  std::size_t size() const { return values_.size(); }
  // Number of independent draws; 0 for an exact law.
  std::size_t sample_count() const { return count_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& weights() const { return weights_; }

  double cdf(double x) const {
    const auto it = std::upper_bound(values_.begin(), values_.end(), x);
    double acc = 0.0;
    for (auto w = weights_.begin(); w != weights_.begin() + (it - values_.begin()); ++w) acc += *w;
    return acc;
  }
  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) m += weights_[i] * values_[i];
    return m;
  }
  double variance() const {
    const double m = mean();
    double v = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) v += weights_[i] * (values_[i] - m) * (values_[i] - m);
    return v;
  }

 private:
  std::vector<double> values_;
  std::vector<double> weights_;
  std::size_t count_ = 0;
};

// sup_x |F_emp(x) - F(x)| against a continuous reference, checking both
// sides of every jump.
inline double ks_distance(const EmpiricalDistribution& emp, const std::function<double(double)>& ref) {
  if (emp.empty()) throw DomainError("sample-nonempty", "KS distance needs a nonempty sample");
  if (emp.sample_count() != 0 && emp.sample_count() < 100) {
    throw DomainError("sample-size", "KS distance needs at least 100 samples");
  }
  const auto& x = emp.values();
  const auto& w = emp.weights();
  double below = 0.0, d = 0.0;
  for (std::size_t i = 0; i < x.size();) {
    std::size_t j = i;
    double above = below;
    while (j < x.size() && x[j] == x[i]) above += w[j++];
    const double f = ref(x[i]);
    d = std::max({d, std::abs(below - f), std::abs(above - f)});
    below = above;
    i = j;
  }
  return d;
}

// Two-sample statistic sup_x |F_a(x) - F_b(x)|.
inline double ks_two_sample(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  if (a.empty() || b.empty()) throw DomainError("sample-nonempty", "KS distance needs nonempty samples");
  const auto &xa = a.values(), &xb = b.values();
  const auto &wa = a.weights(), &wb = b.weights();
  std::size_t i = 0, j = 0;
  double fa = 0.0, fb = 0.0, d = 0.0;
  while (i < xa.size() || j < xb.size()) {
    const double x = j >= xb.size() || (i < xa.size() && xa[i] <= xb[j]) ? xa[i] : xb[j];
    while (i < xa.size() && xa[i] == x) fa += wa[i++];
    while (j < xb.size() && xb[j] == x) fb += wb[j++];
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

struct ComparisonRow {
  int M = 0;
  std::string coordinate;
  std::string reference;
  double ks = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

struct TheoremReport {
  int k = 0;
  std::vector<int> Ms;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  std::vector<ComparisonRow> rows;
  std::size_t interlacing_violations = 0;
  std::size_t gue_interlacing_violations = 0;
  std::vector<json> truncation;

  // KS along the M grid for one coordinate and reference.
  std::vector<double> series(const std::string& coordinate, const std::string& reference) const {
    std::vector<double> out;
    for (int M : Ms) {
      for (const auto& r : rows) {
        if (r.M == M && r.coordinate == coordinate && r.reference == reference) out.push_back(r.ks);
      }
    }
    return out;
  }
  double ks_at(int M, const std::string& coordinate, const std::string& reference) const {
    for (const auto& r : rows) {
      if (r.M == M && r.coordinate == coordinate && r.reference == reference) return r.ks;
    }
    throw DomainError("report-lookup", "no comparison row for " + coordinate + " at M=" + std::to_string(M));
  }
  // Non-increasing along the grid, allowing `slack` for sampling noise.
  bool monotone(const std::string& coordinate, const std::string& reference, double slack) const {
    const auto s = series(coordinate, reference);
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (s[i] > s[i - 1] + slack) return false;
    }
    return true;
  }

  json to_json() const {
    json rs = json::array();
    for (const auto& r : rows) {
      rs.push_back({{"M", r.M}, {"coordinate", r.coordinate}, {"reference", r.reference}, {"ks", r.ks},
                    {"n_samples", r.n_samples}, {"seed", r.seed}});
    }
    return json{{"k", k},
                {"M_grid", Ms},
                {"n_samples", n_samples},
                {"seed", seed},
                {"rows", rs},
                {"interlacing_violations", interlacing_violations},
                {"gue_interlacing_violations", gue_interlacing_violations},
                {"truncation", truncation},
                {"note", "finite-M KS thresholds are acceptance choices; the limit theorem gives no rate"}};
  }
};

inline std::string coordinate_name(int row, int index) {
  return "Y" + std::to_string(row) + "_" + std::to_string(index);
}

// Rescaled vertex-model statistics Y^j_i = (λ^j_{j-i+1} - aM)/(d√M) against
// the GUE-corners process. k = 1 uses the exact law; k >= 2 samples patterns
// through the top-row law and the Gibbs conditional.
inline TheoremReport compare_theorem_main(int k, const std::vector<int>& Ms, const ModelParams& p,
                                          std::size_t n_samples, std::uint64_t seed, double tol = 1e-10) {
  if (k < 1 || k > 3) throw DomainError("rows-range", "comparison supports 1 <= k <= 3");
  const AsymptoticConstants ac = constants(p);
  TheoremReport rep;
  rep.k = k;
  rep.Ms = Ms;
  rep.n_samples = n_samples;
  rep.seed = seed;

  std::vector<CornersSample> gue;
  std::vector<std::vector<EmpiricalDistribution>> gue_marg;
  EmpiricalDistribution gue_trace;
  if (k >= 2) {
    gue = sample_gue_corners(k, stream_seed(seed, 0x6775650000000000ULL), n_samples);
    for (const auto& g : gue) rep.gue_interlacing_violations += !g.interlaces();
    for (int j = 1; j <= k; ++j) {
      gue_marg.emplace_back();
      for (int i = 1; i <= j; ++i) {
        std::vector<double> xs(gue.size());
        for (std::size_t n = 0; n < gue.size(); ++n) xs[n] = gue[n].rows[j - 1][i - 1];
        gue_marg.back().emplace_back(std::move(xs));
      }
    }
  }

  for (std::size_t m = 0; m < Ms.size(); ++m) {
    const int M = Ms[m];
    const double centre = ac.a * M, width = ac.d * std::sqrt(static_cast<double>(M));
    const TopRowPmf pmf = top_row_pmf(k, M, p, tol);
    rep.truncation.push_back(pmf.report());
    if (k == 1) {
      std::vector<std::pair<double, double>> atoms;
      for (const auto& [mu, pr] : pmf.entries) atoms.emplace_back((mu[0] - centre) / width, pr);
      const double ks = ks_distance(EmpiricalDistribution::weighted(std::move(atoms)), normal_cdf);
      rep.rows.push_back({M, coordinate_name(1, 1), "normal_exact", ks, 0, seed});
      continue;
    }
    const std::uint64_t mseed = stream_seed(seed, static_cast<std::uint64_t>(M));
    const auto pats = sample_patterns(pmf, p, mseed, n_samples);
    for (const auto& pat : pats) rep.interlacing_violations += !pat.valid();
    std::vector<double> trace(pats.size(), 0.0);
    for (int j = 1; j <= k; ++j) {
      for (int i = 1; i <= j; ++i) {
        std::vector<double> ys(pats.size());
        for (std::size_t n = 0; n < pats.size(); ++n) {
          ys[n] = (pats[n].rows[j - 1][i - 1] - centre) / width;
          if (j == k) trace[n] += ys[n];
        }
        const EmpiricalDistribution emp(std::move(ys));
        const std::string name = coordinate_name(j, i);
        rep.rows.push_back({M, name, "gue_sampled", ks_two_sample(emp, gue_marg[j - 1][i - 1]), n_samples, mseed});
        if (j == 1) {
          rep.rows.push_back({M, name, "normal_exact", ks_distance(emp, normal_cdf), n_samples, mseed});
        } else if (j == 2) {
          const double ks = ks_distance(emp, [i](double y) { return gue2_marginal_cdf(i, y); });
          rep.rows.push_back({M, name, "gue2_exact", ks, n_samples, mseed});
        }
      }
    }
    // Tr X of the k x k ensemble is N(0, k).
    const double sk = std::sqrt(static_cast<double>(k));
    const double ks = ks_distance(EmpiricalDistribution(std::move(trace)), [sk](double y) { return normal_cdf(y / sk); });
    rep.rows.push_back({M, "trace", "normal_exact", ks, n_samples, mseed});
  }
  return rep;
}

}  // namespace sixv
