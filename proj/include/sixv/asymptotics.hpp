#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>

#include "boundary.hpp"
#include "constants.hpp"
#include "core.hpp"
#include "symfunc.hpp"

namespace sixv {

namespace detail {

inline void reject_phase_poles(cplx z, const ModelParams& p) {
  const double s = p.s(), q = 1.0 / (s * s), v = p.v();
  for (double pole : {s, 1.0 / s, 1.0 / v, 1.0 / (q * v)}) {
    if (std::abs(z - pole) < 1e-12 * std::max(1.0, pole)) {
      throw DomainError("phase-pole", "phase functions are singular at s, 1/s, 1/v and 1/(qv)");
    }
  }
}

inline cplx rho(cplx z, double s) { return (1.0 - s * z) / (z - s); }
inline cplx phi(cplx z, double q, double v) { return (1.0 - q * z * v) / (1.0 - z * v); }

// Principal logs of the ratios against the value at u, so both vanish at u
// and stay continuous along the descent contour.
inline cplx log_rho_ratio(cplx z, const ModelParams& p) { return std::log(rho(z, p.s()) / rho(p.u(), p.s())); }
inline cplx log_phi_ratio(cplx z, const ModelParams& p) {
  const double q = 1.0 / (p.s() * p.s());
  return std::log(phi(z, q, p.v()) / phi(p.u(), q, p.v()));
}

}  // namespace detail

inline cplx phase_g(cplx z, const ModelParams& p) {
  detail::reject_phase_poles(z, p);
  return detail::log_rho_ratio(z, p);
}

inline cplx phase_G(cplx z, const ModelParams& p) {
  detail::reject_phase_poles(z, p);
  return constants(p).a * detail::log_rho_ratio(z, p) + detail::log_phi_ratio(z, p);
}

// Finite-difference checks of the critical point at z = u.
struct CriticalPointReport {
  double G_u = 0.0, g_u = 0.0;
  double dG = 0.0, d2G = 0.0, dg = 0.0;
  double b = 0.0, c = 0.0;

  bool passes() const {
    return std::abs(G_u) < 1e-6 && std::abs(g_u) < 1e-6 && std::abs(dG) < 1e-6 &&
           std::abs(d2G - 2.0 * c) < 1e-4 * std::abs(2.0 * c) && std::abs(dg - b) < 1e-6;
  }
  json to_json() const {
    return json{{"G_u", G_u}, {"g_u", g_u}, {"G_prime", dG},    {"G_second", d2G},
                {"two_c", 2 * c}, {"g_prime", dg}, {"b", b}, {"passes", passes()}};
  }
};

inline CriticalPointReport critical_point_suite(const ModelParams& p) {
  const double u = p.u();
  const double h = 1e-5 * u;
  auto G = [&](double x) { return phase_G(cplx(x, 0.0), p).real(); };
  auto g = [&](double x) { return phase_g(cplx(x, 0.0), p).real(); };
  auto d1 = [&](auto&& f, double step) { return (f(u + step) - f(u - step)) / (2.0 * step); };
  auto d2 = [&](auto&& f, double step) { return (f(u + step) - 2.0 * f(u) + f(u - step)) / (step * step); };
  auto richardson = [&](auto&& diff, auto&& f) { return (4.0 * diff(f, h / 2.0) - diff(f, h)) / 3.0; };
  const AsymptoticConstants ac = constants(p);
  CriticalPointReport r;
  r.G_u = std::abs(phase_G(u, p));
  r.g_u = std::abs(phase_g(u, p));
  r.dG = richardson(d1, G);
  r.d2G = richardson(d2, G);
  r.dg = richardson(d1, g);
  r.b = ac.b;
  r.c = ac.c;
  return r;
}

// Segment from u - 2iu up to u + 2iu, then the left half-circle of radius 2u
// centered at u. Gauss-Legendre panels on the segment shrink geometrically
// toward u down to `scale`; every panel is split into 2^level pieces.
struct CompositeContour {
  double u = 0.0;
  double scale = 0.0;
  int level = 0;
  int arc_panels = 8;

  static CompositeContour for_model(const ModelParams& p, int M, int level = 0) {
    return {p.u(), 1.0 / std::sqrt(static_cast<double>(std::max(M, 1))), level, 8};
  }

  // Point at arclength-like parameter t in [0, 1]: first half segment, second half arc.
  cplx point(double t) const {
    if (t <= 0.5) return cplx(u, -2.0 * u + 8.0 * u * t);
    const double theta = std::numbers::pi / 2.0 + std::numbers::pi * (2.0 * t - 1.0);
    return u + 2.0 * u * std::polar(1.0, theta);
  }

  // Nodes and weights w with Σ w f(z) ≈ ∮ f(z) dz / (2πi).
  void nodes(std::vector<cplx>& z, std::vector<cplx>& w) const {
    using Rule = boost::math::quadrature::gauss<double, 20>;
    const auto& x = Rule::abscissa();
    const auto& wt = Rule::weights();
    z.clear();
    w.clear();
    auto panel = [&](double lo, double hi, auto&& map) {
      const int pieces = 1 << level;
      for (int j = 0; j < pieces; ++j) {
        const double a = lo + (hi - lo) * j / pieces, b = lo + (hi - lo) * (j + 1) / pieces;
        const double mid = (a + b) / 2.0, half = (b - a) / 2.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          for (double sign : {-1.0, 1.0}) {
            const auto [zz, dz] = map(mid + sign * half * x[i]);
            z.push_back(zz);
            w.push_back(dz * (half * wt[i]) / (2.0 * std::numbers::pi * cplx(0.0, 1.0)));
          }
        }
      }
    };
    const double top = 2.0 * u;
    std::vector<double> cuts{0.0};
    for (double c = scale / 4.0; c < top; c *= 2.0) cuts.push_back(c);
    cuts.push_back(top);
    auto seg = [&](double y) { return std::pair<cplx, cplx>{cplx(u, y), cplx(0.0, 1.0)}; };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      panel(-cuts[i + 1], -cuts[i], seg);
      panel(cuts[i], cuts[i + 1], seg);
    }
    auto arc = [&](double theta) {
      const cplx e = std::polar(1.0, theta);
      return std::pair<cplx, cplx>{u + 2.0 * u * e, 2.0 * u * cplx(0.0, 1.0) * e};
    };
    for (int j = 0; j < arc_panels; ++j) {
      const double a = std::numbers::pi / 2.0 + std::numbers::pi * j / arc_panels;
      panel(a, a + std::numbers::pi / arc_panels, arc);
    }
  }
};

// Sampled behaviour of G along the composite contour.
struct DescentReport {
  int samples = 0;
  double u = 0.0;
  double max_re_G = 0.0;
  cplx argmax = 0.0;
  double delta = 0.0;  // -max Re G outside the window |z - u| <= eps
  double eps = 0.1;
  double max_imag_jump = 0.0;
  double eps1 = 0.0, C1 = 0.0;
  bool quadratic_feasible = false;

  bool passes() const {
    return max_re_G <= 1e-12 && argmax == cplx(u, 0.0) && delta > 0.0 && max_imag_jump < std::numbers::pi;
  }
  json to_json() const {
    return json{{"samples", samples},     {"max_re_G", max_re_G},         {"argmax_re", argmax.real()},
                {"argmax_im", argmax.imag()}, {"delta", delta},           {"eps", eps},
                {"max_imag_jump", max_imag_jump}, {"eps1", eps1},         {"C1", C1},
                {"quadratic_feasible", quadratic_feasible}};
  }
};

inline DescentReport descent_report(const ModelParams& p, int samples = 1000, double eps = 0.1) {
  const CompositeContour C = CompositeContour::for_model(p, 1);
  const AsymptoticConstants ac = constants(p);
  const double u = p.u();
  // Odd count on the segment so that z = u is sampled exactly.
  const int seg = samples / 2 + ((samples / 2) % 2 == 0 ? 1 : 0);
  std::vector<cplx> zs;
  for (int j = 0; j < seg; ++j) zs.push_back(cplx(u, 4.0 * u * (j - (seg - 1) / 2) / (seg - 1)));
  const int arc = samples - seg;
  for (int j = 1; j <= arc; ++j) zs.push_back(C.point(0.5 + 0.5 * j / (arc + 1)));
  DescentReport r;
  r.samples = static_cast<int>(zs.size());
  r.u = u;
  r.eps = eps;
  r.max_re_G = -INFINITY;
  double outside = -INFINITY;
  std::vector<cplx> G(zs.size());
  for (std::size_t i = 0; i < zs.size(); ++i) {
    G[i] = phase_G(zs[i], p);
    if (G[i].real() > r.max_re_G) {
      r.max_re_G = G[i].real();
      r.argmax = zs[i];
    }
    if (std::abs(zs[i] - u) > eps) outside = std::max(outside, G[i].real());
    if (i > 0) r.max_imag_jump = std::max(r.max_imag_jump, std::abs(G[i].imag() - G[i - 1].imag()));
  }
  r.delta = -outside;
  // Smallest cubic-remainder constant over shrinking windows until 2 C1 eps1 < c.
  for (double e1 : {0.1, 0.05, 0.02, 0.01}) {
    double C1 = 0.0;
    for (int j = 1; j <= 200; ++j) {
      for (double sign : {-1.0, 1.0}) {
        const cplx z(u, sign * e1 * j / 200.0);
        const double dz = std::abs(z - u);
        const double rg = std::abs(phase_G(z, p) - ac.c * (z - u) * (z - u)) / (dz * dz * dz);
        const double rs = std::abs(phase_g(z, p) - ac.b * (z - u)) / (dz * dz);
        C1 = std::max({C1, rg, rs});
      }
    }
    r.eps1 = e1;
    r.C1 = C1;
    r.quadratic_feasible = 2.0 * C1 * e1 < ac.c;
    if (r.quadratic_feasible) break;
  }
  return r;
}

// λ_i = floor(aM + scale √M x_{k-i+1}); scale = d for the boundary factor and
// 1 for the path factor.
inline Signature lambda_of_x(const std::vector<double>& x, int M, double a, double scale) {
  if (x.empty()) throw DomainError("x-nonempty", "need at least one coordinate");
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) throw DomainError("x-increasing", "x must be strictly increasing");
  }
  const std::size_t k = x.size();
  std::vector<int> parts(k);
  for (std::size_t i = 0; i < k; ++i) {
    parts[i] = static_cast<int>(std::floor(a * M + scale * std::sqrt(static_cast<double>(M)) * x[k - 1 - i]));
  }
  Signature lam(parts);
  if (lam.smallest() < 1) throw DomainError("M-large-enough", "M too small: aM - A sqrt(M) must be at least 1");
  return lam;
}

// The element of (-1, 0] making aM + d x √M + h an integer.
inline double h_M(double x, int M, const ModelParams& p) {
  const AsymptoticConstants ac = constants(p);
  const double y = ac.a * M + ac.d * x * std::sqrt(static_cast<double>(M));
  return std::floor(y) - y;
}

namespace detail {

struct SplitFactors {
  double t = 0.0;      // (u - s)/(1 - su)
  double w0 = 0.0;     // ((1-q)/(1-su))^{C(k+1,2)} ((1-1/q)u/(1-su))^{C(k,2)}
  double z_red = 0.0;  // (q;q)_k ((1-u/s)/(1-su))^k
};

inline SplitFactors split_factors(int k, const ModelParams& p) {
  const double q = p.q(), s = p.s(), u = p.u();
  SplitFactors f;
  f.t = (u - s) / (1.0 - s * u);
  f.w0 = std::pow((1.0 - q) / (1.0 - s * u), binom2(k + 1)) * std::pow((1.0 - 1.0 / q) * u / (1.0 - s * u), binom2(k));
  f.z_red = q_pochhammer(q, q, k) * std::pow((1.0 - u / s) / (1.0 - s * u), k);
  return f;
}

}  // namespace detail

// Path factor of P(λ^k = μ) = A_M(μ) B_M(μ) for the homogeneous model.
inline double A_M(const Signature& mu, int M, const ModelParams& p) {
  const int k = detail::strict_check(mu, "A_M");
  const detail::SplitFactors f = detail::split_factors(k, p);
  // F / t^{|μ|}
  const double Ft = F_single(mu, std::vector<cplx>(k, p.u()), p.spin(), f.t).real();
  return Ft * std::pow(static_cast<double>(M), -0.5 * binom2(k)) / (f.w0 * std::pow(f.t, -binom2(k)));
}

// Boundary factor; f is integrated on the circle of radius u with the
// integrand normalized by its value at u.
inline double B_M(const Signature& mu, int M, const ModelParams& p, double tol = 1e-10) {
  const int k = detail::strict_check(mu, "B_M");
  if (!mu.strict()) return 0.0;
  const detail::SplitFactors f = detail::split_factors(k, p);
  const double q = p.q(), s = p.s(), u = p.u();
  const double pre = std::pow((1.0 - s * s) / (1.0 - q), k) * q_pochhammer(q, q, k);
  auto eval = [&](int n) {
    std::vector<cplx> z(n);
    std::vector<std::vector<cplx>> base(k, std::vector<cplx>(n));
    for (int a = 0; a < n; ++a) {
      z[a] = std::polar(u, 2.0 * std::numbers::pi * a / n);
      const cplx common = z[a] / static_cast<double>(n) / (-s * (1.0 - s * z[a])) *
                          std::exp(static_cast<double>(M) * detail::log_phi_ratio(z[a], p));
      const cplx r = detail::rho(z[a], s) / detail::rho(u, s);
      for (int i = 0; i < k; ++i) base[i][a] = common * ipow(r, mu[i]);
    }
    return pre * detail::tensor_contour_sum(base, [&](std::size_t a, std::size_t b) {
             return (z[a] - z[b]) / (z[a] - q * z[b]);
           });
  };
  const ContourEstimate est = detail::adapt_nodes(eval, 64, detail::node_cap(k), tol);
  // f = f̃ ρ(u)^{|μ|} φ(u)^{kM}; the φ(u) powers cancel against Z_M.
  return est.value.real() * std::pow(static_cast<double>(M), 0.5 * binom2(k)) * f.w0 * std::pow(f.t, -binom2(k)) /
         f.z_red;
}

inline double A_M_limit(const std::vector<double>& x) {
  double out = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) out *= (x[j] - x[i]) / static_cast<double>(j - i);
  }
  return out;
}

// Limit of d^k M^{k/2} B_M(λ(M)).
inline double B_M_limit(const std::vector<double>& x, const ModelParams& p) {
  const double d = constants(p).d;
  const int k = static_cast<int>(x.size());
  double out = std::pow(d, -binom2(k)) * std::pow(2.0 * std::numbers::pi, -0.5 * k);
  for (std::size_t i = 0; i < x.size(); ++i) {
    out *= std::exp(-x[i] * x[i] / 2.0);
    for (std::size_t j = i + 1; j < x.size(); ++j) out *= x[j] - x[i];
  }
  return out;
}

struct BMEstimate {
  int k = 0;
  int M = 0;
  std::vector<double> x;
  Signature lambda;
  double value = 0.0;
  double imag = 0.0;
  double prev = 0.0;
  double rel_change = 0.0;
  int level = 0;
  std::size_t nodes = 0;
  double limit = 0.0;

  double abs_error() const { return std::abs(value - limit); }
  json to_json() const {
    return json{{"k", k},         {"M", M},           {"x", x},         {"lambda", lambda},
                {"value", value}, {"imag", imag},     {"limit", limit}, {"abs_error", abs_error()},
                {"level", level}, {"nodes", nodes},   {"rel_change", rel_change}};
  }
};

// d^k M^{k/2} B_M(λ(M)) from the k-fold integral over the composite contour.
// Variable u_i carries the exponent λ_i, so the integrand only involves
// integer powers and is single valued.
inline BMEstimate B_M_contour(const std::vector<double>& x, int M, const ModelParams& p, double tol = 1e-9,
                              int max_level = -1) {
  const AsymptoticConstants ac = constants(p);
  const int k = static_cast<int>(x.size());
  if (k < 1 || k > 3) throw DomainError("rows-range", "B_M_contour supports 1 <= k <= 3");
  const Signature lam = lambda_of_x(x, M, ac.a, ac.d);
  const double q = p.q(), s = p.s(), u = p.u();
  const detail::SplitFactors f = detail::split_factors(k, p);
  const double Ak = std::pow(ac.d, k) * f.w0 * std::pow(f.t, -binom2(k));
  const double front = Ak * std::pow(static_cast<double>(M), 0.5 * binom2(k + 1));
  if (max_level < 0) max_level = k == 3 ? 1 : 4;
  auto eval = [&](int level) {
    CompositeContour C = CompositeContour::for_model(p, M, level);
    std::vector<cplx> z, w;
    C.nodes(z, w);
    const std::size_t n = z.size();
    std::vector<std::vector<cplx>> base(k, std::vector<cplx>(n));
    parallel_for(n, [&](std::size_t a) {
      const cplx g = detail::log_rho_ratio(z[a], p);
      const cplx lphi = detail::log_phi_ratio(z[a], p);
      const cplx pref = w[a] * s * (1.0 - s * u) / ((1.0 - s * z[a]) * (1.0 - u / s));
      for (int i = 0; i < k; ++i) base[i][a] = pref * std::exp(static_cast<double>(lam[i]) * g + static_cast<double>(M) * lphi);
    });
    const cplx val = front * detail::tensor_contour_sum(base, [&](std::size_t a, std::size_t b) {
                       return (z[a] - z[b]) / (z[a] - q * z[b]);
                     });
    return std::pair<cplx, std::size_t>{val, n};
  };
  BMEstimate est;
  est.k = k;
  est.M = M;
  est.x = x;
  est.lambda = lam;
  est.limit = B_M_limit(x, p);
  auto [prev, n0] = eval(0);
  for (int level = 1; level <= max_level; ++level) {
    auto [cur, n] = eval(level);
    est.value = cur.real();
    est.imag = cur.imag();
    est.prev = prev.real();
    est.level = level;
    est.nodes = n;
    est.rel_change = std::abs(cur - prev) / std::max(std::abs(cur), 1e-300);
    if (est.rel_change < tol) return est;
    prev = cur;
  }
  throw ConvergenceError("composite-contour quadrature did not converge", est.to_json());
}

// Probabilists' Hermite polynomial, monic of degree n.
inline double hermite(int n, double x) {
  if (n < 0 || n > 20) throw DomainError("hermite-degree", "hermite supports 0 <= n <= 20");
  return std::pow(2.0, -0.5 * n) * std::hermite(static_cast<unsigned>(n), x / std::numbers::sqrt2);
}

// ψ_n(x) = ∫ z^n e^{-z²/2 - ixz} dz/(2π) in closed form.
inline cplx psi(int n, double x) {
  cplx phase = 1.0;
  for (int i = 0; i < n; ++i) phase *= cplx(0.0, -1.0);
  return phase * std::exp(-x * x / 2.0) * hermite(n, x) / std::sqrt(2.0 * std::numbers::pi);
}

// The defining integral of ψ_n by double-exponential quadrature over the line.
inline cplx psi_quadrature(int n, double x) {
  boost::math::quadrature::sinh_sinh<double> integrator;
  auto gauss = [&](double z) { return std::abs(z) > 60.0 ? 0.0 : std::pow(z, n) * std::exp(-z * z / 2.0); };
  auto re = [&](double z) { return gauss(z) * std::cos(x * z); };
  auto im = [&](double z) { return -gauss(z) * std::sin(x * z); };
  return cplx(integrator.integrate(re), integrator.integrate(im)) / (2.0 * std::numbers::pi);
}

// det[h_{k-j}(x_i)]_{i,j=1..k}.
inline double hermite_determinant(const std::vector<double>& x) {
  const int k = static_cast<int>(x.size());
  Eigen::MatrixXd m(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) m(i, j) = hermite(k - 1 - j, x[i]);
  }
  return m.determinant();
}

}  // namespace sixv
