#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "core.hpp"
#include "parallel.hpp"
#include "symfunc.hpp"
#include "weights.hpp"

namespace sixv {

// Zero-centered positively oriented circle, discretized by the periodic
// trapezoid rule.
struct CircleContour {
  double radius = 0.0;
  int nodes = 64;
};

inline CircleContour default_contour(const ModelParams& p, int M) {
  double vmax = 0.0;
  for (double v : p.columns(M)) vmax = std::max(vmax, v);
  return {(p.s() + 1.0 / vmax) / 2.0, 64};
}

struct ContourEstimate {
  cplx value = 0.0;
  cplx prev_estimate = 0.0;
  int nodes = 0;
  double rel_change = 0.0;
  bool converged = false;

  json diagnostics() const {
    return json{{"nodes", nodes},
                {"estimate", value.real()},
                {"estimate_imag", value.imag()},
                {"prev_estimate", prev_estimate.real()},
                {"rel_change", rel_change},
                {"converged", converged}};
  }
};

namespace detail {

inline int strict_check(const Signature& lambda, const char* who) {
  if (lambda.empty() || !lambda.nonnegative() || lambda.smallest() < 1) {
    throw DomainError("last-part-positive", std::string(who) + " needs lambda in Sign_k^+ with lambda_k >= 1");
  }
  return static_cast<int>(lambda.size());
}

// Σ over node tuples (a_1..a_k) of prod_i base[i][a_i] prod_{α<β} cross(a_α, a_β).
template <typename Cross>
cplx tensor_contour_sum(const std::vector<std::vector<cplx>>& base, Cross&& cross) {
  const std::size_t k = base.size();
  const std::size_t n = base.front().size();
  std::vector<cplx> partial(n);
  parallel_for(n, [&](std::size_t a0) {
    std::vector<std::size_t> idx(k);
    idx[0] = a0;
    auto rec = [&](auto&& self, std::size_t level, cplx acc) -> cplx {
      if (level == k) return acc;
      cplx sum = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        cplx t = acc * base[level][a];
        for (std::size_t prev = 0; prev < level; ++prev) t *= cross(idx[prev], a);
        idx[level] = a;
        sum += self(self, level + 1, t);
      }
      return sum;
    };
    partial[a0] = rec(rec, 1, base[0][a0]);
  });
  cplx total = 0.0;
  for (const auto& p : partial) total += p;
  return total;
}

template <typename Eval>
ContourEstimate adapt_nodes(Eval&& eval, int start, int cap, double tol) {
  ContourEstimate est;
  int n = std::max(8, start);
  cplx prev = eval(n);
  while (true) {
    const int m = 2 * n;
    const cplx cur = eval(m);
    est.prev_estimate = prev;
    est.value = cur;
    est.nodes = m;
    est.rel_change = std::abs(cur - prev) / std::max(std::abs(cur), 1e-300);
    if (est.rel_change < tol || std::abs(cur - prev) < 1e-300) {
      est.converged = true;
      return est;
    }
    if (m >= cap) break;
    prev = cur;
    n = m;
  }
  throw ConvergenceError("contour quadrature did not converge before the node cap", est.diagnostics());
}

inline int node_cap(int k) { return k == 1 ? (1 << 16) : k == 2 ? (1 << 11) : (1 << 8); }

}  // namespace detail

// f(λ; v, ρ) for every λ in Sign_k^+ with parts <= cap, by a linear DP that
// starts from Σ_ν (-s)^{|ν|} δ_ν over strict ν with parts >= 1.
inline StateVector f_direct_all(int k, const ModelParams& p, int M, int cap) {
  const SpinParams spin = p.spin();
  const double q = spin.q, s = spin.s;
  StateVector init;
  std::vector<int> parts(static_cast<std::size_t>(k));
  auto rec = [&](auto&& self, int i, int hi) -> void {
    if (i == k) {
      const Signature nu(parts);
      init.emplace_back(nu, ipow(-s, nu.weight()));
      return;
    }
    for (int x = k - i; x <= hi; ++x) {
      parts[i] = x;
      self(self, i + 1, x - 1);
    }
  };
  rec(rec, 0, cap);
  std::sort(init.begin(), init.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<cplx> vs;
  for (double v : p.columns(M)) vs.emplace_back(v);
  PropagateOptions opts;
  opts.entry = false;
  opts.conjugated = true;
  opts.cap = cap;
  StateVector out = propagate(std::move(init), vs, spin, opts);
  const double pre = ((k % 2) ? -1.0 : 1.0) * q_pochhammer(q, q, k);
  StateVector result;
  for (auto& [lam, val] : out) {
    if (!lam.strict() || lam.smallest() < 1) continue;
    result.emplace_back(lam, pre * val);
  }
  return result;
}

inline double f_direct(const Signature& lambda, const ModelParams& p, int M) {
  if (!lambda.nonnegative()) throw DomainError("signature-nonneg", "f needs a nonnegative signature");
  if (lambda.empty()) return 1.0;
  if (lambda.smallest() == 0 || !lambda.strict()) return 0.0;
  const SpinParams spin = p.spin();
  const double q = spin.q, s = spin.s;
  const int k = static_cast<int>(lambda.size());
  StateVector init;
  std::vector<int> parts(static_cast<std::size_t>(k));
  auto rec = [&](auto&& self, int i, int hi) -> void {
    if (i == k) {
      const Signature nu(parts);
      init.emplace_back(nu, ipow(-s, nu.weight()));
      return;
    }
    for (int x = k - i; x <= std::min(hi, lambda[i]); ++x) {
      parts[i] = x;
      self(self, i + 1, x - 1);
    }
  };
  rec(rec, 0, lambda.largest());
  std::sort(init.begin(), init.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<cplx> vs;
  for (double v : p.columns(M)) vs.emplace_back(v);
  PropagateOptions opts;
  opts.entry = false;
  opts.conjugated = true;
  opts.cap = lambda.largest();
  opts.bound = &lambda;
  const cplx val = lookup(propagate(std::move(init), vs, spin, opts), lambda);
  return ((k % 2) ? -1.0 : 1.0) * q_pochhammer(q, q, k) * val.real();
}

inline ContourEstimate f_contour_estimate(const Signature& lambda, const ModelParams& p, int M,
                                          const CircleContour& contour, double tol) {
  const int k = detail::strict_check(lambda, "f_contour");
  if (M < 1) throw DomainError("columns-positive", "f_contour needs M >= 1");
  const std::vector<double> vs = p.columns(M);
  const double vmax = *std::max_element(vs.begin(), vs.end());
  const double R = contour.radius;
  if (!(R > p.s() && R * vmax < 1.0)) throw DomainError("contour-radius", "contour radius must lie in (s, 1/max v)");
  const SpinParams spin = p.spin();
  const double q = spin.q, s = spin.s;
  const double pre = conjugation_factor(lambda, spin) * q_pochhammer(q, q, k);
  // At s = q^{-1/2} a repeated part makes c(λ) vanish exactly.
  if (!lambda.strict()) {
    ContourEstimate zero;
    zero.converged = true;
    return zero;
  }
  auto eval = [&](int n) {
    std::vector<cplx> z(n);
    std::vector<std::vector<cplx>> base(k, std::vector<cplx>(n));
    for (int a = 0; a < n; ++a) {
      z[a] = std::polar(R, 2.0 * std::numbers::pi * a / n);
      const cplx rho = (1.0 - s * z[a]) / (z[a] - s);
      cplx common = z[a] / static_cast<double>(n) / (-s * (1.0 - s * z[a]));
      for (double v : vs) common *= (1.0 - q * z[a] * v) / (1.0 - z[a] * v);
      for (int i = 0; i < k; ++i) base[i][a] = common * ipow(rho, lambda[i]);
    }
    return pre * detail::tensor_contour_sum(base, [&](std::size_t a, std::size_t b) {
             return (z[a] - z[b]) / (z[a] - q * z[b]);
           });
  };
  return detail::adapt_nodes(eval, contour.nodes, detail::node_cap(k), tol);
}

// Contour-integral evaluation of f; the imaginary part must vanish.
inline double f_contour(const Signature& lambda, const ModelParams& p, int M, const CircleContour& contour,
                        double tol = 1e-10) {
  const ContourEstimate est = f_contour_estimate(lambda, p, M, contour, tol);
  if (std::abs(est.value.imag()) > std::max(1e-10, tol) * std::max(1.0, std::abs(est.value))) {
    throw ConvergenceError("contour value has a non-negligible imaginary part", est.diagnostics());
  }
  return est.value.real();
}

// G^c_λ(v_1..v_N) (from 0^k) by the large-contour formula.
inline ContourEstimate Gc_contour(const Signature& lambda, const std::vector<cplx>& vs, const SpinParams& spin,
                                  const CircleContour& contour, double tol = 1e-10) {
  const int k = detail::strict_check(lambda, "Gc_contour");
  if (static_cast<int>(vs.size()) < k) throw DomainError("enough-variables", "Gc_contour needs N >= k");
  const double q = spin.q, s = spin.s;
  if (!(s > 1.0)) throw DomainError("spin-range", "Gc_contour needs s > 1");
  double vmax = 0.0;
  for (const auto& v : vs) vmax = std::max(vmax, std::abs(v));
  if (!(vmax * s < 1.0)) throw DomainError("variable-range", "Gc_contour needs |v_i| < 1/s");
  const double R = contour.radius;
  if (!(R > s && R * vmax < 1.0)) throw DomainError("contour-radius", "contour radius must lie in (s, 1/max|v|)");
  const double pre = conjugation_factor(lambda, spin) * q_pochhammer(q, q, k);
  auto eval = [&](int n) {
    std::vector<cplx> z(n);
    std::vector<std::vector<cplx>> base(k, std::vector<cplx>(n));
    for (int a = 0; a < n; ++a) {
      z[a] = std::polar(R, 2.0 * std::numbers::pi * a / n);
      const cplx rho = (1.0 - s * z[a]) / (z[a] - s);
      cplx common = z[a] / static_cast<double>(n) / ((1.0 - s * z[a]) * (z[a] - s));
      for (const auto& v : vs) common *= (1.0 - q * z[a] * v) / (1.0 - z[a] * v);
      for (int i = 0; i < k; ++i) base[i][a] = common * ipow(rho, lambda[i]);
    }
    return pre * detail::tensor_contour_sum(base, [&](std::size_t a, std::size_t b) {
             return (z[a] - z[b]) / (z[a] - q * z[b]);
           });
  };
  return detail::adapt_nodes(eval, contour.nodes, detail::node_cap(k), tol);
}

// Normalized boundary values for all strict λ with 1 <= λ_k < ... < λ_1 <= cap:
//   value(λ) = f(λ) / (ρ(z0)^{|λ|} prod_j φ_j(z0)^k),
// evaluated on the circle of radius z0 where both normalized factors have
// modulus <= 1. z0 must lie in (s, 1/max v).
struct BoundaryTable {
  int k = 0;
  int cap = 0;
  int nodes = 0;
  double z0 = 0.0;
  // Dense storage indexed by parts; only strict entries are meaningful.
  std::vector<double> values;

  double at(const Signature& lam) const {
    std::size_t idx = 0;
    for (int i = 0; i < k; ++i) idx = idx * (cap + 1) + lam[i];
    return values[idx];
  }
};

inline BoundaryTable boundary_table(int k, const ModelParams& p, int M, int cap, int nodes, double z0) {
  if (k < 1 || k > 3) throw DomainError("rows-range", "boundary table supports 1 <= k <= 3");
  if (cap < k) throw DomainError("cap-range", "cap must be at least k");
  const std::vector<double> vs = p.columns(M);
  const double vmax = *std::max_element(vs.begin(), vs.end());
  const SpinParams spin = p.spin();
  const double q = spin.q, s = spin.s;
  if (!(z0 > s && z0 * vmax < 1.0)) throw DomainError("contour-radius", "reference point must lie in (s, 1/max v)");
  const int n = nodes;
  const int L = cap + 1;
  using CMat = Eigen::MatrixXcd;
  CMat A(n, L);
  std::vector<cplx> z(n);
  const cplx rho0 = (1.0 - s * z0) / (z0 - s);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t a) {
    z[a] = std::polar(z0, 2.0 * std::numbers::pi * static_cast<double>(a) / n);
    const cplx r = (1.0 - s * z[a]) / (z[a] - s) / rho0;
    cplx base = z[a] / static_cast<double>(n) / (-s * (1.0 - s * z[a]));
    for (double v : vs) base *= (1.0 - q * z[a] * v) / (1.0 - z[a] * v) * ((1.0 - z0 * v) / (1.0 - q * z0 * v));
    cplx cur = base;
    for (int l = 0; l < L; ++l) {
      A(a, l) = cur;
      cur *= r;
    }
  });
  // Strict λ: c(λ) (q;q)_k = ((1-s^2)/(1-q))^k (q;q)_k.
  const double pre = std::pow((1.0 - s * s) / (1.0 - q), k) * q_pochhammer(q, q, k);
  BoundaryTable table;
  table.k = k;
  table.cap = cap;
  table.nodes = n;
  table.z0 = z0;
  table.values.assign(static_cast<std::size_t>(std::pow(L, k)), 0.0);
  if (k == 1) {
    const Eigen::RowVectorXcd sums = A.colwise().sum();
    for (int l = 1; l < L; ++l) table.values[l] = pre * sums(l).real();
    return table;
  }
  // On a common circle (z_a - z_b)/(z_a - q z_b) = Σ_m c_m (z_b/z_a)^m with
  // c_0 = 1, c_m = (q - 1) q^(m-1), so the discrete sums factor through the
  // moments J(l, j) = Σ_a A(a, l) (z_a/z0)^j.
  const int T = std::max(2, static_cast<int>(std::ceil(std::log(1e-18) / std::log(q))) + 1);
  const double series_cost = k == 2 ? double(L) * L * T : double(L) * L * T * T * T;
  const double dense_cost = k == 2 ? double(n) * n * L : double(n) * n * n * L;
  std::vector<double> c(T);
  c[0] = 1.0;
  for (int m = 1; m < T; ++m) c[m] = (q - 1.0) * std::pow(q, m - 1);
  if (series_cost < dense_cost) {
    const int J0 = (k - 1) * (T - 1);
    const int W = 2 * J0 + 1;
    CMat E(n, W);
    for (int a = 0; a < n; ++a) {
      for (int j = 0; j < W; ++j) {
        const long long e = (static_cast<long long>(a) * (j - J0)) % n;
        E(a, j) = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(e) / n);
      }
    }
    const CMat J = A.transpose() * E;  // J(l, j + J0)
    auto mom = [&](int l, int j) { return J(l, j + J0); };
    if (k == 2) {
      parallel_for(static_cast<std::size_t>(L), [&](std::size_t i1) {
        const int l1 = static_cast<int>(i1);
        for (int l2 = 1; l2 < l1; ++l2) {
          cplx acc = 0.0;
          for (int m = 0; m < T; ++m) acc += c[m] * mom(l1, -m) * mom(l2, m);
          table.values[static_cast<std::size_t>(l1) * L + l2] = pre * acc.real();
        }
      });
      return table;
    }
    // R.row(l3) = vec of c_m2 c_m3 J(l3, m2 + m3); Q_l2(m1, m3) = J(l2, m1 - m3).
    CMat R(L, T * T);
    for (int l3 = 0; l3 < L; ++l3) {
      for (int m2 = 0; m2 < T; ++m2) {
        for (int m3 = 0; m3 < T; ++m3) R(l3, m2 * T + m3) = c[m2] * c[m3] * mom(l3, m2 + m3);
      }
    }
    parallel_for(static_cast<std::size_t>(L), [&](std::size_t i1) {
      const int l1 = static_cast<int>(i1);
      if (l1 < 3) return;
      // P(m2, m1) = c_m1 J(l1, -m1 - m2); X_l2 = P Q_l2.
      CMat P(T, T), Q(T, T), X(T, T);
      for (int m2 = 0; m2 < T; ++m2) {
        for (int m1 = 0; m1 < T; ++m1) P(m2, m1) = c[m1] * mom(l1, -m1 - m2);
      }
      CMat Xs(l1, T * T);
      Xs.setZero();
      for (int l2 = 2; l2 < l1; ++l2) {
        for (int m1 = 0; m1 < T; ++m1) {
          for (int m3 = 0; m3 < T; ++m3) Q(m1, m3) = mom(l2, m1 - m3);
        }
        X.noalias() = P * Q;
        for (int m2 = 0; m2 < T; ++m2) Xs.row(l2).segment(m2 * T, T) = X.row(m2);
      }
      const CMat S = Xs * R.topRows(l1).transpose();  // S(l2, l3)
      for (int l2 = 2; l2 < l1; ++l2) {
        for (int l3 = 1; l3 < l2; ++l3) table.values[(static_cast<std::size_t>(l1) * L + l2) * L + l3] = pre * S(l2, l3).real();
      }
    });
    return table;
  }
  CMat C(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) C(a, b) = (z[a] - z[b]) / (z[a] - q * z[b]);
  }
  if (k == 2) {
    const CMat F = A.transpose() * (C * A);
    for (int l1 = 2; l1 < L; ++l1) {
      for (int l2 = 1; l2 < l1; ++l2) table.values[static_cast<std::size_t>(l1) * L + l2] = pre * F(l1, l2).real();
    }
    return table;
  }
  std::vector<cplx> acc(table.values.size(), 0.0);
  for (int a = 0; a < n; ++a) {
    const Eigen::VectorXcd crow = C.row(a).transpose();
    const CMat T = C * (crow.asDiagonal() * A);            // T[b, l3]
    const CMat U = A.transpose() * (crow.asDiagonal() * T);  // U[l2, l3]
    for (int l1 = 3; l1 < L; ++l1) {
      const cplx a1 = A(a, l1);
      for (int l2 = 2; l2 < l1; ++l2) {
        for (int l3 = 1; l3 < l2; ++l3) acc[(static_cast<std::size_t>(l1) * L + l2) * L + l3] += a1 * U(l2, l3);
      }
    }
  }
  for (std::size_t i = 0; i < acc.size(); ++i) table.values[i] = pre * acc[i].real();
  return table;
}

}  // namespace sixv
