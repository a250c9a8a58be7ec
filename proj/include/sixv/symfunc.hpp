#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <unordered_map>
#include <vector>

#include "core.hpp"
#include "parallel.hpp"
#include "paths.hpp"
#include "weights.hpp"

namespace sixv {

// Sparse vector over signatures, kept sorted so that every reduction runs in
// a fixed order.
using StateVector = std::vector<std::pair<Signature, cplx>>;

// One transfer row applied to a sparse state vector.
inline StateVector transfer_row(const StateVector& states, bool entry, const WeightKernel& kernel, int cap,
                                const Signature* bound = nullptr, cplx hscale = 1.0) {
  std::unordered_map<Signature, cplx, SignatureHash> next;
  for (const auto& [sig, val] : states) {
    if (val == 0.0) continue;
    for_each_next_row(sig, entry, cap, bound, [&](const Signature& nx) {
      const cplx wgt = row_weight(sig, nx, entry, kernel, hscale);
      if (wgt != 0.0) next[nx] += val * wgt;
    });
  }
  StateVector out(next.begin(), next.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

struct PropagateOptions {
  bool entry = true;
  bool conjugated = false;
  int cap = 0;
  const Signature* bound = nullptr;
  // Divide every vertex with an outgoing horizontal edge by this value.
  cplx horizontal_unit = 1.0;
};

// Applies rows with spectral[0], spectral[1], ... (bottom row first).
inline StateVector propagate(StateVector states, const std::vector<cplx>& spectral, const SpinParams& spin,
                             const PropagateOptions& opts) {
  const cplx hscale = 1.0 / opts.horizontal_unit;
  for (const cplx& u : spectral) {
    const WeightKernel kernel(spin, u, opts.conjugated);
    states = transfer_row(states, opts.entry, kernel, opts.cap, opts.bound, hscale);
  }
  return states;
}

inline cplx lookup(const StateVector& states, const Signature& key) {
  auto it = std::lower_bound(states.begin(), states.end(), key,
                             [](const auto& e, const Signature& k) { return e.first < k; });
  return (it != states.end() && it->first == key) ? it->second : cplx(0.0);
}

namespace detail {

inline cplx skew_eval(const Signature& lambda, const Signature& mu, const std::vector<cplx>& spectral,
                      const SpinParams& spin, bool entry, bool conjugated) {
  if (!lambda.nonnegative() || !mu.nonnegative()) {
    throw DomainError("signature-nonneg", "skew functions need nonnegative signatures");
  }
  const std::size_t expected = mu.size() + (entry ? spectral.size() : 0);
  if (lambda.size() != expected) {
    throw DomainError("length-mismatch", entry ? "F needs N(lambda) = N(mu) + number of variables"
                                               : "G needs N(lambda) = N(mu)");
  }
  PropagateOptions opts;
  opts.entry = entry;
  opts.conjugated = conjugated;
  opts.cap = std::max(lambda.largest(), mu.largest());
  opts.bound = &lambda;
  return lookup(propagate({{mu, 1.0}}, spectral, spin, opts), lambda);
}

}  // namespace detail

inline cplx F_eval(const Signature& lambda, const Signature& mu, const std::vector<cplx>& spectral,
                   const SpinParams& spin) {
  return detail::skew_eval(lambda, mu, spectral, spin, true, false);
}

// G with the plain weights; related to G^c by the conjugation factor.
inline cplx G_eval(const Signature& lambda, const Signature& mu, const std::vector<cplx>& spectral,
                   const SpinParams& spin) {
  return detail::skew_eval(lambda, mu, spectral, spin, false, false);
}

inline cplx Gc_eval(const Signature& lambda, const Signature& mu, const std::vector<cplx>& spectral,
                    const SpinParams& spin) {
  return detail::skew_eval(lambda, mu, spectral, spin, false, true);
}

// F_{λ/μ} for every λ with parts <= cap, divided by unit^{|λ|-|μ|}.
inline StateVector F_all(const Signature& mu, const std::vector<cplx>& spectral, const SpinParams& spin, int cap,
                         cplx unit = 1.0) {
  PropagateOptions opts;
  opts.entry = true;
  opts.cap = cap;
  opts.horizontal_unit = unit;
  return propagate({{mu, 1.0}}, spectral, spin, opts);
}

namespace detail {

// row_weight with vertex weights tabulated for occupancies <= 3 and run
// powers tabulated up to cap.
class CachedRowWeight {
 public:
  CachedRowWeight(const WeightKernel& kernel, cplx hscale, int cap) {
    for (int i1 = 0; i1 < 4; ++i1) {
      for (int j1 = 0; j1 < 2; ++j1) {
        for (int i2 = 0; i2 < 4; ++i2) {
          for (int j2 = 0; j2 < 2; ++j2) {
            const VertexType v{i1, j1, i2, j2};
            table_[slot(v)] = kernel(v) * (j2 ? hscale : cplx(1.0));
          }
        }
      }
    }
    const cplx run = kernel(VertexType{0, 1, 0, 1}) * hscale;
    run_pow_.resize(static_cast<std::size_t>(cap) + 2);
    run_pow_[0] = 1.0;
    for (std::size_t n = 1; n < run_pow_.size(); ++n) run_pow_[n] = run_pow_[n - 1] * run;
  }

  template <typename Below, typename Above>
  cplx operator()(const Below& below, const Above& above) const {
    cplx result = 1.0;
    const bool ok = walk_row(
        below, above, true, [&](int, const VertexType& v) { result *= table_[slot(v)]; },
        [&](int from, int to, int carry) {
          if (carry) result *= run_pow_[static_cast<std::size_t>(to - from)];
        });
    return ok ? result : cplx(0.0);
  }

 private:
  static std::size_t slot(const VertexType& v) { return ((v.i1 * 2 + v.j1) * 4 + v.i2) * 2 + v.j2; }
  std::array<cplx, 64> table_{};
  std::vector<cplx> run_pow_;
};

}  // namespace detail

// Dense form of F_all from the empty signature: entry λ_1*(cap+1)^{k-1} + ... + λ_k
// holds F_λ(spectral)/unit^{|λ|}, k = spectral.size() <= 3; entries off the
// weakly decreasing cone are zero.
inline std::vector<cplx> F_dense(const std::vector<cplx>& spectral, const SpinParams& spin, int cap,
                                 cplx unit = 1.0) {
  const int k = static_cast<int>(spectral.size());
  if (k < 1 || k > 3) throw DomainError("rows-range", "F_dense supports 1 <= k <= 3");
  if (cap < 0) throw DomainError("cap-range", "cap must be nonnegative");
  const std::size_t L = static_cast<std::size_t>(cap) + 1;
  const cplx hscale = 1.0 / unit;
  std::vector<cplx> prev{1.0};
  for (int r = 1; r <= k; ++r) {
    const detail::CachedRowWeight weight(WeightKernel(spin, spectral[r - 1], false), hscale, cap);
    std::size_t size = 1;
    for (int i = 0; i < r; ++i) size *= L;
    std::vector<cplx> next(size, 0.0);
    // λ_1 slices are independent, so the result does not depend on scheduling.
    parallel_for(L, [&](std::size_t top) {
      std::array<int, 3> lam{static_cast<int>(top), 0, 0}, mu{0, 0, 0};
      const std::span<const int> lam_view(lam.data(), r), mu_view(mu.data(), r - 1);
      auto visit = [&]() {
        std::size_t out = 0;
        for (int i = 0; i < r; ++i) out = out * L + lam[i];
        cplx acc = 0.0;
        auto sum_mu = [&](auto&& self, int i, std::size_t idx) -> void {
          if (i == r - 1) {
            const cplx pv = prev[idx];
            if (pv != 0.0) acc += pv * weight(mu_view, lam_view);
            return;
          }
          for (int x = lam[i + 1]; x <= lam[i]; ++x) {
            mu[i] = x;
            self(self, i + 1, idx * L + x);
          }
        };
        sum_mu(sum_mu, 0, 0);
        next[out] = acc;
      };
      auto rec = [&](auto&& self, int i) -> void {
        if (i == r) {
          visit();
          return;
        }
        for (int x = 0; x <= lam[i - 1]; ++x) {
          lam[i] = x;
          self(self, i + 1);
        }
      };
      rec(rec, 1);
    });
    prev = std::move(next);
  }
  return prev;
}

// F_λ(spectral)/unit^{|λ|} for a single λ with k = spectral.size() <= 4 parts:
// dense lower rows, then one sum over the rows interlacing with λ.
inline cplx F_single(const Signature& lambda, const std::vector<cplx>& spectral, const SpinParams& spin,
                     cplx unit = 1.0) {
  const int k = static_cast<int>(spectral.size());
  if (k < 1 || k > 4) throw DomainError("rows-range", "F_single supports 1 <= k <= 4");
  if (static_cast<int>(lambda.size()) != k) throw DomainError("length-mismatch", "F needs N(lambda) = number of variables");
  if (!lambda.nonnegative()) throw DomainError("signature-nonneg", "skew functions need nonnegative signatures");
  const int cap = lambda.largest();
  const std::size_t L = static_cast<std::size_t>(cap) + 1;
  const std::vector<cplx> lower =
      k == 1 ? std::vector<cplx>{1.0} : F_dense({spectral.begin(), spectral.end() - 1}, spin, cap, unit);
  const detail::CachedRowWeight weight(WeightKernel(spin, spectral.back(), false), 1.0 / unit, cap);
  std::array<int, 3> mu{};
  const std::span<const int> mu_view(mu.data(), k - 1);
  cplx acc = 0.0;
  auto rec = [&](auto&& self, int i, std::size_t idx) -> void {
    if (i == k - 1) {
      if (lower[idx] != 0.0) acc += lower[idx] * weight(mu_view, lambda);
      return;
    }
    for (int x = lambda[i + 1]; x <= lambda[i]; ++x) {
      mu[i] = x;
      self(self, i + 1, idx * L + x);
    }
  };
  rec(rec, 0, 0);
  return acc;
}

inline StateVector Gc_all(const Signature& mu, const std::vector<cplx>& spectral, const SpinParams& spin, int cap) {
  PropagateOptions opts;
  opts.entry = false;
  opts.conjugated = true;
  opts.cap = cap;
  return propagate({{mu, 1.0}}, spectral, spin, opts);
}

namespace detail {

inline void require_distinct(const std::vector<cplx>& xs, const SpinParams& spin) {
  for (std::size_t a = 0; a < xs.size(); ++a) {
    if (std::abs(xs[a] - spin.s) < 1e-14 || std::abs(1.0 - spin.s * xs[a]) < 1e-14) {
      throw DomainError("spectral-pole", "symmetrization variables must avoid s and 1/s");
    }
    for (std::size_t b = a + 1; b < xs.size(); ++b) {
      if (xs[a] == xs[b]) {
        throw DomainError("distinct-variables", "symmetrization formula needs pairwise distinct variables");
      }
    }
  }
}

template <typename Term>
cplx symmetrize(std::size_t n, Term&& term) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  cplx total = 0.0;
  do {
    total += term(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

}  // namespace detail

inline cplx F_symmetrization(const Signature& mu, const std::vector<cplx>& us, const SpinParams& spin) {
  if (mu.size() != us.size()) throw DomainError("length-mismatch", "need one variable per part");
  detail::require_distinct(us, spin);
  const double q = spin.q, s = spin.s;
  const std::size_t n = us.size();
  cplx pre = std::pow(1.0 - q, static_cast<double>(n));
  for (const auto& x : us) pre /= 1.0 - s * x;
  const cplx sum = detail::symmetrize(n, [&](const std::vector<std::size_t>& p) {
    cplx t = 1.0;
    for (std::size_t a = 0; a < n; ++a) {
      const cplx xa = us[p[a]];
      for (std::size_t b = a + 1; b < n; ++b) {
        const cplx xb = us[p[b]];
        t *= (xa - q * xb) / (xa - xb);
      }
      t *= ipow((xa - s) / (1.0 - s * xa), mu[a]);
    }
    return t;
  });
  return pre * sum;
}

// G^c_{ν/0^n}(v_1..v_N) by symmetrization; zero when N < n - m_0(ν).
inline cplx Gc_symmetrization(const Signature& nu, const std::vector<cplx>& vs, const SpinParams& spin) {
  detail::require_distinct(vs, spin);
  if (!nu.nonnegative()) throw DomainError("signature-nonneg", "nu must be nonnegative");
  const double q = spin.q, s = spin.s, s2 = s * s;
  const int N = static_cast<int>(vs.size());
  const int n = static_cast<int>(nu.size());
  const int n0 = nu.multiplicity(0);
  if (N < n - n0) return 0.0;
  cplx pre = std::pow(1.0 - q, N) * q_pochhammer(q, q, n) / (q_pochhammer(q, q, N - n + n0) * q_pochhammer(q, q, n0));
  for (const auto& x : vs) pre /= 1.0 - s * x;
  for (const auto& [part, m] : nu.multiplicities()) {
    if (part >= 1) pre *= q_pochhammer(s2, q, m) / q_pochhammer(q, q, m);
  }
  const double qn0 = std::pow(q, n0);
  const cplx sum = detail::symmetrize(static_cast<std::size_t>(N), [&](const std::vector<std::size_t>& p) {
    cplx t = 1.0;
    for (int a = 0; a < N; ++a) {
      const cplx xa = vs[p[a]];
      for (int b = a + 1; b < N; ++b) {
        const cplx xb = vs[p[b]];
        t *= (xa - q * xb) / (xa - xb);
      }
      if (a < n) t *= ipow((xa - s) / (1.0 - s * xa), nu[a]);
      if (a < n - n0) t *= xa / (xa - s);
      else t *= 1.0 - s * qn0 * xa;
    }
    return t;
  });
  return pre * sum;
}

// F_μ(u, qu, ..., q^{N-1}u) in closed form.
inline cplx F_geometric(const Signature& mu, cplx u, const SpinParams& spin) {
  const double q = spin.q, s = spin.s;
  const int N = static_cast<int>(mu.size());
  cplx r = q_pochhammer(q, q, N);
  for (int i = 0; i < N; ++i) {
    const cplx x = std::pow(q, i) * u;
    r *= ipow((x - s) / (1.0 - s * x), mu[i]) / (1.0 - s * x);
  }
  return r;
}

// G^c_{ν/0^n}(u, qu, ..., q^{N-1}u) in closed form.
inline cplx Gc_geometric(const Signature& nu, int N, cplx u, const SpinParams& spin) {
  const double q = spin.q, s = spin.s, s2 = s * s;
  const int n = static_cast<int>(nu.size());
  const int n0 = nu.multiplicity(0);
  if (N < n - n0) return 0.0;
  cplx pre = 1.0;
  for (const auto& [part, m] : nu.multiplicities()) {
    if (part >= 1) pre *= q_pochhammer(s2, q, m) / q_pochhammer(q, q, m);
  }
  cplx prod = 1.0;
  for (int i = 0; i < N; ++i) {
    const cplx x = std::pow(q, i) * u;
    const int part = i < n ? nu[i] : 0;
    prod *= ipow((x - s) / (1.0 - s * x), part) / (1.0 - s * x);
  }
  const cplx num = q_pochhammer(q, q, N) * q_pochhammer<cplx>(s * u, q, N + n0) * q_pochhammer(q, q, n) * prod;
  const cplx den = q_pochhammer(q, q, N - n + n0) * q_pochhammer<cplx>(s * u, q, n) * q_pochhammer(q, q, n0) *
                   q_pochhammer<cplx>(s / u, 1.0 / q, n - n0);
  return pre * num / den;
}

struct CauchyReport {
  cplx lhs = 0.0;
  cplx rhs = 0.0;
  double rel_error = 0.0;
  int truncation_L = 0;
  double tail_bound = 0.0;
  double ratio = 0.0;
  bool converged = false;

  json to_json() const {
    return json{{"lhs", lhs.real()},         {"lhs_imag", lhs.imag()}, {"rhs", rhs.real()},
                {"rhs_imag", rhs.imag()},   {"rel_error", rel_error}, {"truncation_L", truncation_L},
                {"tail_bound", tail_bound}, {"ratio", ratio},         {"converged", converged}};
  }
};

inline double admissibility_ratio(cplx u, cplx v, const SpinParams& spin) {
  const double s = spin.s;
  return std::abs((u - s) / (1.0 - s * u) * ((v - s) / (1.0 - s * v)));
}

namespace detail {

inline void require_admissible(const std::vector<cplx>& us, const std::vector<cplx>& vs, const SpinParams& spin) {
  for (const auto& u : us) {
    for (const auto& v : vs) {
      if (!(admissibility_ratio(u, v, spin) < 1.0)) {
        throw DomainError("admissible-pair", "every (u_i, v_j) pair must be admissible");
      }
    }
  }
}

// Truncated sum over κ of A_κ·B_κ where A, B come from DPs at cap L, with a
// geometric tail estimate from the outermost shells. `build(L)` returns the
// two state vectors.
template <typename Build>
CauchyReport truncated_pairing(Build&& build, cplx rhs, double theory_ratio, int L0, double tol, int max_cap) {
  CauchyReport rep;
  rep.rhs = rhs;
  rep.ratio = theory_ratio;
  int L = L0;
  while (true) {
    const auto [A, B] = build(L);
    std::vector<double> shell(static_cast<std::size_t>(L) + 1, 0.0);
    cplx lhs = 0.0;
    std::size_t ib = 0;
    for (const auto& [sig, a] : A) {
      while (ib < B.size() && B[ib].first < sig) ++ib;
      if (ib < B.size() && B[ib].first == sig) {
        const cplx term = a * B[ib].second;
        lhs += term;
        shell[sig.largest()] += std::abs(term);
      }
    }
    const double last = shell[L], prev = shell[L - 1];
    double rho = theory_ratio;
    if (prev > 0.0) rho = std::max(rho, last / prev);
    rep.lhs = lhs;
    rep.truncation_L = L;
    rep.tail_bound = rho < 1.0 ? last * rho / (1.0 - rho) : std::numeric_limits<double>::infinity();
    rep.rel_error = std::abs(lhs - rhs) / std::abs(rhs);
    if (rep.tail_bound < tol / 10.0 * std::abs(rhs)) {
      rep.converged = true;
      return rep;
    }
    if (L >= max_cap) return rep;
    L = std::min(max_cap, L + std::max(4, L / 4));
  }
}

}  // namespace detail

// Σ_ν F_ν(u) G^c_{ν/0^N}(v) against (q;q)_N ∏_i 1/(1-su_i) ∏_j (1-qu_iv_j)/(1-u_iv_j).
inline CauchyReport verify_cauchy(const std::vector<cplx>& us, const std::vector<cplx>& vs, const SpinParams& spin,
                                  double tol = 1e-10, int max_cap = 400) {
  detail::require_admissible(us, vs, spin);
  const double q = spin.q, s = spin.s;
  const int N = static_cast<int>(us.size());
  cplx rhs = q_pochhammer(q, q, N);
  double ratio = 0.0;
  for (const auto& u : us) {
    rhs /= 1.0 - s * u;
    for (const auto& v : vs) {
      rhs *= (1.0 - q * u * v) / (1.0 - u * v);
      ratio = std::max(ratio, admissibility_ratio(u, v, spin));
    }
  }
  const Signature zeros(std::vector<int>(static_cast<std::size_t>(N), 0));
  const int L0 = std::max(8, static_cast<int>(std::ceil(std::log(tol / 100.0) / std::log(std::max(ratio, 1e-3)))));
  return detail::truncated_pairing(
      [&](int L) { return std::make_pair(F_all(Signature(), us, spin, L), Gc_all(zeros, vs, spin, L)); }, rhs, ratio,
      L0, tol, max_cap);
}

// Σ_κ G^c_{κ/λ}(v) F_{κ/ν}(u) against ∏(1-qu_iv_j)/(1-u_iv_j) Σ_μ F_{λ/μ}(u) G^c_{ν/μ}(v).
inline CauchyReport verify_skew_cauchy(const Signature& lambda, const Signature& nu, const std::vector<cplx>& us,
                                       const std::vector<cplx>& vs, const SpinParams& spin, double tol = 1e-10,
                                       int max_cap = 400) {
  detail::require_admissible(us, vs, spin);
  if (lambda.size() != nu.size() + us.size()) {
    throw DomainError("length-mismatch", "skew Cauchy needs N(lambda) = N(nu) + number of u variables");
  }
  const double q = spin.q;
  double ratio = 0.0;
  cplx factor = 1.0;
  for (const auto& u : us) {
    for (const auto& v : vs) {
      factor *= (1.0 - q * u * v) / (1.0 - u * v);
      ratio = std::max(ratio, admissibility_ratio(u, v, spin));
    }
  }
  // Finite right side: μ of length N(ν) below both λ and ν.
  cplx rhs_sum = 0.0;
  const int top = std::min(lambda.largest(), nu.largest());
  std::vector<int> parts(nu.size());
  auto rec = [&](auto&& self, std::size_t i, int hi) -> void {
    if (i == parts.size()) {
      const Signature mu(parts);
      rhs_sum += F_eval(lambda, mu, us, spin) * Gc_eval(nu, mu, vs, spin);
      return;
    }
    for (int x = 0; x <= hi; ++x) {
      parts[i] = x;
      self(self, i + 1, x);
    }
  };
  if (parts.empty()) rhs_sum = F_eval(lambda, Signature(), us, spin);
  else rec(rec, 0, top);
  const int L0 = std::max(lambda.largest(), nu.largest()) +
                 std::max(8, static_cast<int>(std::ceil(std::log(tol / 100.0) / std::log(std::max(ratio, 1e-3)))));
  return detail::truncated_pairing(
      [&](int L) { return std::make_pair(Gc_all(lambda, vs, spin, L), F_all(nu, us, spin, L)); }, factor * rhs_sum,
      ratio, L0, tol, max_cap);
}

}  // namespace sixv
